"""Small utilities shared by several test modules."""

from __future__ import annotations

import numpy as np

from lobe.circuit import Circuit, GateKind, simulate_columns


def run_classical(circuit: Circuit, bits: list[int]) -> list[int]:
    """Evaluate a circuit made only of X-type gates on a classical bit list.

    Elbow preconditions are asserted: a left elbow must target a zero bit and
    a right elbow must find its target equal to the AND of its controls.
    """
    bits = list(bits)
    for g in circuit.gates:
        fire = all(bits[q] == p for q, p in g.controls)
        t = g.targets[0]
        if g.kind is GateKind.LEFT_ELBOW:
            assert bits[t] == 0, "left elbow on a dirty target"
        elif g.kind is GateKind.RIGHT_ELBOW:
            assert bits[t] == int(fire), "right elbow target does not hold the AND"
        elif g.kind not in (GateKind.X, GateKind.TOFFOLI):
            raise AssertionError(f"non-classical gate {g.kind}")
        if fire:
            bits[t] ^= 1
    return bits


def to_bits(value: int, n: int) -> list[int]:
    """Qubit 0 is the most significant bit."""
    return [(value >> (n - 1 - q)) & 1 for q in range(n)]


def from_bits(bits: list[int]) -> int:
    out = 0
    for bit in bits:
        out = (out << 1) | bit
    return out


def zero_subspace(n: int, zero_qubits) -> list[int]:
    zero_qubits = list(zero_qubits)
    return [k for k in range(2**n) if all(not (k >> (n - 1 - q)) & 1 for q in zero_qubits)]


def clean_block(circuit: Circuit, elbow_mode: str = "unitary") -> tuple[np.ndarray, float]:
    """Restriction of the circuit to clean ancillae |0> on input and output, plus the leaked norm."""
    n = circuit.n_qubits
    keep = zero_subspace(n, circuit.layout.clean_range)
    out = simulate_columns(circuit, keep, elbow_mode)
    mask = np.zeros(2**n, bool)
    mask[keep] = True
    leak = float(np.abs(out[~mask]).max()) if (~mask).any() else 0.0
    return out[keep], leak


def little_endian_index(s: int, n: int) -> int:
    """Register value of a system basis index whose qubit k carries bit k."""
    return sum(((s >> (n - 1 - k)) & 1) << k for k in range(n))


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    """Print and remember one acceptance verdict line."""
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} | {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
