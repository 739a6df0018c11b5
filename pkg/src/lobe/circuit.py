"""Gate-level circuit IR, clean-ancilla allocation, statevector simulation and resource counting.

Qubits are numbered by register in a fixed order: control, index,
block-encoding ancillae, clean ancillae, system.  Qubit 0 is the most
significant bit of a basis-state index, so the all-ancillae-zero subspace of
an uncontrolled circuit is the leading block of its unitary.

Circuits are assembled with :class:`CircuitBuilder`, which hands out symbolic
qubits and only fixes physical positions at :meth:`CircuitBuilder.finalize`,
once the clean-ancilla high-water mark is known.
"""

from __future__ import annotations

import enum
import json
import math
import os
import re
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

DEFAULT_QUBIT_CAP = 24
UNITARY_QUBIT_CAP = 14
_BATCH_ELEMENTS = 2**22


class GateKind(enum.Enum):
    X = "X"
    Y = "Y"
    Z = "Z"
    H = "H"
    S = "S"
    SDG = "Sdg"
    CZ = "CZ"
    RY = "Ry"
    TOFFOLI = "Toffoli"
    LEFT_ELBOW = "LeftElbow"
    RIGHT_ELBOW = "RightElbow"
    CC_CZ = "ClassicallyControlledCZ"


_ONE_TARGET = {GateKind.X, GateKind.Y, GateKind.Z, GateKind.H, GateKind.S, GateKind.SDG, GateKind.RY}
_PAULI_CONTROLLABLE = {GateKind.X, GateKind.Y, GateKind.Z}
_TWO_CONTROLS = {GateKind.TOFFOLI, GateKind.LEFT_ELBOW, GateKind.RIGHT_ELBOW, GateKind.CC_CZ}

Control = tuple[int, int]


@dataclass(frozen=True)
class Gate:
    """One gate; ``controls`` are ``(qubit, polarity)`` pairs (polarity 0 means open control).

    ``ClassicallyControlledCZ`` measures its target in the X basis and, on
    outcome 1, applies a phase of -1 to the branch where both controls match;
    the measured qubit is left in ``|0>``.  It is the measurement-based
    uncompute of an elbow.
    """

    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[Control, ...] = ()
    angle: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple((int(q), int(p)) for q, p in self.controls))
        k = self.kind
        if k in _ONE_TARGET or k in _TWO_CONTROLS:
            if len(self.targets) != 1:
                raise ValueError(f"{k.value} takes exactly one target")
        elif k is GateKind.CZ:
            if len(self.targets) != 2 or self.targets[0] == self.targets[1]:
                raise ValueError("CZ takes two distinct targets")
        if k in _TWO_CONTROLS and len(self.controls) != 2:
            raise ValueError(f"{k.value} takes exactly two controls")
        if k in _PAULI_CONTROLLABLE and len(self.controls) > 1:
            raise ValueError(f"{k.value} takes at most one control; use Toffoli or elbows")
        if k in (GateKind.H, GateKind.S, GateKind.SDG, GateKind.RY, GateKind.CZ) and self.controls:
            raise ValueError(f"{k.value} cannot be controlled")
        ctrl_qubits = [q for q, _ in self.controls]
        if len(set(ctrl_qubits)) != len(ctrl_qubits) or set(ctrl_qubits) & set(self.targets):
            raise ValueError("controls and targets must be distinct qubits")
        if any(p not in (0, 1) for _, p in self.controls):
            raise ValueError("control polarity must be 0 or 1")
        if not math.isfinite(self.angle):
            raise ValueError("rotation angle must be finite")

    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    def inverse(self) -> "Gate":
        if self.kind is GateKind.RY:
            return replace(self, angle=-self.angle)
        if self.kind is GateKind.S:
            return replace(self, kind=GateKind.SDG)
        if self.kind is GateKind.SDG:
            return replace(self, kind=GateKind.S)
        if self.kind is GateKind.LEFT_ELBOW:
            return replace(self, kind=GateKind.RIGHT_ELBOW)
        if self.kind is GateKind.RIGHT_ELBOW:
            return replace(self, kind=GateKind.LEFT_ELBOW)
        if self.kind is GateKind.CC_CZ:
            raise ValueError("a measurement cannot be inverted")
        return self

    def to_text(self) -> str:
        targets = ",".join(str(t) for t in self.targets)
        ctrl = ",".join(f"({q},{p})" for q, p in self.controls)
        line = f"GATE {self.kind.value} targets=[{targets}] ctrl=[{ctrl}]"
        if self.kind is GateKind.RY:
            line += f" angle={self.angle!r}"
        return line


@dataclass(frozen=True)
class RegisterLayout:
    """Register sizes; the system register may carry a Fock-mode description.

    When ``n_fermionic_modes``/``n_bosonic_modes`` are set the system register
    holds one qubit per fermionic mode (ascending) followed by one
    ``boson_width``-qubit register per bosonic mode, least-significant bit first.
    """

    n_ctrl: int = 0
    n_index: int = 0
    n_be: int = 0
    n_clean: int = 0
    n_system: int = 0
    n_fermionic_modes: int | None = None
    n_bosonic_modes: int = 0
    boson_width: int = 0

    def __post_init__(self) -> None:
        if self.n_ctrl not in (0, 1):
            raise ValueError("n_ctrl must be 0 or 1")
        if min(self.n_index, self.n_be, self.n_clean, self.n_system) < 0:
            raise ValueError("register sizes must be non-negative")
        if self.n_fermionic_modes is not None:
            if self.n_fermionic_modes + self.n_bosonic_modes * self.boson_width != self.n_system:
                raise ValueError("mode description does not match the system register size")

    @property
    def total(self) -> int:
        return self.n_ctrl + self.n_index + self.n_be + self.n_clean + self.n_system

    def _range(self, start: int, size: int) -> range:
        return range(start, start + size)

    @property
    def ctrl_range(self) -> range:
        return self._range(0, self.n_ctrl)

    @property
    def index_range(self) -> range:
        return self._range(self.n_ctrl, self.n_index)

    @property
    def be_range(self) -> range:
        return self._range(self.n_ctrl + self.n_index, self.n_be)

    @property
    def clean_range(self) -> range:
        return self._range(self.n_ctrl + self.n_index + self.n_be, self.n_clean)

    @property
    def system_range(self) -> range:
        return self._range(self.total - self.n_system, self.n_system)

    def fermion_qubit(self, mode: int) -> int:
        return self.system_range[mode]

    def boson_qubits(self, mode: int) -> list[int]:
        """Physical qubits of bosonic register ``mode``, least-significant bit first."""
        assert self.n_fermionic_modes is not None
        start = self.n_fermionic_modes + mode * self.boson_width
        return [self.system_range[start + w] for w in range(self.boson_width)]


@dataclass(frozen=True)
class Circuit:
    layout: RegisterLayout
    gates: tuple[Gate, ...]
    phase: int = 0  # global phase i**phase

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "phase", self.phase % 4)
        n = self.layout.total
        for g in self.gates:
            if any(q < 0 or q >= n for q in g.qubits()):
                raise ValueError(f"gate {g.to_text()} references a qubit outside the layout ({n} qubits)")

    @property
    def n_qubits(self) -> int:
        return self.layout.total

    def inverse(self) -> "Circuit":
        return Circuit(self.layout, tuple(g.inverse() for g in reversed(self.gates)), -self.phase)

    def to_text(self) -> str:
        lay = self.layout
        head = (
            f"LAYOUT ctrl={lay.n_ctrl} index={lay.n_index} be={lay.n_be} clean={lay.n_clean} "
            f"system={lay.n_system}"
        )
        lines = [head]
        if self.phase:
            lines.append(f"PHASE {self.phase}")
        lines.extend(g.to_text() for g in self.gates)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        layout = RegisterLayout()
        phase = 0
        gates = []
        gate_re = re.compile(r"GATE (\w+) targets=\[([\d,]*)\] ctrl=\[([\d,()]*)\](?: angle=(\S+))?")
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("LAYOUT"):
                vals = dict(kv.split("=") for kv in line.split()[1:])
                layout = RegisterLayout(
                    int(vals["ctrl"]), int(vals["index"]), int(vals["be"]), int(vals["clean"]), int(vals["system"])
                )
            elif line.startswith("PHASE"):
                phase = int(line.split()[1])
            else:
                m = gate_re.fullmatch(line)
                if m is None:
                    raise ValueError(f"cannot parse gate line {line!r}")
                targets = tuple(int(t) for t in m.group(2).split(",") if t)
                ctrls = tuple((int(q), int(p)) for q, p in re.findall(r"\((\d+),(\d+)\)", m.group(3)))
                angle = float(m.group(4)) if m.group(4) else 0.0
                gates.append(Gate(GateKind(m.group(1)), targets, ctrls, angle))
        return cls(layout, tuple(gates), phase)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

Qubit = tuple[str, int]


class AllocationError(RuntimeError):
    pass


class CleanAllocator:
    """LIFO pool of clean-ancilla slots that records its high-water mark."""

    def __init__(self) -> None:
        self._free: list[int] = []
        self._live: set[int] = set()
        self._created = 0
        self.peak = 0

    def alloc(self, n: int = 1) -> list[int]:
        out = []
        for _ in range(n):
            if self._free:
                slot = self._free.pop()
            else:
                slot = self._created
                self._created += 1
            self._live.add(slot)
            out.append(slot)
        self.peak = max(self.peak, len(self._live))
        return out

    def free(self, slots: Iterable[int]) -> None:
        # freed in reverse so that the next allocation reuses the most recent slot
        for slot in reversed(list(slots)):
            if slot not in self._live:
                raise AllocationError(f"clean ancilla {slot} freed twice or never allocated")
            self._live.remove(slot)
            self._free.append(slot)

    @property
    def in_use(self) -> int:
        return len(self._live)

    def check_released(self) -> None:
        if self._live:
            raise AllocationError(f"clean ancillae {sorted(self._live)} were never freed")


class CircuitBuilder:
    """Accumulates gates on symbolic qubits ``(register, k)``."""

    def __init__(
        self,
        n_system: int,
        controlled: bool = True,
        *,
        n_fermionic_modes: int | None = None,
        n_bosonic_modes: int = 0,
        boson_width: int = 0,
    ):
        self.n_system = n_system
        self.controlled = controlled
        self.n_index = 0
        self.n_be = 0
        self.mode_info = (n_fermionic_modes, n_bosonic_modes, boson_width)
        self.allocator = CleanAllocator()
        self.gates: list[tuple[GateKind, tuple[Qubit, ...], tuple[tuple[Qubit, int], ...], float]] = []
        self.phase = 0

    @property
    def ctrl(self) -> Qubit | None:
        return ("ctrl", 0) if self.controlled else None

    def ctrl_controls(self) -> list[tuple[Qubit, int]]:
        return [(("ctrl", 0), 1)] if self.controlled else []

    def sys(self, k: int) -> Qubit:
        if not 0 <= k < self.n_system:
            raise IndexError(k)
        return ("sys", k)

    def add_index(self, n: int) -> list[Qubit]:
        out = [("index", self.n_index + k) for k in range(n)]
        self.n_index += n
        return out

    def add_be(self, n: int) -> list[Qubit]:
        out = [("be", self.n_be + k) for k in range(n)]
        self.n_be += n
        return out

    def alloc_clean(self, n: int = 1) -> list[Qubit]:
        return [("clean", s) for s in self.allocator.alloc(n)]

    def free_clean(self, qubits: Sequence[Qubit]) -> None:
        self.allocator.free(q[1] for q in qubits)

    # -- gate emission ------------------------------------------------------
    def gate(self, kind: GateKind, targets, controls=(), angle: float = 0.0) -> None:
        targets = tuple(targets)
        controls = tuple((q, int(p)) for q, p in controls)
        self.gates.append((kind, targets, controls, float(angle)))

    def x(self, t: Qubit, control: tuple[Qubit, int] | None = None) -> None:
        self.gate(GateKind.X, (t,), (control,) if control else ())

    def y(self, t: Qubit, control: tuple[Qubit, int] | None = None) -> None:
        self.gate(GateKind.Y, (t,), (control,) if control else ())

    def z(self, t: Qubit, control: tuple[Qubit, int] | None = None) -> None:
        self.gate(GateKind.Z, (t,), (control,) if control else ())

    def h(self, t: Qubit) -> None:
        self.gate(GateKind.H, (t,))

    def s(self, t: Qubit, dagger: bool = False) -> None:
        self.gate(GateKind.SDG if dagger else GateKind.S, (t,))

    def cz(self, q1: Qubit, q2: Qubit) -> None:
        self.gate(GateKind.CZ, (q1, q2))

    def ry(self, t: Qubit, angle: float) -> None:
        self.gate(GateKind.RY, (t,), (), angle)

    def toffoli(self, c1: tuple[Qubit, int], c2: tuple[Qubit, int], t: Qubit) -> None:
        self.gate(GateKind.TOFFOLI, (t,), (c1, c2))

    def left_elbow(self, c1: tuple[Qubit, int], c2: tuple[Qubit, int], t: Qubit) -> None:
        self.gate(GateKind.LEFT_ELBOW, (t,), (c1, c2))

    def right_elbow(self, c1: tuple[Qubit, int], c2: tuple[Qubit, int], t: Qubit) -> None:
        self.gate(GateKind.RIGHT_ELBOW, (t,), (c1, c2))

    def global_phase(self, k: int) -> None:
        self.phase = (self.phase + k) % 4

    def phase_on(self, literal: tuple[Qubit, int] | None, k: int) -> None:
        """Multiply the branch where ``literal`` holds by ``i**k`` (global phase when ``None``)."""
        k %= 4
        if k == 0:
            return
        if literal is None:
            self.global_phase(k)
            return
        q, pol = literal
        if pol == 0:
            self.x(q)
        if k == 2:
            self.z(q)
        else:
            self.s(q, dagger=(k == 3))
        if pol == 0:
            self.x(q)

    def append_circuit(self, circuit: Circuit, mapping: dict[int, Qubit], *, with_phase_on: tuple[Qubit, int] | None = None) -> None:
        """Re-emit ``circuit`` with physical qubit ``q`` sent to ``mapping[q]``.

        Qubits of the child's clean register that are missing from ``mapping``
        are allocated from this builder's pool for the duration of the child.
        The child's global phase is applied on ``with_phase_on`` (or globally).
        """
        lay = circuit.layout
        temp: list[Qubit] = []
        mapping = dict(mapping)
        missing = [q for q in lay.clean_range if q not in mapping]
        if missing:
            temp = self.alloc_clean(len(missing))
            mapping.update(zip(missing, temp))
        for g in circuit.gates:
            self.gate(
                g.kind,
                tuple(mapping[t] for t in g.targets),
                tuple((mapping[q], p) for q, p in g.controls),
                g.angle,
            )
        if temp:
            self.free_clean(temp)
        self.phase_on(with_phase_on, circuit.phase)

    def finalize(self) -> Circuit:
        self.allocator.check_released()
        nf, nb, width = self.mode_info
        layout = RegisterLayout(
            n_ctrl=1 if self.controlled else 0,
            n_index=self.n_index,
            n_be=self.n_be,
            n_clean=self.allocator.peak,
            n_system=self.n_system,
            n_fermionic_modes=nf,
            n_bosonic_modes=nb,
            boson_width=width,
        )
        offsets = {
            "ctrl": 0,
            "index": layout.index_range.start,
            "be": layout.be_range.start,
            "clean": layout.clean_range.start,
            "sys": layout.system_range.start,
        }

        def phys(q: Qubit) -> int:
            return offsets[q[0]] + q[1]

        gates = tuple(
            Gate(kind, tuple(phys(t) for t in targets), tuple((phys(q), p) for q, p in controls), angle)
            for kind, targets, controls, angle in self.gates
        )
        return Circuit(layout, gates, self.phase)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


class QubitCapError(ValueError):
    pass


def qubit_cap() -> int:
    return int(os.environ.get("LOBE_SIM_QUBIT_CAP", DEFAULT_QUBIT_CAP))


_INV_SQRT2 = 1 / math.sqrt(2)


def _index(ndim: int, fixed: Iterable[tuple[int, int]]) -> tuple:
    idx: list = [slice(None)] * ndim
    for q, v in fixed:
        idx[q] = v
    return tuple(idx)


def _apply_gate(psi: np.ndarray, g: Gate, elbow_mode: str) -> None:
    nd = psi.ndim
    k = g.kind
    if k is GateKind.CZ:
        psi[_index(nd, [(g.targets[0], 1), (g.targets[1], 1)])] *= -1
        return
    t = g.targets[0]
    ctrl = list(g.controls)
    if k is GateKind.CC_CZ or (k is GateKind.RIGHT_ELBOW and elbow_mode == "measured"):
        i0 = _index(nd, [(t, 0)])
        i1 = _index(nd, [(t, 1)])
        a0 = psi[i0].copy()
        a1 = psi[i1].copy()
        plus = (a0 + a1) * _INV_SQRT2
        minus = (a0 - a1) * _INV_SQRT2
        # X-basis outcome 1 branch, corrected by the phase on the matching controls
        shifted = [(q if q < t else q - 1, p) for q, p in ctrl]
        minus[_index(nd - 1, shifted)] *= -1
        psi[i0] = (plus + minus) * _INV_SQRT2
        psi[i1] = 0
        return
    i0 = _index(nd, ctrl + [(t, 0)])
    i1 = _index(nd, ctrl + [(t, 1)])
    if k in (GateKind.X, GateKind.TOFFOLI, GateKind.LEFT_ELBOW, GateKind.RIGHT_ELBOW):
        tmp = psi[i0].copy()
        psi[i0] = psi[i1]
        psi[i1] = tmp
    elif k is GateKind.Z:
        psi[i1] *= -1
    elif k is GateKind.S:
        psi[i1] *= 1j
    elif k is GateKind.SDG:
        psi[i1] *= -1j
    elif k is GateKind.Y:
        tmp = psi[i0].copy()
        psi[i0] = -1j * psi[i1]
        psi[i1] = 1j * tmp
    elif k is GateKind.H:
        a0 = psi[i0].copy()
        a1 = psi[i1].copy()
        psi[i0] = (a0 + a1) * _INV_SQRT2
        psi[i1] = (a0 - a1) * _INV_SQRT2
    elif k is GateKind.RY:
        c, s = math.cos(g.angle / 2), math.sin(g.angle / 2)
        a0 = psi[i0].copy()
        a1 = psi[i1].copy()
        psi[i0] = c * a0 - s * a1
        psi[i1] = s * a0 + c * a1
    else:  # pragma: no cover - exhaustive above
        raise ValueError(k)


def _check_elbow_mode(elbow_mode: str) -> None:
    if elbow_mode not in ("unitary", "measured"):
        raise ValueError(f"unknown elbow mode {elbow_mode!r}")


def simulate_batch(
    circuit: Circuit,
    inputs: Sequence[int] | np.ndarray,
    elbow_mode: str = "unitary",
    *,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Evolve several basis inputs at once; returns a ``(2**n, len(inputs))`` array.

    If ``initial`` is given it is used as the column block of input states
    instead of basis vectors.
    """
    _check_elbow_mode(elbow_mode)
    n = circuit.n_qubits
    if n > qubit_cap():
        raise QubitCapError(f"{n} qubits exceed the simulation cap {qubit_cap()}")
    dim = 2**n
    if initial is None:
        inputs = np.asarray(inputs, dtype=np.int64)
        batch = len(inputs)
        state = np.zeros((dim, batch), dtype=complex)
        state[inputs, np.arange(batch)] = 1.0
    else:
        state = np.array(initial, dtype=complex).reshape(dim, -1)
        batch = state.shape[1]
    psi = state.reshape([2] * n + [batch])
    for g in circuit.gates:
        _apply_gate(psi, g, elbow_mode)
    out = psi.reshape(dim, batch)
    if circuit.phase:
        out *= 1j**circuit.phase
    return out


def simulate(circuit: Circuit, input_index: int = 0, elbow_mode: str = "unitary") -> np.ndarray:
    """Exact statevector for a single basis input."""
    return simulate_batch(circuit, [input_index], elbow_mode)[:, 0]


def simulate_columns(
    circuit: Circuit, inputs: Sequence[int], elbow_mode: str = "unitary"
) -> np.ndarray:
    """Like :func:`simulate_batch` but chunked to bound memory."""
    n = circuit.n_qubits
    chunk = max(1, _BATCH_ELEMENTS // 2**n)
    inputs = list(inputs)
    parts = [simulate_batch(circuit, inputs[i : i + chunk], elbow_mode) for i in range(0, len(inputs), chunk)]
    if not parts:
        return np.zeros((2**n, 0), dtype=complex)
    return np.concatenate(parts, axis=1)


def unitary(circuit: Circuit, elbow_mode: str = "unitary") -> np.ndarray:
    """Full matrix of the circuit; column ``k`` is ``simulate(circuit, k)``."""
    if elbow_mode != "unitary":
        raise ValueError("measured-mode elbows are not unitary; extract blocks instead")
    if circuit.n_qubits > UNITARY_QUBIT_CAP:
        raise QubitCapError(f"{circuit.n_qubits} qubits exceed the unitary cap {UNITARY_QUBIT_CAP}")
    return simulate_columns(circuit, range(2**circuit.n_qubits))


# ---------------------------------------------------------------------------
# Resources
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResourceReport:
    t_count: int
    rotation_count: int
    clifford_count: int
    be_ancillae: int
    clean_ancillae_peak: int
    total_qubits: int
    lambda_: float = field(default=0.0, metadata={"json": "lambda"})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @property
    def lam(self) -> float:
        return self.lambda_


def is_clifford_angle(angle: float, tol: float = 1e-12) -> bool:
    ratio = angle / (math.pi / 2)
    return abs(ratio - round(ratio)) <= tol


def resources(circuit: Circuit, elbow_mode: str = "measured", lam: float = 0.0) -> ResourceReport:
    """Count T gates, non-Clifford rotations and Clifford gates.

    Toffoli and left elbow cost 4 T; a right elbow costs 4 T in ``unitary``
    mode and none in ``measured`` mode, where it is a measurement followed by
    a classically controlled CZ.  Ry at a multiple of pi/2 is Clifford.
    """
    _check_elbow_mode(elbow_mode)
    t = rot = cliff = 0
    for g in circuit.gates:
        k = g.kind
        if k in (GateKind.TOFFOLI, GateKind.LEFT_ELBOW):
            t += 4
        elif k is GateKind.RIGHT_ELBOW:
            if elbow_mode == "unitary":
                t += 4
            else:
                cliff += 1
        elif k is GateKind.RY:
            if is_clifford_angle(g.angle):
                cliff += 1
            else:
                rot += 1
        else:
            cliff += 1
    lay = circuit.layout
    return ResourceReport(t, rot, cliff, lay.n_index + lay.n_be, lay.n_clean, lay.total, float(lam))


# ---------------------------------------------------------------------------
# Control stripping
# ---------------------------------------------------------------------------


def strip_control(circuit: Circuit) -> Circuit:
    """Fix the control qubit to ``|1>`` and remove it.

    Gates conditioned on the control being 0 disappear, elbows and Toffolis
    with the control as one input become CNOTs, and phase gates acting on the
    control turn into phases on their remaining controls (or a global phase).
    """
    lay = circuit.layout
    if lay.n_ctrl == 0:
        return circuit
    phase = circuit.phase
    out: list[Gate] = []

    def shift(q: int) -> int:
        return q - 1

    for g in circuit.gates:
        ctrl_pol = [p for q, p in g.controls if q == 0]
        others = tuple((shift(q), p) for q, p in g.controls if q != 0)
        if ctrl_pol and ctrl_pol[0] == 0:
            continue
        if 0 in g.targets:
            if g.kind is GateKind.CZ:
                other = shift(g.targets[1] if g.targets[0] == 0 else g.targets[0])
                out.append(Gate(GateKind.Z, (other,)))
                continue
            k = {GateKind.Z: 2, GateKind.S: 1, GateKind.SDG: 3}.get(g.kind)
            if k is None:
                raise ValueError(f"cannot strip control from {g.to_text()}")
            if not others:
                phase += k
            else:
                (q, pol), = others
                if pol == 0:
                    out.append(Gate(GateKind.X, (q,)))
                out.append(Gate({2: GateKind.Z, 1: GateKind.S, 3: GateKind.SDG}[k], (q,)))
                if pol == 0:
                    out.append(Gate(GateKind.X, (q,)))
            continue
        targets = tuple(shift(t) for t in g.targets)
        kind = g.kind
        if kind in (GateKind.TOFFOLI, GateKind.LEFT_ELBOW, GateKind.RIGHT_ELBOW) and ctrl_pol:
            kind = GateKind.X
        elif kind is GateKind.CC_CZ and ctrl_pol:
            # remaining phase: measurement-based uncompute of a copy
            (q, pol), = others
            out.append(Gate(GateKind.X, targets, ((q, pol),)))
            continue
        out.append(Gate(kind, targets, others, g.angle))
    new_layout = replace(lay, n_ctrl=0)
    return Circuit(new_layout, tuple(out), phase)
