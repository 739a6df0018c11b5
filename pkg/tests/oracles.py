"""Independent reference constructions used only by the test-suite.

Nothing here imports the package's matrix machinery: operators are built from
explicit Kronecker products of 2x2 and truncated bosonic matrices.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

I2 = np.eye(2)
Z2 = np.diag([1.0, -1.0])
LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1|, fermionic annihilator on one mode


def kron_all(mats):
    return reduce(np.kron, mats, np.eye(1))


def boson_lowering(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), k=1)


def ladder_matrix(kind: str, mode: int, dagger: bool, n_f: int, n_a: int, dim_b: int) -> np.ndarray:
    """Ladder operator on ``n_f`` JW fermions followed by ``n_a`` bosons of dimension ``dim_b``."""
    if kind == "b":
        mats = [Z2] * mode + [LOWER] + [I2] * (n_f - mode - 1) + [np.eye(dim_b)] * n_a
    else:
        mats = [I2] * n_f + [np.eye(dim_b)] * mode + [boson_lowering(dim_b)] + [np.eye(dim_b)] * (n_a - mode - 1)
    m = kron_all(mats)
    return m.T.conj() if dagger else m


def product_oracle(factors, n_f: int, n_a: int, omega: int) -> np.ndarray:
    """Matrix of a product of ``(kind, mode, dagger)`` factors, compressed onto the cutoff.

    The product is formed in a cutoff enlarged by the number of factors, so no
    truncation artifact appears before the final projection.
    """
    big = omega + len(factors) + 1
    m = np.eye(2**n_f * big**n_a, dtype=complex)
    for kind, mode, dagger in factors:
        m = m @ ladder_matrix(kind, mode, dagger, n_f, n_a, big)
    keep = [np.ones(2, bool)] * n_f + [np.arange(big) <= omega] * n_a
    mask = reduce(np.kron, [k.astype(float) for k in keep], np.ones(1)).astype(bool)
    return m[np.ix_(mask, mask)]


def mcx_matrix(n_controls: int, polarities=None) -> np.ndarray:
    """Multi-controlled X on qubits (c_0..c_{n-1}, target), qubit 0 most significant."""
    pol = polarities or [1] * n_controls
    dim = 2 ** (n_controls + 1)
    u = np.zeros((dim, dim))
    for col in range(dim):
        bits = [(col >> (n_controls - k)) & 1 for k in range(n_controls + 1)]
        if all(bits[k] == pol[k] for k in range(n_controls)):
            bits[-1] ^= 1
        row = sum(bit << (n_controls - k) for k, bit in enumerate(bits))
        u[row, col] = 1
    return u


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


PAULI = {
    "I": I2.astype(complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": Z2.astype(complex),
}


def pauli_trace_coefficients(mat: np.ndarray) -> dict[str, complex]:
    """Pauli-basis coefficients via Hilbert-Schmidt projection; letters[0] acts on the top kron factor."""
    import itertools

    n = int(round(np.log2(mat.shape[0])))
    out = {}
    for letters in itertools.product("IXYZ", repeat=n):
        p = kron_all([PAULI[x] for x in letters])
        c = np.trace(p.conj().T @ mat) / 2**n
        if abs(c) > 1e-12:
            out["".join(letters)] = c
    return out
