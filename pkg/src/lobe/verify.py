"""Block extraction and certification of block-encodings against the Fock-space oracle."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .circuit import UNITARY_QUBIT_CAP, QubitCapError, simulate_batch, simulate_columns, unitary
from .fock_algebra import ModeSpec, OperatorExpr, system_embedding, to_matrix
from .pauli import BlockEncoding

DEFAULT_TOL = 1e-10
SAMPLED_QUBIT_CAP = 18
FULL_UNITARITY_CAP = 10


def _column_base(be: BlockEncoding) -> int:
    lay = be.layout
    return (1 << (lay.total - 1)) if lay.n_ctrl else 0


def _run_columns(be: BlockEncoding, columns: Sequence[int], elbow_mode: str) -> tuple[np.ndarray, int]:
    """Full output states for the given system inputs (control on, ancillae zero)."""
    base = _column_base(be)
    out = simulate_columns(be.circuit, [base | int(s) for s in columns], elbow_mode)
    return out, base


def extract_block(
    be: BlockEncoding, elbow_mode: str = "unitary", columns: Sequence[int] | None = None
) -> np.ndarray:
    """Encoded block restricted to the system register.

    Rows and columns are system basis indices with the control on (if the
    encoding has one) and every index, block-encoding and clean ancilla in
    ``|0>``.  With ``columns`` only those system inputs are simulated (row
    sampling); otherwise the whole block is built, which requires at most
    14 qubits.
    """
    lay = be.layout
    if columns is None:
        if lay.total > UNITARY_QUBIT_CAP:
            raise QubitCapError(f"{lay.total} qubits: full extraction is capped at {UNITARY_QUBIT_CAP}; pass columns")
        columns = range(2**lay.n_system)
    elif lay.total > SAMPLED_QUBIT_CAP:
        raise QubitCapError(f"{lay.total} qubits exceed the sampled extraction cap {SAMPLED_QUBIT_CAP}")
    out, base = _run_columns(be, columns, elbow_mode)
    return out[base : base + 2**lay.n_system]


def _clean_leakage(be: BlockEncoding, out: np.ndarray) -> float:
    lay = be.layout
    if not lay.n_clean:
        return 0.0
    n = lay.total
    idx = np.arange(2**n)
    mask = np.zeros(2**n, dtype=bool)
    for q in lay.clean_range:
        mask |= ((idx >> (n - 1 - q)) & 1).astype(bool)
    return float(np.abs(out[mask]).max()) if mask.any() else 0.0


@dataclass(frozen=True)
class VerificationReport:
    max_abs_error: float
    unitarity_error: float
    clean_ancilla_leakage: float
    lambda_used: float
    spectral_norm: float
    tolerance: float
    lambda_ok: bool
    sampled_columns: int
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def embedded_oracle(expr: OperatorExpr, modes: ModeSpec, omega: int) -> tuple[np.ndarray, np.ndarray]:
    """Oracle matrix and the system index of each Fock basis state."""
    return to_matrix(expr, modes, omega), system_embedding(modes, omega)


def verify_encoding(
    be: BlockEncoding,
    expr: OperatorExpr,
    modes: ModeSpec,
    omega: int,
    tol: float = DEFAULT_TOL,
    *,
    elbow_mode: str = "unitary",
    sample: int | None = None,
    seed: int = 0,
) -> VerificationReport:
    """Compare the encoded block with ``oracle / lambda`` on every valid Fock state.

    Above 14 qubits a random subset of ``sample`` (default 48) Fock columns is
    simulated instead of the full block.
    """
    oracle, emb = embedded_oracle(expr, modes, omega)
    lay = be.layout
    if emb.size and int(emb.max()) >= 2**lay.n_system:
        raise ValueError("encoding's system register is smaller than the Fock space")
    fock_cols = np.arange(len(emb))
    if lay.total > UNITARY_QUBIT_CAP or sample is not None:
        rng = np.random.default_rng(seed)
        k = min(len(emb), sample or 48)
        fock_cols = np.sort(rng.choice(len(emb), size=k, replace=False))
    out, base = _run_columns(be, emb[fock_cols], elbow_mode)
    block = out[base : base + 2**lay.n_system]
    expect = np.zeros_like(block)
    expect[emb, :] = oracle[:, fock_cols] / be.lam
    err = float(np.abs(block - expect).max()) if block.size else 0.0
    leak = _clean_leakage(be, out)
    if lay.total <= FULL_UNITARITY_CAP and elbow_mode == "unitary":
        u = unitary(be.circuit)
        unit_err = float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())
    else:
        # Orthonormality of the simulated columns: cheap and still catches non-isometric circuits.
        gram = out.conj().T @ out
        unit_err = float(np.abs(gram - np.eye(gram.shape[0])).max()) if elbow_mode == "unitary" else 0.0
    norm = float(np.linalg.norm(oracle, 2)) if oracle.size else 0.0
    lam_ok = be.lam >= norm - 1e-9
    return VerificationReport(
        max_abs_error=err,
        unitarity_error=unit_err,
        clean_ancilla_leakage=leak,
        lambda_used=float(be.lam),
        spectral_norm=norm,
        tolerance=tol,
        lambda_ok=bool(lam_ok),
        sampled_columns=int(len(fock_cols)),
        passed=bool(err <= tol and leak <= tol),
    )


def lambda_audit(coefficients: Sequence[complex]) -> dict:
    """Compare the LCU one-norm with the uniform-preparation bound ``L * max|a_l|``."""
    mags = np.abs(np.asarray(coefficients, dtype=complex))
    if mags.size == 0:
        raise ValueError("need at least one coefficient")
    asp = float(mags.sum())
    usp = float(len(mags) * mags.max())
    return {"asp": asp, "usp": usp, "ok": asp <= usp + 1e-12}


def eigen_check(be: BlockEncoding, expr: OperatorExpr, modes: ModeSpec, omega: int) -> float:
    """Largest deviation from ``k|v>|0> + sqrt(1-|k|^2)|perp>`` over eigenvectors of a Hermitian block.

    The orthogonal part is compared through its squared norm ``1 - k^2``:
    taking the square root amplifies eigenvalue rounding near ``|k| = 1``.
    """
    oracle, emb = embedded_oracle(expr, modes, omega)
    vals, vecs = np.linalg.eigh(oracle / be.lam)
    lay = be.layout
    dim = 2**lay.total
    base = _column_base(be)
    init = np.zeros((dim, len(vals)), dtype=complex)
    init[base + emb, :] = vecs
    out = simulate_batch(be.circuit, [], "unitary", initial=init)
    worst = 0.0
    for j, k in enumerate(vals):
        v = np.zeros(dim, dtype=complex)
        v[base + emb] = vecs[:, j]
        good = out[:, j] - k * v
        sel = np.zeros(dim, dtype=bool)
        sel[base : base + 2**lay.n_system] = True
        worst = max(worst, float(np.abs(good[sel]).max()))
        rest = float(np.vdot(good, good).real)
        worst = max(worst, abs(rest - (1 - k * k)))
    return worst
