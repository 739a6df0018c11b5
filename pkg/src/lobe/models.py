"""Benchmark Hamiltonians as :class:`~lobe.fock_algebra.OperatorExpr` values.

Momentum modes of the light-front models carry momenta ``k = 1..K`` and
live on mode index ``k - 1``.  A term is emitted when the momenta it
creates equal the momenta it annihilates and that total does not exceed the
resolution ``K`` (otherwise it annihilates every state of the sector).
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .fock_algebra import LadderOp, ModeSpec, OperatorExpr, Term, a, b, d, normalize

CoeffKey = tuple[int, ...]
COEFF_HEADER = ["i", "j", "k", "l", "re", "im"]


class CoefficientFileError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    g: float = 1.0
    C_f: float = 1.0
    C_b: float = 1.0
    m_f: float = 1.0
    m_b: float = 1.0
    omega: int = 3
    K: int = 2
    coefficients: Mapping[CoeffKey, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.omega < 1:
            raise ValueError("omega must be at least 1")
        if self.K < 1:
            raise ValueError("the resolution K must be at least 1")


def _expr(raw: Iterable[tuple[complex, tuple[LadderOp, ...], bool]]) -> OperatorExpr:
    return normalize(list(raw))


def quartic_oscillator(g: float, omega: int | None = None) -> OperatorExpr:
    """``a^dag a + g (a + a^dag)^4`` in normal order (``omega`` only documents the intended cutoff)."""
    up, dn = a(0, True), a(0)
    raw: list[tuple[complex, tuple[LadderOp, ...], bool]] = [(12 * g + 1, (up, dn), False)]
    if g:
        raw += [
            (6 * g, (up, up, dn, dn), False),
            (6 * g, (up, up), True),
            (4 * g, (up, up, up, dn), True),
            (g, (up, up, up, up), True),
            (3 * g, (), False),
        ]
    return _expr(raw)


def static_yukawa(C_f: float, C_b: float, g: float, omega: int | None = None) -> OperatorExpr:
    """``C_f b^dag b + C_b a^dag a + g b^dag b (a + a^dag)`` on one fermionic and one bosonic mode."""
    n_f = (b(0, True), b(0))
    return _expr(
        [
            (C_f, n_f, False),
            (C_b, (a(0, True), a(0)), False),
            (g, n_f + (a(0),), True),
        ]
    )


def _coeff(coeffs: Mapping[CoeffKey, complex], key: CoeffKey) -> complex:
    return complex(coeffs.get(key, 1.0))


def _momenta(K: int) -> range:
    return range(1, K + 1)


def phi4_terms(K: int, coeffs: Mapping[CoeffKey, complex] | None = None) -> OperatorExpr:
    """Free, three-to-one (plus h.c.) and two-to-two momentum-conserving bosonic terms."""
    coeffs = coeffs or {}
    ks = _momenta(K)
    raw: list[tuple[complex, tuple[LadderOp, ...], bool]] = []
    for i in ks:
        raw.append((_coeff(coeffs, (i,)), (a(i - 1, True), a(i - 1)), False))
    for i, j, k in itertools.combinations_with_replacement(ks, 3):
        l = i + j + k
        if l <= K:
            ops = (a(i - 1, True), a(j - 1, True), a(k - 1, True), a(l - 1))
            raw.append((_coeff(coeffs, (i, j, k, l)), ops, True))
    pairs = list(itertools.combinations_with_replacement(ks, 2))
    for (i, j), (k, l) in itertools.product(pairs, pairs):
        if i + j == k + l <= K:
            ops = (a(i - 1, True), a(j - 1, True), a(k - 1), a(l - 1))
            raw.append((_coeff(coeffs, (i, j, k, l)), ops, False))
    return _expr(raw)


def yukawa_terms(K: int, coeffs: Mapping[CoeffKey, complex] | None = None) -> OperatorExpr:
    """Light-front Yukawa terms: fermions ``b``, antifermions ``d`` and bosons ``a`` with momenta ``1..K``."""
    coeffs = coeffs or {}
    ks = list(_momenta(K))
    raw: list[tuple[complex, tuple[LadderOp, ...], bool]] = []
    for op in (b, d, a):
        for i in ks:
            raw.append((_coeff(coeffs, (i,)), (op(i - 1, True), op(i - 1)), False))
    for i, j, k in itertools.product(ks, repeat=3):
        if i + k == j:
            for f in (b, d):
                ops = (f(i - 1, True), f(j - 1), a(k - 1, True))
                raw.append((_coeff(coeffs, (i, j, k)), ops, True))
        if i + j == k:
            ops = (b(i - 1, True), d(j - 1, True), a(k - 1))
            raw.append((_coeff(coeffs, (i, j, k)), ops, True))
    for i, j, k, l in itertools.product(ks, repeat=4):
        if i + k == j + l <= K:
            for f in (b, d):
                ops = (f(i - 1, True), f(j - 1), a(k - 1, True), a(l - 1))
                raw.append((_coeff(coeffs, (i, j, k, l)), ops, False))
        if i + j == k + l <= K and k <= l:
            ops = (b(i - 1, True), d(j - 1, True), a(k - 1), a(l - 1))
            raw.append((_coeff(coeffs, (i, j, k, l)), ops, True))
    return _expr(raw)


def read_coefficients(path: str | Path) -> dict[CoeffKey, complex]:
    """Read ``i,j,k,l,re,im`` rows; unused trailing indices are left blank."""
    out: dict[CoeffKey, complex] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CoefficientFileError(f"{path}: empty coefficient file") from None
        if header != COEFF_HEADER:
            raise CoefficientFileError(f"{path}: header must be {','.join(COEFF_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not any(cell.strip() for cell in row):
                continue
            if len(row) != len(COEFF_HEADER):
                raise CoefficientFileError(f"{path}:{lineno}: expected {len(COEFF_HEADER)} fields")
            idx = [c.strip() for c in row[:4]]
            while idx and not idx[-1]:
                idx.pop()
            try:
                if not idx or any(not c for c in idx):
                    raise ValueError("indices must be a non-empty prefix of i,j,k,l")
                key = tuple(int(c) for c in idx)
                value = complex(float(row[4] or 0), float(row[5] or 0))
            except ValueError as exc:
                raise CoefficientFileError(f"{path}:{lineno}: {exc}") from None
            out[key] = value
    return out


@dataclass(frozen=True)
class Model:
    expr: OperatorExpr
    modes: ModeSpec
    omega: int


def _quartic(p: ModelParams) -> Model:
    return Model(quartic_oscillator(p.g, p.omega), ModeSpec(0, 0, 1), p.omega)


def _static(p: ModelParams) -> Model:
    return Model(static_yukawa(p.C_f, p.C_b, p.g, p.omega), ModeSpec(1, 0, 1), p.omega)


def _phi4(p: ModelParams) -> Model:
    return Model(phi4_terms(p.K, p.coefficients), ModeSpec(0, 0, p.K), p.omega)


def _yukawa(p: ModelParams) -> Model:
    return Model(yukawa_terms(p.K, p.coefficients), ModeSpec(p.K, p.K, p.K), p.omega)


MODELS: dict[str, Callable[[ModelParams], Model]] = {
    "quartic": _quartic,
    "static_yukawa": _static,
    "phi4": _phi4,
    "yukawa": _yukawa,
}


def build_model(name: str, params: ModelParams) -> Model:
    try:
        factory = MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {', '.join(MODELS)}") from None
    return factory(params)


def term_list(expr: OperatorExpr) -> list[Term]:
    return expr.terms()
