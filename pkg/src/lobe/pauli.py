"""Pauli-basis expansions of ladder operators and the LCU/LCO/product encoders built on them.

A :class:`PauliString` stores one letter per system qubit; ``letters[q]``
acts on system qubit ``q``.  The text form prints the highest qubit first, so
for a bosonic register the least-significant bit is the rightmost letter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .circuit import Circuit, CircuitBuilder, GateKind, Qubit, ResourceReport, resources, strip_control
from .fock_algebra import (
    COEFF_TOL,
    LadderOp,
    ModeSpec,
    OperatorExpr,
    Species,
    Term,
    boson_width,
    system_qubit_count,
    to_matrix,
)
from .primitives import compute_and, emit_grover_rudolph, uncompute_and

_LETTERS = "IXYZ"
_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# (a, b) -> (power of i, letter) with a.b = i**k letter
_PRODUCT: dict[tuple[str, str], tuple[int, str]] = {}
for _p in _LETTERS:
    _PRODUCT[("I", _p)] = (0, _p)
    _PRODUCT[(_p, "I")] = (0, _p)
    _PRODUCT[(_p, _p)] = (0, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PRODUCT[(_a, _b)] = (1, _c)
    _PRODUCT[(_b, _a)] = (3, _c)

# |out><in| on one qubit as a combination of Pauli letters
_OUTER = {
    (0, 0): {"I": 0.5, "Z": 0.5},
    (1, 1): {"I": 0.5, "Z": -0.5},
    (0, 1): {"X": 0.5, "Y": 0.5j},
    (1, 0): {"X": 0.5, "Y": -0.5j},
}


def phase_power(c: complex, tol: float = COEFF_TOL) -> tuple[float, int]:
    """Write ``c = magnitude * i**k``; raises if ``c`` is not on the real or imaginary axis."""
    if abs(c.imag) <= tol:
        return abs(c.real), 0 if c.real >= 0 else 2
    if abs(c.real) <= tol:
        return abs(c.imag), 1 if c.imag > 0 else 3
    raise ValueError(f"coefficient {c} is not a real multiple of a power of i")


def _fmt(x: float) -> str:
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


@dataclass(frozen=True)
class PauliString:
    coefficient: complex
    letters: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficient", complex(self.coefficient))
        object.__setattr__(self, "letters", tuple(self.letters))
        if any(ch not in _LETTERS for ch in self.letters):
            raise ValueError(f"bad Pauli letters {self.letters}")

    @classmethod
    def from_label(cls, coefficient: complex, label: str) -> "PauliString":
        """Build from a printed label (highest qubit first)."""
        return cls(coefficient, tuple(reversed(label)))

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def label(self) -> str:
        return "".join(reversed(self.letters))

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit count mismatch")
        k = 0
        out = []
        for x, y in zip(self.letters, other.letters):
            dk, z = _PRODUCT[(x, y)]
            k += dk
            out.append(z)
        return PauliString(self.coefficient * other.coefficient * 1j ** (k % 4), tuple(out))

    def matrix(self) -> np.ndarray:
        """Dense matrix with system qubit 0 as the most significant tensor factor."""
        return self.coefficient * reduce(np.kron, [_SINGLE[x] for x in self.letters], np.eye(1, dtype=complex))

    def is_hermitian(self) -> bool:
        return abs(self.coefficient.imag) <= COEFF_TOL

    def to_text(self) -> str:
        return f"({_fmt(self.coefficient.real)},{_fmt(self.coefficient.imag)}) {self.label}"


class PauliSum:
    """Sum of Pauli strings on a fixed number of qubits, merged by letters."""

    def __init__(self, n_qubits: int, strings: Iterable[PauliString] = ()):
        self.n_qubits = n_qubits
        self._terms: dict[tuple[str, ...], complex] = {}
        for s in strings:
            self.add(s)

    def add(self, s: PauliString) -> None:
        if s.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        self._terms[s.letters] = self._terms.get(s.letters, 0) + s.coefficient

    @property
    def strings(self) -> list[PauliString]:
        return [PauliString(c, k) for k, c in self._terms.items() if abs(c) > COEFF_TOL]

    def __len__(self) -> int:
        return len(self.strings)

    def __iter__(self):
        return iter(self.strings)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.n_qubits, self.strings + other.strings)

    def __mul__(self, other: "PauliSum | complex") -> "PauliSum":
        if isinstance(other, PauliSum):
            return PauliSum(self.n_qubits, (x * y for x in self.strings for y in other.strings))
        return PauliSum(self.n_qubits, (replace(s, coefficient=s.coefficient * other) for s in self.strings))

    __rmul__ = __mul__

    def one_norm(self) -> float:
        return sum(abs(s.coefficient) for s in self.strings)

    def coefficient(self, label: str) -> complex:
        return self._terms.get(tuple(reversed(label)), 0)

    def to_matrix(self) -> np.ndarray:
        dim = 2**self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for s in self.strings:
            out += s.matrix()
        return out

    def to_text(self) -> str:
        return "".join(s.to_text() + "\n" for s in self.strings)

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        strings = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            coeff, label = line.rsplit(" ", 1)
            re_, im_ = coeff.strip("()").split(",")
            strings.append(PauliString.from_label(complex(float(re_), float(im_)), label))
        if not strings:
            raise ValueError("empty Pauli sum text")
        return cls(strings[0].n_qubits, strings)

    @classmethod
    def identity(cls, n_qubits: int, coefficient: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, [PauliString(coefficient, ("I",) * n_qubits)])


# ---------------------------------------------------------------------------
# Expansions
# ---------------------------------------------------------------------------


def jordan_wigner(op: LadderOp, n_qubits: int, n_fermion: int = 0) -> PauliSum:
    """``b_i = (X_i + i Y_i)/2 Z_{i-1} ... Z_0``; antifermion ``d_i`` sits on qubit ``n_fermion + i``."""
    if not op.fermionic:
        raise ValueError("Jordan-Wigner applies to fermionic operators only")
    q = op.mode + (n_fermion if op.species is Species.ANTIFERMION else 0)
    if q >= n_qubits:
        raise ValueError(f"mode on qubit {q} outside {n_qubits} qubits")
    sign = -1 if op.dagger else 1
    base = ["Z"] * q + ["I"] * (n_qubits - q)
    xs = list(base)
    ys = list(base)
    xs[q] = "X"
    ys[q] = "Y"
    return PauliSum(n_qubits, [PauliString(0.5, xs), PauliString(0.5j * sign, ys)])


def register_matrix_to_paulis(mat: np.ndarray, qubits: Sequence[int], n_qubits: int) -> PauliSum:
    """Expand a matrix on a little-endian register (``qubits[w]`` holds bit ``w``).

    Each non-zero entry ``M[s', s] |s'><s|`` factorises into single-qubit outer
    products, each of which is a two-letter Pauli combination.
    """
    width = len(qubits)
    out = PauliSum(n_qubits)
    rows, cols = np.nonzero(np.abs(mat) > COEFF_TOL)
    for r, c in zip(rows, cols):
        partial: dict[tuple[str, ...], complex] = {(): complex(mat[r, c])}
        for w in range(width):
            table = _OUTER[((r >> w) & 1, (c >> w) & 1)]
            partial = {k + (x,): v * cx for k, v in partial.items() for x, cx in table.items()}
        for bits, coeff in partial.items():
            letters = ["I"] * n_qubits
            for w, x in enumerate(bits):
                letters[qubits[w]] = x
            out.add(PauliString(coeff, letters))
    return out


def boson_mode_matrix(factors: Sequence[LadderOp], omega: int) -> np.ndarray:
    """Matrix of a product of ladder operators on one bosonic mode, padded to ``2**W``."""
    if any(op.fermionic for op in factors):
        raise ValueError("bosonic factors only")
    local = Term(1.0, tuple(LadderOp(Species.BOSON, 0, op.dagger) for op in factors))
    small = to_matrix(local, ModeSpec(0, 0, 1), omega)
    size = 2 ** boson_width(omega)
    out = np.zeros((size, size), dtype=complex)
    out[: omega + 1, : omega + 1] = small
    return out


def standard_binary(
    factors: LadderOp | Sequence[LadderOp], omega: int, offset: int = 0, n_qubits: int | None = None
) -> PauliSum:
    """Pauli expansion of a single-mode bosonic product on a ``W``-qubit register starting at ``offset``."""
    if isinstance(factors, LadderOp):
        factors = [factors]
    width = boson_width(omega)
    n = offset + width if n_qubits is None else n_qubits
    return register_matrix_to_paulis(boson_mode_matrix(factors, omega), list(range(offset, offset + width)), n)


def _mode_groups(term: Term) -> list[tuple[tuple[Species, int], list[LadderOp]]]:
    """Maximal runs of consecutive factors on the same mode, in term order."""
    groups: list[tuple[tuple[Species, int], list[LadderOp]]] = []
    for op in term.factors:
        key = (op.species, op.mode)
        if groups and groups[-1][0] == key:
            groups[-1][1].append(op)
        else:
            groups.append((key, [op]))
    return groups


def _group_sum(key, ops, modes: ModeSpec, omega: int, n: int) -> PauliSum:
    species, mode = key
    if species is Species.BOSON:
        width = boson_width(omega)
        return standard_binary(ops, omega, modes.n_fermionic + mode * width, n)
    return reduce(lambda acc, op: acc * jordan_wigner(op, n, modes.n_fermion), ops, PauliSum.identity(n))


@dataclass(frozen=True)
class PiecewiseTerm:
    coefficient: complex
    factors: tuple[PauliSum, ...]


def pauli_expand(
    expr: OperatorExpr, modes: ModeSpec, omega: int, granularity: str = "full_term"
) -> PauliSum | list[PiecewiseTerm]:
    """Expand every term (h.c. partners included) in the Pauli basis.

    ``full_term`` multiplies everything out into a single merged sum.
    ``per_mode`` keeps, for each term, one sum per run of factors on a mode.
    """
    n = system_qubit_count(modes, omega)
    if granularity == "full_term":
        total = PauliSum(n)
        for term in expr.terms():
            prod = PauliSum.identity(n, term.coefficient)
            for key, ops in _mode_groups(term):
                prod = prod * _group_sum(key, ops, modes, omega, n)
            total = total + prod
        return total
    if granularity == "per_mode":
        return [
            PiecewiseTerm(term.coefficient, tuple(_group_sum(k, ops, modes, omega, n) for k, ops in _mode_groups(term)))
            for term in expr.terms()
        ]
    raise ValueError(f"unknown granularity {granularity!r}")


# ---------------------------------------------------------------------------
# Block encodings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockEncoding:
    """A controlled (or control-stripped) circuit whose encoded block is ``A / lam``.

    The block lives on control ``|1>`` (when present) with every index and
    block-encoding ancilla ``|0>`` on input and output.
    """

    circuit: Circuit
    lam: float
    method: str
    t_formula: int | None = None
    info: dict = field(default_factory=dict, compare=False)

    @property
    def layout(self):
        return self.circuit.layout

    @property
    def controlled(self) -> bool:
        return self.circuit.layout.n_ctrl == 1

    def resources(self, elbow_mode: str = "measured") -> ResourceReport:
        return resources(self.circuit, elbow_mode, self.lam)

    def uncontrolled(self) -> "BlockEncoding":
        return replace(self, circuit=strip_control(self.circuit))


def _lcu_entries(psum: PauliSum) -> list[tuple[float, int, tuple[str, ...]]]:
    entries = []
    for s in psum.strings:
        c = s.coefficient
        parts = [c] if abs(c.real) <= COEFF_TOL or abs(c.imag) <= COEFF_TOL else [complex(c.real), 1j * c.imag]
        for part in parts:
            mag, k = phase_power(part)
            entries.append((mag, k, s.letters))
    return entries


def _index_literals(index: Sequence[Qubit], value: int) -> list[tuple[Qubit, int]]:
    return [(q, (value >> j) & 1) for j, q in enumerate(index)]


def _emit_select(b: CircuitBuilder, entries, index: Sequence[Qubit]) -> None:
    for l, (_, k, letters) in enumerate(entries):
        lits = b.ctrl_controls() + _index_literals(index, l)
        lit, anc = compute_and(b, lits)
        for q, x in enumerate(letters):
            if x != "I":
                b.gate(GateKind[x], (b.sys(q),), (lit,) if lit else ())
        b.phase_on(lit, k)
        uncompute_and(b, lits, anc)


def _width(count: int) -> int:
    return (count - 1).bit_length() if count > 1 else 0


def _builder_for(n_system: int, modes: ModeSpec | None, omega: int | None) -> CircuitBuilder:
    if modes is not None and omega is not None:
        return CircuitBuilder(
            n_system,
            n_fermionic_modes=modes.n_fermionic,
            n_bosonic_modes=modes.n_boson,
            boson_width=boson_width(omega) if modes.n_boson else 0,
        )
    return CircuitBuilder(n_system)


def compile_select(psum: PauliSum) -> Circuit:
    """Select oracle alone: index register plus system, controlled on qubit 0."""
    entries = _lcu_entries(psum)
    b = CircuitBuilder(psum.n_qubits)
    index = b.add_index(_width(len(entries)))
    _emit_select(b, entries, index)
    return b.finalize()


def lcu_encode(
    psum: PauliSum, modes: ModeSpec | None = None, omega: int | None = None, *, controlled: bool = True
) -> BlockEncoding:
    """Prepare (Grover-Rudolph over |alpha_l| / lam), Select, Prepare-dagger.

    Coefficients whose real and imaginary parts are both non-zero are split
    into two entries so that every entry's phase is a power of i.
    """
    entries = _lcu_entries(psum)
    if not entries:
        raise ValueError("cannot block-encode an empty Pauli sum")
    lam = sum(e[0] for e in entries)
    b = _builder_for(psum.n_qubits, modes, omega)
    index = b.add_index(_width(len(entries)))
    probs = [e[0] / lam for e in entries]
    if index:
        emit_grover_rudolph(b, probs + [0.0] * (2 ** len(index) - len(entries)), index)
    _emit_select(b, entries, index)
    if index:
        prep = CircuitBuilder(len(index), controlled=False)
        emit_grover_rudolph(prep, probs + [0.0] * (2 ** len(index) - len(entries)), [prep.sys(j) for j in range(len(index))])
        inverse = prep.finalize().inverse()
        b.append_circuit(inverse, {q: index[i] for i, q in enumerate(inverse.layout.system_range)})
    enc = BlockEncoding(b.finalize(), lam, "lcu")
    return enc if controlled else enc.uncontrolled()


def _child_mapping(child: Circuit, ctrl: Qubit, pool: Sequence[Qubit], b: CircuitBuilder) -> dict[int, Qubit]:
    lay = child.layout
    if lay.n_ctrl != 1:
        raise ValueError("sub-encodings must be compiled in controlled form")
    mapping: dict[int, Qubit] = {0: ctrl}
    anc = list(lay.index_range) + list(lay.be_range)
    if len(anc) > len(pool):
        raise ValueError("ancilla pool too small")
    mapping.update(zip(anc, pool))
    mapping.update((q, b.sys(k)) for k, q in enumerate(lay.system_range))
    return mapping


def _builder_like(enc: BlockEncoding) -> CircuitBuilder:
    lay = enc.layout
    return CircuitBuilder(
        lay.n_system,
        n_fermionic_modes=lay.n_fermionic_modes,
        n_bosonic_modes=lay.n_bosonic_modes,
        boson_width=lay.boson_width,
    )


def combine(
    encodings: Sequence[BlockEncoding],
    coefficients: Sequence[complex] | complex | None = None,
    mode: str = "lco",
    method: str | None = None,
) -> BlockEncoding:
    """Linear combination (``lco``) or product (``product``) of controlled block-encodings.

    For ``lco`` the result encodes ``sum_g c_g A_g`` with ``lam = sum_g |c_g| lam_g``;
    the sub-encodings share one ancilla pool.  For ``product`` the result
    encodes ``c * A_0 A_1 ...`` (``A_last`` applied first) on disjoint
    ancillae with ``lam = |c| prod_g lam_g``.
    """
    encodings = list(encodings)
    if not encodings:
        raise ValueError("nothing to combine")
    n_system = encodings[0].layout.n_system
    if any(e.layout.n_system != n_system for e in encodings):
        raise ValueError("sub-encodings act on different system registers")
    b = _builder_like(encodings[0])
    if mode == "lco":
        coeffs = [1.0] * len(encodings) if coefficients is None else list(coefficients)
        if len(coeffs) != len(encodings):
            raise ValueError("one coefficient per encoding is required")
        split = [phase_power(complex(c)) for c in coeffs]
        weights = [mag * e.lam for (mag, _), e in zip(split, encodings)]
        lam = sum(weights)
        if lam <= 0:
            raise ValueError("all coefficients vanish")
        index = b.add_index(_width(len(encodings)))
        pool = b.add_be(max(e.layout.n_index + e.layout.n_be for e in encodings))
        probs = [w / lam for w in weights] + [0.0] * (2 ** len(index) - len(encodings))
        if index:
            emit_grover_rudolph(b, probs, index)
        for g, (enc, (_, k)) in enumerate(zip(encodings, split)):
            if weights[g] == 0:
                continue
            lits = b.ctrl_controls() + _index_literals(index, g)
            lit, anc = compute_and(b, lits)
            b.append_circuit(enc.circuit, _child_mapping(enc.circuit, lit[0], pool, b), with_phase_on=lit)
            b.phase_on(lit, k)
            uncompute_and(b, lits, anc)
        if index:
            prep = CircuitBuilder(len(index), controlled=False)
            emit_grover_rudolph(prep, probs, [prep.sys(j) for j in range(len(index))])
            inverse = prep.finalize().inverse()
            b.append_circuit(inverse, {q: index[i] for i, q in enumerate(inverse.layout.system_range)})
        t_formula = None
    elif mode == "product":
        coeff = 1.0 if coefficients is None else complex(coefficients)
        mag, k = phase_power(coeff)
        lam = mag * math.prod(e.lam for e in encodings)
        for enc in reversed(encodings):
            pool = b.add_be(enc.layout.n_index + enc.layout.n_be)
            b.append_circuit(enc.circuit, _child_mapping(enc.circuit, b.ctrl, pool, b), with_phase_on=(b.ctrl, 1))
        b.phase_on((b.ctrl, 1), k)
        parts = [e.t_formula for e in encodings]
        t_formula = sum(parts) if all(p is not None for p in parts) else None
    else:
        raise ValueError(f"unknown combination mode {mode!r}")
    return BlockEncoding(b.finalize(), float(lam), method or encodings[0].method, t_formula)


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------


def encode_pauli_expansion(expr: OperatorExpr, modes: ModeSpec, omega: int) -> BlockEncoding:
    psum = pauli_expand(expr, modes, omega, "full_term")
    if not len(psum):
        raise ValueError("operator expands to zero")
    return replace(lcu_encode(psum, modes, omega), method="pauli_expansion")


def encode_piecewise_pauli(expr: OperatorExpr, modes: ModeSpec, omega: int) -> BlockEncoding:
    terms = pauli_expand(expr, modes, omega, "per_mode")
    encs = []
    coeffs = []
    n = system_qubit_count(modes, omega)
    for piece in terms:
        factors = [f for f in piece.factors if len(f)]
        if len(factors) < len(piece.factors):
            continue  # a vanishing factor: the term is zero under the cutoff
        if not factors:
            factors = [PauliSum.identity(n)]
        sub = [lcu_encode(f, modes, omega) for f in factors]
        encs.append(sub[0] if len(sub) == 1 else combine(sub, mode="product"))
        coeffs.append(piece.coefficient)
    if not encs:
        raise ValueError("operator vanishes under the cutoff")
    if len(encs) == 1 and abs(coeffs[0] - 1) <= COEFF_TOL:
        return replace(encs[0], method="piecewise_pauli")
    return combine(encs, coeffs, "lco", method="piecewise_pauli")
