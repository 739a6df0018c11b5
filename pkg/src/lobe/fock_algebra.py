"""Second-quantized ladder operators and the dense Fock-space oracle.

Operators are products of fermionic (``b``), antifermionic (``d``) and bosonic
(``a``) ladder operators.  Antifermionic modes are treated as extra fermionic
modes indexed after the ordinary fermions, so the only sign rule in play is the
Jordan-Wigner parity of the lower-indexed fermionic modes.

Bosonic operators are evaluated as the compression of the untruncated operator
onto the cutoff space: intermediate occupations may exceed ``omega`` while a
product is applied, but a result above the cutoff is discarded.  With this
convention canonical reordering (``a a^dag = a^dag a + 1``) is exact inside
the truncated space, and for normal-ordered products it coincides with
multiplying truncated matrices.
"""

from __future__ import annotations

import enum
import itertools
import re
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

COEFF_TOL = 1e-12
DEFAULT_DIMENSION_CAP = 2**20


class Species(enum.Enum):
    FERMION = "b"
    ANTIFERMION = "d"
    BOSON = "a"


_RANK = {Species.FERMION: 0, Species.ANTIFERMION: 1, Species.BOSON: 2}


@dataclass(frozen=True)
class LadderOp:
    """A single creation (``dagger=True``) or annihilation operator."""

    species: Species
    mode: int
    dagger: bool

    @property
    def fermionic(self) -> bool:
        return self.species is not Species.BOSON

    def adjoint(self) -> "LadderOp":
        return LadderOp(self.species, self.mode, not self.dagger)

    def __str__(self) -> str:
        return f"{self.species.value}{self.mode}{'^' if self.dagger else ''}"


def b(mode: int, dagger: bool = False) -> LadderOp:
    return LadderOp(Species.FERMION, mode, dagger)


def d(mode: int, dagger: bool = False) -> LadderOp:
    return LadderOp(Species.ANTIFERMION, mode, dagger)


def a(mode: int, dagger: bool = False) -> LadderOp:
    return LadderOp(Species.BOSON, mode, dagger)


@dataclass(frozen=True)
class Term:
    """``coefficient * factors[0] factors[1] ...`` (rightmost factor acts first)."""

    coefficient: complex
    factors: tuple[LadderOp, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficient", complex(self.coefficient))
        object.__setattr__(self, "factors", tuple(self.factors))

    def with_coefficient(self, coefficient: complex) -> "Term":
        return Term(coefficient, self.factors)

    def __str__(self) -> str:
        ops = " ".join(str(f) for f in self.factors)
        return f"{_format_coeff(self.coefficient)} {ops}".strip()


@dataclass(frozen=True)
class TermGroup:
    term: Term
    with_hc: bool


@dataclass(frozen=True)
class OperatorExpr:
    """Normalized sum of term groups; a group with ``with_hc`` stands for ``t + t^dag``."""

    groups: tuple[TermGroup, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(self.groups))

    def __len__(self) -> int:
        return len(self.groups)

    def terms(self) -> list[Term]:
        """Flat list of terms, with each h.c. partner in canonical mode order."""
        out: list[Term] = []
        for group in self.groups:
            out.append(group.term)
            if group.with_hc:
                out.append(hc_partner(group.term))
        return out

    def is_self_adjoint(self) -> bool:
        return all(
            g.with_hc or _is_self_adjoint_shape(g.term.factors) and abs(g.term.coefficient.imag) <= COEFF_TOL
            for g in self.groups
        )

    def to_text(self) -> str:
        parts = []
        for group in self.groups:
            text = str(group.term)
            if group.with_hc:
                text += " + h.c."
            parts.append(text)
        return " + ".join(parts) if parts else "0"

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class ModeSpec:
    """Number of fermionic, antifermionic and bosonic modes."""

    n_fermion: int = 0
    n_antifermion: int = 0
    n_boson: int = 0

    @property
    def n_fermionic(self) -> int:
        return self.n_fermion + self.n_antifermion

    def count(self, species: Species) -> int:
        return {
            Species.FERMION: self.n_fermion,
            Species.ANTIFERMION: self.n_antifermion,
            Species.BOSON: self.n_boson,
        }[species]


@dataclass(frozen=True)
class FockState:
    fermionic: tuple[int, ...]
    bosonic: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "fermionic", tuple(int(x) for x in self.fermionic))
        object.__setattr__(self, "bosonic", tuple(int(x) for x in self.bosonic))


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ModeIndexError(ValueError):
    pass


class DimensionCapError(ValueError):
    pass


def _format_coeff(c: complex) -> str:
    if abs(c.imag) <= COEFF_TOL:
        return repr(float(c.real))
    sign = "+" if c.imag >= 0 else "-"
    return f"({float(c.real)!r}{sign}{abs(float(c.imag))!r}j)"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<hc>h\.c\.)
  | (?P<factor>(?P<species>[bda])(?P<mode>\d+)(?P<dag>\^?))
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>j)?
  | (?P<op>[-+*()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, object, int]]:
    tokens: list[tuple[str, object, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if m.group("ws"):
            pass
        elif m.group("hc"):
            tokens.append(("hc", None, pos))
        elif m.group("factor"):
            op = LadderOp(Species(m.group("species")), int(m.group("mode")), bool(m.group("dag")))
            tokens.append(("factor", op, pos))
        elif m.group("num") is not None:
            value = float(m.group("num"))
            tokens.append(("imag" if m.group("imag") else "num", value, pos))
        else:
            tokens.append((m.group("op"), None, pos))
        del kind
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, offset: int = 0) -> tuple[str, object, int]:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def take(self, kind: str) -> tuple[str, object, int]:
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> list[tuple[complex, tuple[LadderOp, ...], bool]]:
        out = []
        sign = 1.0
        if self.peek()[0] in "+-":
            sign = -1.0 if self.peek()[0] == "-" else 1.0
            self.i += 1
        while True:
            coeff, factors = self.term()
            with_hc = False
            if self.peek()[0] == "+" and self.peek(1)[0] == "hc":
                self.i += 2
                with_hc = True
            out.append((sign * coeff, factors, with_hc))
            kind, _, pos = self.peek()
            if kind == "end":
                return out
            if kind not in "+-":
                raise ParseError(f"expected '+' or '-', found {kind!r}", pos)
            sign = -1.0 if kind == "-" else 1.0
            self.i += 1

    def term(self) -> tuple[complex, tuple[LadderOp, ...]]:
        coeff: complex = 1.0
        kind, value, pos = self.peek()
        if kind == "num":
            self.i += 1
            coeff = float(value)  # type: ignore[arg-type]
            if self.peek()[0] == "*":
                self.i += 1
        elif kind == "imag":
            self.i += 1
            coeff = 1j * float(value)  # type: ignore[arg-type]
            if self.peek()[0] == "*":
                self.i += 1
        elif kind == "(":
            coeff = self.complex_coeff()
            if self.peek()[0] == "*":
                self.i += 1
        factors = []
        while self.peek()[0] == "factor":
            factors.append(self.take("factor")[1])
        if not factors:
            raise ParseError("expected a ladder operator", self.peek()[2])
        return coeff, tuple(factors)  # type: ignore[return-value]

    def complex_coeff(self) -> complex:
        self.take("(")
        sign = 1.0
        if self.peek()[0] in "+-":
            sign = -1.0 if self.peek()[0] == "-" else 1.0
            self.i += 1
        real = sign * float(self.take("num")[1])  # type: ignore[arg-type]
        kind, _, pos = self.peek()
        if kind not in "+-":
            raise ParseError("expected '+' or '-' inside complex coefficient", pos)
        self.i += 1
        imag = float(self.take("imag")[1])  # type: ignore[arg-type]
        self.take(")")
        return complex(real, imag if kind == "+" else -imag)


def parse_operator(
    text: str, modes: ModeSpec | None = None, omega: int | None = None
) -> OperatorExpr:
    """Parse and normalize an operator expression.

    Grammar: ``group (('+'|'-') group)*`` with ``group := term ['+' 'h.c.']``
    and factors such as ``b0``, ``d1^`` or ``a2^``.  When ``modes`` is given,
    mode indices are checked against it; when ``omega`` is given, a warning is
    issued for bosonic powers that exceed the cutoff (they encode to zero).
    """
    raw = _Parser(text).parse()
    if modes is not None:
        for _, factors, _ in raw:
            for op in factors:
                if op.mode >= modes.count(op.species):
                    raise ModeIndexError(
                        f"mode index {op.mode} out of range for species {op.species.value!r} "
                        f"({modes.count(op.species)} modes declared)"
                    )
    if omega is not None:
        for _, factors, _ in raw:
            for (species, mode), ops in _by_mode(factors).items():
                if species is Species.BOSON:
                    n_cr = sum(op.dagger for op in ops)
                    n_an = len(ops) - n_cr
                    if max(n_cr, n_an) > omega:
                        warnings.warn(
                            f"bosonic power on mode a{mode} exceeds the cutoff {omega}; it encodes to zero",
                            stacklevel=2,
                        )
    return normalize(raw)


def _by_mode(factors: Iterable[LadderOp]) -> dict[tuple[Species, int], list[LadderOp]]:
    groups: dict[tuple[Species, int], list[LadderOp]] = {}
    for op in factors:
        groups.setdefault((op.species, op.mode), []).append(op)
    return groups


# ---------------------------------------------------------------------------
# Reordering
# ---------------------------------------------------------------------------


def _mode_key(op: LadderOp) -> tuple[int, int, int]:
    return (_RANK[op.species], op.mode, 0 if op.dagger else 1)


def _normal_key(op: LadderOp) -> tuple[int, int, int]:
    return (0 if op.dagger else 1, _RANK[op.species], op.mode)


def _same_mode(x: LadderOp, y: LadderOp) -> bool:
    return x.species is y.species and x.mode == y.mode


def _sort_factors(factors: tuple[LadderOp, ...], key) -> dict[tuple[LadderOp, ...], complex]:
    out: dict[tuple[LadderOp, ...], complex] = {}
    work: list[tuple[complex, tuple[LadderOp, ...]]] = [(1.0 + 0j, factors)]
    while work:
        c, f = work.pop()
        for i in range(len(f) - 1):
            x, y = f[i], f[i + 1]
            if x.fermionic and x == y:
                break  # b b = b^dag b^dag = 0
            if key(x) <= key(y):
                continue
            swapped = f[:i] + (y, x) + f[i + 2 :]
            if _same_mode(x, y):
                # x is the annihilator, y the creator on the same mode
                removed = f[:i] + f[i + 2 :]
                work.append((-c if x.fermionic else c, swapped))
                work.append((c, removed))
            else:
                work.append((-c if (x.fermionic and y.fermionic) else c, swapped))
            break
        else:
            out[f] = out.get(f, 0j) + c
    return out


def reorder(term: Term, target: str = "mode") -> list[Term]:
    """Rewrite ``term`` as an equivalent sum in ``normal`` or ``mode`` order.

    ``mode`` order groups factors by mode (fermions, then antifermions, then
    bosons, ascending) with creation operators first inside each mode.
    ``normal`` order puts every creation operator left of every annihilation
    operator.
    """
    if target not in ("mode", "normal"):
        raise ValueError(f"unknown ordering target {target!r}")
    key = _mode_key if target == "mode" else _normal_key
    pieces = _sort_factors(term.factors, key)
    out = []
    for factors, c in pieces.items():
        coeff = term.coefficient * c
        if abs(coeff) > COEFF_TOL:
            out.append(Term(coeff, factors))
    return out


def hermitian_conjugate(term: Term) -> Term:
    return Term(term.coefficient.conjugate(), tuple(op.adjoint() for op in reversed(term.factors)))


def hc_partner(term: Term) -> Term:
    """Hermitian conjugate of a mode-ordered term, brought back to mode order.

    The reordering sign is folded into the coefficient.
    """
    pieces = reorder(hermitian_conjugate(term.with_coefficient(1.0)), "mode")
    if len(pieces) != 1:
        raise ValueError(f"term {term} is not in mode-ordered form")
    partner = pieces[0]
    return Term(partner.coefficient * term.coefficient.conjugate(), partner.factors)


def _is_self_adjoint_shape(factors: tuple[LadderOp, ...]) -> bool:
    pieces = _sort_factors(tuple(op.adjoint() for op in reversed(factors)), _mode_key)
    return len(pieces) == 1 and factors in pieces and abs(pieces[factors] - 1) <= COEFF_TOL


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def _split_phase(c: complex) -> list[complex]:
    out = []
    if abs(c.real) > COEFF_TOL:
        out.append(complex(c.real, 0.0))
    if abs(c.imag) > COEFF_TOL:
        out.append(complex(0.0, c.imag))
    return out


def normalize(raw: Iterable[tuple[complex, Sequence[LadderOp], bool]]) -> OperatorExpr:
    """Bring raw ``(coefficient, factors, with_hc)`` triples to canonical groups.

    Terms are mode ordered, duplicates merged, and a term whose Hermitian
    partner is present with the conjugate coefficient is folded into a single
    ``with_hc`` group.  Every group coefficient ends up purely real or purely
    imaginary; h.c. groups always carry a real coefficient.
    """
    flat: dict[tuple[LadderOp, ...], complex] = {}
    for coeff, factors, with_hc in raw:
        for piece in reorder(Term(coeff, tuple(factors)), "mode"):
            flat[piece.factors] = flat.get(piece.factors, 0j) + piece.coefficient
            if with_hc:
                partner = hc_partner(piece)
                flat[partner.factors] = flat.get(partner.factors, 0j) + partner.coefficient

    groups: list[TermGroup] = []
    done: set[tuple[LadderOp, ...]] = set()
    for factors, c in flat.items():
        if factors in done:
            continue
        done.add(factors)
        if abs(c) <= COEFF_TOL:
            continue
        unit_partner = hc_partner(Term(1.0, factors))
        if unit_partner.factors == factors:
            groups.extend(TermGroup(Term(p, factors), False) for p in _split_phase(c))
            continue
        s = unit_partner.coefficient.real  # t^dag = s * partner_factors
        d_coeff = flat.get(unit_partner.factors, 0j)
        done.add(unit_partner.factors)
        e = d_coeff * s
        if abs(e - c.conjugate()) <= COEFF_TOL * max(1.0, abs(c)):
            if abs(c.real) > COEFF_TOL:
                groups.append(TermGroup(Term(c.real, factors), True))
            if abs(c.imag) > COEFF_TOL:
                groups.append(TermGroup(Term(1j * c.imag, factors), False))
                groups.append(TermGroup(Term(-1j * c.imag * s, unit_partner.factors), False))
        else:
            groups.extend(TermGroup(Term(p, factors), False) for p in _split_phase(c))
            groups.extend(TermGroup(Term(p, unit_partner.factors), False) for p in _split_phase(d_coeff))
    return OperatorExpr(tuple(groups))


def from_terms(terms: Iterable[Term], with_hc: bool = False) -> OperatorExpr:
    return normalize((t.coefficient, t.factors, with_hc) for t in terms)


def infer_modes(expr: OperatorExpr) -> ModeSpec:
    counts = {s: 0 for s in Species}
    for term in expr.terms():
        for op in term.factors:
            counts[op.species] = max(counts[op.species], op.mode + 1)
    return ModeSpec(counts[Species.FERMION], counts[Species.ANTIFERMION], counts[Species.BOSON])


def remap_antifermions(expr: OperatorExpr, n_fermion: int) -> OperatorExpr:
    """Replace ``d_i`` by ``b_{n_fermion + i}``.

    The canonical order already places antifermions after fermions, so the
    relabeling introduces no sign.
    """

    def fix(op: LadderOp) -> LadderOp:
        if op.species is Species.ANTIFERMION:
            return LadderOp(Species.FERMION, n_fermion + op.mode, op.dagger)
        return op

    return OperatorExpr(
        tuple(
            TermGroup(Term(g.term.coefficient, tuple(fix(op) for op in g.term.factors)), g.with_hc)
            for g in expr.groups
        )
    )


# ---------------------------------------------------------------------------
# Fock-space oracle
# ---------------------------------------------------------------------------


def _column(op: LadderOp, modes: ModeSpec) -> int:
    if op.species is Species.FERMION:
        return op.mode
    if op.species is Species.ANTIFERMION:
        return modes.n_fermion + op.mode
    return modes.n_fermionic + op.mode


def apply_term(
    term: Term, state: FockState, omega: int, modes: ModeSpec | None = None
) -> tuple[complex, FockState] | None:
    """Apply ``term`` to a basis state; returns ``(amplitude, state)`` or ``None`` for zero."""
    if modes is None:
        modes = ModeSpec(len(state.fermionic), 0, len(state.bosonic))
    fermions = list(state.fermionic)
    bosons = list(state.bosonic)
    if any(w > omega for w in bosons):
        raise ValueError("input state exceeds the bosonic cutoff")
    amp = complex(term.coefficient)
    for op in reversed(term.factors):
        if op.fermionic:
            i = _column(op, modes)
            if fermions[i] == int(op.dagger):
                return None
            if sum(fermions[:i]) % 2:
                amp = -amp
            fermions[i] ^= 1
        else:
            w = bosons[op.mode]
            if op.dagger:
                amp *= np.sqrt(w + 1)
                bosons[op.mode] = w + 1
            else:
                if w == 0:
                    return None
                amp *= np.sqrt(w)
                bosons[op.mode] = w - 1
    if any(w > omega for w in bosons):
        return None
    return amp, FockState(tuple(fermions), tuple(bosons))


class FockBasis:
    """Occupation basis ordered lexicographically: fermionic modes first, mode 0 most significant."""

    def __init__(self, modes: ModeSpec, omega: int, cap: int = DEFAULT_DIMENSION_CAP):
        self.modes = modes
        self.omega = int(omega)
        self.radices = [2] * modes.n_fermionic + [self.omega + 1] * modes.n_boson
        self.dim = int(np.prod(self.radices, dtype=object)) if self.radices else 1
        if self.dim > cap:
            raise DimensionCapError(f"Fock dimension {self.dim} exceeds the cap {cap}")
        if self.radices:
            self.states = np.stack(np.unravel_index(np.arange(self.dim), self.radices), axis=1).astype(np.int64)
        else:
            self.states = np.zeros((1, 0), dtype=np.int64)
        strides = np.ones(len(self.radices), dtype=np.int64)
        for k in range(len(self.radices) - 2, -1, -1):
            strides[k] = strides[k + 1] * self.radices[k + 1]
        self.strides = strides

    def index(self, state: FockState) -> int:
        occ = list(state.fermionic) + list(state.bosonic)
        return int(np.dot(occ, self.strides)) if occ else 0

    def state(self, index: int) -> FockState:
        row = self.states[index]
        nf = self.modes.n_fermionic
        return FockState(tuple(row[:nf]), tuple(row[nf:]))


def _term_action(term: Term, basis: FockBasis) -> tuple[np.ndarray, np.ndarray]:
    modes = basis.modes
    nf = modes.n_fermionic
    occ = basis.states.copy()
    amp = np.full(basis.dim, term.coefficient, dtype=complex)
    for op in reversed(term.factors):
        col = _column(op, modes)
        v = occ[:, col]
        if op.fermionic:
            ok = v != int(op.dagger)
            parity = occ[:, :col].sum(axis=1) & 1
            amp = amp * ok * (1 - 2 * parity)
            occ[:, col] = 1 - v
        elif op.dagger:
            amp = amp * np.sqrt(v + 1)
            occ[:, col] = v + 1
        else:
            amp = amp * np.sqrt(v)
            occ[:, col] = np.maximum(v - 1, 0)
    if modes.n_boson:
        amp = amp * (occ[:, nf:] <= basis.omega).all(axis=1)
        occ[:, nf:] = np.minimum(occ[:, nf:], basis.omega)
    rows = occ @ basis.strides if occ.shape[1] else np.zeros(basis.dim, dtype=np.int64)
    return rows, amp


def to_matrix(
    op: OperatorExpr | Term | TermGroup,
    modes: ModeSpec,
    omega: int,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> np.ndarray:
    """Dense matrix ``M[s', s] = <s'|op|s>`` in the :class:`FockBasis` ordering."""
    if isinstance(op, Term):
        terms = [op]
    elif isinstance(op, TermGroup):
        terms = OperatorExpr((op,)).terms()
    else:
        terms = op.terms()
    basis = FockBasis(modes, omega, cap)
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    cols = np.arange(basis.dim)
    for term in terms:
        for f in term.factors:
            if f.mode >= modes.count(f.species):
                raise ModeIndexError(f"{f} is outside the declared modes {modes}")
        rows, amp = _term_action(term, basis)
        nz = amp != 0
        np.add.at(mat, (rows[nz], cols[nz]), amp[nz])
    return mat


def basis_product(modes: ModeSpec, omega: int) -> Iterable[FockState]:
    """Iterate over all Fock basis states in :class:`FockBasis` order."""
    nf = modes.n_fermionic
    for occ in itertools.product(*([range(2)] * nf + [range(omega + 1)] * modes.n_boson)):
        yield FockState(occ[:nf], occ[nf:])


# ---------------------------------------------------------------------------
# Qubit encoding
# ---------------------------------------------------------------------------


def boson_width(omega: int) -> int:
    """Qubits per bosonic mode, ``ceil(log2(omega + 1))``."""
    if omega < 1:
        raise ValueError("the bosonic cutoff must be at least 1")
    return int(omega).bit_length()


def system_qubit_count(modes: ModeSpec, omega: int) -> int:
    return modes.n_fermionic + (modes.n_boson * boson_width(omega) if modes.n_boson else 0)


def system_embedding(modes: ModeSpec, omega: int, cap: int = DEFAULT_DIMENSION_CAP) -> np.ndarray:
    """Qubit basis index of every Fock basis state.

    Fermionic (and re-indexed antifermionic) mode ``i`` sits on system qubit
    ``i``; bit ``w`` of bosonic mode ``j`` sits on system qubit
    ``F + j*W + w``.  System qubit 0 is the most significant bit of the
    returned index.
    """
    basis = FockBasis(modes, omega, cap)
    nf = modes.n_fermionic
    n = system_qubit_count(modes, omega)
    out = np.zeros(basis.dim, dtype=np.int64)
    for i in range(nf):
        out |= basis.states[:, i] << (n - 1 - i)
    if modes.n_boson:
        width = boson_width(omega)
        for j in range(modes.n_boson):
            occ = basis.states[:, nf + j]
            for w in range(width):
                out |= ((occ >> w) & 1) << (n - 1 - (nf + j * width + w))
    return out
