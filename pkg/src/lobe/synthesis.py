"""Direct block-encoding of ladder-operator term groups.

Every group of a normalized :class:`~lobe.fock_algebra.OperatorExpr` (a term,
optionally plus its Hermitian conjugate) is compiled straight from its ladder
operators: fermionic factors become a validity check on the occupation
pattern followed by a ``Z...Z X`` string per factor, and bosonic factors
become a modular addition on the occupation register followed by a
uniformly controlled rotation that loads the matrix element onto a
block-encoding ancilla.  Groups are then combined by a linear combination of
block-encodings.

Encodings are always compiled in controlled form (control qubit 0); the
uncontrolled variant is obtained by :func:`~lobe.circuit.strip_control`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .circuit import CircuitBuilder, Qubit
from .fock_algebra import (
    COEFF_TOL,
    LadderOp,
    ModeSpec,
    OperatorExpr,
    Species,
    Term,
    TermGroup,
    boson_width,
    hermitian_conjugate,
    system_qubit_count,
)
from .pauli import BlockEncoding, combine, phase_power
from .primitives import Literal, compute_and, emit_add_constant, emit_ucr, gray_transform, uncompute_and

METHOD = "lobe"


class UnsupportedTermError(ValueError):
    """The group has a shape none of the direct constructions handle."""


class VanishingTermError(ValueError):
    """The term is identically zero (a repeated fermionic operator on one mode)."""


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


class TermKind(enum.Enum):
    IDENTITY = "identity"
    FERMIONIC_SINGLE = "fermionic_single"
    FERMIONIC_PRODUCT = "fermionic_product"
    FERMIONIC_LC_HC = "fermionic_lc_hc"
    BOSONIC_PRODUCT = "bosonic_product_single_mode"
    BOSONIC_LC_HC = "bosonic_lc_hc"
    MIXED_TERM = "mixed_term"


@dataclass(frozen=True)
class FermionFactor:
    """One active fermionic mode of a term.

    ``op`` is ``"create"``, ``"annihilate"`` or ``"number"``.  ``required``
    is the occupation the mode must hold for the term to act nontrivially.
    """

    species: Species
    mode: int
    op: str

    @property
    def required(self) -> int:
        return 0 if self.op == "create" else 1


@dataclass(frozen=True)
class BosonFactor:
    """``(a_mode^dag)^R (a_mode)^S``."""

    mode: int
    R: int
    S: int

    @property
    def shift(self) -> int:
        return self.R - self.S


@dataclass(frozen=True)
class TermClass:
    kind: TermKind
    with_hc: bool
    fermions: tuple[FermionFactor, ...] = ()
    bosons: tuple[BosonFactor, ...] = ()

    @property
    def B(self) -> int:
        """Number of active modes."""
        return len(self.fermions) + len(self.bosons)

    @property
    def C(self) -> int:
        """Active fermionic modes that are not number operators."""
        return sum(1 for f in self.fermions if f.op != "number")

    @property
    def n_number(self) -> int:
        return sum(1 for f in self.fermions if f.op == "number")

    @property
    def B_f(self) -> int:
        return len(self.fermions)

    @property
    def B_b(self) -> int:
        return len(self.bosons)

    @property
    def P(self) -> int:
        """Sum of the bosonic exponents."""
        return sum(f.R + f.S for f in self.bosons)

    @property
    def R(self) -> tuple[int, ...]:
        return tuple(f.R for f in self.bosons)

    @property
    def S(self) -> tuple[int, ...]:
        return tuple(f.S for f in self.bosons)

    @property
    def number_flags(self) -> tuple[bool, ...]:
        return tuple(f.op == "number" for f in self.fermions)


def _mode_runs(factors: Sequence[LadderOp]) -> list[list[LadderOp]]:
    runs: list[list[LadderOp]] = []
    for op in factors:
        if runs and runs[-1][0].species is op.species and runs[-1][0].mode == op.mode:
            runs[-1].append(op)
        else:
            runs.append([op])
    return runs


def _describe(term: Term) -> tuple[tuple[FermionFactor, ...], tuple[BosonFactor, ...]]:
    fermions: list[FermionFactor] = []
    bosons: list[BosonFactor] = []
    seen: set[tuple[Species, int]] = set()
    for run in _mode_runs(term.factors):
        key = (run[0].species, run[0].mode)
        if key in seen:
            raise UnsupportedTermError(f"term {term} is not mode ordered")
        seen.add(key)
        daggers = [op.dagger for op in run]
        if run[0].fermionic:
            if daggers == [True]:
                fermions.append(FermionFactor(*key, "create"))
            elif daggers == [False]:
                fermions.append(FermionFactor(*key, "annihilate"))
            elif daggers == [True, False]:
                fermions.append(FermionFactor(*key, "number"))
            elif daggers.count(True) > 1 or daggers.count(False) > 1:
                raise VanishingTermError(f"term {term} repeats a fermionic operator on one mode")
            else:
                raise UnsupportedTermError(f"unsupported fermionic factor {' '.join(map(str, run))}")
        else:
            r = sum(daggers)
            if daggers != [True] * r + [False] * (len(daggers) - r):
                raise UnsupportedTermError(f"bosonic factor on a{run[0].mode} is not normal ordered")
            bosons.append(BosonFactor(run[0].mode, r, len(daggers) - r))
    return tuple(fermions), tuple(bosons)


def classify(group: TermGroup) -> TermClass:
    """Construction family and active-mode descriptors of a normalized group."""
    term = group.term
    if not term.factors:
        if group.with_hc:
            raise UnsupportedTermError("a constant cannot carry a Hermitian conjugate")
        return TermClass(TermKind.IDENTITY, False)
    fermions, bosons = _describe(term)
    if fermions and bosons:
        kind = TermKind.MIXED_TERM
    elif fermions:
        if group.with_hc:
            kind = TermKind.FERMIONIC_LC_HC
        elif len(term.factors) == 1:
            kind = TermKind.FERMIONIC_SINGLE
        else:
            kind = TermKind.FERMIONIC_PRODUCT
    else:
        kind = TermKind.BOSONIC_LC_HC if group.with_hc else TermKind.BOSONIC_PRODUCT
    return TermClass(kind, group.with_hc, fermions, bosons)


# ---------------------------------------------------------------------------
# Closed-form costs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LobeCostFormula:
    """Predicted costs of a unit-coefficient group.

    ``exact`` is True when the compiled measured-mode T count must equal
    ``t_count``; otherwise ``t_count`` and ``rotation_count`` are upper
    bounds.
    """

    t_count: int
    rotation_count: int
    be_ancillae: int
    clean_ancillae: int
    lam: float
    exact: bool


def cz_sign_required(C: int) -> bool:
    """Whether reversing ``C`` mutually anticommuting factors flips the sign."""
    if C < 0:
        raise ValueError("C must be non-negative")
    return (C * (C - 1) // 2) % 2 == 1


def cost_formula(cls: TermClass, omega: int = 1) -> LobeCostFormula:
    width = boson_width(omega)
    scale = float(omega) ** (cls.P / 2)
    kind = cls.kind
    if kind is TermKind.IDENTITY:
        return LobeCostFormula(0, 0, 0, 0, 1.0, True)
    if kind is TermKind.FERMIONIC_SINGLE:
        return LobeCostFormula(4, 0, 1, 1, 1.0, True)
    if kind is TermKind.FERMIONIC_PRODUCT:
        return LobeCostFormula(4 * cls.B, 0, 1, cls.B, 1.0, True)
    if kind is TermKind.FERMIONIC_LC_HC:
        checks = cls.B - 1
        return LobeCostFormula(4 * checks, 0, 1 if checks else 0, checks, 1.0, True)
    per_mode_rot = omega + 3
    if kind is TermKind.BOSONIC_PRODUCT:
        return LobeCostFormula(7 * width * cls.B, per_mode_rot * cls.B, cls.B, width, scale, False)
    if kind is TermKind.BOSONIC_LC_HC:
        t = 12 * cls.B * width - 8 * cls.B + 4
        return LobeCostFormula(t, per_mode_rot * cls.B, cls.B + 1, width + 1, 2 * scale, False)
    # mixed terms
    rot = per_mode_rot * cls.B_b
    if not cls.with_hc:
        return LobeCostFormula(4 * cls.B_f + 7 * width * cls.B_b, rot, 1 + cls.B_b, max(cls.B_f, width), scale, False)
    branch = 4 + cls.B_b * (12 * width - 8)
    if cls.C >= 1:
        checks = cls.B_f - 1
        be = (1 if checks else 0) + cls.B_b
        return LobeCostFormula(4 * checks + branch, rot, be, width + 1, scale, False)
    return LobeCostFormula(4 * cls.n_number + branch, rot, 2 + cls.B_b, width + 1, 2 * scale, False)


# ---------------------------------------------------------------------------
# Rotation angles
# ---------------------------------------------------------------------------


def lobe_angles(omega_occ: int, R: int, S: int, cutoff: int) -> float:
    """Ry angle loading the matrix element of ``(a^dag)^R a^S`` onto an ancilla.

    ``omega_occ`` is the register value when the rotation is applied, which
    is always the larger of the two occupations linked by the operator: the
    value after the update when ``R >= S`` and before it otherwise.  The
    same angle therefore serves the operator and its adjoint.  The ancilla
    keeps amplitude ``cos(theta / 2) = <hi| op |lo> / cutoff**((R+S)/2)``
    on ``|0>``; branches with zero amplitude (occupation outside
    ``0..cutoff`` or too few quanta to annihilate) get ``pi``.
    """
    hi = int(omega_occ)
    shift = R - S
    pre = hi - shift if shift >= 0 else hi
    post = pre + shift
    if hi > cutoff or min(pre, post) < 0 or pre < S:
        return math.pi
    amp2 = 1.0
    for s in range(S):
        amp2 *= pre - s
    mid = pre - S
    for r in range(1, R + 1):
        amp2 *= mid + r
    if amp2 <= 0:
        return math.pi
    amp = math.sqrt(amp2 / float(cutoff) ** (R + S))
    return 2 * math.acos(min(1.0, amp))


def angle_table(R: int, S: int, cutoff: int) -> list[float]:
    width = boson_width(cutoff)
    return [lobe_angles(v, R, S, cutoff) for v in range(2**width)]


# ---------------------------------------------------------------------------
# Circuit emission
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EncodingConfig:
    modes: ModeSpec
    omega: int = 1
    controlled: bool = True
    elbow_mode: str = "measured"


class _Ctx:
    """Builder plus the system-qubit lookup for one encoding."""

    def __init__(self, cfg: EncodingConfig):
        self.cfg = cfg
        modes = cfg.modes
        self.width = boson_width(cfg.omega) if modes.n_boson else 0
        self.b = CircuitBuilder(
            system_qubit_count(modes, cfg.omega),
            n_fermionic_modes=modes.n_fermionic,
            n_bosonic_modes=modes.n_boson,
            boson_width=self.width,
        )
        self.ctrl: Literal = (self.b.ctrl, 1)

    def fermion_qubit(self, species: Species, mode: int) -> Qubit:
        modes = self.cfg.modes
        if mode >= modes.count(species):
            raise ValueError(f"{species.value}{mode} is outside the declared modes {modes}")
        offset = modes.n_fermion if species is Species.ANTIFERMION else 0
        return self.b.sys(offset + mode)

    def boson_register(self, mode: int) -> list[Qubit]:
        modes = self.cfg.modes
        if mode >= modes.n_boson:
            raise ValueError(f"a{mode} is outside the declared modes {modes}")
        start = modes.n_fermionic + mode * self.width
        return [self.b.sys(start + w) for w in range(self.width)]


def _emit_flag(ctx: _Ctx, literals: Sequence[Literal]) -> None:
    """New block-encoding ancilla flipped when the control is on and a literal fails."""
    if not literals:
        return
    b = ctx.b
    flag = b.add_be(1)[0]
    lits = [ctx.ctrl] + list(literals)
    lit, anc = compute_and(b, lits)
    b.x(flag, ctx.ctrl)
    b.x(flag, lit)
    uncompute_and(b, lits, anc)


def _emit_zx_string(ctx: _Ctx, qubits: Sequence[Qubit]) -> None:
    """Controlled ``Z_{<q} X_q`` for each qubit in application order."""
    b = ctx.b
    for q in qubits:
        for k in range(q[1]):
            b.z(b.sys(k), ctx.ctrl)
        b.x(q, ctx.ctrl)


def _sequence(ctx: _Ctx, term: Term) -> list[Qubit]:
    """Qubits of the non-number fermionic factors in the order they act."""
    out: list[Qubit] = []
    runs = _mode_runs(term.factors)
    for run in reversed(runs):
        if run[0].fermionic and len(run) == 1:
            out.append(ctx.fermion_qubit(run[0].species, run[0].mode))
    return out


def _permutation_sign(order: Sequence[Qubit], reference: Sequence[Qubit]) -> int:
    pos = [list(reference).index(q) for q in order]
    inversions = sum(1 for i in range(len(pos)) for j in range(i + 1, len(pos)) if pos[i] > pos[j])
    return -1 if inversions % 2 else 1


def _emit_fermion_product(ctx: _Ctx, term: Term, fermions: Sequence[FermionFactor]) -> None:
    literals = [(ctx.fermion_qubit(f.species, f.mode), f.required) for f in fermions]
    _emit_flag(ctx, literals)
    _emit_zx_string(ctx, _sequence(ctx, term))


def _emit_fermion_pair(
    ctx: _Ctx,
    first: Term,
    second: Term,
    fermions1: Sequence[FermionFactor],
    fermions2: Sequence[FermionFactor],
    sign: int,
) -> None:
    """Block-encode ``first + sign * second`` restricted to their fermionic parts.

    Both products act on the same modes with the same number operators and
    have complementary required occupations on a nonempty subset ``D``.  A
    parity network over ``D`` reduces the two validity patterns to one
    check, the ``Z X`` string of ``first`` is applied to both branches, and
    a controlled Z fixes the relative sign on the branch of ``second``.
    """
    b = ctx.b
    req2 = {(f.species, f.mode): f.required for f in fermions2}
    qubit = {(f.species, f.mode): ctx.fermion_qubit(f.species, f.mode) for f in fermions1}
    number = [qubit[(f.species, f.mode)] for f in fermions1 if f.op == "number"]
    active = [f for f in fermions1 if f.op != "number"]
    diff = [f for f in active if f.required != req2[(f.species, f.mode)]]
    same = [f for f in active if f.required == req2[(f.species, f.mode)]]
    if not diff:
        raise UnsupportedTermError("the two products share their validity pattern")
    flips = [qubit[(f.species, f.mode)] for f in active if f.required == 0]
    d_qubits = [qubit[(f.species, f.mode)] for f in diff]
    last = d_qubits[-1]
    for q in flips:
        b.x(q)
    for q in d_qubits[:-1]:
        b.x(q, (last, 1))
    literals = [(q, 0) for q in d_qubits[:-1]]
    literals += [(qubit[(f.species, f.mode)], 1) for f in same]
    literals += [(q, 1) for q in number]
    _emit_flag(ctx, literals)
    for q in reversed(d_qubits[:-1]):
        b.x(q, (last, 1))
    for q in flips:
        b.x(q)
    seq1 = _sequence(ctx, first)
    total = sign * _permutation_sign(_sequence(ctx, second), seq1)
    if total < 0:
        d0 = diff[0]
        b.z(b.ctrl, (qubit[(d0.species, d0.mode)], req2[(d0.species, d0.mode)]))
    _emit_zx_string(ctx, seq1)


def _emit_boson_product(ctx: _Ctx, factor: BosonFactor) -> None:
    b = ctx.b
    reg = ctx.boson_register(factor.mode)
    anc = b.add_be(1)[0]
    sched = gray_transform(angle_table(factor.R, factor.S, ctx.cfg.omega))
    d = factor.shift
    if d > 0:
        emit_add_constant(b, reg, d, ctx.ctrl)
    emit_ucr(b, sched, anc, reg, ctx.ctrl)
    if d < 0:
        emit_add_constant(b, reg, d, ctx.ctrl)


def _emit_boson_branches(ctx: _Ctx, bosons: Sequence[BosonFactor], branch: Literal) -> None:
    """Apply the bosonic part of ``t`` where ``branch`` holds and of ``t^dag`` elsewhere.

    ``e = ctrl AND branch`` selects ``t``; toggling ``e`` with a CNOT from the
    control selects ``t^dag``.  Per mode the branch that raises the
    occupation adds first, one rotation serves both branches, and the
    lowering branch subtracts afterwards.
    """
    b = ctx.b
    (e,) = b.alloc_clean(1)
    b.left_elbow(ctx.ctrl, branch, e)
    on_t = True

    def select(t_branch: bool) -> None:
        nonlocal on_t
        if on_t != t_branch:
            b.x(e, ctx.ctrl)
            on_t = t_branch

    for f in bosons:
        reg = ctx.boson_register(f.mode)
        anc = b.add_be(1)[0]
        sched = gray_transform(angle_table(f.R, f.S, ctx.cfg.omega))
        d = f.shift
        if d:
            select(d > 0)
            emit_add_constant(b, reg, abs(d), (e, 1))
        emit_ucr(b, sched, anc, reg, ctx.ctrl)
        if d:
            select(d < 0)
            emit_add_constant(b, reg, -abs(d), (e, 1))
    select(True)
    b.right_elbow(ctx.ctrl, branch, e)
    b.free_clean([e])


def _emit_indexed_branches(ctx: _Ctx, bosons: Sequence[BosonFactor]) -> None:
    """Bosonic ``t + t^dag`` with an index qubit in ``|+>`` choosing the branch."""
    b = ctx.b
    idx = b.add_be(1)[0]
    b.h(idx)
    _emit_boson_branches(ctx, bosons, (idx, 0))
    b.h(idx)


def _finish(ctx: _Ctx, term: Term, lam_unit: float, cls: TermClass, info: dict | None = None) -> BlockEncoding:
    b = ctx.b
    mag, k = phase_power(term.coefficient)
    b.phase_on(ctx.ctrl, k)
    formula = cost_formula(cls, ctx.cfg.omega)
    details = {"class": cls.kind.value, "B": cls.B, "C": cls.C, "P": cls.P}
    details.update(info or {})
    enc = BlockEncoding(b.finalize(), mag * lam_unit, METHOD, formula.t_count, details)
    return enc if ctx.cfg.controlled else enc.uncontrolled()


def encode_group(group: TermGroup, cfg: EncodingConfig) -> BlockEncoding:
    """Block-encode ``c * t`` (or ``c * (t + t^dag)``) with the construction for its class.

    The returned ``lam`` includes ``|c|``; the phase of ``c`` (a power of i
    after normalization) is applied on the control.
    """
    cls = classify(group)
    ctx = _Ctx(cfg)
    term = group.term
    omega = cfg.omega
    scale = float(omega) ** (cls.P / 2)
    kind = cls.kind
    if kind is TermKind.IDENTITY:
        return _finish(ctx, term, 1.0, cls)
    if kind in (TermKind.FERMIONIC_SINGLE, TermKind.FERMIONIC_PRODUCT):
        _emit_fermion_product(ctx, term, cls.fermions)
        return _finish(ctx, term, 1.0, cls)
    if kind is TermKind.FERMIONIC_LC_HC:
        adj = hermitian_conjugate(term.with_coefficient(1.0))
        _emit_fermion_pair(ctx, term, adj, cls.fermions, _describe_fermions_of(adj, cls), 1)
        return _finish(ctx, term, 1.0, cls)
    if kind is TermKind.BOSONIC_PRODUCT:
        for f in cls.bosons:
            _emit_boson_product(ctx, f)
        return _finish(ctx, term, scale, cls)
    if kind is TermKind.BOSONIC_LC_HC:
        _emit_indexed_branches(ctx, cls.bosons)
        return _finish(ctx, term, 2 * scale, cls)
    # mixed
    if not cls.with_hc:
        for f in cls.bosons:
            _emit_boson_product(ctx, f)
        _emit_fermion_product(ctx, term, cls.fermions)
        return _finish(ctx, term, scale, cls, {"case": "product"})
    if cls.C >= 1:
        first = next(f for f in cls.fermions if f.op != "number")
        branch = (ctx.fermion_qubit(first.species, first.mode), first.required)
        _emit_boson_branches(ctx, cls.bosons, branch)
        adj = hermitian_conjugate(term.with_coefficient(1.0))
        _emit_fermion_pair(ctx, term, adj, cls.fermions, _describe_fermions_of(adj, cls), 1)
        return _finish(ctx, term, scale, cls, {"case": "fermion_selected"})
    literals = [(ctx.fermion_qubit(f.species, f.mode), 1) for f in cls.fermions]
    _emit_flag(ctx, literals)
    _emit_indexed_branches(ctx, cls.bosons)
    return _finish(ctx, term, 2 * scale, cls, {"case": "index_selected"})


def _describe_fermions_of(adj: Term, cls: TermClass) -> tuple[FermionFactor, ...]:
    """Fermionic descriptors of ``t^dag``: creation and annihilation swap roles."""
    swap = {"create": "annihilate", "annihilate": "create", "number": "number"}
    return tuple(FermionFactor(f.species, f.mode, swap[f.op]) for f in cls.fermions)


# ---------------------------------------------------------------------------
# Pair merging and the full Hamiltonian
# ---------------------------------------------------------------------------


def _merge_candidate(group: TermGroup) -> TermClass | None:
    if group.with_hc:
        return None
    try:
        cls = classify(group)
    except (UnsupportedTermError, VanishingTermError):
        return None
    if cls.kind not in (TermKind.FERMIONIC_SINGLE, TermKind.FERMIONIC_PRODUCT):
        return None
    return cls


def mergeable(g1: TermGroup, g2: TermGroup) -> bool:
    """Two fermionic products sharing active and number modes, complementary on some modes,
    with coefficients equal up to a sign."""
    c1, c2 = _merge_candidate(g1), _merge_candidate(g2)
    if c1 is None or c2 is None:
        return False
    k1 = [(f.species, f.mode, f.op == "number") for f in c1.fermions]
    k2 = [(f.species, f.mode, f.op == "number") for f in c2.fermions]
    if k1 != k2 or all(f1.op == f2.op for f1, f2 in zip(c1.fermions, c2.fermions)):
        return False
    a, b_ = g1.term.coefficient, g2.term.coefficient
    return abs(a - b_) <= COEFF_TOL * max(1.0, abs(a)) or abs(a + b_) <= COEFF_TOL * max(1.0, abs(a))


def encode_pair(g1: TermGroup, g2: TermGroup, cfg: EncodingConfig) -> BlockEncoding:
    """Single block-encoding of ``c t1 + (+-c) t2`` for a :func:`mergeable` pair, ``lam = |c|``."""
    if not mergeable(g1, g2):
        raise UnsupportedTermError("groups cannot be merged")
    c1, c2 = classify(g1), classify(g2)
    ctx = _Ctx(cfg)
    ratio = g2.term.coefficient / g1.term.coefficient
    sign = 1 if ratio.real > 0 else -1
    _emit_fermion_pair(ctx, g1.term, g2.term, c1.fermions, c2.fermions, sign)
    mag, k = phase_power(g1.term.coefficient)
    ctx.b.phase_on(ctx.ctrl, k)
    enc = BlockEncoding(
        ctx.b.finalize(), mag, METHOD, 4 * (c1.B - 1), {"class": "fermionic_pair", "B": c1.B, "C": c1.C, "P": 0}
    )
    return enc if cfg.controlled else enc.uncontrolled()


@dataclass
class HamiltonianEncoding:
    """Top-level encoding together with the per-group pieces it was assembled from."""

    encoding: BlockEncoding
    parts: list[BlockEncoding] = field(default_factory=list)
    groups: list[tuple[TermGroup, ...]] = field(default_factory=list)


def _plan(expr: OperatorExpr, merge_pairs: bool) -> list[tuple[TermGroup, ...]]:
    plan: list[tuple[TermGroup, ...]] = []
    used: set[int] = set()
    groups = list(expr.groups)
    for i, g in enumerate(groups):
        if i in used:
            continue
        used.add(i)
        partner = None
        if merge_pairs:
            partner = next((j for j in range(i + 1, len(groups)) if j not in used and mergeable(g, groups[j])), None)
        if partner is None:
            plan.append((g,))
        else:
            used.add(partner)
            plan.append((g, groups[partner]))
    return plan


def encode_hamiltonian_parts(expr: OperatorExpr, cfg: EncodingConfig, merge_pairs: bool = True) -> HamiltonianEncoding:
    plan = []
    for item in _plan(expr, merge_pairs):
        try:
            classify(item[0])
        except VanishingTermError:
            continue
        plan.append(item)
    if not plan:
        raise ValueError("cannot block-encode an empty (or identically zero) expression")
    sub_cfg = replace(cfg, controlled=True)
    parts = [encode_group(it[0], sub_cfg) if len(it) == 1 else encode_pair(it[0], it[1], sub_cfg) for it in plan]
    if len(parts) == 1:
        enc = parts[0]
    else:
        enc = combine(parts, mode="lco", method=METHOD)
        formulas = [p.t_formula for p in parts]
        enc = replace(enc, info={"groups": len(parts), "group_t_formula": sum(f or 0 for f in formulas)})
    if not cfg.controlled:
        enc = enc.uncontrolled()
    return HamiltonianEncoding(enc, parts, plan)


def encode_hamiltonian(expr: OperatorExpr, cfg: EncodingConfig, merge_pairs: bool = True) -> BlockEncoding:
    """Linear combination of per-group encodings with ``lam = sum_g |c_g| lam_g``."""
    return encode_hamiltonian_parts(expr, cfg, merge_pairs).encoding


def lobe_encode(
    expr: OperatorExpr, modes: ModeSpec, omega: int = 1, *, controlled: bool = True, merge_pairs: bool = True
) -> BlockEncoding:
    return encode_hamiltonian(expr, EncodingConfig(modes, omega, controlled), merge_pairs)
