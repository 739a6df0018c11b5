"""Reusable compiled subcircuits.

Every construction comes in two flavours: an ``emit_*`` function that writes
gates into an existing :class:`~lobe.circuit.CircuitBuilder` on caller-chosen
qubits, and a ``compile_*`` wrapper that builds a standalone fragment (the
operated-on qubits form the system register, the optional control is the
layout's control qubit).

Registers are lists of symbolic qubits in little-endian order: ``reg[j]``
carries bit ``j`` of the encoded integer.  A *literal* is a ``(qubit,
polarity)`` pair that is true when the qubit equals the polarity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, CircuitBuilder, GateKind, Qubit

Literal = tuple[Qubit, int]


# ---------------------------------------------------------------------------
# AND ladders and multi-controlled gates
# ---------------------------------------------------------------------------


def compute_and(b: CircuitBuilder, literals: Sequence[Literal]) -> tuple[Literal | None, list[Qubit]]:
    """Compute the conjunction of ``literals`` with a ladder of left elbows.

    Returns the literal holding the conjunction and the clean ancillae used
    (``len(literals) - 1`` of them).  Zero literals give ``None``; a single
    literal is returned as is.
    """
    literals = list(literals)
    if len(literals) <= 1:
        return (literals[0] if literals else None), []
    anc = b.alloc_clean(len(literals) - 1)
    acc = literals[0]
    for lit, t in zip(literals[1:], anc):
        b.left_elbow(acc, lit, t)
        acc = (t, 1)
    return acc, anc


def uncompute_and(b: CircuitBuilder, literals: Sequence[Literal], anc: Sequence[Qubit]) -> None:
    literals = list(literals)
    if not anc:
        return
    accs = [literals[0]] + [(t, 1) for t in anc[:-1]]
    for acc, lit, t in reversed(list(zip(accs, literals[1:], anc))):
        b.right_elbow(acc, lit, t)
    b.free_clean(anc)


def emit_controlled_pauli(b: CircuitBuilder, kind: GateKind, target: Qubit, literals: Sequence[Literal]) -> None:
    """Apply X, Y or Z on ``target`` conditioned on every literal holding."""
    lit, anc = compute_and(b, literals)
    b.gate(kind, (target,), (lit,) if lit else ())
    uncompute_and(b, literals, anc)


def emit_mcx(b: CircuitBuilder, literals: Sequence[Literal], target: Qubit) -> None:
    emit_controlled_pauli(b, GateKind.X, target, literals)


def emit_controlled_ry(b: CircuitBuilder, target: Qubit, angle: float, literal: Literal | None) -> None:
    """Ry(angle) on ``target`` when ``literal`` holds, from two half rotations and two CNOTs."""
    if literal is None:
        b.ry(target, angle)
        return
    b.ry(target, angle / 2)
    b.x(target, literal)
    b.ry(target, -angle / 2)
    b.x(target, literal)


def emit_controlled_h(b: CircuitBuilder, target: Qubit, literal: Literal | None) -> None:
    if literal is None:
        b.h(target)
        return
    # Ry(pi/4) Z Ry(-pi/4) = H
    b.ry(target, -math.pi / 4)
    b.z(target, literal)
    b.ry(target, math.pi / 4)


def compile_mcx(n_controls: int, polarities: Sequence[int] | None = None) -> Circuit:
    """Multi-controlled X: system qubits ``0..n-1`` are controls, qubit ``n`` the target."""
    if n_controls < 1:
        raise ValueError("n_controls must be at least 1")
    pols = [1] * n_controls if polarities is None else list(polarities)
    if len(pols) != n_controls:
        raise ValueError("one polarity per control is required")
    b = CircuitBuilder(n_controls + 1, controlled=False)
    emit_mcx(b, [(b.sys(k), p) for k, p in enumerate(pols)], b.sys(n_controls))
    return b.finalize()


# ---------------------------------------------------------------------------
# Addition of a classical constant
# ---------------------------------------------------------------------------


class AddStrategy(enum.Enum):
    INCREMENTER_CHAIN = "incrementer_chain"
    LOAD_ADD_UNLOAD = "load_add_unload"
    INLINED_CONTROLLED_ADD = "inlined_controlled_add"


@dataclass(frozen=True)
class AdditionPlan:
    m: int
    n_bits: int
    p: int
    strategy: AddStrategy | None
    t_count: int
    clean_ancillae: int
    controlled: bool = True
    complement: bool = False  # incrementer chain adds 2**N - m under X conjugation


def trailing_zeros(m: int) -> int:
    return (m & -m).bit_length() - 1 if m else 0


def incrementer_cost(n_bits: int, controlled: bool) -> tuple[int, int]:
    """(T count, clean ancillae) of a single (controlled) incrementer on ``n_bits`` qubits."""
    k = n_bits - 1 if controlled else n_bits - 2
    k = max(0, k)
    return 4 * k, k


def _chain_cost(m: int, n_bits: int, controlled: bool) -> tuple[int, int]:
    t = 0
    clean = 0
    for i in range(n_bits):
        if (m >> i) & 1:
            ti, ci = incrementer_cost(n_bits - i, controlled)
            t += ti
            clean = max(clean, ci)
    return t, clean


def _candidate_plans(m: int, n_bits: int, controlled: bool) -> list[AdditionPlan]:
    p = trailing_zeros(m)
    n = n_bits - p
    plans = []
    direct = _chain_cost(m, n_bits, controlled)
    comp_m = (2**n_bits - m) % 2**n_bits
    comp = _chain_cost(comp_m, n_bits, controlled)
    use_comp = comp[0] < direct[0]
    t, c = comp if use_comp else direct
    plans.append(AdditionPlan(m, n_bits, p, AddStrategy.INCREMENTER_CHAIN, t, c, controlled, use_comp))
    k = max(0, n - 1) if controlled else max(0, n - 2)
    # loaded constant (n qubits) plus n-1 carries
    plans.append(AdditionPlan(m, n_bits, p, AddStrategy.LOAD_ADD_UNLOAD, 4 * max(0, n - 1), 2 * n - 1, controlled))
    if controlled:
        t_inl = 4 * max(0, 2 * n - 3)
    else:
        t_inl = 4 * max(0, n - 2)
    plans.append(AdditionPlan(m, n_bits, p, AddStrategy.INLINED_CONTROLLED_ADD, t_inl, k, controlled))
    return plans


def plan_add_constant(
    m: int, n_bits: int, controlled: bool = True, strategy: AddStrategy | str | None = None
) -> AdditionPlan:
    """Pick a strategy: lowest predicted T count, then fewest clean ancillae, then enum order."""
    if n_bits < 1:
        raise ValueError("register must have at least one qubit")
    if not 0 <= m < 2**n_bits:
        raise ValueError(f"constant {m} out of range for {n_bits} bits")
    if m == 0:
        return AdditionPlan(0, n_bits, 0, None, 0, 0, controlled)
    plans = _candidate_plans(m, n_bits, controlled)
    if strategy is not None:
        strategy = AddStrategy(strategy)
        return next(pl for pl in plans if pl.strategy is strategy)
    order = list(AddStrategy)
    return min(plans, key=lambda pl: (pl.t_count, pl.clean_ancillae, order.index(pl.strategy)))


def emit_increment(b: CircuitBuilder, reg: Sequence[Qubit], control: Literal | None) -> None:
    """``reg += 1`` (mod 2**len(reg)) when ``control`` holds."""
    reg = list(reg)
    n = len(reg)
    if n == 0:
        return
    if control is None:
        if n >= 2:
            lits = [(q, 1) for q in reg[: n - 1]]
            # carries e_k = b_0 ... b_{k+1}, k = 0 .. n-3
            anc = b.alloc_clean(n - 2)
            acc = lits[0]
            accs = []
            for lit, t in zip(lits[1:], anc):
                accs.append(acc)
                b.left_elbow(acc, lit, t)
                acc = (t, 1)
            for k in range(n - 1, 1, -1):
                e = anc[k - 2]
                b.x(reg[k], (e, 1))
                b.right_elbow(accs[k - 2], lits[k - 1], e)
            b.x(reg[1], (reg[0], 1))
            b.free_clean(anc)
        b.x(reg[0])
        return
    lits = [control] + [(q, 1) for q in reg[: n - 1]]
    anc = b.alloc_clean(n - 1)
    acc = lits[0]
    accs = []
    for lit, t in zip(lits[1:], anc):
        accs.append(acc)
        b.left_elbow(acc, lit, t)
        acc = (t, 1)
    for k in range(n - 1, 0, -1):
        e = anc[k - 1]
        b.x(reg[k], (e, 1))
        b.right_elbow(accs[k - 1], lits[k], e)
    b.x(reg[0], control)
    b.free_clean(anc)


def emit_decrement(b: CircuitBuilder, reg: Sequence[Qubit], control: Literal | None) -> None:
    for q in reg:
        b.x(q)
    emit_increment(b, reg, control)
    for q in reg:
        b.x(q)


def _emit_register_add(b: CircuitBuilder, target: Sequence[Qubit], source: Sequence[Qubit]) -> None:
    """``target += source`` (mod 2**n) with n-1 clean carries and n-1 left elbows."""
    t, s = list(target), list(source)
    n = len(t)
    if n == 1:
        b.x(t[0], (s[0], 1))
        return
    c = b.alloc_clean(n - 1)
    b.left_elbow((t[0], 1), (s[0], 1), c[0])
    for i in range(1, n - 1):
        b.x(t[i], (c[i - 1], 1))
        b.x(s[i], (c[i - 1], 1))
        b.left_elbow((t[i], 1), (s[i], 1), c[i])
        b.x(c[i], (c[i - 1], 1))
    b.x(t[n - 1], (s[n - 1], 1))
    b.x(t[n - 1], (c[n - 2], 1))
    for i in range(n - 2, 0, -1):
        b.x(c[i], (c[i - 1], 1))
        b.right_elbow((t[i], 1), (s[i], 1), c[i])
        b.x(s[i], (c[i - 1], 1))
        b.x(t[i], (s[i], 1))
    b.right_elbow((t[0], 1), (s[0], 1), c[0])
    b.x(t[0], (s[0], 1))
    b.free_clean(c)


def _emit_load_add_unload(b: CircuitBuilder, reg: list[Qubit], m: int, p: int, control: Literal | None) -> None:
    n = len(reg) - p
    mp = m >> p
    src = b.alloc_clean(n)

    def load() -> None:
        for j in range(n):
            if (mp >> j) & 1:
                if control is None:
                    b.x(src[j])
                else:
                    b.x(src[j], control)

    load()
    _emit_register_add(b, reg[p:], src)
    load()
    b.free_clean(src)


def _emit_inlined_add(b: CircuitBuilder, reg: list[Qubit], m: int, p: int, control: Literal | None) -> None:
    r = reg[p:]
    n = len(r)
    mp = m >> p  # lowest bit is 1
    bit = [(mp >> i) & 1 for i in range(n)]
    # carries into bit i: c_1 = r_0 (since m'_0 = 1), c_{i+1} = maj(r_i, m_i, c_i)
    carry: dict[int, Literal] = {}
    if n >= 2:
        carry[1] = (r[0], 1)
    anc = b.alloc_clean(max(0, n - 2))
    for i in range(1, n - 1):
        t = anc[i - 1]
        if bit[i] == 0:
            b.left_elbow((r[i], 1), carry[i], t)
        else:
            b.left_elbow((r[i], 0), (carry[i][0], 1 - carry[i][1]), t)
            b.x(t)
        carry[i + 1] = (t, 1)
    for i in range(n - 1, 0, -1):
        ci = carry[i]
        lit = ci if bit[i] == 0 else (ci[0], 1 - ci[1])
        if control is None:
            b.x(r[i], ci)
            if bit[i]:
                b.x(r[i])
        else:
            (w,) = b.alloc_clean(1)
            b.left_elbow(control, lit, w)
            b.x(r[i], (w, 1))
            b.right_elbow(control, lit, w)
            b.free_clean([w])
        if i >= 2:
            # uncompute c_i, which only depends on r_{<i}
            t = anc[i - 2]
            if bit[i - 1] == 0:
                b.right_elbow((r[i - 1], 1), carry[i - 1], t)
            else:
                b.x(t)
                b.right_elbow((r[i - 1], 0), (carry[i - 1][0], 1 - carry[i - 1][1]), t)
    if control is None:
        b.x(r[0])
    else:
        b.x(r[0], control)
    b.free_clean(anc)


def emit_add_constant(
    b: CircuitBuilder,
    reg: Sequence[Qubit],
    m: int,
    control: Literal | None = None,
    strategy: AddStrategy | str | None = None,
) -> AdditionPlan:
    """``reg += m`` (mod 2**len(reg)) when ``control`` holds; returns the plan used."""
    reg = list(reg)
    n_bits = len(reg)
    m %= 2**n_bits
    plan = plan_add_constant(m, n_bits, control is not None, strategy)
    if plan.strategy is None:
        return plan
    if plan.strategy is AddStrategy.INCREMENTER_CHAIN:
        mm = (2**n_bits - m) if plan.complement else m
        if plan.complement:
            for q in reg:
                b.x(q)
        for i in range(n_bits):
            if (mm >> i) & 1:
                emit_increment(b, reg[i:], control)
        if plan.complement:
            for q in reg:
                b.x(q)
    elif plan.strategy is AddStrategy.LOAD_ADD_UNLOAD:
        _emit_load_add_unload(b, reg, m, plan.p, control)
    else:
        _emit_inlined_add(b, reg, m, plan.p, control)
    return plan


def compile_add_constant(
    n_bits: int, m: int, controlled: bool = False, strategy: AddStrategy | str | None = None
) -> Circuit:
    """Standalone adder: the register is the system register (bit 0 on system qubit 0)."""
    b = CircuitBuilder(n_bits, controlled=controlled)
    emit_add_constant(b, [b.sys(k) for k in range(n_bits)], m, (b.ctrl, 1) if controlled else None, strategy)
    return b.finalize()


# ---------------------------------------------------------------------------
# Uniformly controlled rotations
# ---------------------------------------------------------------------------


def gray_code(k: int) -> int:
    return k ^ (k >> 1)


def _walsh(vec: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform, ``out[j] = sum_l (-1)^{popcount(l & j)} vec[l]``."""
    out = np.array(vec, dtype=float)
    h = 1
    n = len(out)
    while h < n:
        view = out.reshape(-1, 2, h)
        a = view[:, 0, :].copy()
        view[:, 0, :] += view[:, 1, :]
        view[:, 1, :] = a - view[:, 1, :]
        h *= 2
    return out


def _pad_pow2(values: Sequence[float]) -> np.ndarray:
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1 or len(vals) == 0:
        raise ValueError("need a non-empty 1-d sequence")
    size = 1 << (len(vals) - 1).bit_length()
    return np.concatenate([vals, np.zeros(size - len(vals))])


@dataclass(frozen=True)
class AngleSchedule:
    raw_angles: tuple[float, ...]
    processed_angles: tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.raw_angles)

    @property
    def n_index(self) -> int:
        return self.size.bit_length() - 1


def gray_transform(alphas: Sequence[float]) -> AngleSchedule:
    """``theta_k = (1/L) sum_l (-1)^{popcount(l & g_k)} alpha_l`` with reflected Gray code ``g_k``."""
    raw = _pad_pow2(alphas)
    size = len(raw)
    w = _walsh(raw)
    theta = w[[gray_code(k) for k in range(size)]] / size
    return AngleSchedule(tuple(float(x) for x in raw), tuple(float(x) for x in theta))


def inverse_gray_transform(thetas: Sequence[float]) -> np.ndarray:
    th = np.asarray(thetas, dtype=float)
    size = len(th)
    by_code = np.zeros(size)
    by_code[[gray_code(k) for k in range(size)]] = th
    return _walsh(by_code)


def _ladder_bits(size: int) -> list[int | None]:
    """Index bit whose CNOT follows rotation ``k`` (``None`` when L == 1)."""
    out: list[int | None] = []
    for k in range(size):
        diff = gray_code(k) ^ gray_code((k + 1) % size)
        out.append(diff.bit_length() - 1 if diff else None)
    return out


def emit_ucr(
    b: CircuitBuilder,
    schedule: AngleSchedule,
    target: Qubit,
    index: Sequence[Qubit],
    control: Literal | None = None,
) -> None:
    """Apply Ry(alpha_l) to ``target`` when ``index`` holds ``l`` (and ``control`` holds).

    The uncontrolled form alternates Ry(theta_k) with CNOTs along the Gray
    code.  The controlled form sources those CNOTs from AND(control, index bit)
    ancillae, so with the control off only Ry(sum theta) = Ry(alpha_0)
    survives, which a final open-controlled rotation removes.
    """
    index = list(index)
    if len(index) != schedule.n_index:
        raise ValueError(f"index register has {len(index)} qubits, schedule needs {schedule.n_index}")
    thetas = schedule.processed_angles
    bits = _ladder_bits(schedule.size)
    if control is None:
        sources: list[Literal] = [(q, 1) for q in index]
        anc: list[Qubit] = []
    else:
        anc = b.alloc_clean(len(index))
        for q, a in zip(index, anc):
            b.left_elbow(control, (q, 1), a)
        sources = [(a, 1) for a in anc]
    for theta, j in zip(thetas, bits):
        b.ry(target, theta)
        if j is not None:
            b.x(target, sources[j])
    if control is not None:
        for q, a in reversed(list(zip(index, anc))):
            b.right_elbow(control, (q, 1), a)
        b.free_clean(anc)
        alpha0 = schedule.raw_angles[0]
        emit_controlled_ry(b, target, -alpha0, (control[0], 1 - control[1]))


def compile_ucr(alphas: Sequence[float] | AngleSchedule, controlled: bool = False) -> Circuit:
    """Standalone UCR: system qubit 0 is the target, qubits ``1..`` the little-endian index."""
    sched = alphas if isinstance(alphas, AngleSchedule) else gray_transform(alphas)
    w = sched.n_index
    b = CircuitBuilder(w + 1, controlled=controlled)
    emit_ucr(b, sched, b.sys(0), [b.sys(1 + j) for j in range(w)], (b.ctrl, 1) if controlled else None)
    return b.finalize()


# ---------------------------------------------------------------------------
# State preparation
# ---------------------------------------------------------------------------

PROB_TOL = 1e-12


def grover_rudolph_angles(probabilities: Sequence[float]) -> list[np.ndarray]:
    """Per-layer rotation angles, most significant bit first.

    Layer ``d`` (``d = 0`` for the top bit) holds ``2**d`` angles indexed by the
    value of the bits above it.
    """
    p = np.asarray(probabilities, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    if abs(p.sum() - 1) > PROB_TOL:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    p = _pad_pow2(p)
    n = len(p).bit_length() - 1
    layers = []
    for d in range(n):
        blocks = p.reshape(2**d, 2, -1).sum(axis=2)  # [prefix, bit]
        tot = blocks.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(tot > 0, blocks[:, 0] / np.where(tot > 0, tot, 1), 1.0)
        layers.append(2 * np.arccos(np.sqrt(np.clip(ratio, 0.0, 1.0))))
    return layers


def emit_grover_rudolph(b: CircuitBuilder, probabilities: Sequence[float], reg: Sequence[Qubit]) -> None:
    """Prepare ``sum_l sqrt(p_l) |l>`` on the little-endian register ``reg`` from ``|0...0>``."""
    layers = grover_rudolph_angles(probabilities)
    reg = list(reg)
    n = len(layers)
    if len(reg) != n:
        raise ValueError(f"register has {len(reg)} qubits, distribution needs {n}")
    for d, angles in enumerate(layers):
        j = n - 1 - d
        # angle index v = l >> (j + 1), i.e. the little-endian value of reg[j+1:]
        emit_ucr(b, gray_transform(angles), reg[j], reg[j + 1 :])


def compile_grover_rudolph(probabilities: Sequence[float]) -> Circuit:
    n = len(_pad_pow2(probabilities)).bit_length() - 1
    b = CircuitBuilder(n, controlled=False)
    emit_grover_rudolph(b, probabilities, [b.sys(k) for k in range(n)])
    return b.finalize()


def usp_width(n: int) -> int:
    return max(0, (n - 1).bit_length())


def emit_usp(b: CircuitBuilder, n: int, reg: Sequence[Qubit], control: Literal | None = None) -> None:
    """Prepare ``(1/sqrt n) sum_{l<n} |l>`` on the low ``ceil(log2 n)`` qubits of ``reg``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    width = usp_width(n)
    reg = list(reg)[:width]
    if n == 2**width:
        for q in reg:
            emit_controlled_h(b, q, control)
        return
    top = reg[-1]
    half = 2 ** (width - 1)
    n1 = n - half
    emit_controlled_ry(b, top, 2 * math.acos(math.sqrt(half / n)), control)
    if control is None:
        upper: Literal = (top, 1)
        lower: Literal = (top, 0)
        for q in reg[:-1]:
            emit_controlled_h(b, q, lower)
        emit_usp(b, n1, reg[:-1], upper)
        return
    (e,) = b.alloc_clean(1)
    b.left_elbow(control, (top, 1), e)  # e = control AND top
    b.x(e, control)  # e = control AND NOT top
    for q in reg[:-1]:
        emit_controlled_h(b, q, (e, 1))
    b.x(e, control)
    emit_usp(b, n1, reg[:-1], (e, 1))
    b.right_elbow(control, (top, 1), e)
    b.free_clean([e])


def compile_usp(n: int) -> Circuit:
    width = usp_width(n)
    b = CircuitBuilder(width, controlled=False)
    emit_usp(b, n, [b.sys(k) for k in range(width)])
    return b.finalize()
