import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import clean_block, from_bits, little_endian_index, run_classical, to_bits
from lobe.circuit import GateKind, resources, simulate
from lobe.primitives import (
    AddStrategy,
    compile_add_constant,
    compile_grover_rudolph,
    compile_mcx,
    compile_ucr,
    compile_usp,
    gray_transform,
    grover_rudolph_angles,
    inverse_gray_transform,
    plan_add_constant,
    usp_width,
)
from oracles import mcx_matrix, ry

# -- multi-controlled X --------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_mcx_matches_brute_force(n):
    rng = np.random.default_rng(n)
    pols = [int(x) for x in rng.integers(0, 2, n)]
    circ = compile_mcx(n, pols)
    block, leak = clean_block(circ)
    assert leak <= 1e-12
    assert np.max(np.abs(block - mcx_matrix(n, pols))) <= 1e-12
    block_m, leak_m = clean_block(circ, "measured")
    assert leak_m <= 1e-12 and np.max(np.abs(block_m - block)) <= 1e-10


@pytest.mark.parametrize("n,t,clean", [(1, 0, 0), (2, 4, 1), (3, 8, 2), (4, 12, 3), (5, 16, 4)])
def test_mcx_costs(n, t, clean):
    rep = resources(compile_mcx(n))
    assert rep.t_count == t == 4 * (n - 1)
    assert rep.clean_ancillae_peak == clean


def test_mcx_single_control_is_cnot():
    circ = compile_mcx(1)
    assert len(circ.gates) == 1 and circ.gates[0].kind is GateKind.X


# -- classical-constant addition ------------------------------------------------------


def _check_adder(n_bits, m, controlled, strategy=None):
    circ = compile_add_constant(n_bits, m, controlled, strategy)
    lay = circ.layout
    total = lay.total
    sys0 = lay.system_range.start
    for ctrl in (0, 1) if controlled else (1,):
        for x in range(2**n_bits):
            bits = [0] * total
            if controlled:
                bits[0] = ctrl
            for k in range(n_bits):
                bits[sys0 + k] = (x >> k) & 1
            out = run_classical(circ, bits)
            y = sum(out[sys0 + k] << k for k in range(n_bits))
            expect = (x + m) % 2**n_bits if ctrl else x
            assert y == expect, (n_bits, m, controlled, strategy, x)
            assert not any(out[q] for q in lay.clean_range)
            if controlled:
                assert out[0] == ctrl
    plan = plan_add_constant(m, n_bits, controlled, strategy)
    rep = resources(circ)
    assert (rep.t_count, rep.clean_ancillae_peak) == (plan.t_count, plan.clean_ancillae)
    return plan


@pytest.mark.parametrize("n_bits", range(1, 7))
@pytest.mark.parametrize("controlled", [True, False])
def test_adder_semantics_all_constants(n_bits, controlled):
    for m in range(2**n_bits):
        _check_adder(n_bits, m, controlled)
        if m:
            for strategy in AddStrategy:
                _check_adder(n_bits, m, controlled, strategy)


def test_adder_statevector_agrees_with_classical():
    circ = compile_add_constant(4, 11, controlled=True, strategy="inlined_controlled_add")
    block, leak = clean_block(circ, "measured")
    assert leak <= 1e-12
    for col in range(32):
        ctrl, x = col >> 4, little_endian_index(col & 15, 4)
        y = (x + 11) % 16 if ctrl else x
        row = (ctrl << 4) | little_endian_index(y, 4)
        assert abs(block[row, col] - 1) <= 1e-12


def test_increment_by_one_uses_incrementer():
    plan = plan_add_constant(1, 5, controlled=True)
    assert plan.strategy is AddStrategy.INCREMENTER_CHAIN
    assert (plan.t_count, plan.clean_ancillae) == (16, 4)


def test_eleven_on_five_bits_load_add_unload():
    plan = plan_add_constant(11, 5, controlled=True)
    assert plan.strategy is AddStrategy.LOAD_ADD_UNLOAD
    assert (plan.t_count, plan.clean_ancillae) == (4 * (5 - 0 - 1), 2 * 5 - 1) == (16, 9)
    others = {
        s: plan_add_constant(11, 5, True, s).t_count
        for s in (AddStrategy.INCREMENTER_CHAIN, AddStrategy.INLINED_CONTROLLED_ADD)
    }
    assert others == {AddStrategy.INCREMENTER_CHAIN: 24, AddStrategy.INLINED_CONTROLLED_ADD: 28}


def test_inlined_cost_formula():
    for n in range(2, 7):
        plan = plan_add_constant(1, n, True, "inlined_controlled_add")
        assert (plan.t_count, plan.clean_ancillae) == (4 * (2 * n - 3), n - 1)


def test_twelve_is_bit_shifted():
    circ = compile_add_constant(5, 12, controlled=True, strategy="load_add_unload")
    sys0 = circ.layout.system_range.start
    touched = {q for g in circ.gates for q in g.qubits()}
    assert sys0 not in touched and sys0 + 1 not in touched
    assert plan_add_constant(12, 5, True, "load_add_unload").t_count == 4 * (5 - 2 - 1)


@pytest.mark.parametrize("m", [1, 3, 11, 20])
def test_subtraction_is_x_conjugated_addition(m):
    n = 5
    sub = compile_add_constant(n, 2**n - m)
    for x in range(2**n):
        bits = [0] * sub.n_qubits
        sys0 = sub.layout.system_range.start
        for k in range(n):
            bits[sys0 + k] = (x >> k) & 1
        out = run_classical(sub, bits)
        y = sum(out[sys0 + k] << k for k in range(n))
        flipped = (2**n - 1) ^ (((2**n - 1) ^ x) + m) % 2**n
        assert y == flipped == (x - m) % 2**n


def test_zero_constant_is_empty():
    assert compile_add_constant(4, 0, controlled=True).gates == ()
    assert plan_add_constant(0, 4).t_count == 0


def test_constant_out_of_range():
    with pytest.raises(ValueError):
        plan_add_constant(16, 4)


# -- Gray transform --------------------------------------------------------------------


def _explicit_m(size):
    gray = [k ^ (k >> 1) for k in range(size)]
    return np.array([[(-1) ** bin(l & g).count("1") for l in range(size)] for g in gray]) / size


def test_gray_symmetric_pair():
    assert np.allclose(gray_transform([0.7, 0.7]).processed_angles, [0.7, 0])


def test_gray_pair():
    assert np.allclose(gray_transform([0.3, -1.1]).processed_angles, [(0.3 - 1.1) / 2, (0.3 + 1.1) / 2])


def test_gray_first_row_is_uniform():
    m = _explicit_m(4)
    assert np.allclose(m[0], 0.25)
    alphas = [0.1, 0.2, -0.4, 1.3]
    assert np.allclose(gray_transform(alphas).processed_angles, m @ alphas, atol=1e-14)


def test_gray_pads_with_zeros():
    sched = gray_transform([1.0, 2.0, 3.0])
    assert sched.raw_angles == (1.0, 2.0, 3.0, 0.0)
    assert len(sched.processed_angles) == 4


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=32))
def test_gray_transform_matches_matrix_and_inverts(alphas):
    sched = gray_transform(alphas)
    size = sched.size
    assert np.allclose(sched.processed_angles, _explicit_m(size) @ sched.raw_angles, atol=1e-12)
    assert np.allclose(inverse_gray_transform(sched.processed_angles), sched.raw_angles, atol=1e-12)


# -- uniformly controlled rotations ------------------------------------------------------


def _ucr_oracle(alphas):
    size = len(alphas)
    w = size.bit_length() - 1
    dim = 2 * size
    u = np.zeros((dim, dim))
    for s in range(dim):
        t, idx_bits = s >> w, s & (size - 1)
        l = little_endian_index(idx_bits, w)
        rot = ry(alphas[l])
        for t_out in (0, 1):
            u[(t_out << w) | idx_bits, s] = rot[t_out, t]
    return u


@pytest.mark.parametrize("size", [1, 2, 4, 8])
@pytest.mark.parametrize("controlled", [False, True])
def test_ucr_matches_direct_sum(size, controlled):
    rng = np.random.default_rng(size)
    alphas = rng.uniform(-np.pi, np.pi, size)
    circ = compile_ucr(alphas, controlled)
    block, leak = clean_block(circ)
    assert leak <= 1e-12
    expect = _ucr_oracle(alphas)
    if controlled:
        expect = np.block([[np.eye(2 * size), np.zeros((2 * size, 2 * size))], [np.zeros((2 * size, 2 * size)), expect]])
    assert np.max(np.abs(block - expect)) <= 1e-10


def test_ucr_uniform_schedule_is_global_rotation():
    phi = 0.83
    block, _ = clean_block(compile_ucr([phi] * 4))
    assert np.allclose(block, np.kron(ry(phi), np.eye(4)), atol=1e-12)


def test_controlled_ucr_costs():
    circ = compile_ucr([0.1, 0.2, 0.3, 0.4], controlled=True)
    rep = resources(circ)
    assert rep.rotation_count <= 4 + 3
    assert rep.t_count == 4 * 2
    assert rep.clean_ancillae_peak == 2


def test_controlled_ucr_off_is_identity():
    circ = compile_ucr([0.5, -1.2, 2.0, 0.1, 0.3, 0.2, -0.1, 0.9], controlled=True)
    block, _ = clean_block(circ)
    half = block.shape[0] // 2
    assert np.max(np.abs(block[:half, :half] - np.eye(half))) <= 1e-10


def test_ucr_padding():
    circ = compile_ucr([0.4, 0.5, 0.6])
    block, _ = clean_block(circ)
    assert np.max(np.abs(block - _ucr_oracle([0.4, 0.5, 0.6, 0.0]))) <= 1e-12


# -- Grover-Rudolph -----------------------------------------------------------------------


def _prepared_register(circ, n):
    state = simulate(circ, 0)
    out = np.zeros(2**n, dtype=complex)
    for s in range(2**n):
        out[little_endian_index(s, n)] = state[s]
    return out


def test_gr_uniform_angles():
    layers = grover_rudolph_angles([0.25] * 4)
    assert all(np.allclose(layer, np.pi / 2) for layer in layers)
    amps = _prepared_register(compile_grover_rudolph([0.25] * 4), 2)
    assert np.allclose(amps, 0.5)


def test_gr_first_angle():
    p = [0.1, 0.2, 0.3, 0.4]
    assert grover_rudolph_angles(p)[0][0] == pytest.approx(2 * math.acos(math.sqrt(0.1 + 0.2)))


def test_gr_degenerate():
    circ = compile_grover_rudolph([1.0, 0.0])
    assert [g.kind for g in circ.gates] == [GateKind.RY]
    assert circ.gates[0].angle == 0
    assert np.allclose(simulate(circ, 0), [1, 0])


@pytest.mark.parametrize("bad", [[0.5, 0.6], [-0.1, 1.1]])
def test_gr_rejects_bad_distributions(bad):
    with pytest.raises(ValueError):
        compile_grover_rudolph(bad)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_gr_random_distributions(length, seed):
    rng = np.random.default_rng(seed)
    p = rng.random(length)
    p[rng.random(length) < 0.2] = 0
    if p.sum() == 0:
        p[0] = 1
    p /= p.sum()
    circ = compile_grover_rudolph(p)
    size = 1 << (length - 1).bit_length()
    n = size.bit_length() - 1
    padded = np.concatenate([p, np.zeros(size - length)])
    if n == 0:
        assert circ.gates == ()
        return
    amps = _prepared_register(circ, n)
    assert np.max(np.abs(amps - np.sqrt(padded))) <= 1e-10
    assert sum(g.kind is GateKind.RY for g in circ.gates) == size - 1


# -- uniform state preparation -------------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 17))
def test_usp_amplitudes(n):
    circ = compile_usp(n)
    width = usp_width(n)
    assert circ.layout.n_system == width
    block, leak = clean_block(circ)
    assert leak <= 1e-12
    amps = np.zeros(2**width, dtype=complex)
    for s in range(2**width):
        amps[little_endian_index(s, width)] = block[s, 0]
    expect = np.array([1 / math.sqrt(n)] * n + [0] * (2**width - n))
    assert np.max(np.abs(amps - expect)) <= 1e-12


def test_usp_powers_of_two_use_hadamards():
    circ = compile_usp(4)
    assert [g.kind for g in circ.gates] == [GateKind.H, GateKind.H]
    assert resources(circ).rotation_count == 0
    assert compile_usp(1).gates == ()


def test_usp_three():
    circ = compile_usp(3)
    first = circ.gates[0]
    assert first.kind is GateKind.RY
    # R_3 maps |0> to (sqrt2, 1)/sqrt3
    assert math.cos(first.angle / 2) == pytest.approx(math.sqrt(2 / 3))
    assert math.sin(first.angle / 2) == pytest.approx(math.sqrt(1 / 3))


def test_usp_cost_maximal_below_powers_of_two():
    for width in range(2, 5):
        counts = {n: resources(compile_usp(n)).rotation_count for n in range(2 ** (width - 1) + 1, 2**width + 1)}
        assert counts[2**width - 1] == max(counts.values())
