import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lobe.circuit import simulate_columns
from lobe.fock_algebra import (
    LadderOp,
    ModeSpec,
    Species,
    Term,
    a,
    b,
    from_terms,
    parse_operator,
    system_embedding,
    system_qubit_count,
    to_matrix,
)
from lobe.pauli import (
    PauliString,
    PauliSum,
    combine,
    compile_select,
    encode_pauli_expansion,
    encode_piecewise_pauli,
    jordan_wigner,
    lcu_encode,
    pauli_expand,
    standard_binary,
)
from lobe.verify import extract_block, lambda_audit, verify_encoding
from oracles import PAULI, kron_all, pauli_trace_coefficients, product_oracle


def _embed(mat, modes, omega):
    """Fock-ordered matrix placed into the qubit space."""
    emb = system_embedding(modes, omega)
    size = 2 ** system_qubit_count(modes, omega)
    out = np.zeros((size, size), dtype=complex)
    out[np.ix_(emb, emb)] = mat
    return out


def _restricted(psum, modes, omega):
    emb = system_embedding(modes, omega)
    full = psum.to_matrix()
    return full[np.ix_(emb, emb)], full


# -- strings and sums -----------------------------------------------------------------


def test_string_products():
    x = PauliString.from_label(1, "X")
    y = PauliString.from_label(1, "Y")
    assert x * y == PauliString.from_label(1j, "Z")
    assert y * x == PauliString.from_label(-1j, "Z")
    xx = PauliString.from_label(2, "XZ")
    assert xx * xx == PauliString.from_label(4, "II")


@settings(max_examples=100, deadline=None)
@given(st.text("IXYZ", min_size=1, max_size=3), st.text("IXYZ", min_size=3, max_size=3))
def test_string_product_matches_matrices(l1, l2):
    l1 = (l1 + "III")[:3]
    p, q = PauliString.from_label(1, l1), PauliString.from_label(1, l2)
    assert np.allclose((p * q).matrix(), p.matrix() @ q.matrix())
    # label is highest qubit first: the leftmost letter is the top kron factor here too
    assert np.allclose(p.matrix(), kron_all([PAULI[c] for c in reversed(l1)]))


def test_sum_merges_and_drops_zeros():
    s = PauliSum(1, [PauliString.from_label(0.5, "X"), PauliString.from_label(0.5, "X"), PauliString.from_label(1e-15, "Z")])
    assert len(s) == 1 and s.coefficient("X") == 1


def test_text_round_trip():
    s = standard_binary(a(0, True), 3)
    again = PauliSum.from_text(s.to_text())
    assert np.allclose(again.to_matrix(), s.to_matrix(), atol=1e-11)
    assert "(0.683012701892,0) IX" in s.to_text()


# -- Jordan-Wigner ------------------------------------------------------------------------


def test_jw_single_mode():
    s = jordan_wigner(b(0), 1)
    assert s.coefficient("X") == 0.5 and s.coefficient("Y") == 0.5j


def test_jw_second_mode_creation():
    s = jordan_wigner(b(1, True), 2)
    assert s.coefficient("XZ") == 0.5 and s.coefficient("YZ") == -0.5j
    assert len(s) == 2


def test_jw_number_operator():
    s = jordan_wigner(b(0, True), 1) * jordan_wigner(b(0), 1)
    assert np.allclose(s.to_matrix(), np.diag([0, 1]))


def test_jw_rejects_bosons():
    with pytest.raises(ValueError):
        jordan_wigner(a(0), 1)


# -- Standard Binary ----------------------------------------------------------------------


def test_sb_creation_cutoff_three():
    s = standard_binary(a(0, True), 3)
    assert s.coefficient("IX") == pytest.approx(0.683012701892)
    assert s.coefficient("ZX") == pytest.approx(-0.183012701892)
    assert s.coefficient("IY") == pytest.approx(-0.683012701892j)
    ref = pauli_trace_coefficients(_embed(np.diag(np.sqrt([1, 2, 3]), -1), ModeSpec(0, 0, 1), 3))
    # the oracle labels letters by kron position (qubit 0 first); ours print the highest qubit first
    assert {k[::-1]: v for k, v in ref.items()} == pytest.approx({x.label: x.coefficient for x in s})


def test_sb_annihilation_single_qubit():
    s = standard_binary(a(0), 1)
    assert s.coefficient("X") == 0.5 and s.coefficient("Y") == 0.5j and len(s) == 2


@pytest.mark.parametrize("omega", [1, 2, 3, 5, 7])
def test_sb_creation_matrix(omega):
    modes = ModeSpec(0, 0, 1)
    got, full = _restricted(standard_binary(a(0, True), omega), modes, omega)
    assert np.allclose(got, np.diag(np.sqrt(np.arange(1, omega + 1)), -1), atol=1e-12)
    emb = system_embedding(modes, omega)
    outside = np.ones(full.shape[0], bool)
    outside[emb] = False
    assert np.allclose(full[outside], 0) and np.allclose(full[:, outside], 0)


# -- expansion fidelity -------------------------------------------------------------------------

_factor = st.tuples(st.booleans(), st.integers(0, 1), st.booleans())


@settings(max_examples=80, deadline=None)
@given(st.lists(_factor, min_size=1, max_size=4), st.sampled_from([1, 2, 3]), st.floats(-2, 2).filter(lambda x: abs(x) > 0.01))
def test_pauli_expansion_matches_oracle(factors, omega, coeff):
    modes = ModeSpec(2, 0, 2)
    ops = tuple(LadderOp(Species.FERMION if f else Species.BOSON, m, dg) for f, m, dg in factors)
    expr = from_terms([Term(coeff, ops)])
    oracle = coeff * product_oracle([("b" if f else "a", m, dg) for f, m, dg in factors], 2, 2, omega)
    got, _ = _restricted(pauli_expand(expr, modes, omega), modes, omega)
    assert np.max(np.abs(got - oracle)) <= 1e-12
    # per-mode factors multiply back to the same operator
    pieces = pauli_expand(expr, modes, omega, "per_mode")
    total = np.zeros_like(got)
    for piece in pieces:
        prod = piece.coefficient * np.eye(2 ** (2 + 2 * omega.bit_length()))
        for f in piece.factors:
            prod = prod @ f.to_matrix()
        emb = system_embedding(modes, omega)
        total += prod[np.ix_(emb, emb)]
    assert np.max(np.abs(total - oracle)) <= 1e-12


def test_fermion_pair_full_expansion_has_two_strings():
    expr = parse_operator("b0 b1 + h.c.")
    s = pauli_expand(expr, ModeSpec(2), 1)
    assert sorted(x.label for x in s) == ["XX", "YY"]
    got, _ = _restricted(s, ModeSpec(2), 1)
    assert np.allclose(got, to_matrix(expr, ModeSpec(2), 1), atol=1e-12)


def test_boson_number_is_diagonal():
    s = pauli_expand(parse_operator("a0^ a0"), ModeSpec(0, 0, 1), 3)
    assert all(set(x.label) <= {"I", "Z"} for x in s)


def test_per_mode_granularity():
    pieces = pauli_expand(parse_operator("b0^ a1"), ModeSpec(1, 0, 2), 1, "per_mode")
    assert len(pieces) == 1 and len(pieces[0].factors) == 2


# -- LCU ------------------------------------------------------------------------------------


def test_lcu_lambda_is_one_norm():
    s = PauliSum(2, [PauliString.from_label(0.5, "XI"), PauliString.from_label(-0.3, "ZZ"), PauliString.from_label(0.2j, "YI")])
    assert lcu_encode(s).lam == pytest.approx(1.0)


def test_lcu_single_string():
    s = PauliSum(2, [PauliString.from_label(-0.7, "XZ")])
    enc = lcu_encode(s)
    assert enc.layout.n_index == 0 and enc.lam == pytest.approx(0.7)
    assert np.allclose(extract_block(enc), -PauliString.from_label(1, "XZ").matrix(), atol=1e-12)


def test_lcu_half_x_plus_half_y():
    s = PauliSum(1, [PauliString.from_label(0.5, "X"), PauliString.from_label(0.5, "Y")])
    enc = lcu_encode(s)
    assert enc.lam == pytest.approx(1.0)
    assert np.max(np.abs(extract_block(enc) - (PAULI["X"] + PAULI["Y"]) / 2)) <= 1e-10


_labels = st.text("IXYZ", min_size=3, max_size=3)
_coeff = st.tuples(st.floats(-1, 1), st.sampled_from([0, 1, 2, 3]))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(_labels, _coeff), min_size=1, max_size=8), st.booleans())
def test_lcu_random_sums(entries, controlled):
    s = PauliSum(3, [PauliString.from_label(c * 1j**k, lab) for lab, (c, k) in entries])
    if not len(s):
        return
    enc = lcu_encode(s, controlled=controlled)
    block = extract_block(enc)
    assert np.max(np.abs(block - s.to_matrix() / enc.lam)) <= 1e-10
    assert enc.lam >= np.linalg.norm(s.to_matrix(), 2) - 1e-9


def test_lcu_control_off_is_identity():
    s = PauliSum(2, [PauliString.from_label(0.4, "XY"), PauliString.from_label(0.6, "ZI"), PauliString.from_label(0.1, "YY")])
    enc = lcu_encode(s)
    n = enc.layout.total
    cols = list(range(2**enc.layout.n_system))  # control 0, ancillae 0
    out = simulate_columns(enc.circuit, cols)
    assert np.allclose(out[: len(cols)], np.eye(len(cols)), atol=1e-12)
    assert n == enc.layout.n_ctrl + enc.layout.n_index + enc.layout.n_be + enc.layout.n_clean + 2


def test_select_is_self_inverse_for_hermitian_strings():
    s = PauliSum(2, [PauliString.from_label(0.4, "XY"), PauliString.from_label(-0.6, "ZI"), PauliString.from_label(0.1, "YY")])
    sel = compile_select(s)
    from helpers import clean_block

    block, leak = clean_block(sel)
    assert leak <= 1e-12
    assert np.allclose(block @ block, np.eye(block.shape[0]), atol=1e-12)


# -- combination -----------------------------------------------------------------------------


def test_product_lambda_multiplies():
    omega = 3
    modes = ModeSpec(0, 0, 1)
    enc_a = lcu_encode(standard_binary(a(0), omega), modes, omega)
    enc_b = lcu_encode(standard_binary(a(0, True), omega), modes, omega)
    prod = combine([enc_b, enc_a], mode="product")
    assert prod.lam == pytest.approx(enc_a.lam * enc_b.lam)
    # product block equals product of factor blocks
    assert np.allclose(extract_block(prod), extract_block(enc_b) @ extract_block(enc_a), atol=1e-10)


def test_product_of_sqrt_omega_encodings():
    from dataclasses import replace

    omega = 4
    base = lcu_encode(PauliSum.identity(1))
    e = replace(base, lam=np.sqrt(omega))
    assert combine([e, e], mode="product").lam == pytest.approx(omega)


def test_lco_single_is_unchanged():
    enc = lcu_encode(jordan_wigner(b(0), 2))
    one = combine([enc])
    assert one.lam == enc.lam
    assert np.allclose(extract_block(one), extract_block(enc), atol=1e-12)


def test_lco_b_plus_bdag():
    modes = ModeSpec(1)
    e1 = lcu_encode(jordan_wigner(b(0), 1), modes, 1)
    e2 = lcu_encode(jordan_wigner(b(0, True), 1), modes, 1)
    enc = combine([e1, e2], [1, 1])
    assert enc.lam == pytest.approx(2)
    rep = verify_encoding(enc, parse_operator("b0 + b0^"), modes, 1)
    assert rep.passed and rep.max_abs_error <= 1e-12


def test_lco_with_phases_and_weights():
    modes = ModeSpec(2)
    e1 = lcu_encode(jordan_wigner(b(0), 2), modes, 1)
    e2 = lcu_encode(jordan_wigner(b(1, True), 2), modes, 1)
    enc = combine([e1, e2], [-0.5, 2j])
    expect = -0.5 * to_matrix(parse_operator("b0"), modes, 1) + 2j * to_matrix(parse_operator("b1^"), modes, 1)
    emb = system_embedding(modes, 1)
    block = extract_block(enc)[np.ix_(emb, emb)]
    assert np.max(np.abs(block - expect / enc.lam)) <= 1e-10


def test_combine_rejects_empty():
    with pytest.raises(ValueError):
        combine([])


# -- pipelines -------------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "text,modes,omega",
    [
        ("b0 b1 + h.c.", ModeSpec(2), 1),
        ("a0", ModeSpec(0, 0, 1), 3),
        ("2 b0^ b0 + a0^ a0 + 0.5 b0^ a0 + h.c.", ModeSpec(1, 0, 1), 3),
    ],
)
@pytest.mark.parametrize("method", ["pauli_expansion", "piecewise_pauli"])
def test_pauli_pipelines_verify(text, modes, omega, method):
    expr = parse_operator(text)
    enc = (encode_pauli_expansion if method == "pauli_expansion" else encode_piecewise_pauli)(expr, modes, omega)
    rep = verify_encoding(enc, expr, modes, omega)
    assert rep.passed, rep
    assert rep.lambda_ok and rep.unitarity_error <= 1e-10


def test_lambda_audit_examples():
    assert lambda_audit([2, 2, 2]) == {"asp": 6.0, "usp": 6.0, "ok": True}
    assert lambda_audit([3, 1]) == {"asp": 4.0, "usp": 6.0, "ok": True}
