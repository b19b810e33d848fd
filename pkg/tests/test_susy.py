import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morse_susy.morse import InvalidParameterError, TridiagonalOperator, derive_params, shifted_operator
from morse_susy.orthopoly import p_at_zero
from morse_susy.susy import (
    A_matrix,
    FactorizationError,
    apply_A,
    apply_A_dagger,
    closed_form_cd,
    closed_form_factor,
    factor_from_polynomials,
    partner_closed_operator,
    partner_operator,
    reconstruct,
    shape_invariance_residual,
    with_depth,
)


def test_default_cd(default_params):
    c0, d1 = closed_form_cd(default_params, 0)
    assert c0 == pytest.approx(-3 / math.sqrt(2))
    assert d1 == pytest.approx(-1 / math.sqrt(2))
    assert closed_form_cd(default_params, 3)[0] == 0.0


def test_default_partner_block(default_params):
    plus = partner_closed_operator(default_params)
    np.testing.assert_allclose(plus.matrix(3), [[5, 1, 0], [1, 4, 1], [0, 1, 5]])
    assert plus.natural_size() == 3


@pytest.mark.parametrize("triple", [(2.0, 1.0, 0.25), (12.5, 2.0, -0.25), (8.0, 1.0, 0.3)])
def test_factor_from_polynomials_long(triple):
    p = derive_params(*triple)
    n = 30
    p0 = [p_at_zero(p, j) for j in range(n + 2)]
    fc = factor_from_polynomials(shifted_operator(p), p0, n)
    for j in range(n + 1):
        c, d = closed_form_cd(p, j)
        assert fc.c(j) == pytest.approx(c, rel=1e-12, abs=1e-12)
        assert fc.d(j + 1) == pytest.approx(d, rel=1e-12)
    a, b = reconstruct(fc, n)
    want_a, want_b = shifted_operator(p).bands(n + 2)
    np.testing.assert_allclose(a, want_a[: n + 1], rtol=1e-12)
    np.testing.assert_allclose(b, want_b[: n + 1], rtol=1e-12, atol=1e-12)
    with pytest.raises(IndexError):
        fc.c(n + 1)


def test_factor_up_to_natural_truncation(default_params):
    p0 = [p_at_zero(default_params, j) for j in range(4)]
    fc = factor_from_polynomials(shifted_operator(default_params), p0, 2)
    assert fc.c(2) == pytest.approx(closed_form_cd(default_params, 2)[0])
    # P_4(0) = 0 at the truncation: the ratio at n = 3 is undefined
    p0 = [p_at_zero(default_params, j) for j in range(5)]
    with pytest.raises(FactorizationError, match="P_4"):
        factor_from_polynomials(shifted_operator(default_params), p0, 3)


def test_factor_needs_enough_values(default_params):
    with pytest.raises(ValueError):
        factor_from_polynomials(shifted_operator(default_params), [1.0, -3.0], 1)


def test_zero_mode_at_first_index():
    # gamma = D - 1/2: b_0 = 0 and phi_0 is the zero mode
    p = derive_params(8.0, 1.0, 3.0)
    op = shifted_operator(p)
    assert op.b(0) == 0.0 and op.a(0) == 0.0
    with pytest.raises(FactorizationError, match="closed form"):
        factor_from_polynomials(op, [1.0, 1.0, 1.0], 0)
    fc = factor_from_polynomials(op, [1.0, 1.0, 1.0], 0, params=p)
    assert fc.c(0) == 0.0


def test_non_psd_operator_rejected():
    op = TridiagonalOperator(diag=lambda n: 1.0, offdiag=lambda n: 1.0)
    # ratios of the wrong sign make d^2 negative
    with pytest.raises(FactorizationError, match="positive semi-definite"):
        factor_from_polynomials(op, [1.0, 1.0, 1.0], 0)


def test_corrupted_coefficient_detected(generic_params):
    base = shifted_operator(generic_params)
    bad = TridiagonalOperator(base.diag, lambda n: base.offdiag(n) * (1 + 1e-6 * (n == 2)))
    p0 = [p_at_zero(generic_params, j) for j in range(6)]
    with pytest.raises(FactorizationError):
        factor_from_polynomials(bad, p0, 4)


def test_A_dagger_A_reproduces_H(generic_params):
    fc = closed_form_factor(generic_params)
    size = 12
    A = A_matrix(fc, size + 1)
    H = A.T @ A
    np.testing.assert_allclose(H[:size, :size], shifted_operator(generic_params).matrix(size), atol=1e-12)
    P = A @ A.T
    np.testing.assert_allclose(P[:size, :size], partner_closed_operator(generic_params).matrix(size), atol=1e-12)


def test_partner_from_factor_matches_closed(any_params):
    fc = closed_form_factor(any_params)
    plus, closed = partner_operator(fc), partner_closed_operator(any_params)
    for n in range(20):
        assert plus.a(n) == pytest.approx(closed.a(n), rel=1e-13, abs=1e-13)
        assert plus.b(n) == pytest.approx(closed.b(n), rel=1e-13, abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=12), st.lists(st.floats(-10, 10), min_size=13, max_size=13))
def test_A_and_A_dagger_are_adjoint(v, w):
    p = derive_params(8.0, 1.0, 0.3)
    fc = closed_form_factor(p)
    v = np.array(v)
    w = np.array(w[: len(v) + 1])
    # <w, A^dagger v> = <A w, v> with A w truncated to len(v)
    lhs = w @ apply_A_dagger(fc, v)
    rhs = apply_A(fc, w)[: len(v)] @ v
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-9)


def test_apply_A_shapes(generic_params):
    fc = closed_form_factor(generic_params)
    v = np.arange(5.0)
    assert apply_A(fc, v).shape == (5,)
    assert apply_A_dagger(fc, v).shape == (6,)


def test_A_annihilates_zero_mode(default_params):
    # the eigenvector of the 4x4 block with eigenvalue 0
    w, V = np.linalg.eigh(shifted_operator(default_params).matrix(4))
    fc = closed_form_factor(default_params)
    assert np.max(np.abs(apply_A(fc, V[:, 0]))) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0.5, 30.0), st.floats(0.3, 2.5), st.floats(-0.45, 2.0))
def test_shape_invariance(V0, alpha, gamma):
    try:
        p = derive_params(V0, alpha, gamma)
    except InvalidParameterError:
        return
    db, da = shape_invariance_residual(p, 25)
    scale = alpha**2 * 26**2
    assert db <= 1e-12 * scale and da <= 1e-12 * scale


def test_with_depth_allows_nonpositive():
    p = with_depth(derive_params(2.0, 1.0, 0.0), -0.5)
    assert p.D == -0.5 and p.shift == pytest.approx(0.125)
