import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morse_susy.morse import derive_params, shifted_operator
from morse_susy.orthopoly import (
    PolyFamily,
    ProportionalityError,
    SpectralPoint,
    TruncationError,
    christoffel_darboux_residual,
    eval_closed_form,
    eval_recursion,
    kernel_poly,
    kernel_poly_closed,
    kernel_poly_termwise,
    kernel_relation_check,
    morse_family,
    p_at_zero,
    partner_closed_form,
    partner_family,
)
from morse_susy.susy import partner_closed_operator

# P_n and P+_n at D = 3.5, gamma = 0.3 from a 50-digit recursion
REFERENCE = {
    0.5: ((35.975706569150395, 443.1749765291384, 7724.0493776739313), (1034.7615025933064, 9724.189808224603, 151857.16776143008)),
    7.0: ((-19.167493334854886, -5.7874344629712403, 5.3452440831710747), (-11.343407640484942, -0.48020222440742942, 4.8455087607906777)),
    12.5: ((1602.134252336995, -1059.0665130081356, 808.92048739911037), (968.85577769885138, -696.4173096087766, 361.97626127797376)),
    30.0: ((1141590.7434709912, -75522.836058565203, -510861.55528722459), (-688230.18749463537, -407331.66654049629, -213810.29318500291)),
}
REFERENCE_P0 = (-0.0058238993999251369, -0.00017419395628328561, -3.1726175357783524e-6)
ORDERS = (5, 10, 25)


def test_spot_values(default_params):
    fam = morse_family(default_params)
    np.testing.assert_allclose(fam(0.0, 3), [1, -3, 3, -1], atol=1e-14)
    assert partner_family(default_params)(0.0, 1)[1] == pytest.approx(-5.0)
    assert [p_at_zero(default_params, n) for n in range(4)] == pytest.approx([1, -3, 3, -1])


@pytest.mark.parametrize("E", sorted(REFERENCE))
def test_against_high_precision(generic_params, E):
    ref, ref_plus = REFERENCE[E]
    rec = morse_family(generic_params)(E, 25)
    prec = partner_family(generic_params)(E, 25)
    for i, n in enumerate(ORDERS):
        assert rec[n] == pytest.approx(ref[i], rel=1e-11)
        assert prec[n] == pytest.approx(ref_plus[i], rel=1e-11)
        assert eval_closed_form(generic_params, E, n) == pytest.approx(ref[i], rel=1e-13)
        assert partner_closed_form(generic_params, E, n) == pytest.approx(ref_plus[i], rel=1e-13)


def test_p_at_zero_reference(generic_params):
    for i, n in enumerate(ORDERS):
        assert p_at_zero(generic_params, n) == pytest.approx(REFERENCE_P0[i], rel=1e-14)


def test_truncation_error(default_params):
    with pytest.raises(TruncationError, match="order 3"):
        eval_recursion(morse_family(default_params), 1.0, 4)
    assert morse_family(default_params).natural_order == 3
    assert partner_family(default_params).natural_order == 2
    assert morse_family(derive_params(8.0, 1.0, 0.3)).natural_order is None


def test_array_shapes(generic_params):
    E = np.linspace(0, 5, 6).reshape(2, 3)
    assert eval_recursion(morse_family(generic_params), E, 4).shape == (5, 2, 3)
    assert eval_closed_form(generic_params, E, 3).shape == (2, 3)
    assert np.shape(kernel_poly(morse_family(generic_params), E[0], 3)) == (3,)


def test_closed_form_mode_family(generic_params):
    E = np.array([0.3, 4.0, 17.0])
    closed = PolyFamily(shifted_operator(generic_params), "closed-form", generic_params)
    np.testing.assert_allclose(closed(E, 8), morse_family(generic_params)(E, 8), rtol=1e-11)
    with pytest.raises(ValueError):
        PolyFamily(shifted_operator(generic_params), "closed-form")(E, 2)


def test_spectral_point(generic_params):
    below = SpectralPoint.at(generic_params, 3.0)
    above = SpectralPoint.at(generic_params, 10.0)
    assert below.lam.imag > 0 and above.lam.imag == 0
    assert above.lam == pytest.approx(np.sqrt(20.0 - 12.25))


def test_sign_flip_convention(generic_params):
    # flipping every b_n maps P_n to (-1)^n P_n
    op = shifted_operator(generic_params)
    flipped = PolyFamily(type(op)(op.diag, lambda n: -op.offdiag(n)))
    E = np.array([1.0, 9.0])
    signs = (-1.0) ** np.arange(9)
    np.testing.assert_allclose(flipped(E, 8), signs[:, None] * morse_family(generic_params)(E, 8))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 30.0), st.integers(0, 25))
def test_closed_form_matches_recursion(E, n):
    p = derive_params(8.0, 1.0, 0.3)
    rec = morse_family(p)(E, n)[n]
    assert eval_closed_form(p, E, n) == pytest.approx(rec, rel=1e-10, abs=1e-10)
    prec = partner_family(p)(E, n)[n]
    assert partner_closed_form(p, E, n) == pytest.approx(prec, rel=1e-10, abs=1e-10)


def test_kernel_relation_default(default_params):
    rows = kernel_relation_check(morse_family(default_params), partner_family(default_params), 2)
    assert abs(rows[1].rho) == pytest.approx(0.5, rel=1e-12)
    assert all(r.residual < 1e-12 for r in rows)


def test_kernel_relation_generic(any_params):
    fam, pfam = morse_family(any_params), partner_family(any_params)
    top = 2 if fam.natural_order == 3 else 10
    for r in kernel_relation_check(fam, pfam, top):
        assert r.residual <= 1e-9 and r.rho_error <= 1e-10


def test_kernel_relation_detects_wrong_partner(generic_params):
    op = partner_closed_operator(generic_params)
    bad = PolyFamily(type(op)(lambda n: op.diag(n) * (1 + 1e-4 * (n == 1)), op.offdiag), partner=True)
    with pytest.raises(ProportionalityError):
        kernel_relation_check(morse_family(generic_params), bad, 4)


@pytest.mark.parametrize("E", [0.0, 3.0, 6.2, 12.5, 30.0])
def test_kernel_forms_agree(generic_params, E):
    fam = morse_family(generic_params)
    p0 = [p_at_zero(generic_params, j) for j in range(11)]
    for n in range(11):
        closed = kernel_poly_closed(generic_params, E, n)
        assert kernel_poly(fam, E, n, p0) == pytest.approx(closed, rel=1e-10, abs=1e-10)
        assert kernel_poly_termwise(generic_params, E, n) == pytest.approx(closed, rel=1e-12, abs=1e-12)


def test_kernel_at_truncation(default_params):
    # the kernel form stays finite where (gamma + 3/2 - D)_n = 0
    fam = morse_family(default_params)
    for n in range(4):
        for E in (0.0, 2.0, 7.5):
            assert kernel_poly_closed(default_params, E, n) == pytest.approx(kernel_poly(fam, E, n), abs=1e-12)


def test_christoffel_darboux(any_params):
    fam = morse_family(any_params)
    top = 2 if fam.natural_order == 3 else 10
    E = np.linspace(0.1, 40.0, 17)
    for n in range(top + 1):
        assert christoffel_darboux_residual(fam, E, n) <= 1e-9


def test_polynomials_vanish_at_bound_energies_in_block(default_params):
    # the characteristic polynomial of the 4x4 block is proportional to P_4;
    # equivalently E P_3 = a_3 P_3 + b_2 P_2 at each block eigenvalue
    op = shifted_operator(default_params)
    E = np.array([0.0, 3.0, 5.0, 6.0])
    P = morse_family(default_params)(E, 3)
    np.testing.assert_allclose(E * P[3], op.a(3) * P[3] + op.b(2) * P[2], atol=1e-12)
