import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from morse_susy.morse import InvalidParameterError, derive_params
from morse_susy.oracle import fd_bound_states
from morse_susy.orthopoly import morse_family, partner_family
from morse_susy.spectrum import (
    QuadratureError,
    SpectralMeasure,
    bound_energies,
    bound_state_count,
    continuous_density,
    continuous_mass_energy,
    continuous_mass_lambda,
    discrete_weights,
    ground_state_wavefunction,
    hahn_discrete_weights,
    measure,
    partner_continuous_density,
    partner_measure,
    total_mass,
    verify_orthogonality,
)

# continuum mass and point masses from 50-digit quadrature with the squared
# modulus of the gamma ratio
REFERENCE_MASS = {
    (2.0, 1.0, 0.25): (0.015022827683646168, (0.72424792082084841, 0.26072925149550543)),
    (8.0, 1.0, 0.3): (0.0042967770060596166, (0.12189230700160802, 0.40798664740207643, 0.40119972396703243, 0.064624544623223502)),
    (12.5, 2.0, -0.25): (0.40611670492690431, (0.12070798680347473, 0.47317530826962096)),
}


@pytest.mark.parametrize("V0,alpha,count", [(8.0, 1.0, 4), (0.245, 1.0, 1), (2.0, 1.0, 2), (12.5, 2.0, 2), (0.1251, 1.0, 1)])
def test_bound_state_count_vs_oracle(V0, alpha, count):
    p = derive_params(V0, alpha, 0.0)
    assert bound_state_count(p) == count
    if V0 > 0.2:
        energies, _, _ = fd_bound_states(p)
        assert len(energies) == count


def test_integer_depth_uses_strict_count():
    p = derive_params(12.5, 2.0, 0.0)
    assert p.D == 2.0
    assert bound_state_count(p) == 2
    assert len(discrete_weights(p)) == 2


def test_default_energies(default_params):
    bs = bound_energies(default_params)
    np.testing.assert_allclose(bs.energies, [0, 3, 5, 6])
    np.testing.assert_allclose(bs.unshifted, [-6.125, -3.125, -1.125, -0.125])
    np.testing.assert_allclose(bs.truncation_eigenvalues, [0, 3, 5, 6], atol=1e-12)
    np.testing.assert_allclose(bs.eigenvectors.T @ bs.eigenvectors, np.eye(4), atol=1e-10)
    assert bs.truncation_gamma == 0.0


@pytest.mark.parametrize("gamma", [0.3, 1.7])
def test_energies_independent_of_gamma(gamma):
    a = bound_energies(derive_params(8.0, 1.0, gamma))
    b = bound_energies(derive_params(8.0, 1.0, 0.0))
    np.testing.assert_allclose(a.energies, b.energies)
    np.testing.assert_allclose(a.truncation_eigenvalues, b.truncation_eigenvalues, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.2, 60.0), st.floats(0.4, 2.5))
def test_truncation_consistency(V0, alpha):
    try:
        p = derive_params(V0, alpha, 0.0)
    except InvalidParameterError:
        return
    bs = bound_energies(p)
    assert bs.energies[0] == 0.0
    assert np.all(np.diff(bs.energies) > 0)
    assert np.all(bs.unshifted < 0)


@pytest.mark.parametrize("triple", [(8.0, 1.0, 0.0), (2.0, 1.0, 0.25), (12.5, 2.0, -0.25)])
def test_energies_vs_finite_difference(triple):
    p = derive_params(*triple)
    fd, _, _ = fd_bound_states(p)
    np.testing.assert_allclose(fd, bound_energies(p).unshifted, rtol=1e-6)


def test_ground_state_wavefunction():
    p = derive_params(8.0, 1.0, 3.0)
    norm, _ = integrate.quad(lambda x: ground_state_wavefunction(p, x) ** 2, -4, 60, points=[0.0, 1.0], limit=200)
    assert norm == pytest.approx(1.0, abs=1e-8)
    assert ground_state_wavefunction(p, 500.0) == 0.0
    x_peak = math.log(math.sqrt(8 * p.V0) / (2 * p.D * p.alpha)) / p.alpha
    xs = np.linspace(x_peak - 0.5, x_peak + 0.5, 20001)
    assert xs[np.argmax(ground_state_wavefunction(p, xs))] == pytest.approx(x_peak, abs=1e-4)
    _, v, x = fd_bound_states(p, k=1)
    h = x[1] - x[0]
    diff = v[:, 0] - ground_state_wavefunction(p, x)
    assert math.sqrt(np.sum(diff**2) * h) < 1e-4
    with pytest.raises(InvalidParameterError):
        ground_state_wavefunction(derive_params(8.0, 1.0, 0.0), 0.0)


def test_default_weights(default_params):
    w = discrete_weights(default_params)
    assert w[0] == pytest.approx(36 / 720)
    assert sum(w) == pytest.approx(1.0, abs=1e-14)  # no continuum at the truncation
    assert not measure(default_params).has_continuum


@pytest.mark.parametrize("triple", sorted(REFERENCE_MASS))
def test_measure_against_high_precision(triple):
    p = derive_params(*triple)
    cont, weights = REFERENCE_MASS[triple]
    mu = measure(p)
    np.testing.assert_allclose(mu.weights, weights, rtol=1e-13)
    assert continuous_mass_lambda(mu) == pytest.approx(cont, rel=1e-12)
    assert sum(weights) < 1.0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 6.0), st.floats(-0.45, 3.0))
def test_weight_symmetry_and_positivity(D, gamma):
    try:
        p = derive_params(0.5 * (D + 0.5) ** 2, 1.0, gamma)
    except InvalidParameterError:
        return
    a9 = np.array(discrete_weights(p))
    a7 = np.array(hahn_discrete_weights(-p.D, gamma + 0.5, gamma + 0.5))
    np.testing.assert_allclose(a9, a7, rtol=1e-12)
    assert np.all(a9 > 0)


def test_total_mass(any_params):
    assert total_mass(measure(any_params)) == pytest.approx(1.0, abs=1e-8)
    assert total_mass(partner_measure(any_params)) == pytest.approx(1.0, abs=1e-8)


def test_density_domain_and_sign(generic_params):
    edge = generic_params.shift
    with pytest.raises(ValueError):
        continuous_density(generic_params, edge)
    E = np.linspace(edge + 1e-3, edge + 40, 50)
    assert all(continuous_density(generic_params, e) > 0 for e in E)
    assert all(partner_continuous_density(generic_params, e) > 0 for e in E)


@pytest.mark.parametrize("triple", [(2.0, 1.0, 0.25), (12.5, 2.0, -0.25), (8.0, 1.0, 0.3)])
@pytest.mark.parametrize("delta", [0.2, 3.0, 25.0])
def test_change_of_variables(triple, delta):
    mu = measure(derive_params(*triple))
    E_hi = mu.continuous_edge + delta
    assert continuous_mass_energy(mu, E_hi) == pytest.approx(continuous_mass_lambda(mu, mu.lam(E_hi)), abs=1e-10)


def test_partner_measure_default(default_params):
    pm = partner_measure(default_params)
    np.testing.assert_allclose(pm.energies, [3, 5, 6])
    assert pm.continuous_edge == default_params.shift
    assert pm.weights.sum() == pytest.approx(1.0)


def test_partner_removes_zero_mode(any_params):
    mu, pm = measure(any_params), partner_measure(any_params)
    np.testing.assert_allclose(pm.energies, mu.energies[1:])


def test_gram_default(default_params):
    rep = verify_orthogonality(measure(default_params), morse_family(default_params), 3)
    assert rep.max_deviation < 1e-12
    rep = verify_orthogonality(partner_measure(default_params), partner_family(default_params), 2)
    assert rep.max_deviation < 1e-12


@pytest.mark.parametrize("triple", [(2.0, 1.0, 0.25), (12.5, 2.0, -0.25), (8.0, 1.0, 0.3), (2.2, 1.0, 0.1)])
def test_gram_identity(triple):
    p = derive_params(*triple)
    rep = verify_orthogonality(measure(p), morse_family(p), 12)
    assert rep.max_deviation < 1e-8
    assert rep.gram[0, 1] == pytest.approx(0.0, abs=1e-8)
    rep = verify_orthogonality(partner_measure(p), partner_family(p), 12)
    assert rep.max_deviation < 1e-8


def test_gram_detects_wrong_density(generic_params):
    mu = measure(generic_params)
    off = SpectralMeasure(mu.discrete, mu.continuous_edge, mu.alpha, mu.a, mu.b + 1e-3)
    assert verify_orthogonality(off, morse_family(generic_params), 6).max_deviation > 1e-6


def test_partner_at_shallow_depth():
    # D = 0.6: the partner has no point masses
    p = derive_params(0.605, 1.0, 0.0)
    pm = partner_measure(p)
    assert len(pm.discrete) == 0
    assert total_mass(pm) == pytest.approx(1.0, abs=1e-8)


def test_quadrature_gives_up():
    # P^2 ~ exp(4 l) outgrows the exp(-pi l) decay of the density
    mu = measure(derive_params(2.0, 1.0, 0.25))

    def runaway(E, n):
        lam = np.sqrt(np.maximum(2.0 * (np.asarray(E) - mu.continuous_edge), 0.0)) / mu.alpha
        return np.exp(2.0 * lam)[None, :] * np.ones((n + 1, 1))

    with pytest.raises(QuadratureError):
        verify_orthogonality(mu, runaway, 0, max_lambda=100.0)
