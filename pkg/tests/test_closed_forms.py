"""
Closed-form families: known values, special cases and parameter ranges.
"""
import math

import numpy as np
import pytest
from scipy.special import ndtr

from lib.engine import closed_forms as cf
from lib.engine.dependence import ell_from_spectral
from lib.errors import SpecError

T_GRID = np.linspace(0.0, 1.0, 11)


def test_logistic_endpoints():
    x = np.array([0.4, 1.3, 0.2])
    assert cf.logistic_ell(1.0, x) == pytest.approx(x.sum(), rel=1e-15)
    assert cf.logistic_ell(math.inf, x) == x.max()
    assert cf.logistic_ell(2.0, [1.0, 1.0]) == pytest.approx(math.sqrt(2.0), rel=1e-15)


def test_logistic_log_space_matches_direct_formula():
    x, y = 1.0, 0.9
    theta = 80.0
    direct = (x ** theta + y ** theta) ** (1.0 / theta)
    assert cf.logistic_ell(theta, [x, y]) == pytest.approx(direct, rel=1e-13)


def test_logistic_huge_theta_is_max():
    assert cf.logistic_ell(1e6, [0.3, 0.7]) == pytest.approx(0.7, abs=1e-6)


def test_logistic_rejects_theta_below_one():
    with pytest.raises(SpecError):
        cf.logistic_ell(0.5, [1.0, 1.0])


def test_marshall_olkin_copula_agrees_with_ell():
    alpha, beta = 0.3, 0.9
    u, v = 0.4, 0.7
    via_ell = math.exp(-cf.marshall_olkin_ell(alpha, beta, -math.log(u), -math.log(v)))
    assert cf.marshall_olkin_copula(alpha, beta, u, v) == pytest.approx(via_ell, rel=1e-14)


def test_tawn_mixture_special_cases():
    assert cf.tawn_mixture_ell(0.0, 0.4, 0.8) == pytest.approx(1.2)
    assert cf.tawn_mixture_D(1.0, 0.5) == pytest.approx(0.75)
    with pytest.raises(SpecError):
        cf.tawn_mixture_ell(1.5, 1.0, 1.0)


def test_rational_D_is_ell_on_the_simplex():
    d = cf.rational_D(0.5, 0.8, T_GRID)
    ell = cf.rational_ell(0.5, 0.8, 1.0 - T_GRID, T_GRID)
    np.testing.assert_allclose(d, ell, rtol=1e-14)


def test_schlather_D_is_ell_on_the_simplex():
    for rho in (-0.5, 0.0, 0.7):
        d = cf.schlather_D(rho, T_GRID)
        ell = cf.schlather_ell(rho, 1.0 - T_GRID, T_GRID)
        np.testing.assert_allclose(d, ell, rtol=1e-14)
    assert cf.schlather_D(0.0, 0.5) == pytest.approx(0.5 * (1.0 + math.sqrt(0.5)))
    with pytest.raises(SpecError):
        cf.schlather_ell(1.0, 1.0, 1.0)


def test_husler_reiss_values_and_zero_coordinates():
    a = 1.2
    assert cf.husler_reiss_ell(a, 1.0, 1.0) == pytest.approx(2.0 * cf.std_normal_cdf(a / 2.0), rel=1e-15)
    assert cf.husler_reiss_ell(a, 2.0, 0.0) == 2.0
    assert cf.husler_reiss_ell(a, 0.0, 0.5) == 0.5
    with pytest.raises(SpecError):
        cf.husler_reiss_ell(0.0, 1.0, 1.0)


def test_std_normal_cdf_tails():
    assert cf.std_normal_cdf(0.0) == 0.5
    # deepest tail still above the subnormal range
    assert cf.std_normal_cdf(-37.0) > 0.0
    assert cf.std_normal_cdf(-37.0) == pytest.approx(ndtr(-37.0), rel=1e-12)
    assert cf.std_normal_cdf(40.0) == 1.0
    assert cf.std_normal_cdf(-10.0) == pytest.approx(7.619853024160527e-24, rel=1e-12)


def test_dirichlet11_at_ones():
    assert cf.dirichlet11_ell(1.0, 1.0) == 1.5
    assert cf.dirichlet11_ell(0.0, 0.0) == 0.0


def test_random_sum_with_single_terms_is_dirichlet11():
    x = np.array([1.0, 0.2, 3.0, 0.0])
    y = np.array([1.0, 0.9, 0.5, 2.0])
    np.testing.assert_allclose(cf.random_sum_ell([0, 1], [0, 1], x, y), cf.dirichlet11_ell(x, y), rtol=1e-14)


def test_random_sum_bounds_and_margins():
    j_law, k_law = [0.25, 0.5, 0.25], [0.5, 0.0, 0.5]
    assert cf.random_sum_ell(j_law, k_law, 1.3, 0.0) == pytest.approx(1.3)
    x = np.array([0.2, 1.0, 2.0])
    y = np.array([1.0, 1.0, 0.3])
    values = cf.random_sum_ell(j_law, k_law, x, y)
    assert np.all(values >= np.maximum(x, y) - 1e-12)
    assert np.all(values <= x + y + 1e-12)


def test_count_law_needs_unit_mean():
    with pytest.raises(SpecError):
        cf.check_count_law("j_law", [0.5, 0.5])
    with pytest.raises(SpecError):
        cf.check_count_law("j_law", [0.1, 0.2, 0.3, 0.2, 0.2])


def test_thinned_max_is_marshall_olkin(grid_2d):
    alpha, beta = 0.3, 0.9
    x, y = grid_2d[:, 0], grid_2d[:, 1]
    base = np.maximum(alpha * x, beta * y)
    np.testing.assert_allclose(cf.thinned_ell(base, alpha, beta, x, y),
                               cf.marshall_olkin_ell(alpha, beta, x, y), rtol=1e-14)


MO_LAW = {(0, 1, 2): 0.4, (0, 1): 0.2, (2,): 0.2, (0,): 0.1, (1,): 0.1}


def test_multivariate_marshall_olkin_atoms_reproduce_ell(rng):
    spec = cf.MultivariateMOSpec(3, MO_LAW)
    xs = rng.uniform(0.0, 2.0, size=(20, 3))
    np.testing.assert_allclose(ell_from_spectral(spec.to_atoms(), xs), spec.ell(xs), rtol=1e-12)
    np.testing.assert_allclose(spec.ell(np.eye(3)), np.ones(3), rtol=1e-12)


def test_multivariate_marshall_olkin_restrict():
    spec = cf.MultivariateMOSpec(3, MO_LAW)
    margin = spec.restrict((0, 2))
    x = np.array([0.6, 1.1])
    assert margin.ell(x) == pytest.approx(spec.ell([0.6, 0.0, 1.1]), rel=1e-12)


def test_multivariate_marshall_olkin_rejects_unused_coordinate():
    with pytest.raises(SpecError):
        cf.MultivariateMOSpec(3, {(0, 1): 1.0})


def test_family_spec_validates_parameters():
    with pytest.raises(SpecError):
        cf.FamilySpec(cf.Family.LOGISTIC, 2, {"theta": 0.2})
    with pytest.raises(SpecError):
        cf.FamilySpec(cf.Family.SCHLATHER, 3, {"rho": 0.1})
    with pytest.raises(SpecError):
        cf.FamilySpec(cf.Family.MARSHALL_OLKIN, 2, {"alpha": 0.3})


def test_family_spec_atoms():
    indep = cf.FamilySpec(cf.Family.INDEPENDENCE, 4)
    assert indep.atoms().masses.sum() == pytest.approx(4.0)
    assert cf.FamilySpec(cf.Family.SCHLATHER, 2, {"rho": 0.2}).atoms() is None


def test_thinned_backend_restricts_to_identity():
    base = cf.ClosedFormBackend(cf.FamilySpec(cf.Family.HUSLER_REISS, 2, {"a": 0.8}))
    thinned = cf.ThinnedBackend(base, 0.5, 0.7)
    values, _ = thinned.restrict((1,)).evaluate(np.array([[2.5]]))
    assert values[0] == 2.5
    with pytest.raises(SpecError):
        cf.ThinnedBackend(base, 1.5, 0.7)
