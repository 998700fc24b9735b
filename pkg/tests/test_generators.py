"""
Generator device: standardization, Monte Carlo ℓ against closed forms,
common random numbers, reproducibility, indicators and profile extraction.
"""
import math

import numpy as np
import pytest

from lib.engine import closed_forms as cf
from lib.engine.dependence import DependenceModel, ell, ell_batch, margin_restrict, tail_copula, unit_margins
from lib.engine.generators import (
    ConstantGenerator,
    DirichletGammaGenerator,
    DiscreteAtomsGenerator,
    FrechetStableGenerator,
    GaussianPairGenerator,
    IndicatorLaw,
    LognormalPairGenerator,
    Provenance,
    RandomSumExponentialGenerator,
    attractor_cdf,
    face_mass,
    face_masses,
    from_profiles,
    generator_model,
    indicator_thin,
    mc_ell,
    profile_atoms,
    sample_A,
    sample_profiles,
)
from lib.engine.streams import mean_and_se, stream_counts
from lib.engine.types import McConfig
from lib.errors import ConstraintError, DomainError, SpecError

POINTS = np.array([[1.0, 1.0], [0.3, 1.2], [2.0, 0.5], [0.8, 0.1]])


def assert_within(estimates, ses, truth, k=4.0):
    """Every estimate within k standard errors of the truth (plus round-off)."""
    gap = np.abs(np.asarray(estimates) - np.asarray(truth))
    assert np.all(gap <= k * np.asarray(ses) + 1e-12), (estimates, ses, truth)


# ──────────────────────────────────────────────
# STANDARDIZATION
# ──────────────────────────────────────────────

def test_constant_is_perfect_dependence(small_mc):
    values, ses = mc_ell(ConstantGenerator([1.0, 2.0, 0.5]), np.array([[0.2, 0.9, 0.4]]), small_mc)
    assert values[0] == pytest.approx(0.9, rel=1e-14)
    assert ses[0] == pytest.approx(0.0, abs=1e-15)


def test_scaled_gaussian_pair_has_unit_positive_mean(mc):
    a = sample_A(GaussianPairGenerator(0.4), mc.sample_count, seed=mc.seed, stream_count=mc.stream_count)
    mean, se = mean_and_se(np.maximum(a, 0.0))
    assert_within(mean, se, [1.0, 1.0])


def test_mc_standardization_matches_closed_form():
    gen = DirichletGammaGenerator([0.5, 2.0], standardize=Provenance.MC_ESTIMATED,
                                  standardize_samples=400_000, standardize_seed=3)
    np.testing.assert_allclose(gen.scale, [0.5, 2.0], rtol=0.02)
    assert gen.describe()["standardize"] == "mc-estimated"


def test_discrete_atoms_validation():
    with pytest.raises(SpecError):
        DiscreteAtomsGenerator([([1.0, 0.0], 0.5), ([0.0, 1.0], 0.4)])
    with pytest.raises(ConstraintError):
        DiscreteAtomsGenerator([([1.0, -1.0], 0.5), ([1.0, -2.0], 0.5)])


# ──────────────────────────────────────────────
# MONTE CARLO ℓ AGAINST CLOSED FORMS
# ──────────────────────────────────────────────

def test_dirichlet_gamma_one_one(mc):
    values, ses = mc_ell(DirichletGammaGenerator([1.0, 1.0]), POINTS, mc)
    assert_within(values, ses, cf.dirichlet11_ell(POINTS[:, 0], POINTS[:, 1]))


def test_gaussian_pair_is_schlather(mc):
    values, ses = mc_ell(GaussianPairGenerator(0.3), POINTS, mc)
    assert_within(values, ses, cf.schlather_ell(0.3, POINTS[:, 0], POINTS[:, 1]))


def test_lognormal_pair_is_husler_reiss(mc):
    gen = LognormalPairGenerator(0.4, 1.0)
    values, ses = mc_ell(gen, POINTS, mc)
    assert_within(values, ses, cf.husler_reiss_ell(gen.husler_reiss_a, POINTS[:, 0], POINTS[:, 1]))


def test_random_sum_matches_its_closed_form(mc):
    gen = RandomSumExponentialGenerator([0.25, 0.5, 0.25], [0.0, 1.0])
    values, ses = mc_ell(gen, POINTS, mc)
    assert_within(values, ses, cf.random_sum_ell(gen.j_law, gen.k_law, POINTS[:, 0], POINTS[:, 1]))


def test_frechet_stable_is_logistic(mc):
    theta = 3.0
    values, ses = mc_ell(FrechetStableGenerator(theta), POINTS, mc)
    assert_within(values, ses, cf.logistic_ell(theta, POINTS))


def test_antithetic_pairs_are_mirrored():
    a = sample_A(GaussianPairGenerator(0.2), 1000, seed=5, stream_count=3, antithetic=True)
    np.testing.assert_allclose(a[0::2], -a[1::2])


def test_antithetic_needs_even_count():
    with pytest.raises(DomainError):
        stream_counts(11, 2, paired=True)


def test_independence_probability_for_dirichlet(mc):
    """P[X_j ≤ 1] on unit Fréchet margins of X = A·Z is E[exp(-A_j)] = ½."""
    gen = DirichletGammaGenerator([1.0, 1.0])
    a = sample_A(gen, mc.sample_count, seed=mc.seed)
    mean, se = mean_and_se(np.exp(-a))
    assert_within(mean, se, [0.5, 0.5])


# ──────────────────────────────────────────────
# COMMON RANDOM NUMBERS AND REPRODUCIBILITY
# ──────────────────────────────────────────────

def test_same_seed_same_bits_across_threads():
    gen = LognormalPairGenerator(0.1, 0.8)
    one = sample_A(gen, 50_000, seed=99, stream_count=8, threads=1)
    many = sample_A(gen, 50_000, seed=99, stream_count=8, threads=4)
    assert np.array_equal(one, many)


def test_different_seeds_differ():
    gen = DirichletGammaGenerator([1.0, 1.0])
    assert not np.array_equal(sample_A(gen, 100, seed=1), sample_A(gen, 100, seed=2))


def test_homogeneity_is_exact_under_crn(small_mc):
    model = generator_model(DirichletGammaGenerator([0.7, 1.3]), small_mc)
    values, _ = ell_batch(model, POINTS)
    doubled, _ = ell_batch(model, 2.0 * POINTS)
    assert np.array_equal(doubled, 2.0 * values)


def test_bounds_hold_per_sample_against_estimated_margins(small_mc):
    model = generator_model(DirichletGammaGenerator([0.7, 1.3]), small_mc)
    c, _ = unit_margins(model)
    values, _ = ell_batch(model, POINTS)
    assert np.all(values >= (POINTS * c).max(axis=1) - 1e-12)
    assert np.all(values <= (POINTS * c).sum(axis=1) + 1e-12)


def test_generator_tail_copula_uses_shared_samples(small_mc):
    model = generator_model(DirichletGammaGenerator([1.0, 1.0]), small_mc)
    x = np.array([0.6, 1.1])
    c, _ = unit_margins(model)
    r = tail_copula(model, x).value
    assert r == pytest.approx((x * c).sum() - ell(model, x).value, abs=1e-12)


def test_generator_margin_restrict_slices_samples(small_mc):
    model = generator_model(DirichletGammaGenerator([1.0, 2.0, 3.0]), small_mc)
    margin = margin_restrict(model, [0, 2])
    x = np.array([0.4, 1.5])
    assert ell(margin, x).value == pytest.approx(ell(model, [0.4, 0.0, 1.5]).value, rel=1e-14)


def test_attractor_cdf(mc):
    gen = DirichletGammaGenerator([1.0, 1.0])
    est = attractor_cdf(gen, [1.0, 1.0], mc)
    assert abs(est.value - math.exp(-1.5)) <= 4 * est.se + 1e-12
    assert attractor_cdf(gen, [0.0, 1.0], mc).value == 0.0


# ──────────────────────────────────────────────
# INDICATORS
# ──────────────────────────────────────────────

def test_alpha_beta_round_trip():
    law = IndicatorLaw.from_alpha_beta(0.3, 0.9)
    alpha, beta = law.alpha_beta()
    assert alpha == pytest.approx(0.3)
    assert beta == pytest.approx(0.9)


def test_alpha_beta_zero_cases():
    law = IndicatorLaw.from_alpha_beta(0.0, 0.0)
    np.testing.assert_allclose(law.marginals, [0.5, 0.5])
    with pytest.raises(ConstraintError):
        IndicatorLaw.from_alpha_beta(0.0, 0.4)


def test_indicator_law_needs_every_coordinate():
    with pytest.raises(ConstraintError):
        IndicatorLaw(2, {(0,): 0.5, (): 0.5})


def test_thinning_constant_gives_marshall_olkin(mc):
    model = indicator_thin(ConstantGenerator([1.0, 1.0]), alpha=0.3, beta=0.9, cfg=mc)
    values, ses = ell_batch(model, POINTS)
    assert_within(values, ses, cf.marshall_olkin_ell(0.3, 0.9, POINTS[:, 0], POINTS[:, 1]))


def test_closed_thinning_of_exact_base():
    base = cf.ClosedFormBackend(cf.FamilySpec(cf.Family.PERFECT_DEPENDENCE))
    model = indicator_thin(base, alpha=0.3, beta=0.9)
    values, _ = ell_batch(model, POINTS)
    np.testing.assert_allclose(values, cf.marshall_olkin_ell(0.3, 0.9, POINTS[:, 0], POINTS[:, 1]), rtol=1e-12)


def test_thinning_zero_is_independence():
    base = cf.ClosedFormBackend(cf.FamilySpec(cf.Family.HUSLER_REISS, params={"a": 0.5}))
    values, _ = ell_batch(indicator_thin(base, theta=0.0), POINTS)
    np.testing.assert_allclose(values, POINTS.sum(axis=1), rtol=1e-12)


def test_block_indicators_mixture_is_exact():
    block = IndicatorLaw.from_alpha_beta(0.5, 0.5)
    law = IndicatorLaw.from_blocks([[0, 1], [2]], block)
    base = cf.ClosedFormBackend(cf.FamilySpec(cf.Family.PERFECT_DEPENDENCE, 3))
    model = indicator_thin(base, law=law)
    np.testing.assert_allclose(unit_margins(model)[0], np.ones(3), rtol=1e-12)
    # coordinates 0 and 1 share a switch, so they stay comonotone
    assert ell(margin_restrict(model, [0, 1]), [1.0, 1.0]).value == pytest.approx(1.0, rel=1e-12)


# ──────────────────────────────────────────────
# PROFILES AND SPECTRAL MASS
# ──────────────────────────────────────────────

def test_profile_atoms_of_discrete_generator():
    gen = DiscreteAtomsGenerator([([2.0, 0.0], 0.5), ([0.0, 2.0], 0.5)])
    atoms = profile_atoms(gen)
    assert len(atoms) == 2
    np.testing.assert_allclose(np.sort(atoms.masses), [1.0, 1.0])


def test_from_profiles_reproduces_the_law():
    profiles = [[0.25, 0.75], [0.75, 0.25]]
    gen = from_profiles(profiles, [0.5, 0.5])
    atoms = profile_atoms(gen)
    np.testing.assert_allclose(np.sort(atoms.weights[:, 0]), [0.25, 0.75])
    with pytest.raises(ConstraintError):
        from_profiles(profiles, [0.9, 0.1])


def test_profile_means_are_one_over_d(mc):
    sample = sample_profiles(DirichletGammaGenerator([0.5, 1.0, 2.0]), mc)
    means, ses = sample.profile_means()
    assert_within(means, ses, np.full(3, 1.0 / 3.0))


def test_profile_law_integrates_to_one(mc):
    sample = sample_profiles(LognormalPairGenerator(rho=0.2, sigma=0.7), mc)
    total = sample.weighted_mean(np.ones(sample.radii.shape[0]))
    assert abs(total.value - 1.0) <= 4 * total.se + 1e-12
    first = sample.weighted_mean(sample.profiles[:, 0])
    assert abs(first.value - 0.5) <= 4 * first.se + 1e-12


def test_profile_histogram_is_tilted_by_magnitude(mc):
    # standardized atoms (4, 1) w.p. ¼ and (0, 1) w.p. ¾: magnitudes 5 and 1
    gen = DiscreteAtomsGenerator([([3.0, 1.0], 0.25), ([0.0, 1.0], 0.75)])
    atoms = profile_atoms(gen)
    probs = atoms.profile_probabilities()
    assert sorted(probs) == pytest.approx([0.375, 0.625])
    sample = sample_profiles(gen, mc)
    for w, q in zip(atoms.weights, probs):
        at_atom = np.all(np.isclose(sample.profiles, w), axis=1)
        est = sample.weighted_mean(at_atom)
        assert abs(est.value - q) <= 4 * est.se + 1e-12
    # unweighted draw frequencies follow p_k instead
    assert np.mean(np.isclose(sample.profiles[:, 0], 0.8)) == pytest.approx(0.25, abs=0.01)


def test_face_masses_sum_to_dimension(mc):
    gen = RandomSumExponentialGenerator([0.25, 0.5, 0.25], [0.0, 1.0])
    masses = face_masses(gen, mc)
    assert set(masses) <= {(0,), (1,), (0, 1)}
    total = sum(est.value for est in masses.values())
    assert total == pytest.approx(2.0, rel=0.02)
    # J = 0 with probability ¼ puts all mass of those draws on face {2}
    single = face_mass(gen, [1], mc)
    assert abs(single.value - 0.25) <= 4 * single.se + 1e-12


def test_face_mass_of_constant_is_the_full_face(small_mc):
    est = face_mass(ConstantGenerator([1.0, 1.0, 1.0]), [0, 1, 2], small_mc)
    assert est.value == pytest.approx(3.0, rel=1e-12)


def test_mc_config_validation():
    with pytest.raises(DomainError):
        McConfig(sample_count=0)
    with pytest.raises(DomainError):
        McConfig(threads=0)


def test_thinned_tail_copula_is_base_at_scaled_point():
    base = cf.ClosedFormBackend(cf.FamilySpec(cf.Family.SCHLATHER, params={"rho": 0.1}))
    thinned = indicator_thin(base, alpha=0.4, beta=0.8)
    base_model = DependenceModel(base)
    for x, y in POINTS:
        expected = tail_copula(base_model, [0.4 * x, 0.8 * y]).value
        assert tail_copula(thinned, [x, y]).value == pytest.approx(expected, abs=1e-12)


def test_profile_atoms_hand_computed():
    gen = DiscreteAtomsGenerator([([1.5, 0.5], 0.5), ([0.5, 1.5], 0.5)])
    pairs = sorted(profile_atoms(gen).pairs())
    assert pairs[0][0] == pytest.approx((0.25, 0.75))
    assert pairs[1][0] == pytest.approx((0.75, 0.25))
    assert [m for _, m in pairs] == pytest.approx([1.0, 1.0])


def test_attractor_cdf_of_constant(small_mc):
    est = attractor_cdf(ConstantGenerator([1.0, 1.0, 1.0]), [2.0, 2.0, 2.0], small_mc)
    assert est.value == pytest.approx(math.exp(-0.5), rel=1e-14)
