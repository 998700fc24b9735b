"""
Sample clouds, rank views and the rank-based ℓ̂ and profile estimators.
"""
import numpy as np
import pytest

from lib.engine.empirical import (
    CloudMargin,
    SampleCloud,
    default_k,
    ell_hat,
    ell_hat_grid,
    profile_hat,
    rank_transform,
    ranks,
    read_cloud,
    return_times,
    simulate_x,
    write_cloud,
)
from lib.engine.generators import (
    ConstantGenerator,
    DirichletGammaGenerator,
    DiscreteAtomsGenerator,
    GaussianPairGenerator,
    LognormalPairGenerator,
)
from lib.engine.types import McConfig
from lib.errors import DomainError, SpecError

N = 10_000


@pytest.fixture
def comonotone():
    base = np.arange(N, dtype=float)
    return SampleCloud(np.column_stack([base, 3.0 * base + 1.0]))


@pytest.fixture
def countermonotone():
    base = np.arange(N, dtype=float)
    return SampleCloud(np.column_stack([base, -base]))


# ──────────────────────────────────────────────
# CLOUDS AND RANKS
# ──────────────────────────────────────────────

def test_cloud_validation():
    with pytest.raises(DomainError):
        SampleCloud(np.zeros(5))
    with pytest.raises(DomainError):
        SampleCloud(np.array([[0.0, 0.5]]), CloudMargin.UNIFORM)
    with pytest.raises(DomainError):
        SampleCloud(np.ones((2, 2)), columns=("a",))


def test_ordinal_ties_keep_input_order():
    cloud = SampleCloud(np.array([[1.0], [1.0], [0.0], [1.0]]))
    assert ranks(cloud)[:, 0].tolist() == [2, 3, 1, 4]


def test_rank_views_stay_inside_their_domains(rng):
    cloud = SampleCloud(rng.standard_normal((50, 3)))
    uniform = rank_transform(cloud, CloudMargin.UNIFORM)
    pareto = return_times(cloud)
    assert uniform.data.min() > 0 and uniform.data.max() < 1
    assert pareto.data.min() > 1
    assert pareto.data.max() == pytest.approx(51.0)
    with pytest.raises(DomainError):
        rank_transform(cloud, CloudMargin.RAW)


# ──────────────────────────────────────────────
# ℓ̂
# ──────────────────────────────────────────────

def test_comonotone_gives_max(comonotone):
    est = ell_hat(comonotone, [1.0, 1.0], k=100)
    assert est.value == pytest.approx(1.0)
    assert not est.clamped


def test_countermonotone_gives_sum(countermonotone):
    assert ell_hat(countermonotone, [1.0, 1.0], k=100).value == pytest.approx(2.0)
    assert ell_hat(countermonotone, [0.5, 1.5], k=100).value == pytest.approx(2.0)


def test_invariant_under_monotone_transforms(rng):
    data = rng.standard_normal((2000, 2))
    plain = ell_hat(SampleCloud(data), [1.0, 0.7], k=60)
    bent = ell_hat(SampleCloud(np.column_stack([np.exp(data[:, 0]), data[:, 1] ** 3])), [1.0, 0.7], k=60)
    assert plain == bent


def test_k_and_point_checks(comonotone):
    with pytest.raises(DomainError):
        ell_hat(comonotone, [1.0, 1.0], k=N)
    with pytest.raises(DomainError):
        ell_hat(comonotone, [200.0, 1.0], k=100)
    assert default_k(N) == 100
    assert default_k(1) == 1


def test_grid_reports_clamping(comonotone):
    estimates, rate = ell_hat_grid(comonotone, [[1.0, 1.0], [2.0, 0.5]], k=100)
    assert len(estimates) == 2
    assert 0.0 <= rate <= 1.0
    assert all(e.value >= max(x) - 1e-12 for e, x in zip(estimates, [[1.0, 1.0], [2.0, 0.5]]))


def test_simulated_dirichlet_cloud_estimates_ell():
    cfg = McConfig(sample_count=200_000, seed=4, stream_count=4)
    cloud = simulate_x(DirichletGammaGenerator([1.0, 1.0]), cfg)
    est = ell_hat(cloud, [1.0, 1.0], k=4000)
    assert est.value == pytest.approx(1.5, abs=0.1)


def test_simulation_is_reproducible():
    cfg = McConfig(sample_count=1000, seed=8, stream_count=2)
    gen = DirichletGammaGenerator([1.0, 2.0])
    first = simulate_x(gen, cfg).data
    again = simulate_x(gen, McConfig(sample_count=1000, seed=8, stream_count=2, threads=2)).data
    assert np.array_equal(first, again)


@pytest.mark.parametrize("gen", [
    DirichletGammaGenerator([1.0, 1.0]),
    GaussianPairGenerator(rho=0.3),
    LognormalPairGenerator(rho=0.4, sigma=1.0),
    DiscreteAtomsGenerator([([1.5, 0.5], 0.5), ([0.5, 1.5], 0.5)]),
], ids=lambda gen: gen.kind)
def test_simulated_cloud_recovers_ell_and_profiles(gen):
    cloud = simulate_x(gen, McConfig(sample_count=100_000, seed=31, stream_count=4))
    truth = gen.exact_backend().evaluate(np.array([[1.0, 1.0]]))[0][0]
    assert ell_hat(cloud, [1.0, 1.0], k=2000).value == pytest.approx(truth, abs=0.1)
    summary = profile_hat(cloud, k=2000)
    np.testing.assert_allclose(summary.profiles.mean(axis=0), 0.5, atol=0.05)


# ──────────────────────────────────────────────
# PROFILES
# ──────────────────────────────────────────────

def test_one_hot_generator_profiles_sit_on_vertices():
    gen = DiscreteAtomsGenerator([([2.0, 0.0], 0.5), ([0.0, 2.0], 0.5)])
    cloud = simulate_x(gen, McConfig(sample_count=20_000, seed=2, stream_count=4))
    summary = profile_hat(cloud)
    assert summary.vertex_fraction(0.1) >= 0.9


def test_constant_generator_profiles_sit_at_the_barycenter():
    cloud = simulate_x(ConstantGenerator([1.0, 1.0]), McConfig(sample_count=5000, seed=2, stream_count=2))
    summary = profile_hat(cloud, k=50)
    np.testing.assert_allclose(summary.profiles, 0.5)
    assert summary.vertex_fraction(0.1) == 0.0


def test_profile_ties_keep_input_order():
    cloud = SampleCloud(np.array([[1.5, 1.5], [2.0, 2.0], [2.0, 2.0], [1.0, 1.0]]), CloudMargin.PARETO)
    summary = profile_hat(cloud, k=2)
    np.testing.assert_allclose(summary.radii, [4.0, 4.0])
    assert summary.threshold == pytest.approx(3.0)


def test_profile_summary_outputs(rng):
    cloud = SampleCloud(rng.standard_normal((400, 3)))
    summary = profile_hat(cloud, k=20)
    assert summary.profiles.shape == (20, 3)
    np.testing.assert_allclose(summary.profiles.sum(axis=1), 1.0)
    counts, edges = summary.histogram(0, bins=5)
    assert counts.sum() == 20 and edges[-1] == 1.0
    frame = summary.to_frame(cloud.columns)
    assert list(frame.columns) == ["r", "w_x1", "w_x2", "w_x3"]
    assert summary.se.shape == (3,)


# ──────────────────────────────────────────────
# CSV INGEST
# ──────────────────────────────────────────────

def test_cloud_csv_round_trip(tmp_path, rng):
    cloud = SampleCloud(rng.exponential(size=(30, 2)), columns=("wind", "surge"))
    path = tmp_path / "cloud.csv"
    write_cloud(cloud, path)
    back = read_cloud(path)
    assert back.columns == ("wind", "surge")
    np.testing.assert_array_equal(back.data, cloud.data)


def test_cloud_csv_keeps_adjacent_doubles_apart(tmp_path):
    base = 0.1 + 0.2
    column = np.array([base, np.nextafter(base, 1.0), np.nextafter(base, 0.0), 1.0 / 3.0])
    cloud = SampleCloud(np.column_stack([column, column[::-1]]))
    path = tmp_path / "close.csv"
    write_cloud(cloud, path)
    back = read_cloud(path)
    np.testing.assert_array_equal(back.data, cloud.data)
    np.testing.assert_array_equal(rank_transform(back, CloudMargin.UNIFORM).data, rank_transform(cloud, CloudMargin.UNIFORM).data)


def test_read_cloud_rejects_text(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,x\n")
    with pytest.raises(SpecError):
        read_cloud(path)
    with pytest.raises(SpecError):
        read_cloud(tmp_path / "missing.csv")
