"""
Generator engine: X = (A_1 Z, ..., A_d Z) with Z unit Fréchet and E[A_j⁺] = 1.

The attractor of X has ℓ_A(x) = E[max_j(x_j A_j, 0)], so any sampler for A
doubles as a Monte Carlo dependence model. Every kind here knows its own
standardization constants c_j = E[A_j⁺] and, where one exists, the exact
closed-form model it converges to.
"""
import logging
import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gamma as gamma_fn

from lib import config
from lib.engine.adapter import DependenceBackend
from lib.engine.closed_forms import (
    ClosedFormBackend,
    Family,
    FamilySpec,
    ThinnedBackend,
    check_count_law,
)
from lib.engine.dependence import DependenceModel, DiscreteBackend, normalize_subset
from lib.engine.streams import (
    TAG_GENERATOR,
    TAG_STANDARDIZE,
    draw,
    mean_and_se,
    stream_counts,
    stream_generators,
)
from lib.engine.types import Estimate, McConfig, SpectralAtoms, as_points
from lib.errors import ConstraintError, DomainError, SpecError

logger = logging.getLogger(__name__)

STANDARDIZE_CHUNK = 1 << 20


class Provenance(str, Enum):
    """Where a generator's standardization constants came from."""

    CLOSED_FORM = "closed-form"
    MC_ESTIMATED = "mc-estimated"


# ──────────────────────────────────────────────
# GENERATOR BASE
# ──────────────────────────────────────────────

class Generator(ABC):
    """
    A sampler for the random vector A, standardized so that E[A_j⁺] = 1.

    Subclasses set their parameters, then call Generator.__init__, which
    fixes the constants c_j either from closed_scale() or from a Monte
    Carlo pre-pass on its own stream tag.
    """

    kind = "Generator"
    supports_antithetic = False

    def __init__(self, dimension: int, standardize: Provenance = Provenance.CLOSED_FORM,
                 standardize_seed: int = config.DEFAULT_SEED,
                 standardize_samples: int = config.STANDARDIZE_SAMPLES):
        if dimension < 1:
            raise SpecError(f"generator dimension must be >= 1, got {dimension}")
        self._dimension = dimension
        self.provenance = Provenance(standardize)
        if self.provenance is Provenance.CLOSED_FORM:
            scale = np.asarray(self.closed_scale(), dtype=float)
        else:
            scale = self._estimate_scale(standardize_samples, standardize_seed)
            logger.warning("%s standardized by Monte Carlo over %d draws: c = %s",
                           self.kind, standardize_samples, np.array2string(scale, precision=6))
        if scale.shape != (dimension,) or np.any(~(scale > 0)) or not np.all(np.isfinite(scale)):
            raise ConstraintError(f"{self.kind}: E[A_j⁺] must be positive and finite, got {scale.tolist()}")
        scale.setflags(write=False)
        self._scale = scale

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def scale(self) -> np.ndarray:
        """Standardization constants c_j = E[A_j⁺] of the raw sampler."""
        return self._scale

    @abstractmethod
    def _raw(self, rng: np.random.Generator, n: int, antithetic: bool) -> np.ndarray:
        """n unstandardized draws as an (n, d) array; antithetic rows come in pairs."""

    @abstractmethod
    def closed_scale(self) -> Sequence[float]:
        """E[A_j⁺] of the raw sampler in closed form."""

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        """Parameters as they appear in a model spec document."""

    def exact_backend(self) -> Optional[DependenceBackend]:
        """Closed-form or discrete model the Monte Carlo estimates converge to, if known."""
        return None

    def sample(self, rng: np.random.Generator, n: int, antithetic: bool = False) -> np.ndarray:
        return self._raw(rng, n, antithetic) / self._scale

    def _estimate_scale(self, samples: int, seed: int) -> np.ndarray:
        rngs = stream_generators(seed, config.DEFAULT_STREAMS, TAG_STANDARDIZE)
        total = np.zeros(self._dimension)
        for rng, count in zip(rngs, stream_counts(samples, len(rngs))):
            for start in range(0, count, STANDARDIZE_CHUNK):
                size = min(STANDARDIZE_CHUNK, count - start)
                total += np.maximum(self._raw(rng, size, False), 0.0).sum(axis=0)
        return total / samples

    def describe(self) -> Dict[str, Any]:
        return {
            "backend": "generator",
            "family": self.kind,
            "dimension": self.dimension,
            "params": self.params(),
            "standardize": self.provenance.value,
            "scale": self._scale.tolist(),
        }

    def __repr__(self):
        return f"{type(self).__name__}({self.params()})"


# ──────────────────────────────────────────────
# GENERATOR KINDS
# ──────────────────────────────────────────────

class ConstantGenerator(Generator):
    """A = a, a fixed positive vector; standardizes to (1, ..., 1) (perfect dependence)."""

    kind = "Constant"

    def __init__(self, a: Sequence[float], **kwargs):
        self.a = np.array(a, dtype=float)
        if self.a.ndim != 1 or np.any(~(self.a > 0)):
            raise SpecError(f"Constant needs a vector of positive entries, got {a!r}")
        super().__init__(self.a.shape[0], **kwargs)

    def _raw(self, rng, n, antithetic):
        return np.tile(self.a, (n, 1))

    def closed_scale(self):
        return self.a

    def params(self):
        return {"a": self.a.tolist()}

    def exact_backend(self):
        return ClosedFormBackend(FamilySpec(Family.PERFECT_DEPENDENCE, self.dimension))


class DiscreteAtomsGenerator(Generator):
    """A = a_k with probability p_k; p_k ∈ (0, 1] summing to 1."""

    kind = "DiscreteAtoms"

    def __init__(self, atoms: Sequence[Tuple[Sequence[float], float]], **kwargs):
        if not atoms:
            raise SpecError("DiscreteAtoms needs at least one atom")
        self.values = np.array([a for a, _ in atoms], dtype=float)
        self.probs = np.array([p for _, p in atoms], dtype=float)
        if self.values.ndim != 2 or not np.all(np.isfinite(self.values)):
            raise SpecError("DiscreteAtoms vectors must be finite and of equal length")
        if np.any(~(self.probs > 0)) or np.any(self.probs > 1):
            raise SpecError(f"DiscreteAtoms probabilities must lie in (0, 1], got {self.probs.tolist()}")
        if abs(self.probs.sum() - 1.0) > config.CONSTRUCTION_TOL:
            raise SpecError(f"DiscreteAtoms probabilities sum to {self.probs.sum()!r}, expected 1")
        super().__init__(self.values.shape[1], **kwargs)

    def _raw(self, rng, n, antithetic):
        return self.values[rng.choice(self.probs.shape[0], size=n, p=self.probs)]

    def closed_scale(self):
        return self.probs @ np.maximum(self.values, 0.0)

    def params(self):
        return {"atoms": [{"a": a.tolist(), "p": float(p)} for a, p in zip(self.values, self.probs)]}

    def exact_backend(self):
        return DiscreteBackend(profile_atoms(self))


class DirichletGammaGenerator(Generator):
    """A_j = G_j / α_j with G_j ~ Gamma(α_j) independent."""

    kind = "DirichletGamma"

    def __init__(self, alpha: Sequence[float], **kwargs):
        self.alpha = np.array(alpha, dtype=float)
        if self.alpha.ndim != 1 or self.alpha.shape[0] < 1 or np.any(~(self.alpha > 0)):
            raise SpecError(f"DirichletGamma alpha must be positive, got {alpha!r}")
        super().__init__(self.alpha.shape[0], **kwargs)

    def _raw(self, rng, n, antithetic):
        return rng.standard_gamma(self.alpha, size=(n, self.dimension))

    def closed_scale(self):
        return self.alpha

    def params(self):
        return {"alpha": self.alpha.tolist()}

    def exact_backend(self):
        if self.dimension == 2 and np.all(self.alpha == 1.0):
            return ClosedFormBackend(FamilySpec(Family.DIRICHLET_BIVARIATE_11))
        return None


def _check_rho(rho: float):
    if not -1 < rho < 1:
        raise SpecError(f"rho must lie in (-1, 1), got {rho!r}")


def _correlated_normals(rng, n, rho, antithetic):
    half = n // 2 if antithetic else n
    z = rng.standard_normal((half, 2))
    z[:, 1] = rho * z[:, 0] + math.sqrt(1.0 - rho * rho) * z[:, 1]
    if antithetic:
        z = np.stack([z, -z], axis=1).reshape(n, 2)
    return z


class GaussianPairGenerator(Generator):
    """A = √(2π)·S with S a standard bivariate normal of correlation ρ."""

    kind = "GaussianPair"
    supports_antithetic = True

    def __init__(self, rho: float, **kwargs):
        _check_rho(rho)
        self.rho = float(rho)
        super().__init__(2, **kwargs)

    def _raw(self, rng, n, antithetic):
        return _correlated_normals(rng, n, self.rho, antithetic)

    def closed_scale(self):
        return np.full(2, 1.0 / math.sqrt(2.0 * math.pi))

    def params(self):
        return {"rho": self.rho}

    def exact_backend(self):
        return ClosedFormBackend(FamilySpec(Family.SCHLATHER, params={"rho": self.rho}))


class LognormalPairGenerator(Generator):
    """A_j = exp(σ S_j - σ²/2) with S standard bivariate normal of correlation ρ."""

    kind = "LognormalPair"
    supports_antithetic = True

    def __init__(self, rho: float, sigma: float, **kwargs):
        _check_rho(rho)
        if not sigma > 0:
            raise SpecError(f"LognormalPair sigma must be > 0, got {sigma!r}")
        self.rho = float(rho)
        self.sigma = float(sigma)
        super().__init__(2, **kwargs)

    def _raw(self, rng, n, antithetic):
        return np.exp(self.sigma * _correlated_normals(rng, n, self.rho, antithetic))

    def closed_scale(self):
        return np.full(2, math.exp(0.5 * self.sigma ** 2))

    def params(self):
        return {"rho": self.rho, "sigma": self.sigma}

    @property
    def husler_reiss_a(self) -> float:
        return self.sigma * math.sqrt(2.0 * (1.0 - self.rho))

    def exact_backend(self):
        return ClosedFormBackend(FamilySpec(Family.HUSLER_REISS, params={"a": self.husler_reiss_a}))


class RandomSumExponentialGenerator(Generator):
    """
    A = (E_1 + ... + E_J, F_1 + ... + F_K) with unit exponential terms and
    counts J, K on {0, 1, 2, 3} of unit mean; an empty sum is 0.
    """

    kind = "RandomSumExponential"

    def __init__(self, j_law: Sequence[float], k_law: Sequence[float], **kwargs):
        self.j_law = check_count_law("j_law", j_law)
        self.k_law = check_count_law("k_law", k_law)
        super().__init__(2, **kwargs)

    def _raw(self, rng, n, antithetic):
        counts = np.stack([rng.choice(4, size=n, p=self.j_law),
                           rng.choice(4, size=n, p=self.k_law)], axis=1)
        # Gamma(0) draws are exactly 0
        return rng.standard_gamma(counts.astype(float))

    def closed_scale(self):
        return np.array([self.j_law @ np.arange(4), self.k_law @ np.arange(4)])

    def params(self):
        return {"j_law": self.j_law.tolist(), "k_law": self.k_law.tolist()}

    def exact_backend(self):
        return ClosedFormBackend(FamilySpec(Family.RANDOM_SUM_EXPONENTIAL, params=self.params()))


class FrechetStableGenerator(Generator):
    """A_j = V_j / Γ(1 - 1/θ) with V_j i.i.d. Fréchet(θ), θ > 1; attractor is logistic(θ)."""

    kind = "FrechetStable"

    def __init__(self, theta: float, dimension: int = 2, **kwargs):
        if not theta > 1 or math.isinf(theta):
            raise SpecError(f"FrechetStable theta must be finite and > 1, got {theta!r}")
        self.theta = float(theta)
        super().__init__(dimension, **kwargs)

    def _raw(self, rng, n, antithetic):
        return rng.standard_exponential((n, self.dimension)) ** (-1.0 / self.theta)

    def closed_scale(self):
        return np.full(self.dimension, float(gamma_fn(1.0 - 1.0 / self.theta)))

    def params(self):
        return {"theta": self.theta}

    def exact_backend(self):
        return ClosedFormBackend(FamilySpec(Family.LOGISTIC, self.dimension, {"theta": self.theta}))


class SubsetGenerator(Generator):
    """Coordinates `subset` (0-based) of a standardized parent generator."""

    kind = "Subset"

    def __init__(self, parent: Generator, subset: Tuple[int, ...]):
        self.parent = parent
        self.subset = tuple(subset)
        self.supports_antithetic = parent.supports_antithetic
        super().__init__(len(self.subset))

    def _raw(self, rng, n, antithetic):
        return self.parent.sample(rng, n, antithetic)[:, list(self.subset)]

    def closed_scale(self):
        return np.ones(len(self.subset))

    def params(self):
        return {"of": self.parent.describe(), "subset": [j + 1 for j in self.subset]}

    def exact_backend(self):
        base = self.parent.exact_backend()
        return None if base is None else base.restrict(self.subset)


# ──────────────────────────────────────────────
# INDICATOR DEVICE
# ──────────────────────────────────────────────

class IndicatorLaw:
    """
    Joint law of switches (I_1, ..., I_d) as probabilities on 0-based
    coordinate subsets; the empty subset (all switches off) is allowed.
    Every coordinate must switch on with positive probability p_j.
    """

    def __init__(self, dimension: int, probs: Mapping):
        law: Dict[frozenset, float] = {}
        for subset, p in probs.items():
            c = frozenset(int(j) for j in subset)
            if c and (min(c) < 0 or max(c) >= dimension):
                raise SpecError(f"indicator subset {sorted(c)} outside coordinates 0..{dimension - 1}")
            if p < 0:
                raise ConstraintError(f"negative indicator probability {p!r}")
            if p > 0:
                law[c] = law.get(c, 0.0) + float(p)
        total = sum(law.values())
        if abs(total - 1.0) > config.CONSTRUCTION_TOL:
            raise ConstraintError(f"indicator probabilities sum to {total!r}, expected 1")
        self.dimension = dimension
        self.subsets = sorted(law, key=lambda c: (len(c), sorted(c)))
        self.probs = np.array([law[c] for c in self.subsets])
        self.masks = np.array([[j in c for j in range(dimension)] for c in self.subsets], dtype=bool)
        self.marginals = self.probs @ self.masks
        if np.any(self.marginals <= 0):
            zero = [int(j) + 1 for j in np.flatnonzero(self.marginals <= 0)]
            raise ConstraintError(f"indicator law never switches on coordinates {zero} (p_j = 0)")

    @classmethod
    def from_pair(cls, p: float, q: float, r: float) -> "IndicatorLaw":
        """Bivariate law from P[I_1 = 1] = p, P[I_2 = 1] = q, P[I_1 = I_2 = 1] = r."""
        if not (0 < p <= 1 and 0 < q <= 1):
            raise ConstraintError(f"switch-on probabilities must lie in (0, 1], got p={p!r}, q={q!r}")
        if not 0 <= r <= min(p, q):
            raise ConstraintError(f"joint probability r={r!r} must lie in [0, min(p, q)]")
        neither = 1.0 - p - q + r
        if neither < -config.CONSTRUCTION_TOL:
            raise ConstraintError(f"inconsistent indicator law: P[I = (0, 0)] = {neither!r}")
        return cls(2, {(0, 1): r, (0,): p - r, (1,): q - r, (): max(neither, 0.0)})

    @classmethod
    def from_alpha_beta(cls, alpha: float, beta: float) -> "IndicatorLaw":
        """
        Law realising thinning parameters α = r/p, β = r/q with no (0, 0)
        mass; α = β = 0 maps to p = q = ½, r = 0.
        """
        for name, value in (("alpha", alpha), ("beta", beta)):
            if not 0 <= value <= 1:
                raise ConstraintError(f"{name} must lie in [0, 1], got {value!r}")
        if alpha == 0 and beta == 0:
            return cls.from_pair(0.5, 0.5, 0.0)
        if alpha == 0 or beta == 0:
            raise ConstraintError("alpha and beta must be both zero or both positive")
        denom = alpha + beta - alpha * beta
        r = alpha * beta / denom
        return cls.from_pair(r / alpha, r / beta, r)

    @classmethod
    def symmetric(cls, theta: float) -> "IndicatorLaw":
        return cls.from_alpha_beta(theta, theta)

    @classmethod
    def from_blocks(cls, groups: Sequence[Sequence[int]], block_law: "IndicatorLaw") -> "IndicatorLaw":
        """
        Shared switches: block b of the partition `groups` turns on all of
        its coordinates together, blocks following `block_law`.
        """
        flat = sorted(j for g in groups for j in g)
        if flat != list(range(len(flat))):
            raise SpecError(f"groups must partition 0..d-1, got {groups!r}")
        if block_law.dimension != len(groups):
            raise SpecError(f"block law has dimension {block_law.dimension}, expected {len(groups)}")
        probs: Dict[frozenset, float] = {}
        for blocks, p in zip(block_law.subsets, block_law.probs):
            c = frozenset(j for b in blocks for j in groups[b])
            probs[c] = probs.get(c, 0.0) + float(p)
        return cls(len(flat), probs)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """(n, d) boolean switch states."""
        return self.masks[rng.choice(self.probs.shape[0], size=n, p=self.probs)]

    def alpha_beta(self) -> Tuple[float, float]:
        """Thinning parameters (r/p, r/q) of a bivariate law."""
        if self.dimension != 2:
            raise DomainError("alpha/beta thinning parameters exist for bivariate laws only")
        both = float(self.probs[np.all(self.masks, axis=1)].sum())
        return both / self.marginals[0], both / self.marginals[1]

    def describe(self):
        return [{"subset": [j + 1 for j in sorted(c)], "prob": float(p)}
                for c, p in zip(self.subsets, self.probs)]


class IndicatorGenerator(Generator):
    """A'_j = I_j A_j / p_j with switches I independent of a standardized base A."""

    kind = "Indicators"

    def __init__(self, base: Generator, law: IndicatorLaw):
        if law.dimension != base.dimension:
            raise SpecError(f"indicator law has dimension {law.dimension}, base has {base.dimension}")
        self.base = base
        self.law = law
        self.supports_antithetic = base.supports_antithetic
        super().__init__(base.dimension)

    def _raw(self, rng, n, antithetic):
        a = self.base.sample(rng, n, antithetic)
        return a * self.law.draw(rng, n) / self.law.marginals

    def closed_scale(self):
        return np.ones(self.dimension)

    def params(self):
        return {"base": self.base.describe(), "law": self.law.describe()}

    def exact_backend(self):
        base = self.base.exact_backend()
        return None if base is None else IndicatorMixtureBackend(base, self.law)


class IndicatorMixtureBackend(DependenceBackend):
    """
    Exact model of the indicator device over an exact base:
    ℓ(x) = Σ_c P[I = 1_c] · ℓ_base(x · 1_c / p).
    """

    def __init__(self, base: DependenceBackend, law: IndicatorLaw):
        if not base.is_exact or base.dimension != law.dimension:
            raise SpecError("indicator mixture needs an exact base of matching dimension")
        self.base = base
        self.law = law

    @property
    def dimension(self) -> int:
        return self.base.dimension

    def evaluate(self, xs):
        values = np.zeros(xs.shape[0])
        scaled = xs / self.law.marginals
        for mask, p in zip(self.law.masks, self.law.probs):
            if mask.any():
                part, _ = self.base.evaluate(scaled * mask)
                values += p * part
        return values, np.zeros_like(values)

    def restrict(self, subset):
        idx = list(subset)
        restricted: Dict[frozenset, float] = {}
        for c, p in zip(self.law.subsets, self.law.probs):
            kept = frozenset(i for i, j in enumerate(idx) if j in c)
            restricted[kept] = restricted.get(kept, 0.0) + float(p)
        return IndicatorMixtureBackend(self.base.restrict(subset), IndicatorLaw(len(idx), restricted))

    def describe(self):
        return {"backend": "closed_form", "family": "IndicatorMixture", "dimension": self.dimension,
                "params": {"base": self.base.describe(), "law": self.law.describe()}}


# ──────────────────────────────────────────────
# MONTE CARLO BACKEND
# ──────────────────────────────────────────────

def _positive_max(samples: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Per-sample max_j(x_j A_j, 0)."""
    return np.maximum(np.max(samples * x, axis=1), 0.0)


class GeneratorBackend(DependenceBackend):
    """
    ℓ_A estimated from one shared set of draws of A (common random numbers).

    The draws are taken lazily on first use and cached, so every point,
    margin and coefficient evaluated through this backend sees the same
    samples.
    """

    def __init__(self, generator: Generator, cfg: McConfig, samples: Optional[np.ndarray] = None):
        self.generator = generator
        self.cfg = cfg
        self.paired = cfg.antithetic and generator.supports_antithetic
        self._samples = samples
        self._lock = threading.Lock()

    @property
    def dimension(self) -> int:
        return self.generator.dimension

    @property
    def is_exact(self) -> bool:
        return False

    def samples(self) -> np.ndarray:
        """The cached (n, d) draws of A."""
        with self._lock:
            if self._samples is None:
                self._samples = draw_samples(self.generator, self.cfg)
                self._samples.setflags(write=False)
            return self._samples

    def evaluate(self, xs):
        a = self.samples()
        values = np.empty(xs.shape[0])
        ses = np.empty(xs.shape[0])
        for i, x in enumerate(xs):
            values[i], ses[i] = mean_and_se(_positive_max(a, x), self.paired)
        return values, ses

    def combine_chunks(self, chunks):
        a = self.samples()
        total = np.zeros(a.shape[0])
        for xs, coefs in chunks:
            for x, coef in zip(xs, coefs):
                total += coef * _positive_max(a, x)
        value, se = mean_and_se(total, self.paired)
        return Estimate(float(value), float(se))

    def all_exceed(self, x):
        value, se = mean_and_se(np.maximum(np.min(self.samples() * x, axis=1), 0.0), self.paired)
        return Estimate(float(value), float(se))

    def restrict(self, subset):
        sliced = self.samples()[:, list(subset)]
        return GeneratorBackend(SubsetGenerator(self.generator, subset), self.cfg, sliced)

    def describe(self):
        out = self.generator.describe()
        out["mc"] = self.cfg.describe()
        return out


def draw_samples(gen: Generator, cfg: McConfig, tag: int = TAG_GENERATOR) -> np.ndarray:
    paired = cfg.antithetic and gen.supports_antithetic
    if cfg.antithetic and not paired:
        logger.warning("%s does not support antithetic draws; sampling plainly", gen.kind)
    logger.info("drawing %d samples of %s on %d streams", cfg.sample_count, gen.kind, cfg.stream_count)
    return draw(lambda rng, count: gen.sample(rng, count, paired), cfg, tag, paired)


def generator_model(gen: Generator, cfg: McConfig) -> DependenceModel:
    return DependenceModel(GeneratorBackend(gen, cfg))


def sample_A(gen: Generator, n: int, seed: int = config.DEFAULT_SEED, **mc) -> np.ndarray:
    """
    n standardized draws of A as an (n, d) array, reproducible in
    (seed, streams). Extra keyword arguments go to McConfig.
    """
    return draw_samples(gen, McConfig(sample_count=n, seed=seed, **mc))


def mc_ell(gen: Generator, xs, cfg: McConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    ℓ_A at every point of a batch from one shared sample set.

    Returns (estimates, standard errors); SE = sample std / √n, over
    antithetic pair means when paired.
    """
    backend = GeneratorBackend(gen, cfg)
    return backend.evaluate(as_points(xs, gen.dimension))


def attractor_cdf(gen: Generator, x, cfg: McConfig) -> Estimate:
    """
    P[max-stable attractor ≤ x] on unit Fréchet margins, exp{-ℓ_A(1/x)}.

    A zero coordinate gives the degenerate limit 0.
    """
    point = as_points(x, gen.dimension)[0]
    if np.any(point == 0):
        return Estimate(0.0, 0.0)
    values, ses = mc_ell(gen, 1.0 / point, cfg)
    value = float(np.exp(-values[0]))
    return Estimate(value, value * float(ses[0]))


# ──────────────────────────────────────────────
# THINNING
# ──────────────────────────────────────────────

def indicator_thin(base, law: Optional[IndicatorLaw] = None, alpha: Optional[float] = None,
                   beta: Optional[float] = None, theta: Optional[float] = None,
                   cfg: Optional[McConfig] = None) -> DependenceModel:
    """
    Switch coordinates of a model on and off with independent indicators.

    Args:
        base: a Generator (Monte Carlo path) or an exact DependenceModel /
            DependenceBackend (closed path).
        law: explicit joint law of the switches (any dimension).
        alpha, beta: asymmetric bivariate thinning ℓ(αx, βy) + (1-α)x + (1-β)y.
        theta: symmetric bivariate thinning, α = β = θ.
        cfg: Monte Carlo configuration for the generator path.

    Returns:
        DependenceModel of the thinned vector.
    """
    if theta is not None:
        alpha = beta = theta
    if law is None:
        if alpha is None or beta is None:
            raise SpecError("indicator_thin needs a law, alpha and beta, or theta")
        law = IndicatorLaw.from_alpha_beta(alpha, beta)

    if isinstance(base, Generator):
        return generator_model(IndicatorGenerator(base, law), cfg or McConfig())

    backend = base.backend if isinstance(base, DependenceModel) else base
    if not backend.is_exact:
        raise SpecError("closed-path thinning needs an exact base model")
    if backend.dimension == 2:
        a, b = law.alpha_beta() if alpha is None else (alpha, beta)
        return DependenceModel(ThinnedBackend(backend, a, b))
    return DependenceModel(IndicatorMixtureBackend(backend, law))


# ──────────────────────────────────────────────
# SPECTRAL AND PROFILE EXTRACTION
# ──────────────────────────────────────────────

def profile_atoms(gen: DiscreteAtomsGenerator) -> SpectralAtoms:
    """
    Spectral measure of a discrete generator: atoms w_k = a_k⁺/r_k with
    mass p_k r_k, r_k = Σ_j a_kj⁺ of the standardized atoms. Atoms with
    r_k = 0 carry no mass and are dropped.
    """
    positive = np.maximum(gen.values / gen.scale, 0.0)
    r = positive.sum(axis=1)
    keep = r > 0
    return SpectralAtoms.merged(positive[keep] / r[keep, np.newaxis], gen.probs[keep] * r[keep], gen.dimension)


def from_profiles(profiles, probs, **kwargs) -> DiscreteAtomsGenerator:
    """
    Generator A = d·W for a discrete profile law Q = Σ q_k δ_{w_k}, which
    must satisfy E_Q[W_j] = 1/d for every j.
    """
    w = np.asarray(profiles, dtype=float)
    q = np.asarray(probs, dtype=float)
    if w.ndim != 2 or q.shape != (w.shape[0],):
        raise SpecError("profiles must be (k, d) with one probability per profile")
    d = w.shape[1]
    moments = q @ w
    if np.any(np.abs(moments - 1.0 / d) > config.MASS_RTOL):
        raise ConstraintError(f"profile law has means {moments.tolist()}, expected 1/{d} each")
    return DiscreteAtomsGenerator([(d * wk, float(qk)) for wk, qk in zip(w, q)], **kwargs)


@dataclass(frozen=True)
class ProfileSample:
    """Profiles W = A⁺/R with magnitudes R = Σ_j A_j⁺; W is the barycenter where R = 0."""

    profiles: np.ndarray
    radii: np.ndarray
    paired: bool = False

    @property
    def dimension(self) -> int:
        return self.profiles.shape[1]

    def weighted_mean(self, values) -> Estimate:
        """Σ R_i f(W_i) / (n·d): the profile-law mean of f given f(W_i) per sample."""
        terms = self.radii * np.asarray(values, dtype=float) / self.dimension
        value, se = mean_and_se(terms, self.paired)
        return Estimate(float(value), float(se))

    def profile_means(self) -> Tuple[np.ndarray, np.ndarray]:
        """R-weighted means of each W_j with standard errors; each estimates 1/d."""
        terms = self.radii[:, np.newaxis] * self.profiles / self.dimension
        return mean_and_se(terms, self.paired)


def sample_profiles(gen: Generator, cfg: McConfig) -> ProfileSample:
    a = np.maximum(draw_samples(gen, cfg), 0.0)
    r = a.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(r[:, np.newaxis] > 0, a / r[:, np.newaxis], 1.0 / gen.dimension)
    return ProfileSample(w, r, cfg.antithetic and gen.supports_antithetic)


def face_masses(gen: Generator, cfg: McConfig) -> Dict[Tuple[int, ...], Estimate]:
    """
    Spectral mass of every face Δ_I reached by the draws, keyed by the
    0-based subset I = {j : A_j > 0}: H(Δ_I) = E[R·1{A_j > 0 exactly for j ∈ I}].
    The masses sum to E[R] = d.
    """
    a = draw_samples(gen, cfg)
    paired = cfg.antithetic and gen.supports_antithetic
    positive = a > 0
    r = np.where(positive, a, 0.0).sum(axis=1)
    codes = positive @ (1 << np.arange(gen.dimension, dtype=np.int64))
    out: Dict[Tuple[int, ...], Estimate] = {}
    for code in np.unique(codes):
        if code == 0:
            continue
        face = tuple(j for j in range(gen.dimension) if (int(code) >> j) & 1)
        value, se = mean_and_se(np.where(codes == code, r, 0.0), paired)
        out[face] = Estimate(float(value), float(se))
    return out


def face_mass(gen: Generator, subset, cfg: McConfig) -> Estimate:
    """Spectral mass of the single face Δ_I for a 0-based subset I."""
    face = normalize_subset(subset, gen.dimension)
    return face_masses(gen, cfg).get(face, Estimate(0.0, 0.0))
