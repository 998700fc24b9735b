"""
Closed-form stable tail dependence functions for the parametric families.

Every function is vectorized over the last axis of its point arguments and
serves as an exact oracle for the Monte Carlo generator engine.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Mapping, Optional, Tuple

import numpy as np
from scipy.special import erfc, logsumexp

from lib import config
from lib.engine.adapter import DependenceBackend
from lib.engine.types import SpectralAtoms
from lib.errors import SpecError

SQRT2 = math.sqrt(2.0)


def _out(value):
    """Return a Python float for 0-d results, the array otherwise."""
    arr = np.asarray(value, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def std_normal_cdf(z):
    """
    Standard normal CDF Φ(z) = ½·erfc(-z/√2).

    scipy's erfc is accurate to a few ulp over the whole real line, so the
    absolute error of Φ stays below 1e-15, including deep in both tails
    where 1 - erf would cancel.
    """
    return 0.5 * erfc(-np.asarray(z, dtype=float) / SQRT2)


# ──────────────────────────────────────────────
# d-VARIATE FAMILIES
# ──────────────────────────────────────────────

def independence_ell(x):
    return _out(np.sum(np.asarray(x, dtype=float), axis=-1))


def perfect_dependence_ell(x):
    return _out(np.max(np.asarray(x, dtype=float), axis=-1))


def logistic_ell(theta: float, x):
    """
    Gumbel–Hougaard (logistic) model (Σ x_j^θ)^{1/θ}, θ ∈ [1, ∞].

    Evaluated as max(x)·(Σ (x_j/max x)^θ)^{1/θ}; for θ above
    LOGISTIC_LOG_SPACE_THETA the inner sum is taken in log space.
    θ = ∞ gives max(x).
    """
    if not theta >= 1:
        raise SpecError(f"logistic theta must be >= 1, got {theta!r}")
    x = np.asarray(x, dtype=float)
    top = np.max(x, axis=-1)
    if math.isinf(theta):
        return _out(top)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(top[..., np.newaxis] > 0, x / top[..., np.newaxis], 0.0)
        if theta > config.LOGISTIC_LOG_SPACE_THETA:
            log_sum = logsumexp(theta * np.log(ratio), axis=-1)
            scaled = np.exp(log_sum / theta)
        else:
            scaled = np.sum(ratio ** theta, axis=-1) ** (1.0 / theta)
    return _out(np.where(top > 0, top * scaled, 0.0))


class MultivariateMOSpec:
    """
    Law p(c) over non-empty subsets c ⊆ {0..d-1} (0-based) for the
    multivariate Marshall–Olkin model.

    Per-coordinate switch-on probabilities p_j = Σ_{c ∋ j} p(c) must all be
    positive; Σ_c p(c) = 1 within CONSTRUCTION_TOL.
    """

    def __init__(self, dimension: int, probs: Mapping):
        if dimension < 1:
            raise SpecError(f"dimension must be >= 1, got {dimension}")
        law: Dict[FrozenSet[int], float] = {}
        for subset, p in probs.items():
            c = frozenset(int(j) for j in subset)
            if not c:
                raise SpecError("Marshall–Olkin subsets must be non-empty")
            if min(c) < 0 or max(c) >= dimension:
                raise SpecError(f"subset {sorted(c)} outside coordinates 0..{dimension - 1}")
            if p < 0:
                raise SpecError(f"negative probability {p!r} for subset {sorted(c)}")
            if p > 0:
                law[c] = law.get(c, 0.0) + float(p)
        total = sum(law.values())
        if abs(total - 1.0) > config.CONSTRUCTION_TOL:
            raise SpecError(f"subset probabilities sum to {total!r}, expected 1")
        marginals = np.zeros(dimension)
        for c, p in law.items():
            for j in c:
                marginals[j] += p
        if np.any(marginals <= 0):
            zero = [int(j) for j in np.flatnonzero(marginals <= 0)]
            raise SpecError(f"coordinates {zero} are never switched on (p_j = 0)")
        self.dimension = dimension
        self.law = law
        self.marginals = marginals

    def subsets(self):
        """Subsets in a deterministic order (by size, then lexicographic)."""
        return sorted(self.law, key=lambda c: (len(c), sorted(c)))

    def ell(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape[:-1])
        for c in self.subsets():
            idx = sorted(c)
            total = total + self.law[c] * np.max(x[..., idx] / self.marginals[idx], axis=-1)
        return _out(total)

    def to_atoms(self) -> SpectralAtoms:
        """Discrete spectral measure: one atom per subset, a = (1/p_j)_{j∈c}."""
        weights, masses = [], []
        for c in self.subsets():
            a = np.zeros(self.dimension)
            idx = sorted(c)
            a[idx] = 1.0 / self.marginals[idx]
            r = a.sum()
            weights.append(a / r)
            masses.append(self.law[c] * r)
        return SpectralAtoms.merged(weights, masses, self.dimension)

    def restrict(self, subset: Tuple[int, ...]) -> "MultivariateMOSpec":
        """
        Margin on `subset`: subsets are intersected with it, those missing it
        entirely are dropped and the rest renormalized.
        """
        position = {j: i for i, j in enumerate(subset)}
        restricted: Dict[FrozenSet[int], float] = {}
        for c, p in self.law.items():
            kept = frozenset(position[j] for j in c if j in position)
            if kept:
                restricted[kept] = restricted.get(kept, 0.0) + p
        hit = sum(restricted.values())
        return MultivariateMOSpec(len(subset), {c: p / hit for c, p in restricted.items()})

    def describe(self):
        return [{"subset": [j + 1 for j in sorted(c)], "prob": p} for c, p in
                ((c, self.law[c]) for c in self.subsets())]


def mv_marshall_olkin_ell(spec: MultivariateMOSpec, x):
    """ℓ_p(x) = Σ_c p(c)·max(x_j / p_j : j ∈ c)."""
    return spec.ell(x)


# ──────────────────────────────────────────────
# BIVARIATE FAMILIES
# ──────────────────────────────────────────────

def _check_unit_interval(name: str, value: float, closed_left: bool = False):
    low_ok = value >= 0 if closed_left else value > 0
    if not (low_ok and value <= 1):
        interval = "[0, 1]" if closed_left else "(0, 1]"
        raise SpecError(f"{name} must lie in {interval}, got {value!r}")


def marshall_olkin_ell(alpha: float, beta: float, x, y):
    """x + y - min(αx, βy); the copula is min(u^{1-α}v, u v^{1-β})."""
    _check_unit_interval("alpha", alpha)
    _check_unit_interval("beta", beta)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return _out(x + y - np.minimum(alpha * x, beta * y))


def marshall_olkin_copula(alpha: float, beta: float, u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return _out(np.minimum(u ** (1 - alpha) * v, u * v ** (1 - beta)))


def dirichlet11_ell(x, y):
    """Bivariate Dirichlet model with α = (1, 1): x + y - xy/(x+y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = x + y
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(s > 0, x * y / s, 0.0)
    return _out(s - cross)


def tawn_mixture_D(theta: float, t):
    """D(t) = 1 - θ t(1-t), θ ∈ [0, 1]."""
    _check_unit_interval("theta", theta, closed_left=True)
    t = np.asarray(t, dtype=float)
    return _out(1.0 - theta * t * (1.0 - t))


def tawn_mixture_ell(theta: float, x, y):
    _check_unit_interval("theta", theta, closed_left=True)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = x + y
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(s > 0, x * y / s, 0.0)
    return _out(s - theta * cross)


def rational_D(alpha: float, beta: float, t):
    """D(t) = 1 - αβ t(1-t) / (α(1-t) + βt), α, β ∈ (0, 1]."""
    _check_unit_interval("alpha", alpha)
    _check_unit_interval("beta", beta)
    t = np.asarray(t, dtype=float)
    return _out(1.0 - alpha * beta * t * (1.0 - t) / (alpha * (1.0 - t) + beta * t))


def rational_ell(alpha: float, beta: float, x, y):
    _check_unit_interval("alpha", alpha)
    _check_unit_interval("beta", beta)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    denom = alpha * x + beta * y
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(denom > 0, alpha * beta * x * y / denom, 0.0)
    return _out(x + y - cross)


def schlather_ell(rho: float, x, y):
    """½(x+y)(1 + √(1 - 2(ρ+1)xy/(x+y)²)), ρ ∈ (-1, 1)."""
    if not -1 < rho < 1:
        raise SpecError(f"Schlather rho must lie in (-1, 1), got {rho!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = x + y
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(s > 0, x * y / (s * s), 0.0)
    return _out(0.5 * s * (1.0 + np.sqrt(1.0 - 2.0 * (rho + 1.0) * frac)))


def schlather_D(rho: float, t):
    if not -1 < rho < 1:
        raise SpecError(f"Schlather rho must lie in (-1, 1), got {rho!r}")
    t = np.asarray(t, dtype=float)
    return _out(0.5 * (1.0 + np.sqrt(1.0 - 2.0 * (rho + 1.0) * t * (1.0 - t))))


def husler_reiss_ell(a: float, x, y):
    """
    x Φ(a/2 + log(x/y)/a) + y Φ(a/2 + log(y/x)/a), a > 0.

    A zero coordinate reduces to the other one (ℓ(x, 0) = x).
    """
    if not a > 0:
        raise SpecError(f"Hüsler–Reiss a must be > 0, got {a!r}")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    both = (x > 0) & (y > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.where(both, np.log(np.where(both, x, 1.0)) - np.log(np.where(both, y, 1.0)), 0.0)
    value = x * std_normal_cdf(a / 2 + log_ratio / a) + y * std_normal_cdf(a / 2 - log_ratio / a)
    return _out(np.where(both, value, x + y))


def thinned_ell(base_values, alpha: float, beta: float, x, y):
    """
    Asymmetric indicator device: ℓ_{α,β}(x, y) = ℓ(αx, βy) + (1-α)x + (1-β)y,
    given base_values = ℓ(αx, βy).
    """
    return _out(np.asarray(base_values) + (1.0 - alpha) * np.asarray(x) + (1.0 - beta) * np.asarray(y))


def check_count_law(name: str, law) -> np.ndarray:
    """A counting law on {0, 1, 2, 3} with unit mean, as a length-4 array."""
    probs = np.zeros(4)
    given = np.asarray(law, dtype=float)
    if given.ndim != 1 or not 1 <= given.shape[0] <= 4:
        raise SpecError(f"{name} must list probabilities for counts 0..3, got {law!r}")
    probs[:given.shape[0]] = given
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > config.CONSTRUCTION_TOL:
        raise SpecError(f"{name} must be a probability vector, got {law!r}")
    mean = float(probs @ np.arange(4))
    if abs(mean - 1.0) > config.CONSTRUCTION_TOL:
        raise SpecError(f"{name} must have unit mean, got {mean!r}")
    return probs


def _erlang_min_mean(j: int, k: int, x, y):
    """E[min(x G_j, y G_k)] for independent unit-rate Erlang(j), Erlang(k); x, y > 0."""
    rate = 1.0 / x + 1.0 / y
    total = np.zeros(np.broadcast(x, y).shape)
    for i in range(j):
        for m in range(k):
            total = total + math.comb(i + m, i) * x ** (-i) * y ** (-m) * rate ** (-(i + m + 1))
    return total


def random_sum_ell(j_law, k_law, x, y):
    """
    Bivariate random-sum model: A = E_1 + ... + E_J, B = F_1 + ... + F_K with
    unit exponentials and independent counts J, K of unit mean on {0..3}.

    ℓ(x, y) = x + y - Σ_{j,k≥1} P(J=j) P(K=k) E[min(x G_j, y G_k)], which
    gives a polynomial-ratio Pickands function; J = K = 1 is Dirichlet(1, 1).
    """
    pj = check_count_law("j_law", j_law)
    pk = check_count_law("k_law", k_law)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    both = (x > 0) & (y > 0)
    xs = np.where(both, x, 1.0)
    ys = np.where(both, y, 1.0)
    overlap = np.zeros(x.shape)
    for j in range(1, 4):
        for k in range(1, 4):
            if pj[j] > 0 and pk[k] > 0:
                overlap = overlap + pj[j] * pk[k] * _erlang_min_mean(j, k, xs, ys)
    return _out(x + y - np.where(both, overlap, 0.0))


# ──────────────────────────────────────────────
# FAMILY REGISTRY
# ──────────────────────────────────────────────

class Family(str, Enum):
    LOGISTIC = "Logistic"
    MARSHALL_OLKIN = "MarshallOlkin"
    TAWN_MIXTURE = "TawnMixture"
    RATIONAL_QUADRATIC = "RationalQuadratic"
    SCHLATHER = "Schlather"
    HUSLER_REISS = "HuslerReiss"
    DIRICHLET_BIVARIATE_11 = "DirichletBivariate11"
    INDEPENDENCE = "IndependenceD"
    PERFECT_DEPENDENCE = "PerfectDependenceD"
    MULTIVARIATE_MARSHALL_OLKIN = "MultivariateMarshallOlkin"
    RANDOM_SUM_EXPONENTIAL = "RandomSumExponential"


D_VARIATE = {Family.LOGISTIC, Family.INDEPENDENCE, Family.PERFECT_DEPENDENCE,
             Family.MULTIVARIATE_MARSHALL_OLKIN}

REQUIRED_PARAMS = {
    Family.LOGISTIC: ("theta",),
    Family.MARSHALL_OLKIN: ("alpha", "beta"),
    Family.TAWN_MIXTURE: ("theta",),
    Family.RATIONAL_QUADRATIC: ("alpha", "beta"),
    Family.SCHLATHER: ("rho",),
    Family.HUSLER_REISS: ("a",),
    Family.DIRICHLET_BIVARIATE_11: (),
    Family.INDEPENDENCE: (),
    Family.PERFECT_DEPENDENCE: (),
    Family.MULTIVARIATE_MARSHALL_OLKIN: (),
    Family.RANDOM_SUM_EXPONENTIAL: ("j_law", "k_law"),
}


@dataclass(frozen=True)
class FamilySpec:
    """A closed-form family with validated parameters and dimension."""

    family: Family
    dimension: int = 2
    params: Dict[str, Any] = field(default_factory=dict)
    mo: Optional[MultivariateMOSpec] = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        if self.dimension < 1:
            raise SpecError(f"dimension must be >= 1, got {self.dimension}")
        if family not in D_VARIATE and self.dimension != 2:
            raise SpecError(f"{family.value} is bivariate, got dimension {self.dimension}")
        missing = [p for p in REQUIRED_PARAMS[family] if p not in self.params]
        if missing:
            raise SpecError(f"{family.value} is missing parameters {missing}")
        if family is Family.MULTIVARIATE_MARSHALL_OLKIN:
            if self.mo is None or self.mo.dimension != self.dimension:
                raise SpecError("MultivariateMarshallOlkin needs a subset law of matching dimension")
        # exercise the range checks once at construction
        self.ell(np.ones((1, self.dimension)))

    def ell(self, xs):
        xs = np.asarray(xs, dtype=float)
        f, p = self.family, self.params
        if f is Family.INDEPENDENCE:
            return independence_ell(xs)
        if f is Family.PERFECT_DEPENDENCE:
            return perfect_dependence_ell(xs)
        if f is Family.LOGISTIC:
            return logistic_ell(float(p["theta"]), xs)
        if f is Family.MULTIVARIATE_MARSHALL_OLKIN:
            return self.mo.ell(xs)
        x, y = xs[..., 0], xs[..., 1]
        if f is Family.MARSHALL_OLKIN:
            return marshall_olkin_ell(p["alpha"], p["beta"], x, y)
        if f is Family.TAWN_MIXTURE:
            return tawn_mixture_ell(p["theta"], x, y)
        if f is Family.RATIONAL_QUADRATIC:
            return rational_ell(p["alpha"], p["beta"], x, y)
        if f is Family.SCHLATHER:
            return schlather_ell(p["rho"], x, y)
        if f is Family.HUSLER_REISS:
            return husler_reiss_ell(p["a"], x, y)
        if f is Family.RANDOM_SUM_EXPONENTIAL:
            return random_sum_ell(p["j_law"], p["k_law"], x, y)
        return dirichlet11_ell(x, y)

    def atoms(self) -> Optional[SpectralAtoms]:
        """Discrete spectral measure when the family has one, else None."""
        d = self.dimension
        if self.family is Family.INDEPENDENCE:
            return SpectralAtoms(np.eye(d), np.ones(d))
        if self.family is Family.PERFECT_DEPENDENCE:
            return SpectralAtoms(np.full((1, d), 1.0 / d), [float(d)])
        if self.family is Family.MULTIVARIATE_MARSHALL_OLKIN:
            return self.mo.to_atoms()
        return None

    def restrict(self, subset: Tuple[int, ...]) -> "FamilySpec":
        if len(subset) == self.dimension:
            return self
        if len(subset) == 1:
            return FamilySpec(Family.INDEPENDENCE, 1)
        if self.family is Family.MULTIVARIATE_MARSHALL_OLKIN:
            mo = self.mo.restrict(subset)
            return FamilySpec(self.family, len(subset), mo=mo)
        return FamilySpec(self.family, len(subset), dict(self.params))

    def describe(self) -> Dict[str, Any]:
        params: Dict[str, Any] = {k: (str(v) if isinstance(v, float) and math.isinf(v) else v)
                                  for k, v in self.params.items()}
        if self.mo is not None:
            params["subsets"] = self.mo.describe()
        return {"backend": "closed_form", "family": self.family.value,
                "dimension": self.dimension, "params": params}


class ClosedFormBackend(DependenceBackend):
    """Backend evaluating a FamilySpec exactly."""

    def __init__(self, family: FamilySpec):
        self.family = family

    @property
    def dimension(self) -> int:
        return self.family.dimension

    def evaluate(self, xs):
        values = np.atleast_1d(np.asarray(self.family.ell(xs), dtype=float))
        return values, np.zeros_like(values)

    def restrict(self, subset):
        return ClosedFormBackend(self.family.restrict(subset))

    def describe(self):
        return self.family.describe()


class ThinnedBackend(DependenceBackend):
    """
    Bivariate closed-form path of the indicator device: wraps any exact
    bivariate backend with thinning parameters α = r/p, β = r/q ∈ [0, 1].
    """

    def __init__(self, base: DependenceBackend, alpha: float, beta: float):
        if base.dimension != 2 or not base.is_exact:
            raise SpecError("closed-form thinning needs an exact bivariate base model")
        _check_unit_interval("alpha", alpha, closed_left=True)
        _check_unit_interval("beta", beta, closed_left=True)
        self.base = base
        self.alpha = float(alpha)
        self.beta = float(beta)

    @property
    def dimension(self) -> int:
        return 2

    def evaluate(self, xs):
        scaled = xs * np.array([self.alpha, self.beta])
        base_values, _ = self.base.evaluate(scaled)
        values = np.atleast_1d(thinned_ell(base_values, self.alpha, self.beta, xs[:, 0], xs[:, 1]))
        return values, np.zeros_like(values)

    def restrict(self, subset):
        if len(subset) == 2:
            return self
        return ClosedFormBackend(FamilySpec(Family.INDEPENDENCE, 1))

    def describe(self):
        return {"backend": "closed_form", "family": "Thinned", "dimension": 2,
                "params": {"alpha": self.alpha, "beta": self.beta, "base": self.base.describe()}}
