"""
Max-stable dependence objects: ℓ, R, D and C as views of one model.

A DependenceModel wraps a DependenceBackend (closed form, discrete
spectral measure or generator + Monte Carlo). All operations here work on
any backend; Monte Carlo backends attach standard errors.
"""
import logging
from typing import Iterable, Iterator, Tuple

import numpy as np

from lib import config
from lib.engine.adapter import DependenceBackend
from lib.engine.types import Estimate, MarginForm, SpectralAtoms, as_points, as_simplex, unit_vector
from lib.errors import ConstraintError, DomainError

logger = logging.getLogger(__name__)

SUBSET_CHUNK = 1 << 15


class DependenceModel:
    """
    A max-stable dependence structure in dimension d.

    Immutable after construction and safe to share across threads.
    Exact backends are checked for ℓ(e_j) = 1 when the model is built.
    """

    def __init__(self, backend: DependenceBackend):
        self._backend = backend
        if backend.is_exact:
            margins, _ = backend.evaluate(np.eye(backend.dimension))
            worst = float(np.max(np.abs(margins - 1.0)))
            if worst > config.CONSTRUCTION_TOL:
                raise ConstraintError(f"model is not standardized: max |ℓ(e_j) - 1| = {worst:.3e}")

    @property
    def backend(self) -> DependenceBackend:
        return self._backend

    @property
    def dimension(self) -> int:
        return self._backend.dimension

    @property
    def is_exact(self) -> bool:
        return self._backend.is_exact

    def describe(self) -> dict:
        return self._backend.describe()

    def __repr__(self):
        return f"DependenceModel({self.describe()})"


class DiscreteBackend(DependenceBackend):
    """Backend for a discrete spectral measure H = Σ m_k δ_{w_k}."""

    def __init__(self, atoms: SpectralAtoms):
        self.atoms = atoms

    @property
    def dimension(self) -> int:
        return self.atoms.dimension

    def evaluate(self, xs):
        values = np.atleast_1d(ell_from_spectral(self.atoms, xs))
        return values, np.zeros_like(values)

    def all_exceed(self, x):
        # min over coordinates is the inclusion–exclusion sum of maxima
        value = float(np.min(self.atoms.weights * x, axis=1) @ self.atoms.masses)
        return Estimate(value, 0.0)

    def restrict(self, subset):
        idx = list(subset)
        share = self.atoms.weights[:, idx].sum(axis=1)
        keep = share > 0
        weights = self.atoms.weights[keep][:, idx] / share[keep, np.newaxis]
        masses = self.atoms.masses[keep] * share[keep]
        return DiscreteBackend(SpectralAtoms.merged(weights, masses, len(idx)))

    def describe(self):
        return {
            "backend": "discrete",
            "dimension": self.dimension,
            "atoms": [{"w": list(w), "m": m} for w, m in self.atoms.pairs()],
        }


def discrete_model(atoms: SpectralAtoms) -> DependenceModel:
    return DependenceModel(DiscreteBackend(atoms))


# ──────────────────────────────────────────────
# STABLE TAIL DEPENDENCE FUNCTION
# ──────────────────────────────────────────────

def ell_from_spectral(atoms: SpectralAtoms, x):
    """
    ℓ(x) = Σ_k m_k · max_j (w_kj x_j) for a discrete spectral measure.

    Accepts a point or an (m, d) batch; returns a float or an (m,) array.
    """
    xs = as_points(x, atoms.dimension)
    values = np.max(xs[:, np.newaxis, :] * atoms.weights[np.newaxis, :, :], axis=2) @ atoms.masses
    return float(values[0]) if np.ndim(x) == 1 else values


def ell_batch(model: DependenceModel, xs) -> Tuple[np.ndarray, np.ndarray]:
    """ℓ on an (m, d) batch under common random numbers; returns (values, standard errors)."""
    return model.backend.evaluate(as_points(xs, model.dimension))


def ell(model: DependenceModel, x) -> Estimate:
    """
    Stable tail dependence function ℓ(x) with its standard error.

    ℓ(0) = 0. Generator-backed estimates are Σ_i max_j(x_j A_j^(i), 0)/n.
    """
    xs = as_points(x, model.dimension)
    if xs.shape[0] != 1:
        raise DomainError("ell takes a single point; use ell_batch for batches")
    values, ses = model.backend.evaluate(xs)
    return Estimate(float(values[0]), float(ses[0]))


def exponent_measure(model: DependenceModel, z) -> Estimate:
    """V(z) = ℓ(1/z_1, ..., 1/z_d) for z in (0, ∞]^d; infinite coordinates contribute 0."""
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise DomainError("exponent measure requires z in (0, inf]^d")
    return ell(model, 1.0 / z)


# ──────────────────────────────────────────────
# TAIL COPULA AND PICKANDS FUNCTION
# ──────────────────────────────────────────────

def subset_chunks(x: np.ndarray) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (points, signs) for x restricted to every non-empty subset."""
    d = x.shape[0]
    bits = np.arange(d)
    for start in range(1, 1 << d, SUBSET_CHUNK):
        masks = np.arange(start, min(start + SUBSET_CHUNK, 1 << d), dtype=np.int64)
        member = ((masks[:, np.newaxis] >> bits) & 1).astype(float)
        sizes = member.sum(axis=1)
        signs = np.where(sizes % 2 == 1, 1.0, -1.0)
        yield member * x, signs


def tail_copula(model: DependenceModel, x, clip: bool = True) -> Estimate:
    """
    R(x) = Σ_{∅≠I} (-1)^{|I|+1} ℓ(x_I, 0) by inclusion–exclusion over margins.

    Refuses d > MAX_TAIL_DIMENSION. R is 0 whenever a coordinate is 0. The
    result is clipped into [0, min(x)] unless `clip` is False, which returns
    the raw sum so invalid models show up.
    """
    d = model.dimension
    if d > config.MAX_TAIL_DIMENSION:
        raise DomainError(f"tail copula needs 2^d - 1 terms; d = {d} exceeds {config.MAX_TAIL_DIMENSION}")
    point = as_points(x, d)[0]
    if np.any(point == 0):
        return Estimate(0.0, 0.0)
    raw = model.backend.all_exceed(point)
    if raw is None:
        raw = model.backend.combine_chunks(subset_chunks(point))
    if not clip:
        return Estimate(float(raw.value), raw.se)
    return Estimate(float(np.clip(raw.value, 0.0, point.min())), raw.se)


def pickands(model: DependenceModel, w) -> Estimate:
    """Pickands dependence function D(w) = ℓ(w) on the unit simplex."""
    weights = as_simplex(w, model.dimension)
    if weights.shape[0] != 1:
        raise DomainError("pickands takes a single weight vector")
    return ell(model, weights[0])


# ──────────────────────────────────────────────
# COPULA AND MAX-STABILITY
# ──────────────────────────────────────────────

def copula(model: DependenceModel, u, margin: MarginForm = MarginForm.UNIFORM) -> Estimate:
    """
    Distribution function of the max-stable law at u under `margin`:
    exp{-ℓ(y)} with y the ℓ argument of u (y = -log u for uniform margins).

    The value is held to u_1⋯u_d ≤ C ≤ min(u) on the uniform scale.
    """
    margin = MarginForm(margin)
    u = np.asarray(u, dtype=float)
    if u.shape != (model.dimension,):
        raise DomainError(f"dimension mismatch: argument has shape {u.shape}, model has {model.dimension}")
    y = margin.to_tail_argument(u)
    if not np.all(np.isfinite(y)):
        raise DomainError(f"argument {u.tolist()} maps outside the finite {margin.value} domain")
    est = ell(model, y)
    value = float(np.exp(-est.value))
    uniform = np.exp(-y)
    value = float(np.clip(value, np.prod(uniform), np.min(uniform)))
    return Estimate(value, value * est.se)


def max_stability_defect(model: DependenceModel, u, k: int) -> float:
    """|C(u) - C(u^{1/k})^k| under uniform margins."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k!r}")
    u = np.asarray(u, dtype=float)
    direct = copula(model, u).value
    rooted = copula(model, u ** (1.0 / k)).value
    return abs(direct - rooted ** int(k))


# ──────────────────────────────────────────────
# MARGINS
# ──────────────────────────────────────────────

def normalize_subset(subset: Iterable[int], dimension: int) -> Tuple[int, ...]:
    idx = tuple(sorted({int(j) for j in subset}))
    if not idx:
        raise DomainError("margin subset must be non-empty")
    if idx[0] < 0 or idx[-1] >= dimension:
        raise DomainError(f"subset {list(idx)} outside coordinates 0..{dimension - 1}")
    return idx


def margin_restrict(model: DependenceModel, subset: Iterable[int]) -> DependenceModel:
    """
    Lower-dimensional margin on the 0-based coordinate `subset`:
    ℓ_I(x_I) = ℓ(x with zeros outside I).
    """
    idx = normalize_subset(subset, model.dimension)
    return DependenceModel(model.backend.restrict(idx))


def unit_margins(model: DependenceModel) -> Tuple[np.ndarray, np.ndarray]:
    """ℓ(e_j) for every j, with standard errors."""
    return ell_batch(model, np.stack([unit_vector(model.dimension, j) for j in range(model.dimension)]))
