"""Value types shared across the engine: points, simplex weights, margins, MC config, atoms."""
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np

from lib import config
from lib.errors import ConstraintError, DomainError


# ──────────────────────────────────────────────
# POINTS AND SIMPLEX WEIGHTS
# ──────────────────────────────────────────────

def as_points(xs, dimension: Optional[int] = None) -> np.ndarray:
    """
    Validate a single point or a batch of points for ℓ and R.

    Returns a float array of shape (m, d). Raises DomainError on a dimension
    mismatch, a negative or non-finite coordinate, or an empty batch.
    """
    arr = np.asarray(xs, dtype=float)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.shape[1] < 1 or arr.shape[0] < 1:
        raise DomainError(f"expected a point or an (m, d) batch, got shape {arr.shape}")
    if dimension is not None and arr.shape[1] != dimension:
        raise DomainError(f"dimension mismatch: point has {arr.shape[1]} coordinates, model has {dimension}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("point coordinates must be finite")
    if np.any(arr < 0):
        raise DomainError(f"point coordinates must be nonnegative, got min {arr.min()!r}")
    return arr


def as_simplex(ws, dimension: Optional[int] = None) -> np.ndarray:
    """Validate weights on the unit simplex (sum 1 within CONSTRUCTION_TOL); returns (m, d)."""
    arr = np.asarray(ws, dtype=float)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if dimension is not None and arr.shape[-1] != dimension:
        raise DomainError(f"dimension mismatch: weight has {arr.shape[-1]} coordinates, model has {dimension}")
    if np.any(arr < -config.CONSTRUCTION_TOL) or np.any(arr > 1 + config.CONSTRUCTION_TOL):
        raise DomainError("simplex weights must lie in [0, 1]")
    off = np.abs(arr.sum(axis=1) - 1.0)
    if np.any(off > config.CONSTRUCTION_TOL):
        raise DomainError(f"weights off the simplex: |sum - 1| = {off.max():.3e}")
    return np.clip(arr, 0.0, 1.0)


def unit_vector(dimension: int, j: int) -> np.ndarray:
    e = np.zeros(dimension)
    e[j] = 1.0
    return e


def simplex_lattice(dimension: int, steps: int) -> np.ndarray:
    """All weights with coordinates in {0, 1/steps, ..., 1} summing to 1, as (m, d)."""
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    rows = [c for c in itertools.product(range(steps + 1), repeat=dimension - 1) if sum(c) <= steps]
    return np.array([list(c) + [steps - sum(c)] for c in rows], dtype=float) / steps


# ──────────────────────────────────────────────
# MARGIN FORMS
# ──────────────────────────────────────────────

class MarginForm(str, Enum):
    """Standardization of the margins under which a copula is evaluated."""

    UNIFORM = "uniform"
    UNIT_FRECHET = "frechet"
    GUMBEL = "gumbel"
    REVERSE_EXPONENTIAL = "reverse-exponential"

    def to_tail_argument(self, z: np.ndarray) -> np.ndarray:
        """
        Map a point z in this margin's natural domain to the ℓ argument y,
        so that the copula value is exp{-ℓ(y)}.
        """
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore"):
            if self is MarginForm.UNIFORM:
                if np.any(z <= 0) or np.any(z > 1):
                    raise DomainError("uniform margin requires u in (0, 1]^d")
                return -np.log(z)
            if self is MarginForm.UNIT_FRECHET:
                if np.any(z <= 0):
                    raise DomainError("unit Fréchet margin requires x in (0, inf)^d")
                return 1.0 / z
            if self is MarginForm.GUMBEL:
                if not np.all(np.isfinite(z)):
                    raise DomainError("Gumbel margin requires finite x")
                return np.exp(-z)
            if np.any(z > 0) or not np.all(np.isfinite(z)):
                raise DomainError("reverse exponential margin requires x in (-inf, 0]^d")
            return -z

    def from_tail_argument(self, y: np.ndarray) -> np.ndarray:
        """Inverse of to_tail_argument for y in (0, inf)^d."""
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            if self is MarginForm.UNIFORM:
                return np.exp(-y)
            if self is MarginForm.UNIT_FRECHET:
                return 1.0 / y
            if self is MarginForm.GUMBEL:
                return -np.log(y)
            return -y


# ──────────────────────────────────────────────
# ESTIMATES AND MONTE CARLO CONFIG
# ──────────────────────────────────────────────

class Estimate(NamedTuple):
    """A value with its standard error (0 for exact backends)."""

    value: float
    se: float = 0.0


@dataclass(frozen=True)
class McConfig:
    """
    Monte Carlo plumbing for generator-backed models.

    (seed, stream_count, sample_count, antithetic) fully determine every
    estimate; threads only changes wall-clock.
    """

    sample_count: int = config.DEFAULT_SAMPLES
    seed: int = config.DEFAULT_SEED
    stream_count: int = config.DEFAULT_STREAMS
    antithetic: bool = False
    threads: int = field(default=config.DEFAULT_THREADS, compare=False)

    def __post_init__(self):
        if self.sample_count < 1:
            raise DomainError(f"sample_count must be >= 1, got {self.sample_count}")
        if self.stream_count < 1:
            raise DomainError(f"stream_count must be >= 1, got {self.stream_count}")
        if self.threads < 1:
            raise DomainError(f"threads must be >= 1, got {self.threads}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def describe(self) -> dict:
        return {
            "samples": self.sample_count,
            "seed": self.seed,
            "streams": self.stream_count,
            "antithetic": self.antithetic,
        }


# ──────────────────────────────────────────────
# DISCRETE SPECTRAL MEASURES
# ──────────────────────────────────────────────

class SpectralAtoms:
    """
    A discrete spectral measure H = Σ m_k δ_{w_k} on the unit simplex.

    Construction enforces total mass d and unit first moments
    Σ_k m_k w_kj = 1, both within relative tolerance MASS_RTOL.
    """

    def __init__(self, weights, masses):
        w = np.array(weights, dtype=float)
        m = np.array(masses, dtype=float)
        if w.ndim != 2 or w.shape[0] == 0:
            raise ConstraintError("spectral atoms need a non-empty (k, d) weight array")
        if m.shape != (w.shape[0],):
            raise ConstraintError(f"expected {w.shape[0]} masses, got shape {m.shape}")
        if np.any(m <= 0) or not np.all(np.isfinite(m)):
            raise ConstraintError("atom masses must be positive and finite")
        try:
            w = as_simplex(w)
        except DomainError as e:
            raise ConstraintError(f"atom profile off the simplex: {e}") from e

        d = w.shape[1]
        total = m.sum()
        if abs(total - d) > config.MASS_RTOL * d:
            raise ConstraintError(f"total spectral mass {total!r} differs from dimension {d}")
        moments = m @ w
        if np.any(np.abs(moments - 1.0) > config.MASS_RTOL):
            raise ConstraintError(f"first moments {moments.tolist()} must all equal 1")

        w.setflags(write=False)
        m.setflags(write=False)
        self._weights = w
        self._masses = m

    @classmethod
    def from_pairs(cls, pairs: Sequence) -> "SpectralAtoms":
        """Build from [(w_k, m_k), ...]."""
        if not pairs:
            raise ConstraintError("empty atom list")
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    @classmethod
    def merged(cls, weights, masses, dimension: int) -> "SpectralAtoms":
        """
        Merge atoms with equal profiles, drop zero masses, and rescale the
        masses to total `dimension` before validating.
        """
        w = np.asarray(weights, dtype=float)
        m = np.asarray(masses, dtype=float)
        keep = m > 0
        w, m = w[keep], m[keep]
        if w.shape[0] == 0:
            raise ConstraintError("no atom carries spectral mass")
        keys = np.round(w, config.MERGE_DECIMALS)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        merged_m = np.bincount(inverse, weights=m, minlength=uniq.shape[0])
        merged_w = np.zeros_like(uniq)
        np.add.at(merged_w, inverse, w * m[:, np.newaxis])
        merged_w /= merged_m[:, np.newaxis]
        merged_w /= merged_w.sum(axis=1, keepdims=True)
        merged_m *= dimension / merged_m.sum()
        return cls(merged_w, merged_m)

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def masses(self) -> np.ndarray:
        return self._masses

    @property
    def dimension(self) -> int:
        return self._weights.shape[1]

    def __len__(self):
        return self._masses.shape[0]

    def pairs(self):
        return [(tuple(w), float(m)) for w, m in zip(self._weights, self._masses)]

    def profile_probabilities(self) -> np.ndarray:
        """Masses of the profile distribution Q = H / d."""
        return self._masses / self.dimension

    def __repr__(self):
        return f"SpectralAtoms(d={self.dimension}, atoms={len(self)})"
