"""
Sample clouds of X = (A_1 Z, ..., A_d Z) and rank-based tail estimators.

Estimators only see column ranks, so they are unchanged by any strictly
increasing transformation of a column. Ranks use ordinal ties: equal
values are ranked in input order.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from lib import config
from lib.engine.generators import Generator, draw_samples
from lib.engine.streams import TAG_RADIUS, draw, mean_and_se
from lib.engine.types import McConfig, as_points
from lib.errors import DomainError, SpecError

logger = logging.getLogger(__name__)


class CloudMargin(str, Enum):
    RAW = "raw"
    UNIFORM = "uniform"
    PARETO = "pareto"


@dataclass(frozen=True)
class SampleCloud:
    """An (n, d) observation matrix tagged with the scale of its margins."""

    data: np.ndarray
    margin: CloudMargin = CloudMargin.RAW
    columns: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim != 2 or data.shape[1] < 1:
            raise DomainError(f"a sample cloud is an (n, d) matrix, got shape {data.shape}")
        margin = CloudMargin(self.margin)
        if margin is CloudMargin.UNIFORM and np.any((data <= 0) | (data >= 1)):
            raise DomainError("uniform view must lie strictly inside (0, 1)")
        if margin is CloudMargin.PARETO and np.any(data < 1):
            raise DomainError("Pareto view must have every entry >= 1")
        columns = tuple(self.columns) or tuple(f"x{j + 1}" for j in range(data.shape[1]))
        if len(columns) != data.shape[1]:
            raise DomainError(f"{len(columns)} column names for {data.shape[1]} columns")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "margin", margin)
        object.__setattr__(self, "columns", columns)

    @property
    def size(self) -> int:
        return self.data.shape[0]

    @property
    def dimension(self) -> int:
        return self.data.shape[1]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.data, columns=list(self.columns))


# ──────────────────────────────────────────────
# SIMULATION AND MARGIN VIEWS
# ──────────────────────────────────────────────

def _frechet(rng: np.random.Generator, n: int) -> np.ndarray:
    # Z = -1/log U
    return -1.0 / np.log(rng.random(n))


def simulate_x(gen: Generator, cfg: McConfig) -> SampleCloud:
    """
    Raw cloud of X = A·Z: A from the generator streams, Z unit Fréchet
    from a separate stream tag, independent of A.
    """
    a = draw_samples(gen, cfg)
    z = draw(_frechet, cfg, TAG_RADIUS, paired=cfg.antithetic and gen.supports_antithetic)
    return SampleCloud(a * z[:, np.newaxis])


def ranks(cloud: SampleCloud) -> np.ndarray:
    """Column ranks 1..n, ordinal ties."""
    if cloud.size == 0:
        raise DomainError("cannot rank an empty sample cloud")
    return rankdata(cloud.data, method="ordinal", axis=0)


def rank_transform(cloud: SampleCloud, target: CloudMargin) -> SampleCloud:
    """
    Uniform view u = rank/(n+1) or Pareto view y = (n+1)/(n+1-rank);
    both stay strictly inside their domains.
    """
    target = CloudMargin(target)
    if target is CloudMargin.RAW:
        raise DomainError("rank_transform targets the uniform or pareto view")
    r = ranks(cloud).astype(float)
    n1 = cloud.size + 1.0
    data = r / n1 if target is CloudMargin.UNIFORM else n1 / (n1 - r)
    return SampleCloud(data, target, cloud.columns)


def return_times(cloud: SampleCloud) -> SampleCloud:
    """Return-time (Pareto) view Y_j = 1/(1 - F̂_j(X_j))."""
    return rank_transform(cloud, CloudMargin.PARETO)


# ──────────────────────────────────────────────
# ℓ ESTIMATION
# ──────────────────────────────────────────────

class EllHat(NamedTuple):
    """Clamped estimate, its naive binomial SE, the pre-clamp value and whether clamping acted."""

    value: float
    se: float
    raw: float
    clamped: bool


def default_k(n: int) -> int:
    return max(1, math.isqrt(n))


def _check_k(k: int, n: int):
    if not 1 <= k < n:
        raise DomainError(f"threshold count k must satisfy 1 <= k < n = {n}, got {k}")


def _ell_hat_from_ranks(r: np.ndarray, x: np.ndarray, k: int) -> EllHat:
    n = r.shape[0]
    reach = k * x / n
    if np.any(reach > 1):
        raise DomainError(f"k·x_j/n exceeds 1 at x = {x.tolist()} (k = {k}, n = {n})")
    # U_ij = r_ij/(n+1) > 1 - k x_j / n
    exceed = np.any(r / (n + 1.0) > 1.0 - reach, axis=1)
    frac = float(exceed.mean())
    raw = n / k * frac
    se = n / k * math.sqrt(frac * (1.0 - frac) / n)
    value = float(np.clip(raw, x.max(), x.sum()))
    return EllHat(value, se, raw, value != raw)


def ell_hat(cloud: SampleCloud, x, k: Optional[int] = None) -> EllHat:
    """
    (n/k)·(1 - Ĉ(1 - k x/n)) with Ĉ the empirical copula of the uniform
    view, clamped into [max x, Σ x]. k defaults to ⌊√n⌋.
    """
    k = default_k(cloud.size) if k is None else k
    _check_k(k, cloud.size)
    point = as_points(x, cloud.dimension)[0]
    return _ell_hat_from_ranks(ranks(cloud), point, k)


def ell_hat_grid(cloud: SampleCloud, xs, k: Optional[int] = None) -> Tuple[List[EllHat], float]:
    """
    ℓ̂ on a batch of points sharing one ranking; also returns the fraction
    of points where the raw estimate left [max x, Σ x].
    """
    k = default_k(cloud.size) if k is None else k
    _check_k(k, cloud.size)
    points = as_points(xs, cloud.dimension)
    r = ranks(cloud)
    results = [_ell_hat_from_ranks(r, x, k) for x in points]
    rate = sum(e.clamped for e in results) / len(results)
    if rate > 0:
        logger.warning("ell_hat: %.1f%% of %d points were clamped into the ℓ bounds",
                       100.0 * rate, len(results))
    return results, rate


# ──────────────────────────────────────────────
# PROFILE ESTIMATION
# ──────────────────────────────────────────────

@dataclass(frozen=True)
class ProfileSummary:
    """Profiles w = y/Σy of the k largest-sum observations of the Pareto view."""

    profiles: np.ndarray
    radii: np.ndarray
    threshold: float

    @property
    def mean(self) -> np.ndarray:
        return self.profiles.mean(axis=0)

    @property
    def se(self) -> np.ndarray:
        _, se = mean_and_se(self.profiles)
        return se

    def vertex_fraction(self, tol: float = 0.1) -> float:
        """Share of profiles within sup-distance tol of a simplex vertex."""
        # on the simplex the sup-distance to e_j is 1 - w_j
        return float(np.mean(self.profiles.max(axis=1) >= 1.0 - tol))

    def histogram(self, coordinate: int = 0, bins: int = 10) -> Tuple[np.ndarray, np.ndarray]:
        return np.histogram(self.profiles[:, coordinate], bins=bins, range=(0.0, 1.0))

    def to_frame(self, columns: Sequence[str]) -> pd.DataFrame:
        frame = pd.DataFrame(self.profiles, columns=[f"w_{c}" for c in columns])
        frame.insert(0, "r", self.radii)
        return frame


def profile_hat(cloud: SampleCloud, k: Optional[int] = None) -> ProfileSummary:
    """
    Empirical profile law from the k observations with the largest
    r(y) = y_1 + ... + y_d on the Pareto view; ties in r keep input order.
    """
    k = default_k(cloud.size) if k is None else k
    _check_k(k, cloud.size)
    y = cloud.data if cloud.margin is CloudMargin.PARETO else return_times(cloud).data
    r = y.sum(axis=1)
    top = np.argsort(-r, kind="stable")[:k]
    threshold = float(np.sort(r)[cloud.size - k - 1])
    return ProfileSummary(y[top] / r[top, np.newaxis], r[top], threshold)


# ──────────────────────────────────────────────
# CSV INGEST
# ──────────────────────────────────────────────

def read_cloud(path) -> SampleCloud:
    """Header row plus numeric rows; every column is a coordinate."""
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SpecError(f"could not read sample cloud {path}: {e}") from e
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    if frame.empty or numeric.isna().any().any():
        raise SpecError(f"sample cloud {path} must hold numeric rows under a header")
    logger.info("read %d x %d sample cloud from %s", frame.shape[0], frame.shape[1], path)
    return SampleCloud(numeric.to_numpy(dtype=float), CloudMargin.RAW, tuple(str(c) for c in frame.columns))


def write_cloud(cloud: SampleCloud, path):
    cloud.to_frame().to_csv(path, index=False, float_format=config.FLOAT_FORMAT)
