"""
Limit dependence coefficients of the exceedance count N(t) = Σ_j 1{F_j(X_j) > 1 - 1/t}.

multi_failure[k] = lim t·P[N(t) ≥ k] = ∫ w_(d-k+1) H(dw), the integral of
the k-th largest profile coordinate. The other coefficients follow from it:
extremal = multi_failure[1], all_fail = multi_failure[d], and
excess_mean[k] = lim E[N(t) - k | N(t) ≥ k] = Σ_{m>k} multi_failure[m] / multi_failure[k].
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import comb

from lib import config
from lib.engine.dependence import DependenceModel, DiscreteBackend, subset_chunks
from lib.engine.generators import Generator, GeneratorBackend, generator_model
from lib.engine.streams import mean_and_se
from lib.engine.types import McConfig, SpectralAtoms
from lib.errors import DomainError


@dataclass(frozen=True)
class CoefficientReport:
    """
    Coefficients of one model. Sequences are indexed from k = 1, so
    multi_failure[0] holds k = 1; use multi() and excess() for 1-based access.
    Standard errors are zero for exact paths.
    """

    dimension: int
    multi_failure: Tuple[float, ...]
    excess_mean: Tuple[float, ...]
    multi_failure_se: Tuple[float, ...]
    excess_mean_se: Tuple[float, ...]
    method: str

    @property
    def extremal_coefficient(self) -> float:
        return self.multi_failure[0]

    @property
    def all_fail(self) -> float:
        return self.multi_failure[-1]

    def multi(self, k: int) -> float:
        if not 1 <= k <= self.dimension:
            raise DomainError(f"k must lie in 1..{self.dimension}, got {k}")
        return self.multi_failure[k - 1]

    def excess(self, k: int) -> float:
        if not 1 <= k <= self.dimension - 1:
            raise DomainError(f"k must lie in 1..{self.dimension - 1}, got {k}")
        return self.excess_mean[k - 1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dimension": self.dimension,
            "method": self.method,
            "extremal_coefficient": self.extremal_coefficient,
            "extremal_coefficient_se": self.multi_failure_se[0],
            "all_fail": self.all_fail,
            "all_fail_se": self.multi_failure_se[-1],
            "multi_failure": list(self.multi_failure),
            "multi_failure_se": list(self.multi_failure_se),
            "excess_mean": list(self.excess_mean),
            "excess_mean_se": list(self.excess_mean_se),
        }

    def rows(self) -> List[Dict[str, Any]]:
        """Long-format rows (coefficient, k, value, se) for CSV output."""
        d = self.dimension
        out = [
            {"coefficient": "extremal_coefficient", "k": 1,
             "value": self.extremal_coefficient, "se": self.multi_failure_se[0]},
            {"coefficient": "all_fail", "k": d, "value": self.all_fail, "se": self.multi_failure_se[-1]},
        ]
        out += [{"coefficient": "multi_failure", "k": k + 1, "value": v, "se": s}
                for k, (v, s) in enumerate(zip(self.multi_failure, self.multi_failure_se))]
        out += [{"coefficient": "excess_mean", "k": k + 1, "value": v, "se": s}
                for k, (v, s) in enumerate(zip(self.excess_mean, self.excess_mean_se))]
        return out


def _excess(multi: np.ndarray) -> np.ndarray:
    tails = np.cumsum(multi[::-1])[::-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(multi[:-1] > 0, tails[1:] / multi[:-1], 0.0)


def _exact_report(multi: np.ndarray, method: str) -> CoefficientReport:
    d = multi.shape[0]
    return CoefficientReport(d, tuple(multi.tolist()), tuple(_excess(multi).tolist()),
                             (0.0,) * d, (0.0,) * (d - 1), method)


def from_atoms(atoms: SpectralAtoms) -> CoefficientReport:
    """Discrete path: multi_failure[k] = Σ_atoms m · (k-th largest w)."""
    ordered = -np.sort(-atoms.weights, axis=1)
    return _exact_report(atoms.masses @ ordered, "discrete")


def from_samples(samples: np.ndarray, paired: bool = False) -> CoefficientReport:
    """
    Generator path: multi_failure[k] is the sample mean of the k-th largest
    A_j⁺. excess_mean is a ratio of means; its SE comes from the
    linearized residuals N_i - ratio·D_i.
    """
    ordered = -np.sort(-np.maximum(samples, 0.0), axis=1)
    d = ordered.shape[1]
    multi, multi_se = mean_and_se(ordered, paired)
    excess = _excess(multi)
    excess_se = np.zeros(d - 1)
    tails = np.cumsum(ordered[:, ::-1], axis=1)[:, ::-1]
    for k in range(d - 1):
        if multi[k] > 0:
            residual = (tails[:, k + 1] - excess[k] * ordered[:, k]) / multi[k]
            _, excess_se[k] = mean_and_se(residual, paired)
    return CoefficientReport(d, tuple(multi.tolist()), tuple(excess.tolist()),
                             tuple(multi_se.tolist()), tuple(excess_se.tolist()), "generator")


def from_exact_ell(model: DependenceModel) -> CoefficientReport:
    """
    Exact path for any exact model through ℓ at subset indicators:
    k-th largest of y = Σ_{|T| ≥ d-k+1} (-1)^{|T|-(d-k+1)} C(|T|-1, d-k) max_T y.
    """
    d = model.dimension
    if d > config.MAX_TAIL_DIMENSION:
        raise DomainError(f"coefficients need 2^d - 1 evaluations; d = {d} exceeds {config.MAX_TAIL_DIMENSION}")
    multi = np.zeros(d)
    for points, _ in subset_chunks(np.ones(d)):
        values, _ = model.backend.evaluate(points)
        sizes = points.sum(axis=1).astype(int)
        for k in range(1, d + 1):
            low = d - k + 1
            coefs = np.where(sizes >= low, (-1.0) ** (sizes - low) * comb(sizes - 1, d - k), 0.0)
            multi[k - 1] += coefs @ values
    return _exact_report(multi, "closed-form")


def report(model, cfg: Optional[McConfig] = None) -> CoefficientReport:
    """
    Coefficient report of a DependenceModel, a Generator (Monte Carlo, with
    cfg) or SpectralAtoms.
    """
    if isinstance(model, SpectralAtoms):
        return from_atoms(model)
    if isinstance(model, Generator):
        model = generator_model(model, cfg or McConfig())
    backend = model.backend
    if isinstance(backend, DiscreteBackend):
        return from_atoms(backend.atoms)
    if isinstance(backend, GeneratorBackend):
        return from_samples(backend.samples(), backend.paired)
    if not backend.is_exact:
        raise DomainError(f"no coefficient path for backend {type(backend).__name__}")
    return from_exact_ell(model)
