"""Abstract dependence backend interface: swap implementations here."""
from abc import ABC, abstractmethod
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from lib.engine.types import Estimate


class DependenceBackend(ABC):
    """
    Interface every representation of a stable tail dependence function
    implements: closed-form families, discrete spectral measures and
    generator-backed Monte Carlo models.
    """

    @property
    @abstractmethod
    def dimension(self) -> int:
        """Number of coordinates d."""

    @property
    def is_exact(self) -> bool:
        """True when evaluate() carries no sampling error."""
        return True

    @abstractmethod
    def evaluate(self, xs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Evaluate ℓ on a validated (m, d) batch.

        Returns:
            (values, standard_errors), both of shape (m,). Exact backends
            return zeros for the standard errors.
        """

    def combine_chunks(self, chunks: Iterable[Tuple[np.ndarray, Sequence[float]]]) -> Estimate:
        """
        Linear combination of ℓ values streamed as (points, coefficients) chunks.

        Generator-backed models override this so the standard error is that
        of the per-sample combination under common random numbers.
        """
        total = 0.0
        for xs, coefs in chunks:
            values, _ = self.evaluate(xs)
            total += float(np.dot(np.asarray(coefs, dtype=float), values))
        return Estimate(total, 0.0)

    def all_exceed(self, x: np.ndarray) -> Optional[Estimate]:
        """
        Tail copula R(x) at a strictly positive point when the backend can
        compute it directly; None falls back to inclusion–exclusion over ℓ.
        """
        return None

    @abstractmethod
    def restrict(self, subset: Tuple[int, ...]) -> "DependenceBackend":
        """Backend of the margin on the sorted, 0-based coordinate subset."""

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """
        JSON-ready description used in run manifests and reports, e.g.
            {"backend": "closed_form", "family": "Logistic", "params": {"theta": 2.0}}
        """
