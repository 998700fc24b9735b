"""Built-in model spec documents: one per closed-form family and per generator kind."""
import copy
from typing import Any, Dict, List

from lib import config
from lib.errors import SpecError

# Generator documents run at this size by default so the full battery stays desk-scale.
BUILTIN_SAMPLES = 100_000


def _closed(family: str, dimension: int = 2, **params) -> Dict[str, Any]:
    return {"version": config.SPEC_VERSION, "dimension": dimension, "backend": "closed_form",
            "family": family, "params": params}


def _generator(kind: str, dimension: int = 2, antithetic: bool = False, **params) -> Dict[str, Any]:
    return {"version": config.SPEC_VERSION, "dimension": dimension, "backend": "generator",
            "family": kind, "params": params,
            "mc": {"samples": BUILTIN_SAMPLES, "seed": config.DEFAULT_SEED,
                   "streams": config.DEFAULT_STREAMS, "antithetic": antithetic}}


# ─── Closed-form families ───

CLOSED_FORM_DOCUMENTS: Dict[str, Dict[str, Any]] = {
    "Logistic": _closed("Logistic", 3, theta=2.0),
    "MarshallOlkin": _closed("MarshallOlkin", alpha=0.3, beta=0.9),
    "TawnMixture": _closed("TawnMixture", theta=0.6),
    "RationalQuadratic": _closed("RationalQuadratic", alpha=0.5, beta=0.8),
    "Schlather": _closed("Schlather", rho=0.3),
    "HuslerReiss": _closed("HuslerReiss", a=1.2),
    "DirichletBivariate11": _closed("DirichletBivariate11"),
    "IndependenceD": _closed("IndependenceD", 3),
    "PerfectDependenceD": _closed("PerfectDependenceD", 3),
}

# ─── Extra closed-form documents ───

EXTRA_DOCUMENTS: Dict[str, Dict[str, Any]] = {
    "MultivariateMarshallOlkin": _closed(
        "MultivariateMarshallOlkin", 3,
        subsets=[{"subset": [1, 2, 3], "prob": 0.4}, {"subset": [1, 2], "prob": 0.2},
                 {"subset": [3], "prob": 0.2}, {"subset": [1], "prob": 0.1}, {"subset": [2], "prob": 0.1}]),
    "Thinned": _closed("Thinned", base={"family": "HuslerReiss", "params": {"a": 0.8}}, alpha=0.5, beta=0.7),
    "RandomSumExponential": _closed("RandomSumExponential", j_law=[0.25, 0.5, 0.25], k_law=[0.0, 1.0]),
    "discrete-two-atom": {
        "version": config.SPEC_VERSION, "dimension": 2, "backend": "discrete",
        "atoms": [{"w": [0.75, 0.25], "m": 1.0}, {"w": [0.25, 0.75], "m": 1.0}],
    },
}

# ─── Generator kinds ───

GENERATOR_DOCUMENTS: Dict[str, Dict[str, Any]] = {
    "gen-constant": _generator("Constant", 3, a=[1.0, 2.0, 0.5]),
    "gen-discrete-atoms": _generator("DiscreteAtoms", atoms=[{"a": [1.5, 0.5], "p": 0.5},
                                                             {"a": [0.5, 1.5], "p": 0.5}]),
    "gen-indicators": _generator("Indicators", base={"family": "Constant", "params": {"a": [1.0, 1.0]}},
                                 alpha=0.3, beta=0.9),
    "gen-dirichlet-gamma": _generator("DirichletGamma", alpha=[1.0, 1.0]),
    "gen-gaussian-pair": _generator("GaussianPair", antithetic=True, rho=0.3),
    "gen-lognormal-pair": _generator("LognormalPair", antithetic=True, rho=0.4, sigma=1.0),
    "gen-random-sum": _generator("RandomSumExponential", j_law=[0.25, 0.5, 0.25], k_law=[0.0, 1.0]),
    "gen-frechet-stable": _generator("FrechetStable", theta=3.0),
}


def all_documents() -> Dict[str, Dict[str, Any]]:
    return {**CLOSED_FORM_DOCUMENTS, **EXTRA_DOCUMENTS, **GENERATOR_DOCUMENTS}


def builtin_names() -> List[str]:
    return list(all_documents())


def builtin_document(name: str) -> Dict[str, Any]:
    """A fresh copy of the built-in document `name`."""
    docs = all_documents()
    if name not in docs:
        raise SpecError(f"no built-in model {name!r}; known: {', '.join(docs)}")
    return copy.deepcopy(docs[name])
