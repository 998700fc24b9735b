"""Model spec documents (JSON, versioned) and their translation into DependenceModels."""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from lib import config
from lib.engine.closed_forms import (
    ClosedFormBackend,
    Family,
    FamilySpec,
    MultivariateMOSpec,
    ThinnedBackend,
)
from lib.engine.dependence import DependenceModel, discrete_model
from lib.engine.generators import (
    ConstantGenerator,
    DirichletGammaGenerator,
    DiscreteAtomsGenerator,
    FrechetStableGenerator,
    GaussianPairGenerator,
    Generator,
    IndicatorGenerator,
    IndicatorLaw,
    LognormalPairGenerator,
    Provenance,
    RandomSumExponentialGenerator,
    generator_model,
)
from lib.engine.types import McConfig, SpectralAtoms
from lib.errors import SpecError

logger = logging.getLogger(__name__)

THINNED = "Thinned"
BUILTIN_PREFIX = "builtin:"


# ──────────────────────────────────────────────
# DOCUMENT SCHEMA
# ──────────────────────────────────────────────

class McSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    samples: int = Field(default=config.DEFAULT_SAMPLES, ge=1)
    seed: int = Field(default=config.DEFAULT_SEED, ge=0, lt=2 ** 64)
    streams: int = Field(default=config.DEFAULT_STREAMS, ge=1)
    antithetic: bool = False


class AtomEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    w: List[float]
    m: float


class ModelDocument(BaseModel):
    """
    {"version": 1, "dimension": d, "backend": ..., "family": ..., "params": {...},
     "atoms": [...], "mc": {...}, "standardize": "closed" | "mc"}
    """

    model_config = ConfigDict(extra="forbid")

    version: int
    dimension: int = Field(default=2, ge=1)
    backend: Literal["closed_form", "discrete", "generator"]
    family: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    atoms: Optional[List[AtomEntry]] = None
    mc: McSection = Field(default_factory=McSection)
    standardize: Literal["closed", "mc"] = "closed"

    @field_validator("version")
    @classmethod
    def _known_version(cls, v):
        if v != config.SPEC_VERSION:
            raise ValueError(f"unsupported spec version {v}; this build reads version {config.SPEC_VERSION}")
        return v

    @model_validator(mode="after")
    def _backend_fields(self):
        if self.backend == "discrete" and not self.atoms:
            raise ValueError("a discrete model needs a non-empty 'atoms' list")
        if self.backend != "discrete" and not self.family:
            raise ValueError(f"a {self.backend} model needs a 'family'")
        return self


def parse_document(data: Dict[str, Any]) -> ModelDocument:
    try:
        return ModelDocument.model_validate(data)
    except ValidationError as e:
        raise SpecError(f"malformed model spec: {e}") from e


def load_document(path) -> ModelDocument:
    """Read a spec file, or a built-in document named 'builtin:<name>'."""
    text = str(path)
    if text.startswith(BUILTIN_PREFIX):
        from lib.builtin import builtin_document
        return parse_document(builtin_document(text[len(BUILTIN_PREFIX):]))
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise SpecError(f"cannot read model spec {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise SpecError(f"model spec {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise SpecError(f"model spec {path} must be a JSON object")
    return parse_document(data)


# ──────────────────────────────────────────────
# MODEL CONSTRUCTION
# ──────────────────────────────────────────────

@dataclass(frozen=True)
class LoadedModel:
    """A built model with the Monte Carlo settings it runs under."""

    document: ModelDocument
    model: DependenceModel
    mc: McConfig
    generator: Optional[Generator] = None


def _number(value, name: str) -> float:
    # "inf" spells θ = ∞ in JSON documents
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise SpecError(f"parameter {name} must be a number, got {value!r}")
    if math.isnan(out):
        raise SpecError(f"parameter {name} is NaN")
    return out


def _subset_law(entries, name: str) -> Dict[tuple, float]:
    """[{"subset": [1-based...], "prob": p}, ...] as {0-based tuple: p}."""
    if not isinstance(entries, list):
        raise SpecError(f"{name} must be a list of {{'subset', 'prob'}} entries")
    law: Dict[tuple, float] = {}
    for entry in entries:
        try:
            subset = tuple(int(j) - 1 for j in entry["subset"])
            prob = _number(entry["prob"], f"{name}.prob")
        except (KeyError, TypeError) as e:
            raise SpecError(f"bad {name} entry {entry!r}") from e
        law[subset] = law.get(subset, 0.0) + prob
    return law


def family_spec(family: str, dimension: int, params: Dict[str, Any]) -> FamilySpec:
    try:
        fam = Family(family)
    except ValueError:
        raise SpecError(f"unknown closed-form family {family!r}")
    if fam is Family.MULTIVARIATE_MARSHALL_OLKIN:
        mo = MultivariateMOSpec(dimension, _subset_law(params.get("subsets"), "subsets"))
        return FamilySpec(fam, dimension, mo=mo)
    values: Dict[str, Any] = {}
    for key, value in params.items():
        values[key] = value if isinstance(value, list) else _number(value, key)
    return FamilySpec(fam, dimension, values)


def closed_form_backend(family: str, dimension: int, params: Dict[str, Any]):
    if family == THINNED:
        base = params.get("base")
        if not isinstance(base, dict) or "family" not in base:
            raise SpecError("Thinned needs a 'base' {family, params} object")
        inner = closed_form_backend(base["family"], 2, base.get("params", {}))
        return ThinnedBackend(inner, _number(params.get("alpha"), "alpha"), _number(params.get("beta"), "beta"))
    return ClosedFormBackend(family_spec(family, dimension, params))


def _indicator_law(params: Dict[str, Any], dimension: int) -> IndicatorLaw:
    if "law" in params:
        return IndicatorLaw(dimension, _subset_law(params["law"], "law"))
    if "theta" in params:
        return IndicatorLaw.symmetric(_number(params["theta"], "theta"))
    if "alpha" in params and "beta" in params:
        return IndicatorLaw.from_alpha_beta(_number(params["alpha"], "alpha"), _number(params["beta"], "beta"))
    raise SpecError("Indicators needs 'law', 'theta', or 'alpha' and 'beta'")


def build_generator(kind: str, params: Dict[str, Any], dimension: int,
                    standardize: Provenance = Provenance.CLOSED_FORM,
                    seed: int = config.DEFAULT_SEED) -> Generator:
    """Generator of `kind` from document params; raises SpecError on bad input."""
    kw = {"standardize": standardize, "standardize_seed": seed}
    try:
        if kind == "Constant":
            return ConstantGenerator(params["a"], **kw)
        if kind == "DiscreteAtoms":
            return DiscreteAtomsGenerator([(e["a"], _number(e["p"], "p")) for e in params["atoms"]], **kw)
        if kind == "DirichletGamma":
            return DirichletGammaGenerator(params["alpha"], **kw)
        if kind == "GaussianPair":
            return GaussianPairGenerator(_number(params["rho"], "rho"), **kw)
        if kind == "LognormalPair":
            return LognormalPairGenerator(_number(params["rho"], "rho"), _number(params["sigma"], "sigma"), **kw)
        if kind == "RandomSumExponential":
            return RandomSumExponentialGenerator(params["j_law"], params["k_law"], **kw)
        if kind == "FrechetStable":
            return FrechetStableGenerator(_number(params["theta"], "theta"), dimension, **kw)
        if kind == "Indicators":
            base = params["base"]
            inner = build_generator(base["family"], base.get("params", {}), dimension, standardize, seed)
            return IndicatorGenerator(inner, _indicator_law(params, inner.dimension))
    except (KeyError, TypeError) as e:
        raise SpecError(f"{kind} parameters are incomplete or malformed: {e}") from e
    raise SpecError(f"unknown generator kind {kind!r}")


def build(doc: ModelDocument, seed: Optional[int] = None, samples: Optional[int] = None,
          threads: int = config.DEFAULT_THREADS) -> LoadedModel:
    """
    Turn a document into a model. seed and samples override the
    document's mc section; threads never changes results.
    """
    mc = McConfig(
        sample_count=samples if samples is not None else doc.mc.samples,
        seed=seed if seed is not None else doc.mc.seed,
        stream_count=doc.mc.streams,
        antithetic=doc.mc.antithetic,
        threads=threads,
    )
    generator = None
    if doc.backend == "closed_form":
        model = DependenceModel(closed_form_backend(doc.family, doc.dimension, doc.params))
    elif doc.backend == "discrete":
        model = discrete_model(SpectralAtoms([a.w for a in doc.atoms], [a.m for a in doc.atoms]))
    else:
        standardize = Provenance.MC_ESTIMATED if doc.standardize == "mc" else Provenance.CLOSED_FORM
        generator = build_generator(doc.family, doc.params, doc.dimension, standardize, mc.seed)
        model = generator_model(generator, mc)
    if model.dimension != doc.dimension:
        raise SpecError(f"document declares dimension {doc.dimension}, model has {model.dimension}")
    logger.info("built %s model %s (d=%d)", doc.backend, doc.family or "atoms", model.dimension)
    return LoadedModel(doc, model, mc, generator)


def load(path, **overrides) -> LoadedModel:
    return build(load_document(path), **overrides)
