"""Table writers (CSV / JSON) and run manifests for every file the CLI writes."""
import json
import logging
import math
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from lib import __version__, config

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
MANIFEST_SUFFIX = ".manifest.json"


def _plain(value):
    """JSON-safe scalars: numpy types unwrapped, non-finite floats as strings."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def dumps(data: Any) -> str:
    """Deterministic JSON: sorted keys, floats at full precision."""
    return json.dumps(_plain(data), indent=2, sort_keys=True) + "\n"


def table_text(rows: Sequence[Dict[str, Any]], fmt: str) -> str:
    """
    Render rows as CSV (17 significant digits, RFC-style quoting) or as a
    JSON list of objects.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    if fmt == "json":
        return dumps(list(rows))
    frame = pd.DataFrame(list(rows))
    return frame.to_csv(index=False, float_format=config.FLOAT_FORMAT, lineterminator="\n")


def frame_text(frame: pd.DataFrame, fmt: str) -> str:
    if fmt == "csv":
        return frame.to_csv(index=False, float_format=config.FLOAT_FORMAT, lineterminator="\n")
    return table_text(frame.to_dict(orient="records"), fmt)


@dataclass
class RunManifest:
    """Everything needed to rerun a command bit-exactly, plus its wall-clock."""

    command: str
    spec: Optional[str]
    seed: Optional[int]
    samples: Optional[int]
    outputs: List[str] = field(default_factory=list)
    model: Dict[str, Any] = field(default_factory=dict)
    arguments: Dict[str, Any] = field(default_factory=dict)
    version: str = __version__
    python: str = field(default_factory=platform.python_version)
    numpy: str = np.__version__
    wall_clock_seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + MANIFEST_SUFFIX)


def write_output(text: str, out: Optional[Path], manifest: RunManifest):
    """Write `text` to `out` with its manifest sidecar, or to stdout when out is None."""
    if out is None:
        print(text, end="")
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    manifest.outputs = [str(out)]
    manifest_path(out).write_text(dumps(manifest.to_dict()))
    logger.info("wrote %s", out)
