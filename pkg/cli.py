"""
maxdep: batch front-end for max-stable dependence models.

    python cli.py eval     --spec builtin:Logistic --points "1,1,1;2,0,1"
    python cli.py simulate --spec builtin:gen-dirichlet-gamma --samples 100000 --out cloud.csv
    python cli.py estimate --in cloud.csv --targets "1,1" --profiles profiles.csv
    python cli.py coeffs   --spec builtin:PerfectDependenceD --format json
    python cli.py verify   --all-builtin

Exit codes: 0 ok, 1 check failure, 2 spec error, 3 domain error.
"""
import argparse
import logging
import os
import sys
import time
from pathlib import Path
from typing import List, Optional

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from lib import __version__, config
from lib.builtin import builtin_names
from lib.engine.coefficients import report as coefficient_report
from lib.engine.dependence import ell_batch, tail_copula
from lib.engine.empirical import default_k, ell_hat_grid, profile_hat, read_cloud, simulate_x
from lib.engine.types import MarginForm, simplex_lattice
from lib.errors import CheckFailure, MaxDepError, SpecError, exit_code
from lib.report import RunManifest, dumps, frame_text, table_text, write_output
from lib.spec import BUILTIN_PREFIX, LoadedModel, load
from lib.verify import limit_coherence, run_battery

logger = logging.getLogger("maxdep")


# ──────────────────────────────────────────────
# ARGUMENT PARSING
# ──────────────────────────────────────────────

def parse_points(text: str) -> np.ndarray:
    """'x1,x2;y1,y2' -> (2, d) array."""
    try:
        rows = [[float(v) for v in row.split(",")] for row in text.split(";") if row.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"points must look like '1,1;2,0.5': {e}")
    if not rows or len({len(r) for r in rows}) != 1:
        raise argparse.ArgumentTypeError("points must be non-empty rows of equal length")
    return np.array(rows)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="model spec JSON path or builtin:<name>")
    common.add_argument("--seed", type=int, default=None, help="override the spec's Monte Carlo seed")
    common.add_argument("--samples", type=int, default=None, help="override the spec's Monte Carlo sample count")
    common.add_argument("--out", type=Path, default=None, help="output file (stdout when omitted)")
    common.add_argument("--format", choices=("csv", "json"), default=config.DEFAULT_FORMAT)
    common.add_argument("--threads", type=int, default=config.DEFAULT_THREADS,
                        help="worker threads; never changes results")
    common.add_argument("--log-level", default=config.LOG_LEVEL)

    parser = argparse.ArgumentParser(prog="maxdep", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"maxdep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", parents=[common], help="evaluate ℓ, D, R and C on points")
    grid = ev.add_mutually_exclusive_group(required=True)
    grid.add_argument("--points", type=parse_points)
    grid.add_argument("--simplex-grid", type=int, metavar="N", help="lattice of step 1/N on the simplex")
    ev.add_argument("--margin", choices=[m.value for m in MarginForm], default=MarginForm.UNIFORM.value)

    sub.add_parser("simulate", parents=[common], help="simulate a raw cloud X = A·Z")

    est = sub.add_parser("estimate", parents=[common], help="rank-based ℓ̂ and profile estimates")
    est.add_argument("--in", dest="input", type=Path, required=True)
    est.add_argument("--k", type=int, default=None, help="threshold count (default ⌊√n⌋)")
    est.add_argument("--targets", type=parse_points, default=None, help="default: (1, ..., 1)")
    est.add_argument("--profiles", type=Path, default=None, help="write exceedance profiles here")

    sub.add_parser("coeffs", parents=[common], help="dependence coefficients of N(t)")

    ver = sub.add_parser("verify", parents=[common], help="run the invariant battery")
    ver.add_argument("--all-builtin", action="store_true", help="verify every built-in model")
    ver.add_argument("--limits", action="store_true", help="also run the parameter-limit checks")
    ver.add_argument("--points", dest="verify_points", type=int, default=config.VERIFY_POINTS)
    return parser


# ──────────────────────────────────────────────
# COMMANDS
# ──────────────────────────────────────────────

def _load(args) -> LoadedModel:
    if not args.spec:
        raise SpecError(f"{args.command} needs --spec")
    return load(args.spec, seed=args.seed, samples=args.samples, threads=args.threads)


def _manifest(args, loaded: Optional[LoadedModel]) -> RunManifest:
    arguments = {k: (v.tolist() if isinstance(v, np.ndarray) else str(v) if isinstance(v, Path) else v)
                 for k, v in vars(args).items()}
    return RunManifest(
        command=args.command,
        spec=args.spec,
        seed=loaded.mc.seed if loaded else args.seed,
        samples=loaded.mc.sample_count if loaded else args.samples,
        model=loaded.model.describe() if loaded else {},
        arguments=arguments,
    )


def cmd_eval(args, loaded: LoadedModel) -> str:
    d = loaded.model.dimension
    xs = args.points if args.points is not None else simplex_lattice(d, args.simplex_grid)
    margin = MarginForm(args.margin)
    values, ses = ell_batch(loaded.model, xs)
    sums = xs.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = np.where(sums > 0, xs / sums, np.nan)
    pick, _ = ell_batch(loaded.model, np.nan_to_num(weights, nan=1.0 / d))
    rows = []
    for x, w, value, se, dval in zip(xs, weights, values, ses, pick):
        row = {f"x{j + 1}": x[j] for j in range(d)}
        row.update({f"z{j + 1}": z for j, z in enumerate(margin.from_tail_argument(x))})
        cdf = float(np.exp(-value))
        row.update({
            "ell": value, "ell_se": se,
            "D": dval if np.all(np.isfinite(w)) else float("nan"),
            "R": tail_copula(loaded.model, x).value if d <= config.MAX_TAIL_DIMENSION else float("nan"),
            "C": cdf, "C_se": cdf * se, "margin": margin.value,
        })
        rows.append(row)
    return table_text(rows, args.format)


def cmd_simulate(args, loaded: LoadedModel) -> str:
    if loaded.generator is None:
        raise SpecError("simulate needs a generator model (backend 'generator')")
    cloud = simulate_x(loaded.generator, loaded.mc)
    return frame_text(cloud.to_frame(), args.format)


def cmd_estimate(args, manifest: RunManifest) -> str:
    cloud = read_cloud(args.input)
    k = args.k if args.k is not None else default_k(cloud.size)
    targets = args.targets if args.targets is not None else np.ones((1, cloud.dimension))
    estimates, rate = ell_hat_grid(cloud, targets, k)
    rows = []
    for x, est in zip(targets, estimates):
        row = {f"x{j + 1}": x[j] for j in range(cloud.dimension)}
        row.update({"ell_hat": est.value, "se": est.se, "raw": est.raw,
                    "clamped": est.clamped, "k": k, "n": cloud.size})
        rows.append(row)
    profiles = profile_hat(cloud, k)
    logger.info("mean exceedance profile %s (k=%d)", np.array2string(profiles.mean, precision=4), k)
    logger.info("clamped fraction %.4f", rate)
    if args.profiles is not None:
        write_output(frame_text(profiles.to_frame(cloud.columns), args.format), args.profiles, manifest)
    return table_text(rows, args.format)


def cmd_coeffs(args, loaded: LoadedModel) -> str:
    result = coefficient_report(loaded.model, loaded.mc)
    if args.format == "json":
        return dumps(result.to_dict())
    return table_text(result.rows(), "csv")


def cmd_verify(args) -> str:
    started = time.monotonic()
    specs = [BUILTIN_PREFIX + name for name in builtin_names()] if args.all_builtin else [args.spec]
    if not specs or specs[0] is None:
        raise SpecError("verify needs --spec or --all-builtin")
    rows = []
    for spec in specs:
        loaded = load(spec, seed=args.seed, samples=args.samples, threads=args.threads)
        for result in run_battery(loaded, args.verify_points):
            rows.append({"spec": spec, **result.to_dict()})
            print(f"{spec} {result.line()}")
    if args.limits or args.all_builtin:
        for result in limit_coherence():
            rows.append({"spec": "limits", **result.to_dict()})
            print(f"limits {result.line()}")
    failed = [f"{r['spec']}:{r['check']}" for r in rows if not r["passed"]]
    text = table_text(rows, args.format)
    if args.out is not None:
        manifest = _manifest(args, None)
        manifest.wall_clock_seconds = time.monotonic() - started
        write_output(text, args.out, manifest)
    if failed:
        raise CheckFailure(failed)
    return ""


# ──────────────────────────────────────────────
# ENTRY POINT
# ──────────────────────────────────────────────

def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format=config.LOG_FORMAT, level=args.log_level.upper(), stream=sys.stderr)
    started = time.monotonic()
    try:
        if args.command == "verify":
            cmd_verify(args)
            return 0
        loaded = None if args.command == "estimate" and not args.spec else _load(args)
        manifest = _manifest(args, loaded)
        if args.command == "eval":
            text = cmd_eval(args, loaded)
        elif args.command == "simulate":
            text = cmd_simulate(args, loaded)
        elif args.command == "estimate":
            text = cmd_estimate(args, manifest)
        else:
            text = cmd_coeffs(args, loaded)
        manifest.wall_clock_seconds = time.monotonic() - started
        write_output(text, args.out, manifest)
    except MaxDepError as e:
        logger.error("%s", e)
        return exit_code(e)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
