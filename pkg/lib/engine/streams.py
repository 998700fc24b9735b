"""
Seeded parallel sample streams.

A draw of n samples is split over McConfig.stream_count independent
numpy streams spawned from SeedSequence(seed). Streams are evaluated on a
thread pool and concatenated in stream order, so the output depends on
(seed, stream_count, sample_count) only, never on the thread count.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List

import numpy as np

from lib.engine.types import McConfig
from lib.errors import DomainError

logger = logging.getLogger(__name__)

# Purpose tags keep independent draws (generator vectors, Fréchet radii,
# standardization pre-passes) on disjoint streams for the same seed.
TAG_GENERATOR = 0
TAG_RADIUS = 1
TAG_STANDARDIZE = 2
TAG_VERIFY = 3

Sampler = Callable[[np.random.Generator, int], np.ndarray]


def stream_counts(total: int, streams: int, paired: bool = False) -> List[int]:
    """Split `total` draws over `streams`; paired splits keep every count even."""
    unit = 2 if paired else 1
    if total % unit:
        raise DomainError(f"antithetic sampling needs an even sample count, got {total}")
    units, extra = divmod(total // unit, streams)
    return [unit * (units + (1 if i < extra else 0)) for i in range(streams)]


def stream_generators(seed: int, streams: int, tag: int = TAG_GENERATOR) -> List[np.random.Generator]:
    root = np.random.SeedSequence(entropy=seed, spawn_key=(tag,))
    return [np.random.default_rng(child) for child in root.spawn(streams)]


def draw(sampler: Sampler, cfg: McConfig, tag: int = TAG_GENERATOR, paired: bool = False) -> np.ndarray:
    """
    Run `sampler(rng, count)` on every stream and stack the results.

    Args:
        sampler: returns a (count, ...) array from a numpy Generator.
        cfg: seed, stream count, sample count and worker threads.
        tag: purpose tag separating unrelated draws under the same seed.
        paired: keep per-stream counts even (antithetic pairs).

    Returns:
        Array with cfg.sample_count rows, stream 0 first.
    """
    counts = stream_counts(cfg.sample_count, cfg.stream_count, paired)
    rngs = stream_generators(cfg.seed, cfg.stream_count, tag)
    jobs = [(rng, count) for rng, count in zip(rngs, counts) if count > 0]

    t0 = time.monotonic()
    if cfg.threads == 1 or len(jobs) == 1:
        parts = [sampler(rng, count) for rng, count in jobs]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(lambda job: sampler(*job), jobs))
    logger.debug("drew %d samples on %d streams in %.3fs", cfg.sample_count, len(jobs), time.monotonic() - t0)
    return np.concatenate(parts, axis=0)


def mean_and_se(terms: np.ndarray, paired: bool = False):
    """
    Sample mean and standard error (sample std / √n) over axis 0.

    Paired draws (rows 2i, 2i+1) are averaged first so the error reflects
    the antithetic pairs as the independent units.
    """
    terms = np.asarray(terms, dtype=float)
    if paired:
        terms = terms.reshape(terms.shape[0] // 2, 2, *terms.shape[1:]).mean(axis=1)
    units = terms.shape[0]
    if units < 2:
        raise DomainError(f"need at least 2 independent samples for a standard error, got {units}")
    return terms.mean(axis=0), terms.std(axis=0, ddof=1) / np.sqrt(units)
