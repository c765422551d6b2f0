"""Vectorised per-support computations and the deterministic trial runner.

Trials are generated in fixed-size blocks; block ``b`` always draws from
``seed.child(b)`` and always draws a full block, so the value of trial
``t`` depends only on ``(seed, t)``, never on the total trial count or
on how blocks are spread over threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from aonlab.model import Seed

BLOCK_SIZE = 128
THREADS_ENV = "AONLAB_THREADS"


def resolve_threads(threads: int | None) -> int:
    """``None`` reads ``AONLAB_THREADS`` (default 1); ``0`` means one per CPU."""
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    if threads < 0:
        raise ValueError(f"threads must be >= 0, got {threads}")
    return threads or (os.cpu_count() or 1)


def run_blocks(
    work: Callable[[np.random.Generator, int], np.ndarray],
    trials: int,
    seed: Seed,
    threads: int | None = 1,
    block: int = BLOCK_SIZE,
) -> np.ndarray:
    """Concatenate ``work(rng_b, block)`` over blocks and keep the first ``trials`` rows."""
    nblocks = math.ceil(trials / block)

    def one(b: int) -> np.ndarray:
        return np.asarray(work(seed.child(b).rng(), block))

    nthreads = min(resolve_threads(threads), max(nblocks, 1))
    if nthreads == 1:
        parts = [one(b) for b in range(nblocks)]
    else:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(one, range(nblocks)))
    return np.concatenate(parts)[:trials]


def fits(X: np.ndarray, supports: np.ndarray) -> np.ndarray:
    """``X @ beta'`` for every support row: shape ``X.shape[:-1] + (C,)``.

    Columns are added left to right in index order, so supports that
    differ only by swapping identical columns give bitwise-equal fits.
    """
    out = X[..., supports[:, 0]].copy()
    for j in range(1, supports.shape[1]):
        out += X[..., supports[:, j]]
    return out


def residuals(X: np.ndarray, Y: np.ndarray, supports: np.ndarray) -> np.ndarray:
    """``||Y - X beta'||^2`` per support; ``X`` is ``(..., n, p)``, result ``(..., C)``."""
    diff = Y[..., :, None] - fits(X, supports)
    return np.einsum("...nc,...nc->...c", diff, diff)


def log_likelihood_ratios(
    X: np.ndarray, Y: np.ndarray, sigma2: float, lam: float, supports: np.ndarray
) -> np.ndarray:
    """``log dP/dQ_lam`` at each ``(X, Y)`` of a batch.

    The design has the same law under both models, so the ratio is the
    uniform mixture of Gaussian likelihoods over supports divided by the
    null density of ``Y``.
    """
    n = Y.shape[-1]
    r = residuals(X, Y, supports)
    ysq = np.einsum("...n,...n->...", Y, Y)
    return (
        logsumexp(-r / (2.0 * sigma2), axis=-1)
        - math.log(supports.shape[0])
        + n * math.log(lam)
        + ysq / (2.0 * lam**2 * sigma2)
    )


def batch_mean_se(values: np.ndarray, batches: int = 50) -> tuple[float, float]:
    """Mean and batch-means standard error over contiguous trial batches."""
    values = np.asarray(values, dtype=float)
    mean = float(np.mean(values))
    nb = min(batches, values.shape[0])
    if nb < 2:
        return mean, float("nan")
    means = np.array([b.mean() for b in np.array_split(values, nb)])
    return mean, float(np.std(means, ddof=1) / math.sqrt(nb))
