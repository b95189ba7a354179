"""Fixed menu of sample generators and per-trial random streams."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

JOBS_ENV = "TWOSAMPLE_JOBS"

T = TypeVar("T")


def trial_rng(seed: int, *counters: int) -> np.random.Generator:
    """Independent stream for one trial, keyed by ``(seed, *counters)``.

    The stream depends only on the key, so trials can run in any order or
    in parallel and still reproduce a sequential run.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, counters)]))


def _uniform(rng, size, dim):
    return rng.random((size, dim))


def _exponential(rng, size, dim):
    return -np.log1p(-rng.random((size, dim)))


def _logit(rng, size, dim):
    u = rng.random((size, dim))
    return np.log(u) - np.log1p(-u)


def _gaussian(rng, size, dim):
    return rng.standard_normal((size, dim))


# continuous, strictly increasing transforms of uniforms (plus the Gaussian)
GENERATORS: dict[str, Callable[[np.random.Generator, int, int], np.ndarray]] = {
    "uniform": _uniform,
    "exponential": _exponential,
    "logit": _logit,
    "gaussian": _gaussian,
}
ALTERNATIVES = ("none", "mean_shift", "scale_shift")


def draw(name: str, rng: np.random.Generator, size: int, dim: int = 1) -> np.ndarray:
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}") from None
    return gen(rng, size, dim)


def draw_alternative(name: str, alternative: str, shift: float, rng: np.random.Generator,
                     size: int, dim: int = 1) -> np.ndarray:
    """Base draw modified by a mean shift along the first axis or a scale change by ``1 + shift``."""
    z = draw(name, rng, size, dim)
    if alternative == "mean_shift":
        z[:, 0] += shift
    elif alternative == "scale_shift":
        z *= 1.0 + shift
    elif alternative != "none":
        raise ValueError(f"unknown alternative {alternative!r}; choose from {', '.join(ALTERNATIVES)}")
    return z


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "1")
    try:
        jobs = int(raw)
    except ValueError:
        raise ValueError(f"{JOBS_ENV} must be an integer, got {raw!r}") from None
    return max(1, jobs)


def map_trials(fn: Callable[[int], T], trials: Iterable[int], jobs: int | None = None) -> list[T]:
    """Ordered map over trial indices; ``fn`` must be picklable when ``jobs > 1``."""
    jobs = default_jobs() if jobs is None else jobs
    trials = list(trials)
    if jobs <= 1 or len(trials) < 2:
        return [fn(t) for t in trials]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, trials, chunksize=max(1, len(trials) // (4 * jobs))))
