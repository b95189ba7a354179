"""Monte Carlo benches: rejection rates of permutation tests and the empirical W_1 rate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np

from .calibration import permutation_pvalue
from .generators import draw, draw_alternative, map_trials, trial_rng
from .registry import get_statistic
from .transport import cost_matrix, exact_wasserstein_lp

MAX_EXACT_N = 256


@dataclass(frozen=True)
class PowerRow:
    statistic: str
    n: int
    d: int
    shift: float
    rejection_rate: float
    trials: int


def _power_trial(trial: int, stats: tuple[str, ...], n: int, d: int, shift: float, generator: str,
                 alternative: str, alpha: float, perms: int, seed: int, key: int) -> tuple[bool, ...]:
    rng = trial_rng(seed, key, trial)
    x = draw(generator, rng, n, d)
    y = draw_alternative(generator, alternative, shift, rng, n, d)
    pooled = np.vstack([x, y])
    out = []
    for s, name in enumerate(stats):
        p = permutation_pvalue(pooled, n, n, get_statistic(name), perms, seed=int(rng.integers(2**63)) + s)
        out.append(p <= alpha)
    return tuple(out)


def power_bench(stats: Sequence[str], sizes: Sequence[int], dims: Sequence[int] = (1,),
                shift: float = 1.0, generator: str = "gaussian", alternative: str = "mean_shift",
                trials: int = 200, alpha: float = 0.05, perms: int = 199, seed: int = 0,
                jobs: int | None = None) -> list[PowerRow]:
    """Empirical rejection rates per (statistic, n, d) with n = m.

    X draws from ``generator``; Y from the same generator modified by
    ``alternative`` (``"none"`` or ``shift = 0`` gives the null).
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    stats = tuple(s.lower() for s in stats)
    for s in stats:
        if get_statistic(s).univariate and any(d != 1 for d in dims):
            raise ValueError(f"{s} is a 1-D statistic; use dims = 1")
    rows = []
    for di, d in enumerate(dims):
        for ni, n in enumerate(sizes):
            fn = partial(_power_trial, stats=stats, n=n, d=d, shift=shift, generator=generator,
                         alternative=alternative, alpha=alpha, perms=perms, seed=seed,
                         key=di * 1_000_003 + ni)
            decisions = np.array(map_trials(fn, range(trials), jobs), dtype=bool)
            for s, name in enumerate(stats):
                rows.append(PowerRow(name, n, d, shift, float(decisions[:, s].mean()), trials))
    return rows


@dataclass(frozen=True)
class RateRow:
    d: int
    n: int
    mean_w1: float
    std_w1: float
    trials: int


def _rate_trial(trial: int, n: int, d: int, generator: str, seed: int, key: int) -> float:
    rng = trial_rng(seed, key, trial)
    x = draw(generator, rng, n, d)
    y = draw(generator, rng, n, d)
    opt, _ = exact_wasserstein_lp(cost_matrix(x, y, 1.0))
    return opt


def loglog_slope(sizes: Sequence[int], means: Sequence[float]) -> float:
    """Least-squares slope of log(mean) against log(n)."""
    if len(sizes) < 3:
        raise ValueError("need ≥ 3 grid points for slope")
    slope, _ = np.polyfit(np.log(np.asarray(sizes, dtype=float)), np.log(np.asarray(means)), 1)
    return float(slope)


def rate_bench(dims: Sequence[int], sizes: Sequence[int], trials: int = 200,
               generator: str = "uniform", seed: int = 0,
               jobs: int | None = None) -> tuple[list[RateRow], dict[int, float]]:
    """Mean exact ``W_1(P_n, Q_n)`` between two samples of one law, and the fitted log-log slope per d."""
    sizes = sorted(set(int(n) for n in sizes))
    if len(sizes) < 3:
        raise ValueError("need ≥ 3 grid points for slope")
    if sizes[-1] > MAX_EXACT_N:
        raise ValueError(f"n = {sizes[-1]} exceeds the exact-LP budget ({MAX_EXACT_N}); use a smaller grid")
    for d in dims:
        if d not in (1, 2, 3, 4):
            raise ValueError("rate bench supports d in {1, 2, 3, 4}")
    rows = []
    slopes = {}
    for di, d in enumerate(dims):
        means = []
        for ni, n in enumerate(sizes):
            fn = partial(_rate_trial, n=n, d=d, generator=generator, seed=seed, key=di * 1_000_003 + ni)
            w = np.array(map_trials(fn, range(trials), jobs))
            rows.append(RateRow(d, n, float(w.mean()), float(w.std(ddof=1)) if trials > 1 else math.nan, trials))
            means.append(w.mean())
        slopes[d] = loglog_slope(sizes, means)
    return rows, slopes
