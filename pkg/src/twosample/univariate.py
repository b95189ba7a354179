"""One-dimensional two-sample statistics: KS, PP/QQ, Wasserstein and ODC-based tests.

Every statistic keeps its unscaled value and the sample-size factor
(``mn/(m+n)`` or its square root) separately; ``value`` is their product.
The ``batch_*`` functions evaluate a statistic for many relabellings of a
pooled sample at once and are what permutation calibration runs on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .empirical import (
    EmpiricalDistribution,
    as_sample,
    build_empirical,
    cdf,
    odc_curve,
    quantile_refinement,
)


class StatKind(str, enum.Enum):
    KS = "KS"
    PP_L2 = "PP_L2"
    QQ_L2 = "QQ_L2"
    QQ_LINF = "QQ_LINF"
    WASSERSTEIN_P = "WASSERSTEIN_P"
    WASSERSTEIN_INF = "WASSERSTEIN_INF"
    ODC_W2 = "ODC_W2"
    ODC_LINF = "ODC_LINF"


# statistics whose null law does not depend on the common continuous F
DISTRIBUTION_FREE = frozenset({StatKind.KS, StatKind.ODC_W2, StatKind.ODC_LINF})


@dataclass(frozen=True)
class UnivariateStatistic:
    kind: StatKind
    raw_value: float
    scale: float
    n: int
    m: int
    p: float | None = None

    def __post_init__(self):
        if self.raw_value < 0 or not math.isfinite(self.raw_value):
            raise ValueError("statistic value must be finite and nonnegative")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.kind is StatKind.WASSERSTEIN_P and (self.p is None or self.p < 1):
            raise ValueError("WASSERSTEIN_P needs p >= 1")

    @property
    def value(self) -> float:
        return self.raw_value * self.scale


def size_factor(n: int, m: int) -> float:
    """``mn / (m + n)``; its square root scales sup-type statistics."""
    return n * m / (n + m)


def _pair(x, y) -> tuple[EmpiricalDistribution, EmpiricalDistribution]:
    xs, ys = as_sample(x), as_sample(y)
    if xs.dim != 1 or ys.dim != 1:
        raise ValueError(f"univariate statistic needs 1-D samples, got dimensions {xs.dim} and {ys.dim}")
    return build_empirical(xs), build_empirical(ys)


def _refinement(n: int, m: int):
    """Interval widths plus 0-based order-statistic indices of X and Y on each interval."""
    grid = quantile_refinement(n, m)
    mid = 0.5 * (grid[:-1] + grid[1:])
    ix = np.searchsorted(np.arange(1, n + 1) / n, mid, side="left")
    iy = np.searchsorted(np.arange(1, m + 1) / m, mid, side="left")
    return np.diff(grid), ix, iy


# --- direct statistics -------------------------------------------------------

def ks_statistic(x, y) -> UnivariateStatistic:
    fx, gy = _pair(x, y)
    n, m = fx.n, gy.n
    z = np.concatenate([fx.sorted_values, gy.sorted_values])
    cx = np.searchsorted(fx.sorted_values, z, side="right")
    cy = np.searchsorted(gy.sorted_values, z, side="right")
    # integer numerator keeps the sup exact
    raw = int(np.max(np.abs(cx * m - cy * n))) / (n * m)
    return UnivariateStatistic(StatKind.KS, raw, math.sqrt(size_factor(n, m)), n, m)


def pp_l2_statistic(x, y) -> UnivariateStatistic:
    """Integrated squared CDF difference over [min, max] of the pooled sample."""
    fx, gy = _pair(x, y)
    z = np.unique(np.concatenate([fx.sorted_values, gy.sorted_values]))
    diff = cdf(fx, z[:-1]) - cdf(gy, z[:-1]) if z.size > 1 else np.zeros(0)
    raw = math.fsum(np.asarray(diff) ** 2 * np.diff(z))
    return UnivariateStatistic(StatKind.PP_L2, raw, size_factor(fx.n, gy.n), fx.n, gy.n)


def _quantile_gaps(fx: EmpiricalDistribution, gy: EmpiricalDistribution):
    widths, ix, iy = _refinement(fx.n, gy.n)
    return widths, np.abs(fx.sorted_values[ix] - gy.sorted_values[iy])


def wasserstein_1d(x, y, p: float = 1.0) -> UnivariateStatistic:
    """``W_p^p`` between the empirical measures, via the quantile-function integral.

    ``value ** (1/p)`` is the distance itself.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    fx, gy = _pair(x, y)
    widths, gaps = _quantile_gaps(fx, gy)
    raw = math.fsum(widths * gaps**p)
    return UnivariateStatistic(StatKind.WASSERSTEIN_P, raw, 1.0, fx.n, gy.n, p=float(p))


def wasserstein_inf_1d(x, y) -> UnivariateStatistic:
    fx, gy = _pair(x, y)
    _, gaps = _quantile_gaps(fx, gy)
    return UnivariateStatistic(StatKind.WASSERSTEIN_INF, float(gaps.max()), 1.0, fx.n, gy.n)


def qq_l2_statistic(x, y) -> UnivariateStatistic:
    w = wasserstein_1d(x, y, 2.0)
    return UnivariateStatistic(StatKind.QQ_L2, w.raw_value, size_factor(w.n, w.m), w.n, w.m)


def qq_linf_statistic(x, y) -> UnivariateStatistic:
    w = wasserstein_inf_1d(x, y)
    return UnivariateStatistic(StatKind.QQ_LINF, w.raw_value, math.sqrt(size_factor(w.n, w.m)), w.n, w.m)


def _odc_l2(lo: np.ndarray, hi: np.ndarray, c: np.ndarray) -> np.ndarray:
    # closed form of the integral of (c - t)^2 over [lo, hi], summed along the last axis
    return (((c - lo) ** 3 - (c - hi) ** 3) / 3.0).sum(axis=-1)


def _odc_sup(lo: np.ndarray, hi: np.ndarray, c: np.ndarray) -> np.ndarray:
    # |c - t| is maximised at an endpoint of each piece
    return np.maximum(np.abs(c - lo), np.abs(c - hi)).max(axis=-1)


def odc_w2_statistic(x, y) -> UnivariateStatistic:
    """Squared L2 distance between the empirical ODC curve and the diagonal."""
    fx, gy = _pair(x, y)
    curve = odc_curve(fx, gy)
    raw = max(float(_odc_l2(curve.lo, curve.hi, curve.values)), 0.0)
    return UnivariateStatistic(StatKind.ODC_W2, raw, size_factor(fx.n, gy.n), fx.n, gy.n)


def odc_linf_statistic(x, y) -> UnivariateStatistic:
    fx, gy = _pair(x, y)
    curve = odc_curve(fx, gy)
    raw = float(_odc_sup(curve.lo, curve.hi, curve.values))
    return UnivariateStatistic(StatKind.ODC_LINF, raw, math.sqrt(size_factor(fx.n, gy.n)), fx.n, gy.n)


def compute(kind: StatKind | str, x, y, p: float = 1.0) -> UnivariateStatistic:
    kind = StatKind(kind)
    if kind is StatKind.WASSERSTEIN_P:
        return wasserstein_1d(x, y, p)
    return _DIRECT[kind](x, y)


_DIRECT = {
    StatKind.KS: ks_statistic,
    StatKind.PP_L2: pp_l2_statistic,
    StatKind.QQ_L2: qq_l2_statistic,
    StatKind.QQ_LINF: qq_linf_statistic,
    StatKind.WASSERSTEIN_INF: wasserstein_inf_1d,
    StatKind.ODC_W2: odc_w2_statistic,
    StatKind.ODC_LINF: odc_linf_statistic,
}


# --- batched evaluation over relabellings -------------------------------------

def batch_statistic(kind: StatKind | str, pooled_sorted: np.ndarray, labels: np.ndarray, p: float = 1.0) -> np.ndarray:
    """Scaled statistic for every row of ``labels``.

    ``pooled_sorted`` is the sorted pooled sample (length n + m) and
    ``labels`` a boolean (B, n + m) array aligned with it, True marking the
    points assigned to X.  Every row must contain the same number of Trues.
    """
    kind = StatKind(kind)
    z = np.asarray(pooled_sorted, dtype=float)
    labels = np.atleast_2d(np.asarray(labels, dtype=bool))
    total = z.size
    n = int(labels[0].sum())
    m = total - n
    if n == 0 or m == 0:
        raise ValueError("both groups must be non-empty")
    rows = labels.shape[0]

    if kind in (StatKind.KS, StatKind.PP_L2, StatKind.ODC_W2, StatKind.ODC_LINF):
        # counts of X and Y that are <= z_k, ties resolved to the end of their run
        last = np.searchsorted(z, z, side="right") - 1
        cx = np.cumsum(labels, axis=1)[:, last]
        cy = np.cumsum(~labels, axis=1)[:, last]
        if kind is StatKind.KS:
            raw = np.abs(cx * m - cy * n).max(axis=1) / (n * m)
            return raw * math.sqrt(size_factor(n, m))
        if kind is StatKind.PP_L2:
            diff = cx[:, :-1] / n - cy[:, :-1] / m
            raw = (diff**2 * np.diff(z)).sum(axis=1)
            return raw * size_factor(n, m)
        c = cy[labels].reshape(rows, n) / m
        k = np.arange(1, n + 1)
        lo, hi = (k - 1) / n, k / n
        if kind is StatKind.ODC_W2:
            return np.maximum(_odc_l2(lo, hi, c), 0.0) * size_factor(n, m)
        return _odc_sup(lo, hi, c) * math.sqrt(size_factor(n, m))

    zz = np.broadcast_to(z, labels.shape)
    xs = zz[labels].reshape(rows, n)
    ys = zz[~labels].reshape(rows, m)
    widths, ix, iy = _refinement(n, m)
    gaps = np.abs(xs[:, ix] - ys[:, iy])
    if kind is StatKind.WASSERSTEIN_P:
        return (widths * gaps**p).sum(axis=1)
    if kind is StatKind.QQ_L2:
        return (widths * gaps**2).sum(axis=1) * size_factor(n, m)
    if kind is StatKind.WASSERSTEIN_INF:
        return gaps.max(axis=1)
    return gaps.max(axis=1) * math.sqrt(size_factor(n, m))
