"""Distance- and kernel-based statistics for samples in any dimension."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .empirical import as_sample
from .transport import sinkhorn_divergence

DistanceFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


class MultiKind(str, enum.Enum):
    ENERGY_DISTANCE = "ENERGY_DISTANCE"
    MMD2_U = "MMD2_U"
    SMOOTHED_WASSERSTEIN = "SMOOTHED_WASSERSTEIN"


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel ``exp(-|a - b|^2 / gamma^2)``."""

    gamma: float
    kind: str = "GAUSSIAN"

    def __post_init__(self):
        if self.kind != "GAUSSIAN":
            raise ValueError(f"unsupported kernel {self.kind!r}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def __call__(self, a, b) -> np.ndarray:
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        return np.exp(-(d * d).sum(axis=-1) / self.gamma**2)


@dataclass(frozen=True)
class MultivariateStatistic:
    kind: MultiKind
    value: float
    n: int
    m: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("statistic value must be finite")


def euclidean(a, b) -> np.ndarray:
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return np.sqrt((d * d).sum(axis=-1))


def _checked(x, y):
    xs, ys = as_sample(x), as_sample(y)
    if xs.dim != ys.dim:
        raise ValueError(f"dimension mismatch: {xs.dim} vs {ys.dim}")
    return xs.points, ys.points


def pairwise(fn: DistanceFn, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return fn(a[:, None, :], b[None, :, :])


def _mean(mat: np.ndarray) -> float:
    # fsum is order independent, so stat(x, y) == stat(y, x) bit for bit
    return math.fsum(mat.ravel()) / mat.size


def _energy_form(cross: float, within_x: float, within_y: float) -> float:
    return 2.0 * cross - (within_x + within_y)


def generalized_energy_distance(x, y, d: DistanceFn = euclidean) -> MultivariateStatistic:
    """V-statistic ``2 mean d(X, Y) - mean d(X, X') - mean d(Y, Y')`` for any distance ``d``."""
    X, Y = _checked(x, y)
    value = _energy_form(_mean(pairwise(d, X, Y)), _mean(pairwise(d, X, X)), _mean(pairwise(d, Y, Y)))
    return MultivariateStatistic(MultiKind.ENERGY_DISTANCE, value, len(X), len(Y),
                                 {"distance": getattr(d, "__name__", repr(d))})


def energy_distance(x, y) -> MultivariateStatistic:
    stat = generalized_energy_distance(x, y, euclidean)
    return MultivariateStatistic(MultiKind.ENERGY_DISTANCE, stat.value, stat.n, stat.m, {"distance": "euclidean"})


def median_heuristic(x, y=None) -> float:
    """Median pairwise Euclidean distance over the pooled sample (distinct pairs)."""
    Z = as_sample(x).points if y is None else np.vstack(_checked(x, y))
    iu = np.triu_indices(len(Z), k=1)
    dists = pairwise(euclidean, Z, Z)[iu]
    med = float(np.median(dists)) if dists.size else 0.0
    return med if med > 0 else 1.0


def mmd2(x, y, k: KernelSpec | None = None, unbiased: bool = False) -> MultivariateStatistic:
    """Plug-in squared MMD.

    The default V-statistic keeps the diagonal ``k(X_i, X_i)`` terms and is
    nonnegative; ``unbiased=True`` drops them and may go slightly negative.
    Without ``k`` the Gaussian bandwidth comes from the median heuristic.
    """
    X, Y = _checked(x, y)
    if k is None:
        k = KernelSpec(median_heuristic(X, Y))
    kxx, kyy, kxy = pairwise(k, X, X), pairwise(k, Y, Y), pairwise(k, X, Y)
    n, m = len(X), len(Y)
    if unbiased:
        if n < 2 or m < 2:
            raise ValueError("unbiased MMD needs at least two points per sample")
        within_x = (math.fsum(kxx.ravel()) - n) / (n * (n - 1))
        within_y = (math.fsum(kyy.ravel()) - m) / (m * (m - 1))
    else:
        within_x, within_y = _mean(kxx), _mean(kyy)
    value = (within_x + within_y) - 2.0 * _mean(kxy)
    return MultivariateStatistic(MultiKind.MMD2_U, value, n, m,
                                 {"kernel": k.kind, "gamma": k.gamma, "unbiased": unbiased})


def kernel_to_distance(k: KernelSpec) -> DistanceFn:
    """Distance ``(k(a,a) + k(b,b))/2 - k(a,b)``; for the Gaussian kernel ``1 - k(a,b)``."""

    def distance(a, b):
        return 0.5 * (k(a, a) + k(b, b)) - k(a, b)

    distance.__name__ = f"kernel_distance(gamma={k.gamma!r})"
    return distance


def smoothed_wasserstein_statistic(x, y, p: float = 1.0, lam: float = 0.0) -> MultivariateStatistic:
    """``2 S(x, y) - S(x, x) - S(y, y)`` with ``S`` the Sinkhorn transport cost.

    At ``lam = 0`` and ``p = 1`` this is the energy distance.
    """
    X, Y = _checked(x, y)
    value = _energy_form(sinkhorn_divergence(X, Y, p, lam),
                         sinkhorn_divergence(X, X, p, lam),
                         sinkhorn_divergence(Y, Y, p, lam))
    return MultivariateStatistic(MultiKind.SMOOTHED_WASSERSTEIN, value, len(X), len(Y),
                                 {"p": p, "lambda": lam})


# --- batched evaluation over relabellings -------------------------------------

def quadratic_batch(pooled_matrix: np.ndarray, labels: np.ndarray,
                    weights: tuple[float, float, float]) -> np.ndarray:
    """``a*S_xx/n^2 + b*S_yy/m^2 + c*S_xy/(nm)`` for each labelling row.

    ``S_xx``, ``S_yy`` and ``S_xy`` are block sums of a pooled pairwise
    matrix; energy distance uses weights (-1, -1, 2) on distances and MMD
    (1, 1, -2) on kernel values.
    """
    labels = np.atleast_2d(np.asarray(labels, dtype=bool))
    zx = labels.astype(float)
    zy = 1.0 - zx
    n = zx[0].sum()
    m = zy[0].sum()
    dx = zx @ pooled_matrix
    dy = zy @ pooled_matrix
    sxx = (dx * zx).sum(axis=1)
    syy = (dy * zy).sum(axis=1)
    sxy = (dx * zy).sum(axis=1)
    a, b, c = weights
    return a * sxx / n**2 + b * syy / m**2 + c * sxy / (n * m)
