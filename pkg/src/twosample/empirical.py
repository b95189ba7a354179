"""Empirical distributions, step functions and the ODC/ROC curves built from them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class Sample:
    """A finite set of ``n`` points in ``dim`` dimensions, stored as an (n, dim) array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError("sample must be a 1-D or 2-D array")
        if pts.shape[0] == 0:
            raise ValueError("empty sample")
        if pts.shape[1] == 0:
            raise ValueError("points must have at least one coordinate")
        if not np.all(np.isfinite(pts)):
            raise ValueError("sample contains non-finite values")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.size

    def values_1d(self) -> np.ndarray:
        if self.dim != 1:
            raise ValueError(f"expected a 1-D sample, got dimension {self.dim}")
        return self.points[:, 0]


def as_sample(data) -> Sample:
    if isinstance(data, Sample):
        return data
    return Sample(np.asarray(data, dtype=float))


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted 1-D sample with its step CDF and left-continuous quantile function."""

    sorted_values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.sorted_values, dtype=float).ravel()
        if vals.size == 0:
            raise ValueError("empty sample")
        if np.any(np.diff(vals) < 0):
            raise ValueError("sorted_values must be nondecreasing")
        vals.setflags(write=False)
        object.__setattr__(self, "sorted_values", vals)

    @property
    def n(self) -> int:
        return self.sorted_values.size

    def cdf(self, x):
        return cdf(self, x)

    def quantile(self, t):
        return quantile(self, t)


def build_empirical(sample_1d) -> EmpiricalDistribution:
    if isinstance(sample_1d, Sample):
        vals = sample_1d.values_1d()
    else:
        vals = np.asarray(sample_1d, dtype=float).ravel()
    if vals.size == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(vals)):
        raise ValueError("sample contains non-finite values")
    return EmpiricalDistribution(np.sort(vals, kind="stable"))


def cdf(e: EmpiricalDistribution, x):
    """Fraction of sample values ``<= x``; vectorised over ``x``."""
    counts = np.searchsorted(e.sorted_values, x, side="right")
    out = counts / e.n
    return float(out) if np.ndim(out) == 0 else out


def quantile(e: EmpiricalDistribution, t):
    """Generalised inverse ``inf{x : F_n(x) >= t}`` for ``t`` in (0, 1]."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(~((t_arr > 0) & (t_arr <= 1))):
        raise ValueError("quantile level out of range")
    # smallest k with k/n >= t, using the same float levels that cdf() returns
    levels = np.arange(1, e.n + 1) / e.n
    idx = np.minimum(np.searchsorted(levels, t_arr, side="left"), e.n - 1)
    out = e.sorted_values[idx]
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function on [0, 1].

    ``breakpoints`` has one more entry than ``values``; piece ``k`` covers
    ``[breakpoints[k], breakpoints[k+1])`` (the last piece also owns t = 1).
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.array(self.breakpoints, dtype=float).ravel()
        vals = np.array(self.values, dtype=float).ravel()
        if bp.size != vals.size + 1:
            raise ValueError("need exactly one more breakpoint than values")
        if vals.size == 0:
            raise ValueError("step function needs at least one piece")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        bp.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def lo(self) -> np.ndarray:
        return self.breakpoints[:-1]

    @property
    def hi(self) -> np.ndarray:
        return self.breakpoints[1:]

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t_arr, side="right") - 1
        idx = np.clip(idx, 0, self.values.size - 1)
        out = self.values[idx]
        return float(out) if np.ndim(out) == 0 else out

    def integral(self) -> float:
        return math.fsum(self.values * np.diff(self.breakpoints))

    def pieces(self) -> Iterable[tuple[float, float, float]]:
        return zip(self.lo.tolist(), self.hi.tolist(), self.values.tolist())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t_lo", "t_hi", "value"])
        for lo, hi, v in self.pieces():
            writer.writerow([repr(lo), repr(hi), repr(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "StepFunction":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["t_lo", "t_hi", "value"]:
            raise ValueError("expected header t_lo,t_hi,value")
        body = [r for r in rows[1:] if r]
        lo = [float(r[0]) for r in body]
        hi = [float(r[1]) for r in body]
        for k in range(len(body) - 1):
            if hi[k] != lo[k + 1]:
                raise ValueError(f"pieces are not contiguous at row {k + 2}")
        return cls(np.array(lo + hi[-1:]), np.array([float(r[2]) for r in body]))


def odc_curve(x_emp: EmpiricalDistribution, y_emp: EmpiricalDistribution) -> StepFunction:
    """Empirical ordinal dominance curve ``t -> G_m(F_n^{-1}(t))``.

    On ((k-1)/n, k/n] the value is G_m(X_(k)); ties between the samples
    count as ``Y <= X``.
    """
    n = x_emp.n
    values = cdf(y_emp, x_emp.sorted_values)
    return StepFunction(np.arange(n + 1) / n, np.atleast_1d(values))


def roc_curve(x_emp: EmpiricalDistribution, y_emp: EmpiricalDistribution) -> StepFunction:
    """Empirical ROC curve ``t -> 1 - F_n(G_m^{-1}(1 - t))``.

    With s = 1 - t in ((k-1)/m, k/m] the value is 1 - F_n(Y_(k)), so piece
    [j/m, (j+1)/m) carries 1 - F_n(Y_(m-j)).
    """
    m = y_emp.n
    ys_desc = y_emp.sorted_values[::-1]
    values = 1.0 - np.atleast_1d(cdf(x_emp, ys_desc))
    return StepFunction(np.arange(m + 1) / m, values)


def auc(roc: StepFunction) -> float:
    """Exact area under a step curve."""
    return roc.integral()


def pp_points(x_emp: EmpiricalDistribution, y_emp: EmpiricalDistribution) -> np.ndarray:
    """Rows ``(z, F_n(z), G_m(z))`` for every distinct pooled value ``z``."""
    z = np.unique(np.concatenate([x_emp.sorted_values, y_emp.sorted_values]))
    return np.column_stack([z, cdf(x_emp, z), cdf(y_emp, z)])


def quantile_refinement(n: int, m: int) -> np.ndarray:
    """Sorted union of {k/n} and {k/m}, k = 0..n (resp. m), as exact fractions mapped to floats."""
    # integer grid on the common denominator n*m avoids duplicate near-equal floats
    grid = np.union1d(np.arange(n + 1) * m, np.arange(m + 1) * n)
    return grid / (n * m)


def qq_pieces(x_emp: EmpiricalDistribution, y_emp: EmpiricalDistribution) -> np.ndarray:
    """Rows ``(t_lo, t_hi, F_n^{-1}, G_m^{-1})`` over the common refinement.

    Both quantile functions are constant on each refinement interval.
    """
    grid = quantile_refinement(x_emp.n, y_emp.n)
    lo, hi = grid[:-1], grid[1:]
    mid = 0.5 * (lo + hi)
    return np.column_stack([lo, hi, quantile(x_emp, mid), quantile(y_emp, mid)])

