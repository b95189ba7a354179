"""Named statistics with a uniform (raw, scaled) interface and fast relabelling paths."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import multivariate as mv
from . import univariate as uv
from .empirical import as_sample

UNIVARIATE_NAMES = {
    "ks": uv.StatKind.KS,
    "pp_l2": uv.StatKind.PP_L2,
    "qq_l2": uv.StatKind.QQ_L2,
    "qq_linf": uv.StatKind.QQ_LINF,
    "wasserstein": uv.StatKind.WASSERSTEIN_P,
    "wasserstein_inf": uv.StatKind.WASSERSTEIN_INF,
    "odc_w2": uv.StatKind.ODC_W2,
    "odc_linf": uv.StatKind.ODC_LINF,
}
MULTIVARIATE_NAMES = ("energy", "mmd", "smoothed_wasserstein")
NAMES = tuple(UNIVARIATE_NAMES) + MULTIVARIATE_NAMES


@dataclass(frozen=True)
class Statistic:
    """A two-sample statistic selected by name, with its parameters bound."""

    name: str
    p: float = 1.0
    lam: float = 0.0
    gamma: float | None = None

    def __post_init__(self):
        if self.name not in NAMES:
            raise ValueError(f"unknown statistic {self.name!r}; choose from {', '.join(NAMES)}")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @property
    def univariate(self) -> bool:
        return self.name in UNIVARIATE_NAMES

    @property
    def kind(self) -> str:
        if self.univariate:
            return UNIVARIATE_NAMES[self.name].value
        return {"energy": mv.MultiKind.ENERGY_DISTANCE, "mmd": mv.MultiKind.MMD2_U,
                "smoothed_wasserstein": mv.MultiKind.SMOOTHED_WASSERSTEIN}[self.name].value

    def params(self) -> dict:
        out: dict = {}
        if self.name in ("wasserstein", "smoothed_wasserstein"):
            out["p"] = self.p
        if self.name == "smoothed_wasserstein":
            out["lambda"] = self.lam
        if self.name == "mmd":
            out["gamma"] = self.gamma
        if self.name == "pp_l2":
            out["domain"] = "pooled_range"  # integral over [min, max] of the pooled sample
        return out

    def evaluate(self, x, y) -> tuple[float, float]:
        """Return ``(raw, scaled)``; multivariate statistics carry no scale factor."""
        if self.univariate:
            s = uv.compute(UNIVARIATE_NAMES[self.name], x, y, self.p)
            return s.raw_value, s.value
        if self.name == "energy":
            v = mv.energy_distance(x, y).value
        elif self.name == "mmd":
            k = mv.KernelSpec(self.gamma) if self.gamma else None
            v = mv.mmd2(x, y, k).value
        else:
            v = mv.smoothed_wasserstein_statistic(x, y, self.p, self.lam).value
        return v, v

    def __call__(self, x, y) -> float:
        return self.evaluate(x, y)[1]

    def relabeller(self, pooled) -> Callable[[np.ndarray], np.ndarray] | None:
        """Vectorised evaluator over boolean label rows (True = X), or None.

        Label columns follow the row order of ``pooled``.
        """
        Z = as_sample(pooled).points
        if self.univariate:
            if Z.shape[1] != 1:
                raise ValueError("univariate statistic needs 1-D samples")
            order = np.argsort(Z[:, 0], kind="stable")
            z_sorted = Z[order, 0]
            kind = UNIVARIATE_NAMES[self.name]
            return lambda labels: uv.batch_statistic(kind, z_sorted, np.atleast_2d(labels)[:, order], self.p)
        if self.name == "energy":
            D = mv.pairwise(mv.euclidean, Z, Z)
            return lambda labels: mv.quadratic_batch(D, labels, (-1.0, -1.0, 2.0))
        if self.name == "mmd":
            # the default bandwidth depends only on the pooled sample, so it is relabelling invariant
            gamma = self.gamma or mv.median_heuristic(Z)
            K = mv.pairwise(mv.KernelSpec(gamma), Z, Z)
            return lambda labels: mv.quadratic_batch(K, labels, (1.0, 1.0, -2.0))
        if self.name == "smoothed_wasserstein" and self.lam == 0:
            D = mv.pairwise(mv.euclidean, Z, Z) ** self.p
            return lambda labels: mv.quadratic_batch(D, labels, (-1.0, -1.0, 2.0))
        return None


def get_statistic(name: str, p: float = 1.0, lam: float = 0.0, gamma: float | None = None) -> Statistic:
    return Statistic(name.lower(), float(p), float(lam), gamma)
