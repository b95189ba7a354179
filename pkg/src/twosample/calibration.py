"""Null distributions: permutation p-values, Brownian-bridge tables and reports."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .empirical import as_sample
from .generators import draw, map_trials, trial_rng
from .registry import Statistic
from .univariate import StatKind, UnivariateStatistic, compute, ks_statistic

MIN_RESAMPLES = 100
MIN_GRID = 1000
DEFAULT_GRID = 2048
BRIDGE_BLOCK = 1000
SCHEMA_VERSION = "v1"


class NullKind(str, enum.Enum):
    PERMUTATION = "PERMUTATION"
    BRIDGE_SUP = "BRIDGE_SUP"
    BRIDGE_L2 = "BRIDGE_L2"
    ODC_BRIDGE_L2 = "ODC_BRIDGE_L2"
    ODC_BRIDGE_SUP = "ODC_BRIDGE_SUP"


# which simulated functional calibrates each distribution-free statistic
_ASYMPTOTIC = {
    StatKind.KS: (NullKind.BRIDGE_SUP, NullKind.BRIDGE_SUP),
    StatKind.ODC_LINF: (NullKind.BRIDGE_SUP, NullKind.ODC_BRIDGE_SUP),
    StatKind.ODC_W2: (NullKind.BRIDGE_L2, NullKind.ODC_BRIDGE_L2),
}


@dataclass(frozen=True)
class NullModel:
    kind: NullKind
    num_resamples_or_paths: int
    rng_seed: int
    grid_size: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", NullKind(self.kind))
        if self.num_resamples_or_paths < MIN_RESAMPLES:
            raise ValueError("insufficient resamples")
        if self.kind is not NullKind.PERMUTATION and (self.grid_size or 0) < MIN_GRID:
            raise ValueError(f"bridge grid must have at least {MIN_GRID} steps")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "num_resamples_or_paths": self.num_resamples_or_paths,
                "rng_seed": self.rng_seed, "grid_size": self.grid_size}


@dataclass(frozen=True)
class TestReport:
    statistic: str
    params: dict
    raw_value: float
    scaled_value: float
    p_value: float
    alpha: float
    reject: bool
    calibration: dict
    sample_sizes: tuple[int, int]
    config: dict = field(default_factory=dict)
    schema: str = SCHEMA_VERSION

    __test__ = False  # not a pytest class

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(self.sample_sizes))
        if not 0 < self.p_value <= 1:
            raise ValueError("p-value must lie in (0, 1]")
        if self.reject != (self.p_value <= self.alpha):
            raise ValueError("reject must equal (p_value <= alpha)")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["sample_sizes"] = list(self.sample_sizes)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TestReport":
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        return cls(**data)


# --- permutation ----------------------------------------------------------------

def permutation_labels(N: int, n: int, B: int, seed: int) -> np.ndarray:
    """``B`` uniformly random splits of ``N`` pooled points into groups of size n and N - n."""
    rng = np.random.default_rng(seed)
    picks = np.argsort(rng.random((B, N)), axis=1)[:, :n]
    labels = np.zeros((B, N), dtype=bool)
    np.put_along_axis(labels, picks, True, axis=1)
    return labels


def _scalar(value) -> float:
    return float(getattr(value, "value", value))


def permutation_null(pooled, n: int, m: int, statistic: Statistic | Callable, B: int,
                     seed: int) -> tuple[float, np.ndarray]:
    """Observed statistic and its values under ``B`` random relabellings.

    The first ``n`` rows of ``pooled`` are the X sample.
    """
    if B < MIN_RESAMPLES:
        raise ValueError("insufficient resamples")
    Z = as_sample(pooled).points
    if Z.shape[0] != n + m:
        raise ValueError(f"pooled sample has {Z.shape[0]} points, expected {n + m}")
    observed_labels = np.zeros((1, n + m), dtype=bool)
    observed_labels[0, :n] = True
    labels = permutation_labels(n + m, n, B, seed)
    fast = statistic.relabeller(Z) if isinstance(statistic, Statistic) else None
    if fast is not None:
        return float(fast(observed_labels)[0]), np.asarray(fast(labels), dtype=float)
    observed = _scalar(statistic(Z[:n], Z[n:]))
    null = np.array([_scalar(statistic(Z[row], Z[~row])) for row in labels])
    return observed, null


def pvalue_from_null(observed: float, null: np.ndarray) -> float:
    """``(1 + #{T_b >= T_obs}) / (B + 1)``."""
    # relative slack so that relabellings reproducing T_obs up to round-off count as ties
    tol = 1e-12 * max(1.0, abs(observed))
    return (1 + int(np.count_nonzero(null >= observed - tol))) / (null.size + 1)


def permutation_pvalue(pooled, n: int, m: int, statistic: Statistic | Callable, B: int,
                       seed: int) -> float:
    observed, null = permutation_null(pooled, n, m, statistic, B, seed)
    return pvalue_from_null(observed, null)


# --- Brownian bridge functionals -------------------------------------------------

@dataclass(frozen=True)
class QuantileTable:
    """Sorted simulated values of a bridge functional."""

    kind: NullKind
    values: np.ndarray
    grid_size: int | None = None
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", NullKind(self.kind))
        vals = np.sort(np.asarray(self.values, dtype=float))
        if vals.size == 0:
            raise ValueError("empty quantile table")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def size(self) -> int:
        return self.values.size

    def quantile(self, alpha: float) -> float:
        if not 0 < alpha <= 1:
            raise ValueError("quantile level out of range")
        idx = min(self.size - 1, max(0, math.ceil(alpha * self.size) - 1))
        return float(self.values[idx])

    def critical_value(self, alpha: float) -> float:
        return self.quantile(1.0 - alpha)

    def tail_fraction(self, value: float) -> float:
        """Add-one estimate of ``P(functional >= value)``."""
        count = self.size - int(np.searchsorted(self.values, value, side="left"))
        return (1 + count) / (self.size + 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# kind={self.kind.value} paths={self.size} grid={self.grid_size} seed={self.seed}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["alpha", "quantile"])
        N = self.size
        for i, v in enumerate(self.values.tolist()):
            writer.writerow([repr((i + 1) / N), repr(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, kind: NullKind | str | None = None) -> "QuantileTable":
        meta: dict[str, str] = {}
        rows = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if line.startswith("#"):
                meta.update(tok.split("=", 1) for tok in line[1:].split() if "=" in tok)
                continue
            if not line.strip():
                continue
            if not rows and line.replace(" ", "") == "alpha,quantile":
                rows.append(None)
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected alpha,quantile")
            try:
                rows.append(float(parts[1]))
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric quantile {parts[1]!r}") from None
        values = [r for r in rows if r is not None]
        kind = kind or meta.get("kind")
        if kind is None:
            raise ValueError("table kind unknown; pass kind explicitly")
        grid = meta.get("grid")
        seed = meta.get("seed")
        return cls(NullKind(kind), np.array(values),
                   int(grid) if grid not in (None, "None") else None,
                   int(seed) if seed not in (None, "None") else None)


def bridge_paths(num_paths: int, grid_size: int, rng: np.random.Generator) -> np.ndarray:
    """Brownian bridge on ``k/grid_size``, k = 0..grid_size, as ``W(t) - t W(1)``."""
    steps = rng.standard_normal((num_paths, grid_size)) / math.sqrt(grid_size)
    W = np.zeros((num_paths, grid_size + 1))
    np.cumsum(steps, axis=1, out=W[:, 1:])
    t = np.arange(grid_size + 1) / grid_size
    return W - t * W[:, -1:]


def _bridge_block(block: int, kind: NullKind, count: int, grid_size: int, seed: int) -> np.ndarray:
    B = bridge_paths(count, grid_size, trial_rng(seed, block))
    if kind is NullKind.BRIDGE_SUP:
        return np.abs(B).max(axis=1)
    sq = B * B
    # trapezoid rule; endpoints are zero for a bridge
    return (sq[:, 1:-1].sum(axis=1) + 0.5 * (sq[:, 0] + sq[:, -1])) / grid_size


def simulate_bridge_functional(kind: NullKind | str, num_paths: int, grid_size: int = DEFAULT_GRID,
                               seed: int = 0, jobs: int | None = None) -> QuantileTable:
    """Monte Carlo table of ``sup|B|`` (BRIDGE_SUP) or ``int B^2`` (BRIDGE_L2).

    Paths are simulated in fixed blocks of 1000, each with its own stream,
    so the table does not depend on ``jobs``.
    """
    kind = NullKind(kind)
    if kind not in (NullKind.BRIDGE_SUP, NullKind.BRIDGE_L2):
        raise ValueError("bridge functional must be BRIDGE_SUP or BRIDGE_L2")
    NullModel(kind, num_paths, seed, grid_size)  # validates sizes
    blocks = [(b, min(BRIDGE_BLOCK, num_paths - b * BRIDGE_BLOCK))
              for b in range(math.ceil(num_paths / BRIDGE_BLOCK))]
    results = map_trials(partial(_bridge_block_indexed, blocks=blocks, kind=kind,
                                 grid_size=grid_size, seed=seed),
                         range(len(blocks)), jobs)
    return QuantileTable(kind, np.concatenate(results), grid_size, seed)


def _bridge_block_indexed(i: int, blocks, kind, grid_size, seed):
    block, count = blocks[i]
    return _bridge_block(block, kind, count, grid_size, seed)


def table_kind_for(kind: StatKind | str) -> NullKind:
    kind = StatKind(kind)
    if kind not in _ASYMPTOTIC:
        raise ValueError(f"asymptotic calibration unavailable for {kind.value}; use permutation")
    return _ASYMPTOTIC[kind][0]


def null_label_for(kind: StatKind | str) -> NullKind:
    return _ASYMPTOTIC[StatKind(kind)][1]


def asymptotic_pvalue(stat: UnivariateStatistic, table: QuantileTable) -> float:
    """Add-one tail fraction of the scaled statistic in a bridge-functional table."""
    needed = table_kind_for(stat.kind)
    if table.kind is not needed:
        raise ValueError(f"{stat.kind.value} needs a {needed.value} table, got {table.kind.value}")
    return table.tail_fraction(stat.value)


# --- distribution-freeness --------------------------------------------------------

def _null_trial(trial: int, kind: StatKind, generator: str, gen_index: int, n: int, m: int,
                seed: int, p: float) -> float:
    rng = trial_rng(seed, gen_index, trial)
    x = draw(generator, rng, n)
    y = draw(generator, rng, m)
    return compute(kind, x, y, p).value


def null_statistics(kind: StatKind | str, generator: str, n: int, m: int, trials: int, seed: int,
                    gen_index: int = 0, p: float = 1.0, jobs: int | None = None) -> np.ndarray:
    """Scaled statistic over ``trials`` null draws with both samples from ``generator``."""
    fn = partial(_null_trial, kind=StatKind(kind), generator=generator, gen_index=gen_index,
                 n=n, m=m, seed=seed, p=p)
    return np.array(map_trials(fn, range(trials), jobs))


def distribution_free_check(statistic_kind: StatKind | str, generator_list: Sequence[str], n: int,
                            m: int, trials: int, seed: int, p: float = 1.0,
                            jobs: int | None = None) -> float:
    """Largest KS distance between the null laws of a statistic under different generators.

    Each generator gets independent streams, so this compares laws rather
    than coupled paths.
    """
    if len(generator_list) < 2:
        raise ValueError("need at least two generators")
    nulls = [null_statistics(statistic_kind, g, n, m, trials, seed, gen_index=i, p=p, jobs=jobs)
             for i, g in enumerate(generator_list)]
    worst = 0.0
    for i in range(len(nulls)):
        for j in range(i + 1, len(nulls)):
            worst = max(worst, ks_statistic(nulls[i], nulls[j]).raw_value)
    return worst
