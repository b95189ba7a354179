import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from twosample.multivariate import (
    KernelSpec,
    energy_distance,
    generalized_energy_distance,
    kernel_to_distance,
    median_heuristic,
    mmd2,
    quadratic_batch,
    smoothed_wasserstein_statistic,
)
from twosample.registry import NAMES, get_statistic


def point_clouds(dim=2, max_size=8):
    elems = st.floats(min_value=-10, max_value=10, allow_nan=False)
    return st.integers(1, max_size).flatmap(lambda n: arrays(float, (n, dim), elements=elems))


def loop_energy(x, y):
    """Energy distance with explicit double loops."""
    x, y = np.atleast_2d(x), np.atleast_2d(y)
    d = lambda a, b: math.dist(a, b)  # noqa: E731
    cross = sum(d(a, b) for a in x for b in y) / (len(x) * len(y))
    xx = sum(d(a, b) for a in x for b in x) / len(x) ** 2
    yy = sum(d(a, b) for a in y for b in y) / len(y) ** 2
    return 2 * cross - xx - yy


def random_rotation(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


class TestEnergy:
    def test_example(self):
        assert energy_distance([0, 2], [1, 3]).value == pytest.approx(1.0)

    def test_identical_samples(self):
        assert energy_distance([[0, 1], [2, 2]], [[0, 1], [2, 2]]).value == 0.0

    def test_against_loops(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n, m, d = rng.integers(1, 7), rng.integers(1, 7), rng.integers(1, 4)
            x, y = rng.normal(size=(n, d)), rng.normal(size=(m, d))
            assert energy_distance(x, y).value == pytest.approx(loop_energy(x, y), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            energy_distance([[0, 0]], [[0, 0, 0]])

    @given(point_clouds(), point_clouds())
    def test_exact_symmetry(self, x, y):
        assert energy_distance(x, y).value == energy_distance(y, x).value

    @given(point_clouds(), point_clouds())
    def test_nonnegative(self, x, y):
        assert energy_distance(x, y).value >= -1e-9

    @settings(max_examples=30)
    @given(point_clouds(3), point_clouds(3), st.integers(0, 2**32 - 1))
    def test_rigid_motion_invariance(self, x, y, seed):
        rng = np.random.default_rng(seed)
        R, t = random_rotation(rng, 3), rng.normal(size=3)
        base = energy_distance(x, y).value
        moved = energy_distance(x @ R.T + t, y @ R.T + t).value
        assert moved == pytest.approx(base, abs=1e-8)


class TestMMD:
    def test_gaussian_kernel(self):
        k = KernelSpec(2.0)
        assert k([0, 0], [0, 2]) == pytest.approx(math.exp(-1))
        with pytest.raises(ValueError):
            KernelSpec(0.0)
        with pytest.raises(ValueError):
            KernelSpec(1.0, "LAPLACE")

    def test_closed_form_two_points(self):
        k = KernelSpec(1.0)
        # V-statistic: (1 + 1) - 2 e^{-1} for single points at distance 1
        assert mmd2([0.0], [1.0], k).value == pytest.approx(2 - 2 * math.exp(-1))

    def test_identical_samples(self):
        x = np.random.default_rng(1).normal(size=(6, 2))
        assert mmd2(x, x, KernelSpec(1.0)).value == pytest.approx(0.0, abs=1e-15)

    def test_unbiased_toggle(self):
        rng = np.random.default_rng(2)
        x, y = rng.normal(size=(5, 2)), rng.normal(size=(4, 2))
        k = KernelSpec(1.3)
        kxx = np.array([[k(a, b) for b in x] for a in x])
        kyy = np.array([[k(a, b) for b in y] for a in y])
        kxy = np.array([[k(a, b) for b in y] for a in x])
        want = ((kxx.sum() - 5) / 20 + (kyy.sum() - 4) / 12 - 2 * kxy.mean())
        assert mmd2(x, y, k, unbiased=True).value == pytest.approx(want)
        with pytest.raises(ValueError):
            mmd2([[0.0]], [[1.0], [2.0]], k, unbiased=True)

    def test_median_heuristic(self):
        assert median_heuristic([[0.0], [1.0], [3.0]]) == pytest.approx(2.0)
        assert median_heuristic([0.0], [1.0]) == pytest.approx(1.0)
        assert median_heuristic([[5.0], [5.0]]) == 1.0  # degenerate sample falls back to 1

    def test_default_bandwidth_is_pooled_median(self):
        rng = np.random.default_rng(3)
        x, y = rng.normal(size=(5, 2)), rng.normal(size=(7, 2))
        gamma = median_heuristic(x, y)
        assert mmd2(x, y).value == mmd2(x, y, KernelSpec(gamma)).value

    @given(point_clouds(), point_clouds(), st.floats(min_value=0.1, max_value=10))
    def test_exact_symmetry(self, x, y, gamma):
        k = KernelSpec(gamma)
        assert mmd2(x, y, k).value == mmd2(y, x, k).value

    @settings(max_examples=30)
    @given(point_clouds(3), point_clouds(3), st.integers(0, 2**32 - 1))
    def test_rigid_motion_invariance(self, x, y, seed):
        rng = np.random.default_rng(seed)
        R, t = random_rotation(rng, 3), rng.normal(size=3)
        k = KernelSpec(2.0)
        base = mmd2(x, y, k).value
        assert mmd2(x @ R.T + t, y @ R.T + t, k).value == pytest.approx(base, abs=1e-10)
        # the median heuristic is itself invariant, so the default kernel is too
        assert mmd2(x @ R.T + t, y @ R.T + t).value == pytest.approx(mmd2(x, y).value, abs=1e-10)


class TestBridges:
    @given(point_clouds(), point_clouds(), st.floats(min_value=0.1, max_value=10))
    def test_kernel_distance_energy_equals_mmd(self, x, y, gamma):
        k = KernelSpec(gamma)
        ged = generalized_energy_distance(x, y, kernel_to_distance(k)).value
        assert ged == pytest.approx(mmd2(x, y, k).value, abs=1e-12)

    def test_kernel_distance_formula(self):
        d = kernel_to_distance(KernelSpec(1.0))
        assert d(np.array([0.0]), np.array([1.0])) == pytest.approx(1 - math.exp(-1))

    def test_smoothed_wasserstein_at_lambda_zero_is_energy(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            x, y = rng.normal(size=(rng.integers(1, 6), 2)), rng.normal(size=(rng.integers(1, 6), 2))
            sw = smoothed_wasserstein_statistic(x, y, 1, 0.0).value
            assert sw == pytest.approx(energy_distance(x, y).value, abs=1e-12)

    def test_smoothed_wasserstein_example(self):
        assert smoothed_wasserstein_statistic([0, 2], [1, 3], 1, 0.0).value == pytest.approx(1.0)

    def test_smoothed_wasserstein_large_lambda_approaches_wasserstein_combination(self):
        x, y = np.array([[0.0], [2.0]]), np.array([[1.0], [3.0]])
        # S(x, x) -> 0 and S(x, y) -> W_1 = 1 as lambda grows
        assert smoothed_wasserstein_statistic(x, y, 1, 200.0).value == pytest.approx(2.0, abs=1e-3)


class TestQuadraticBatch:
    @pytest.mark.parametrize("name", ["energy", "mmd", "smoothed_wasserstein"])
    def test_matches_direct(self, name):
        rng = np.random.default_rng(5)
        Z = rng.normal(size=(9, 2))
        stat = get_statistic(name, p=1.0, lam=0.0, gamma=1.5 if name == "mmd" else None)
        relabel = stat.relabeller(Z)
        labels = np.zeros((12, 9), dtype=bool)
        for r in range(12):
            labels[r, rng.choice(9, 4, replace=False)] = True
        got = relabel(labels)
        for r in range(12):
            assert got[r] == pytest.approx(stat(Z[labels[r]], Z[~labels[r]]), abs=1e-12)

    def test_weights(self):
        D = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert quadratic_batch(D, [[True, False]], (-1, -1, 2)).tolist() == [2.0]


class TestRegistry:
    def test_names(self):
        assert set(NAMES) == {"ks", "pp_l2", "qq_l2", "qq_linf", "wasserstein", "wasserstein_inf",
                              "odc_w2", "odc_linf", "energy", "mmd", "smoothed_wasserstein"}

    def test_errors(self):
        with pytest.raises(ValueError, match="unknown statistic"):
            get_statistic("bogus")
        with pytest.raises(ValueError):
            get_statistic("wasserstein", p=0.5)
        with pytest.raises(ValueError):
            get_statistic("smoothed_wasserstein", lam=-1)

    def test_scaled_and_raw(self):
        raw, scaled = get_statistic("ks").evaluate([0, 2], [1, 3])
        assert (raw, scaled) == (0.5, pytest.approx(0.5))

    def test_no_fast_path_for_entropic(self):
        assert get_statistic("smoothed_wasserstein", lam=1.0).relabeller(np.zeros((3, 1)) + [[0], [1], [2]]) is None
