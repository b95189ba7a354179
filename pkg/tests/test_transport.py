import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from twosample.transport import (
    CostMatrix,
    TransportationSimplex,
    TransportPlan,
    cost_matrix,
    exact_wasserstein_lp,
    sinkhorn,
    sinkhorn_divergence,
)


def vertex_enumeration(C):
    """Minimum of <T, C> over U_nm by visiting every basic feasible solution.

    A basis is a spanning tree on the n + m row/column nodes; the flow on a
    tree is forced by peeling leaves.
    """
    n, m = C.shape
    a, b = np.full(n, 1.0 / n), np.full(m, 1.0 / m)
    cells = [(i, j) for i in range(n) for j in range(m)]
    best = math.inf
    for basis in itertools.combinations(cells, n + m - 1):
        flow = _tree_flow(basis, a.copy(), b.copy(), n, m)
        if flow is not None:
            best = min(best, float((flow * C).sum()))
    return best


def _tree_flow(basis, a, b, n, m):
    remaining = set(basis)
    flow = np.zeros((n, m))
    while remaining:
        rows = {}
        cols = {}
        for i, j in remaining:
            rows.setdefault(i, []).append((i, j))
            cols.setdefault(j, []).append((i, j))
        leaf = next((c[0] for c in rows.values() if len(c) == 1), None)
        if leaf is not None:
            i, j = leaf
            x = a[i]
        else:
            leaf = next((c[0] for c in cols.values() if len(c) == 1), None)
            if leaf is None:
                return None  # contains a cycle
            i, j = leaf
            x = b[j]
        if x < -1e-12:
            return None
        flow[i, j] = x
        a[i] -= x
        b[j] -= x
        remaining.remove(leaf)
    if np.abs(a).max() > 1e-9 or np.abs(b).max() > 1e-9 or flow.min() < -1e-12:
        return None
    return flow


def linprog_oracle(C):
    n, m = C.shape
    A = np.zeros((n + m, n * m))
    for i in range(n):
        A[i, i * m:(i + 1) * m] = 1
    for j in range(m):
        A[n + j, j::m] = 1
    rhs = np.concatenate([np.full(n, 1 / n), np.full(m, 1 / m)])
    res = linprog(C.ravel(), A_eq=A, b_eq=rhs, bounds=(0, None), method="highs")
    return res.fun


class TestCostMatrix:
    def test_one_dimensional(self):
        assert cost_matrix([0, 2], [1, 3], 1).entries.tolist() == [[1, 3], [1, 1]]

    def test_two_dimensional_square(self):
        assert cost_matrix([[0, 0]], [[3, 4]], 2).entries.tolist() == [[25.0]]

    def test_validation(self):
        with pytest.raises(ValueError):
            CostMatrix([[-1.0]])
        with pytest.raises(ValueError):
            CostMatrix([[1.0]], p=0.5)
        with pytest.raises(ValueError, match="dimension mismatch"):
            cost_matrix([[0, 0]], [[0, 0, 0]])


class TestExactLP:
    def test_example(self):
        M = cost_matrix([0, 2], [1, 3])
        for method in ("simplex", "assignment", "auto"):
            opt, plan = exact_wasserstein_lp(M, method=method)
            assert opt == pytest.approx(1.0)
            assert plan.is_feasible()

    def test_single_point_versus_many(self):
        M = cost_matrix([0.0], [1.0, 2.0, 3.0])
        opt, plan = exact_wasserstein_lp(M)
        assert opt == pytest.approx(2.0)
        assert np.allclose(plan.coupling, 1 / 3)

    def test_against_vertex_enumeration(self):
        rng = np.random.default_rng(0)
        shapes = [(1, 1), (1, 4), (4, 1), (2, 2), (2, 3), (3, 2), (2, 4), (3, 3), (4, 2), (2, 5)]
        for n, m in shapes:
            for _ in range(4):
                C = rng.random((n, m))
                opt, plan = exact_wasserstein_lp(C, method="simplex")
                assert opt == pytest.approx(vertex_enumeration(C), abs=1e-12)
                assert plan.is_feasible()

    def test_against_linprog(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            n, m = rng.integers(1, 16, size=2)
            C = cost_matrix(rng.normal(size=(n, 2)), rng.normal(size=(m, 2)), rng.choice([1, 2])).entries
            opt, plan = exact_wasserstein_lp(C, method="simplex")
            assert opt == pytest.approx(linprog_oracle(C), abs=1e-9)
            assert plan.is_feasible()

    def test_assignment_agrees_with_simplex(self):
        rng = np.random.default_rng(2)
        for n in (1, 3, 8, 20):
            C = rng.random((n, n))
            a, _ = exact_wasserstein_lp(C, method="assignment")
            s, _ = exact_wasserstein_lp(C, method="simplex")
            assert a == pytest.approx(s, abs=1e-12)

    def test_degenerate_integer_costs(self):
        # many ties make degenerate pivots common
        rng = np.random.default_rng(3)
        for _ in range(30):
            n, m = rng.integers(2, 12, size=2)
            C = rng.integers(0, 3, size=(n, m)).astype(float)
            opt, _ = exact_wasserstein_lp(C, method="simplex")
            assert opt == pytest.approx(linprog_oracle(C), abs=1e-12)

    def test_bland_rule_from_the_start(self):
        rng = np.random.default_rng(4)
        C = rng.integers(0, 2, size=(9, 7)).astype(float)
        flow = TransportationSimplex(C, degenerate_limit=0).solve()
        assert (flow * C).sum() / 63 == pytest.approx(linprog_oracle(C), abs=1e-12)

    def test_integral_flows(self):
        flow = TransportationSimplex(np.random.default_rng(5).random((5, 7))).solve()
        assert flow.dtype.kind == "i"
        assert (flow.sum(axis=1) == 7).all() and (flow.sum(axis=0) == 5).all()

    def test_errors(self):
        with pytest.raises(ValueError):
            exact_wasserstein_lp(np.ones((2, 3)), method="assignment")
        with pytest.raises(ValueError):
            exact_wasserstein_lp(np.ones((2, 3)), n=3, m=2)
        with pytest.raises(ValueError):
            exact_wasserstein_lp(np.ones((2, 2)), method="magic")

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1),
           st.floats(min_value=0.01, max_value=100))
    def test_positive_scaling(self, n, m, seed, c):
        C = np.random.default_rng(seed).random((n, m))
        base, _ = exact_wasserstein_lp(C)
        scaled, _ = exact_wasserstein_lp(c * C)
        assert scaled == pytest.approx(c * base, rel=1e-9, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_optimum_below_any_feasible_plan(self, n, m, seed):
        rng = np.random.default_rng(seed)
        C = rng.random((n, m))
        opt, _ = exact_wasserstein_lp(C)
        assert opt <= C.mean() + 1e-12  # independent coupling is feasible
        assert opt >= C.min(axis=1).mean() - 1e-12


class TestSinkhorn:
    def test_lambda_zero_is_independent_coupling(self):
        M = cost_matrix([0, 2], [1, 3])
        sol = sinkhorn(M, 0.0)
        assert np.allclose(sol.plan.coupling, 0.25)
        assert sol.plan.cost(M) == pytest.approx(1.5)

    def test_single_cell(self):
        sol = sinkhorn(np.array([[7.0]]), 3.0)
        assert sol.plan.coupling.tolist() == [[1.0]]

    def test_antidiagonal_cost(self):
        M = np.array([[0.0, 1.0], [1.0, 0.0]])
        sol = sinkhorn(M, 10.0)
        assert sol.converged
        assert sol.plan.cost(M) < 0.05
        # closed form: off-diagonal mass e^-10 / (2 (1 + e^-10)) per cell
        assert sol.plan.coupling[0, 1] == pytest.approx(math.exp(-10) / (2 * (1 + math.exp(-10))), rel=1e-6)

    def test_example_divergence(self):
        assert sinkhorn_divergence([0, 2], [1, 3], 1, 50.0) == pytest.approx(1.0, abs=1e-6)

    def test_negative_lambda(self):
        with pytest.raises(ValueError, match="nonnegative"):
            sinkhorn(np.ones((2, 2)), -1.0)

    def test_log_domain_matches_plain_domain(self, monkeypatch):
        import twosample.transport as tr

        M = np.random.default_rng(6).random((5, 4))
        plain = sinkhorn(M, 20.0)
        monkeypatch.setattr(tr, "LOG_DOMAIN_THRESHOLD", 0.0)
        logd = sinkhorn(M, 20.0)
        assert np.allclose(plain.plan.coupling, logd.plan.coupling, atol=1e-10)
        big = sinkhorn(M, 400.0)
        assert big.converged and big.plan.is_feasible(1e-8)

    def test_scaling_form(self):
        rng = np.random.default_rng(7)
        M = rng.random((6, 4))
        for lam in (0.5, 5.0, 80.0):
            sol = sinkhorn(M, lam)
            rebuilt = sol.u[:, None] * np.exp(-lam * M) * sol.v[None, :]
            assert np.allclose(rebuilt, sol.plan.coupling, rtol=1e-8, atol=1e-15)

    def test_many_random_instances_converge(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            n, m = rng.integers(1, 9, size=2)
            M = cost_matrix(rng.normal(size=(n, 2)), rng.normal(size=(m, 2)), rng.choice([1, 2])).entries
            lam = 50.0 / max(M.max(), 1e-12)
            sol = sinkhorn(M, lam)
            assert sol.converged
            assert sol.plan.is_feasible(1e-8)

    def test_weakly_coupled_blocks_converge(self):
        # row 0 / column 0 touch the rest of the plan only through entries below 1e-16
        M = np.random.default_rng(3).random((3, 3))
        sol = sinkhorn(M, 163.0)
        assert sol.converged and sol.iterations < 1000
        assert sol.plan.is_feasible(1e-8)

    def test_newton_polish_can_be_disabled(self):
        M = np.array([[0.0, 1.0], [1.0, 0.0]])
        sol = sinkhorn(M, 10.0, newton_after=None)
        assert sol.converged

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 2**32 - 1),
           st.floats(min_value=0.1, max_value=200))
    def test_feasible_and_bounded_by_independent_coupling(self, n, m, seed, lam):
        M = np.random.default_rng(seed).random((n, m))
        sol = sinkhorn(M, lam)
        opt, _ = exact_wasserstein_lp(M)
        assert sol.plan.is_feasible(1e-8)
        assert opt - 1e-9 <= sol.plan.cost(M) <= M.mean() + 1e-9

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 2**32 - 1),
           st.floats(min_value=0.5, max_value=500))
    def test_entropic_gap_bound(self, n, m, seed, lam):
        # <T_lam, M> - opt <= log(min(n, m)) / lam, from the entropy of a uniform-marginal plan
        M = np.random.default_rng(seed).random((n, m))
        opt, _ = exact_wasserstein_lp(M)
        gap = sinkhorn(M, lam).plan.cost(M) - opt
        assert gap <= math.log(min(n, m)) / lam + 1e-8

    def test_cost_nonincreasing_in_lambda(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            n, m = rng.integers(2, 7, size=2)
            M = rng.random((n, m))
            costs = [sinkhorn(M, lam).plan.cost(M) for lam in (0.0, 0.5, 2.0, 8.0, 32.0, 128.0)]
            assert all(b <= a + 1e-9 for a, b in zip(costs, costs[1:]))

    def test_converges_to_exact_optimum(self):
        rng = np.random.default_rng(10)
        M = rng.random((5, 5))
        opt, _ = exact_wasserstein_lp(M)
        assert sinkhorn(M, 2000.0).plan.cost(M) == pytest.approx(opt, abs=5e-3)


class TestTransportPlan:
    def test_residual_and_cost(self):
        plan = TransportPlan([[0.5, 0.0], [0.0, 0.5]])
        assert plan.marginal_residual() == 0.0
        assert plan.cost(np.array([[1.0, 9.0], [9.0, 3.0]])) == pytest.approx(2.0)
        assert not TransportPlan([[0.6, 0.0], [0.0, 0.4]]).is_feasible()
