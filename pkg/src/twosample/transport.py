"""Discrete optimal transport between uniform empirical measures.

Exact solutions come from a transportation simplex on integer-scaled
marginals (row supply ``m``, column demand ``n``), or from a linear
assignment when ``n == m``.  Entropic solutions come from Sinkhorn's
alternating diagonal scaling of ``exp(-lambda * M)``.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp

from .empirical import as_sample

logger = logging.getLogger(__name__)

MARGINAL_TOL = 1e-8
# beyond this value of lambda * max(M) the kernel exp(-lambda M) is handled in log space
LOG_DOMAIN_THRESHOLD = 30.0
NEWTON_RIDGE = 1e-10


@dataclass(frozen=True)
class CostMatrix:
    entries: np.ndarray
    p: float = 1.0

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim != 2 or 0 in e.shape:
            raise ValueError("cost matrix must be a non-empty 2-D array")
        if np.any(e < 0) or not np.all(np.isfinite(e)):
            raise ValueError("cost entries must be finite and nonnegative")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True)
class TransportPlan:
    coupling: np.ndarray

    def __post_init__(self):
        c = np.array(self.coupling, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coupling", c)

    def marginal_residual(self) -> float:
        """Largest absolute deviation of a row or column sum from 1/n or 1/m."""
        n, m = self.coupling.shape
        rows = np.abs(self.coupling.sum(axis=1) - 1.0 / n).max()
        cols = np.abs(self.coupling.sum(axis=0) - 1.0 / m).max()
        return float(max(rows, cols))

    def is_feasible(self, tol: float = MARGINAL_TOL) -> bool:
        return bool(np.all(self.coupling >= 0) and self.marginal_residual() <= tol)

    def cost(self, M: CostMatrix | np.ndarray) -> float:
        entries = M.entries if isinstance(M, CostMatrix) else np.asarray(M, dtype=float)
        return math.fsum((self.coupling * entries).ravel())


@dataclass(frozen=True)
class SinkhornSolution:
    plan: TransportPlan
    log_u: np.ndarray
    log_v: np.ndarray
    lam: float
    iterations: int
    converged: bool
    residual: float

    @property
    def u(self) -> np.ndarray:
        return np.exp(self.log_u)

    @property
    def v(self) -> np.ndarray:
        return np.exp(self.log_v)


def cost_matrix(x, y, p: float = 1.0) -> CostMatrix:
    """Euclidean distances between the points of ``x`` and ``y``, raised to ``p``."""
    xs, ys = as_sample(x), as_sample(y)
    if xs.dim != ys.dim:
        raise ValueError(f"dimension mismatch: {xs.dim} vs {ys.dim}")
    diff = xs.points[:, None, :] - ys.points[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    return CostMatrix(dist if p == 1 else dist**p, float(p))


def _as_cost(M) -> np.ndarray:
    return M.entries if isinstance(M, CostMatrix) else CostMatrix(M).entries


# --- exact solver -------------------------------------------------------------

def exact_wasserstein_lp(M, n: int | None = None, m: int | None = None,
                         method: str = "auto") -> tuple[float, TransportPlan]:
    """Minimise ``<T, M>`` over the transport polytope ``U_nm``.

    ``method`` is ``"simplex"`` (transportation simplex, any shape),
    ``"assignment"`` (square only) or ``"auto"`` (assignment when square).
    Returns the optimum and an optimal vertex plan.
    """
    C = _as_cost(M)
    if n is not None and m is not None and C.shape != (n, m):
        raise ValueError(f"cost matrix has shape {C.shape}, expected {(n, m)}")
    n, m = C.shape
    if method == "auto":
        method = "assignment" if n == m else "simplex"
    if method == "assignment":
        if n != m:
            raise ValueError("assignment method needs a square cost matrix")
        rows, cols = linear_sum_assignment(C)
        plan = np.zeros_like(C)
        plan[rows, cols] = 1.0 / n
        opt = math.fsum(C[rows, cols]) / n
        return opt, TransportPlan(plan)
    if method != "simplex":
        raise ValueError(f"unknown method {method!r}")
    flow = TransportationSimplex(C).solve()
    plan = flow / (n * m)
    opt = math.fsum((flow * C).ravel()) / (n * m)
    return opt, TransportPlan(plan)


class TransportationSimplex:
    """Primal transportation simplex with integer flows.

    Supplies are ``m`` per row and demands ``n`` per column, so every basic
    solution is integral and degeneracy is detected exactly.  Entering cells
    follow Dantzig's rule; after a run of degenerate pivots the solver
    switches permanently to Bland's rule, which cannot cycle.
    """

    def __init__(self, cost: np.ndarray, max_pivots: int | None = None,
                 degenerate_limit: int = 50):
        self.C = np.asarray(cost, dtype=float)
        self.n, self.m = self.C.shape
        self.max_pivots = max_pivots or 50 * (self.n + self.m) ** 2 + 1000
        self.degenerate_limit = degenerate_limit
        scale = float(np.abs(self.C).max()) if self.C.size else 1.0
        self.eps = 1e-12 * max(1.0, scale)

    def _northwest_corner(self):
        n, m = self.n, self.m
        flow = np.zeros((n, m), dtype=np.int64)
        supply = [m] * n
        demand = [n] * m
        basis = set()
        i = j = 0
        while i < n and j < m:
            x = min(supply[i], demand[j])
            flow[i, j] = x
            basis.add((i, j))
            supply[i] -= x
            demand[j] -= x
            if supply[i] == 0 and i < n - 1:
                i += 1
            elif demand[j] == 0:
                j += 1
            else:
                i += 1
        return flow, basis

    def _adjacency(self, basis):
        adj = [[] for _ in range(self.n + self.m)]
        for i, j in basis:
            adj[i].append(self.n + j)
            adj[self.n + j].append(i)
        return adj

    def _potentials(self, adj):
        u = np.full(self.n, np.nan)
        v = np.full(self.m, np.nan)
        u[0] = 0.0
        queue = deque([0])
        while queue:
            node = queue.popleft()
            for other in adj[node]:
                if node < self.n:
                    j = other - self.n
                    if np.isnan(v[j]):
                        v[j] = self.C[node, j] - u[node]
                        queue.append(other)
                else:
                    j = node - self.n
                    if np.isnan(u[other]):
                        u[other] = self.C[other, j] - v[j]
                        queue.append(other)
        if np.isnan(u).any() or np.isnan(v).any():
            raise RuntimeError("basis is not a spanning tree")
        return u, v

    def _tree_path(self, adj, start: int, goal: int) -> list[int]:
        parent = {start: -1}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            if node == goal:
                break
            for other in adj[node]:
                if other not in parent:
                    parent[other] = node
                    queue.append(other)
        path = [goal]
        while path[-1] != start:
            path.append(parent[path[-1]])
        return path[::-1]

    def solve(self) -> np.ndarray:
        flow, basis = self._northwest_corner()
        n = self.n
        bland = False
        degenerate_run = 0
        for _ in range(self.max_pivots):
            adj = self._adjacency(basis)
            u, v = self._potentials(adj)
            reduced = self.C - u[:, None] - v[None, :]
            if bland:
                candidates = np.flatnonzero(reduced.ravel() < -self.eps)
                if candidates.size == 0:
                    return flow
                ei, ej = divmod(int(candidates[0]), self.m)
            else:
                k = int(np.argmin(reduced))
                ei, ej = divmod(k, self.m)
                if reduced[ei, ej] >= -self.eps:
                    return flow
            # path row ei -> ... -> column ej in the basis tree; with the entering
            # cell it closes a cycle whose signs alternate starting with '+'
            nodes = self._tree_path(adj, ei, n + ej)
            cells = []
            for a, b in zip(nodes[:-1], nodes[1:]):
                cells.append((a, b - n) if a < n else (b, a - n))
            minus = cells[::2]
            plus = cells[1::2]
            theta = min(flow[c] for c in minus)
            leaving = min((c for c in minus if flow[c] == theta),
                          key=lambda c: c[0] * self.m + c[1])
            for c in minus:
                flow[c] -= theta
            for c in plus:
                flow[c] += theta
            flow[ei, ej] += theta
            basis.remove(leaving)
            basis.add((ei, ej))
            if theta == 0:
                degenerate_run += 1
                if degenerate_run >= self.degenerate_limit and not bland:
                    logger.debug("switching to Bland's rule after %d degenerate pivots", degenerate_run)
                    bland = True
            else:
                degenerate_run = 0
        raise RuntimeError("transportation simplex exceeded its pivot budget")


# --- entropic solver ----------------------------------------------------------

def sinkhorn(M, lam: float, tol: float = 1e-9, max_iter: int = 10000,
             newton_after: int | None = 200) -> SinkhornSolution:
    """Entropic transport plan ``diag(u) exp(-lam * M) diag(v)`` with uniform marginals.

    Alternates row and column scalings until the L1 norm of the row and
    column residuals is at most ``tol``.  When scaling alone has not
    converged after ``newton_after`` sweeps (plans with near-zero entries
    converge sublinearly), the remaining budget goes to Newton steps on
    the same dual variables; ``newton_after=None`` disables this.
    At ``lam = 0`` the plan is the independent coupling.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    C = _as_cost(M)
    n, m = C.shape
    log_a = np.full(n, -math.log(n))
    log_b = np.full(m, -math.log(m))
    if lam == 0 or (n == 1 and m == 1):
        plan = np.full((n, m), 1.0 / (n * m))
        return SinkhornSolution(TransportPlan(plan), log_a.copy(), log_b.copy(),
                                float(lam), 0, True, 0.0)

    log_k = -lam * C
    if lam * float(C.max()) > LOG_DOMAIN_THRESHOLD:
        step, kernel = _log_step, log_k
    else:
        step, kernel = _plain_step, np.exp(log_k)
    log_u = np.zeros(n)
    log_v = np.zeros(m)
    it = 0
    converged = False
    residual = math.inf
    while it < max_iter:
        it += 1
        log_u, log_v = step(kernel, log_u, log_v, log_a, log_b)
        plan = np.exp(log_u[:, None] + log_k + log_v[None, :])
        residual = _residual(plan, n, m)
        if residual <= tol:
            converged = True
            break
        if newton_after is not None and it >= newton_after:
            break
    while not converged and it < max_iter:
        it += 1
        log_u, log_v, plan, improved = _newton_step(log_k, log_u, log_v, log_a, log_b, residual)
        if improved < residual:
            residual = improved
        else:
            # no Newton progress: a scaling sweep always moves toward the fixed point
            log_u, log_v = step(kernel, log_u, log_v, log_a, log_b)
            plan = np.exp(log_u[:, None] + log_k + log_v[None, :])
            residual = _residual(plan, n, m)
        if residual <= tol:
            converged = True
    if not converged:
        logger.warning("sinkhorn stopped after %d iterations with residual %.3g", it, residual)
    return SinkhornSolution(TransportPlan(plan), log_u, log_v, float(lam), it, converged, residual)


def _residual(plan: np.ndarray, n: int, m: int) -> float:
    return float(np.abs(plan.sum(axis=1) - 1.0 / n).sum() + np.abs(plan.sum(axis=0) - 1.0 / m).sum())


def _newton_step(log_k, log_u, log_v, log_a, log_b, residual):
    """One damped Newton step on the marginal equations in (log u, log v).

    The last entry of log v is held fixed to remove the scaling gauge.  The
    step is halved until the L1 marginal residual decreases.
    """
    n, m = log_k.shape
    plan = np.exp(log_u[:, None] + log_k + log_v[None, :])
    rows, cols = plan.sum(axis=1), plan.sum(axis=0)
    grad = np.concatenate([rows - np.exp(log_a), (cols - np.exp(log_b))[:-1]])
    H = np.zeros((n + m - 1, n + m - 1))
    H[:n, :n] = np.diag(rows)
    H[n:, n:] = np.diag(cols[:-1])
    H[:n, n:] = plan[:, :-1]
    H[n:, :n] = plan[:, :-1].T
    # blocks joined only through near-zero entries leave extra gauge directions;
    # a small ridge keeps the step bounded along them
    H[np.diag_indices_from(H)] += NEWTON_RIDGE * max(float(np.diag(H).max()), 1e-300)
    try:
        direction = np.linalg.solve(H, -grad)
    except np.linalg.LinAlgError:
        direction = np.linalg.lstsq(H, -grad, rcond=None)[0]
    du, dv = direction[:n], np.append(direction[n:], 0.0)
    t = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(60):
            cand_u, cand_v = log_u + t * du, log_v + t * dv
            cand = np.exp(cand_u[:, None] + log_k + cand_v[None, :])
            cand_res = _residual(cand, n, m)
            if cand_res < residual:
                return cand_u, cand_v, cand, cand_res
            t *= 0.5
    return log_u, log_v, plan, residual


def _plain_step(K, log_u, log_v, log_a, log_b):
    v = np.exp(log_v)
    u = np.exp(log_a) / (K @ v)
    v = np.exp(log_b) / (K.T @ u)
    return np.log(u), np.log(v)


def _log_step(log_k, log_u, log_v, log_a, log_b):
    log_u = log_a - logsumexp(log_k + log_v[None, :], axis=1)
    log_v = log_b - logsumexp(log_k + log_u[:, None], axis=0)
    return log_u, log_v


def sinkhorn_divergence(x, y, p: float = 1.0, lam: float = 0.0,
                        tol: float = 1e-9, max_iter: int = 10000) -> float:
    """Transport cost ``<T_lam, M>`` at the entropic optimiser (not the regularised objective)."""
    M = cost_matrix(x, y, p)
    sol = sinkhorn(M, lam, tol=tol, max_iter=max_iter)
    return sol.plan.cost(M)
