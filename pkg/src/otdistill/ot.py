"""Exact discrete optimal transport.

The transportation LP

    min <C, T>  s.t.  T 1 = a,  T^T 1 = b,  T >= 0

is solved with the network simplex method on the bipartite graph
(rows = source atoms, columns = target atoms). A basis is a spanning tree
of n + m - 1 cells; the node potentials of the tree are the dual variables
(alpha, beta) of the row and column constraints.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import DimensionMismatchError, DiscreteDistribution, OtDistillError


class InvalidExponentError(OtDistillError):
    pass


class InfeasibleMarginalsError(OtDistillError):
    pass


class NumericalFailureError(OtDistillError):
    pass


class TooLargeError(OtDistillError):
    pass


class NonUniformWeightsError(OtDistillError):
    pass


MARGINAL_TOL = 1e-6
# Consecutive degenerate pivots tolerated before switching to Bland's rule.
DEGENERATE_RUN = 8


@dataclass(frozen=True)
class CostMatrix:
    entries: np.ndarray
    p: float = 2.0

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class TransportSolution:
    plan: np.ndarray
    source_potentials: np.ndarray
    target_potentials: np.ndarray
    objective: float
    pivots: int = 0

    def dual_objective(self, a, b) -> float:
        return float(np.dot(a, self.source_potentials) + np.dot(b, self.target_potentials))


def build_cost_matrix(source: DiscreteDistribution, target: DiscreteDistribution,
                      p: float = 2.0) -> CostMatrix:
    """Pairwise Euclidean distances raised to the power ``p``."""
    if source.d != target.d:
        raise DimensionMismatchError(f"source dimension {source.d} != target dimension {target.d}")
    if not (p >= 1 and math.isfinite(p)):
        raise InvalidExponentError(f"exponent p must be >= 1, got {p!r}")
    return CostMatrix(pairwise_cost(source.points, target.points, p), float(p))


def pairwise_cost(x: np.ndarray, y: np.ndarray, p: float = 2.0) -> np.ndarray:
    sq = np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=-1)
    if p == 2:
        return sq
    if p == 1:
        return np.sqrt(sq)
    return np.sqrt(sq) ** p


def _northwest_corner(a: np.ndarray, b: np.ndarray):
    """Initial basic feasible solution; always returns n + m - 1 cells."""
    n, m = a.size, b.size
    ra, rb = a.copy(), b.copy()
    cells, flows = [], []
    i = j = 0
    while True:
        x = max(min(ra[i], rb[j]), 0.0)
        cells.append((i, j))
        flows.append(x)
        ra[i] -= x
        rb[j] -= x
        if i == n - 1 and j == m - 1:
            break
        if i == n - 1:
            j += 1
        elif j == m - 1:
            i += 1
        elif ra[i] <= 0.0:
            i += 1
        else:
            j += 1
    return cells, flows


class _Tree:
    """Spanning-tree basis over n row nodes and m column nodes."""

    def __init__(self, n, m, cells):
        self.n, self.m = n, m
        self.adj = [set() for _ in range(n + m)]
        for i, j in cells:
            self.add(i, j)

    def add(self, i, j):
        self.adj[i].add(self.n + j)
        self.adj[self.n + j].add(i)

    def remove(self, i, j):
        self.adj[i].discard(self.n + j)
        self.adj[self.n + j].discard(i)

    def potentials(self, C):
        """Solve alpha_i + beta_j = c_ij on tree edges with alpha_0 = 0."""
        n = self.n
        total = n + self.m
        pot = np.zeros(total)
        parent = [-1] * total
        depth = [0] * total
        seen = [False] * total
        seen[0] = True
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in self.adj[u]:
                if seen[v]:
                    continue
                seen[v] = True
                parent[v] = u
                depth[v] = depth[u] + 1
                if u < n:
                    pot[v] = C[u, v - n] - pot[u]
                else:
                    pot[v] = C[v, u - n] - pot[u]
                queue.append(v)
        if not all(seen):
            raise NumericalFailureError("basis is not a spanning tree")
        return pot[:n], pot[n:], parent, depth

    def cycle(self, i, j, parent, depth):
        """Tree path from column node j to row node i, as a list of cells."""
        u, v = self.n + j, i
        left, right = [u], [v]
        while depth[u] > depth[v]:
            u = parent[u]
            left.append(u)
        while depth[v] > depth[u]:
            v = parent[v]
            right.append(v)
        while u != v:
            u = parent[u]
            v = parent[v]
            left.append(u)
            right.append(v)
        nodes = left + right[-2::-1]
        cells = []
        for x, y in zip(nodes[:-1], nodes[1:]):
            cells.append((x, y - self.n) if x < self.n else (y, x - self.n))
        return cells


def network_simplex(a: np.ndarray, b: np.ndarray, C: np.ndarray, max_pivots=None):
    """Return (plan, alpha, beta, pivots) for the balanced transportation LP.

    Entering cells follow Dantzig's most-negative reduced cost rule. After
    ``DEGENERATE_RUN`` consecutive degenerate pivots the solver switches to
    Bland's smallest-index rule for entering and leaving cells until the
    next non-degenerate pivot, which rules out cycling.
    """
    n, m = C.shape
    if max_pivots is None:
        max_pivots = 50 * n * m
    scale = max(1.0, float(np.max(np.abs(C))) if C.size else 1.0)
    tol = 1e-12 * scale
    cells, flows = _northwest_corner(a, b)
    T = np.zeros((n, m))
    for (i, j), x in zip(cells, flows):
        T[i, j] = x
    tree = _Tree(n, m, cells)
    basic = np.zeros((n, m), dtype=bool)
    for i, j in cells:
        basic[i, j] = True

    pivots = 0
    degenerate_run = 0
    while True:
        alpha, beta, parent, depth = tree.potentials(C)
        reduced = C - alpha[:, None] - beta[None, :]
        reduced[basic] = 0.0
        bland = degenerate_run >= DEGENERATE_RUN
        if bland:
            candidates = np.flatnonzero(reduced.ravel() < -tol)
            if candidates.size == 0:
                break
            k = int(candidates[0])
        else:
            k = int(np.argmin(reduced))
            if reduced.flat[k] >= -tol:
                break
        if pivots >= max_pivots:
            raise NumericalFailureError(f"pivot limit {max_pivots} exceeded")
        ei, ej = divmod(k, m)
        path = tree.cycle(ei, ej, parent, depth)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(T[c] for c in minus)
        ties = [c for c in minus if T[c] <= theta]
        leave = min(ties, key=lambda c: c[0] * m + c[1]) if bland else ties[0]
        if theta > 0.0:
            for c in minus:
                T[c] -= theta
            for c in plus:
                T[c] += theta
            degenerate_run = 0
        else:
            degenerate_run += 1
        T[leave] = 0.0
        T[ei, ej] = theta
        tree.remove(*leave)
        basic[leave] = False
        tree.add(ei, ej)
        basic[ei, ej] = True
        pivots += 1
    np.maximum(T, 0.0, out=T)
    return T, alpha, beta, pivots


def _weights_and_cost(source, target, cost):
    C = cost.entries if isinstance(cost, CostMatrix) else np.asarray(cost, dtype=float)
    a, b = np.asarray(source.weights, float), np.asarray(target.weights, float)
    if C.shape != (a.size, b.size):
        raise DimensionMismatchError(f"cost shape {C.shape} does not match ({a.size}, {b.size})")
    return a, b, C


def solve_exact(source: DiscreteDistribution, target: DiscreteDistribution,
                cost=None) -> TransportSolution:
    """Optimal plan and dual potentials for one transport problem.

    ``cost`` defaults to squared Euclidean distances. Duals are normalized
    so that the source potentials have zero mean; target atoms of zero mass
    get the largest feasible potential ``min_i(c_ij - alpha_i)``.
    """
    if cost is None:
        cost = build_cost_matrix(source, target, 2.0)
    a, b, C = _weights_and_cost(source, target, cost)
    if abs(a.sum() - b.sum()) > MARGINAL_TOL:
        raise InfeasibleMarginalsError(f"mass mismatch: {a.sum()!r} vs {b.sum()!r}")
    T, alpha, beta, pivots = network_simplex(a, b, C)
    shift = alpha.mean()
    alpha = alpha - shift
    beta = beta + shift
    empty = b == 0
    if np.any(empty):
        beta = beta.copy()
        beta[empty] = np.min(C[:, empty] - alpha[:, None], axis=0)
    objective = float(np.sum(C * T))
    return TransportSolution(T, alpha, beta, objective, pivots)


def wasserstein_distance(source: DiscreteDistribution, target: DiscreteDistribution,
                         p: float = 2.0) -> float:
    sol = solve_exact(source, target, build_cost_matrix(source, target, p))
    return max(sol.objective, 0.0) ** (1.0 / p)


def brute_force_assignment(source: DiscreteDistribution, target: DiscreteDistribution,
                           cost) -> float:
    """Minimum of ``(1/n) sum_i c[i, s(i)]`` over all permutations ``s``.

    Test oracle for tiny uniform problems (n = m <= 8).
    """
    a, b, C = _weights_and_cost(source, target, cost)
    n, m = C.shape
    if n != m:
        raise DimensionMismatchError("brute force needs n == m")
    if n > 8:
        raise TooLargeError(f"n={n} exceeds the brute-force limit of 8")
    if not (source.is_uniform() and target.is_uniform()):
        raise NonUniformWeightsError("brute force needs uniform weights")
    perms = np.array(list(itertools.permutations(range(n))))
    totals = C[np.arange(n), perms].sum(axis=1)
    return float(totals.min() / n)
