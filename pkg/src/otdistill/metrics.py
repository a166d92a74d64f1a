"""Non-Wasserstein discrepancies: MMD, sliced Wasserstein and grid KL."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DimensionMismatchError, DiscreteDistribution, OtDistillError
from .ot import pairwise_cost


class GridMismatchError(OtDistillError):
    pass


class DisjointSupportError(OtDistillError):
    pass


class UnnormalizedInputError(OtDistillError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """``linear``: k(x, y) = <x, y>; ``gaussian_rbf``: exp(-gamma |x - y|^2).

    ``gamma=None`` for the RBF kernel selects the median heuristic on the
    pooled sample at evaluation time.
    """

    kind: str = "gaussian_rbf"
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("linear", "gaussian_rbf"):
            raise OtDistillError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian_rbf" and self.gamma is not None:
            if not (np.isfinite(self.gamma) and self.gamma > 0):
                raise OtDistillError(f"gamma must be finite and > 0, got {self.gamma!r}")

    def resolve(self, *point_sets) -> "KernelSpec":
        if self.kind == "linear" or self.gamma is not None:
            return self
        return KernelSpec("gaussian_rbf", median_heuristic_gamma(np.vstack(point_sets)))

    def gram(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kind == "linear":
            return x @ y.T
        if self.gamma is None:
            raise OtDistillError("unresolved RBF bandwidth; call resolve() first")
        return np.exp(-self.gamma * pairwise_cost(x, y, 2.0))


def median_heuristic_gamma(points: np.ndarray) -> float:
    """gamma = 1 / (2 median^2) over distinct-index pairwise distances."""
    n = points.shape[0]
    if n < 2:
        return 1.0
    iu = np.triu_indices(n, k=1)
    med = float(np.median(np.sqrt(pairwise_cost(points, points, 2.0)[iu])))
    if med <= 0:
        return 1.0
    return 1.0 / (2.0 * med * med)


def _same_dim(P, Q):
    if P.d != Q.d:
        raise DimensionMismatchError(f"dimension {P.d} != {Q.d}")


def mmd_squared(P: DiscreteDistribution, Q: DiscreteDistribution,
                kernel: KernelSpec = KernelSpec()) -> float:
    """Weighted V-statistic ``E k(x,x') + E k(s,s') - 2 E k(x,s)``, clamped at 0."""
    _same_dim(P, Q)
    k = kernel.resolve(P.points, Q.points)
    a, b = P.weights, Q.weights
    val = a @ k.gram(P.points, P.points) @ a + b @ k.gram(Q.points, Q.points) @ b \
        - 2.0 * (a @ k.gram(P.points, Q.points) @ b)
    return max(float(val), 0.0)


def mmd_linear_mean_gap(P: DiscreteDistribution, Q: DiscreteDistribution) -> float:
    _same_dim(P, Q)
    diff = P.mean() - Q.mean()
    return float(diff @ diff)


def wasserstein_1d(x, a, y, b, p: float = 1.0) -> float:
    """W_p^p between two weighted samples on the line via the quantile coupling."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    ix, iy = np.argsort(x, kind="stable"), np.argsort(y, kind="stable")
    x, a = x[ix], np.asarray(a, dtype=float)[ix]
    y, b = y[iy], np.asarray(b, dtype=float)[iy]
    ca = np.cumsum(a)
    cb = np.cumsum(b)
    ca /= ca[-1]
    cb /= cb[-1]
    levels = np.unique(np.concatenate([[0.0], ca, cb]))
    levels = levels[levels <= 1.0]
    mids = 0.5 * (levels[:-1] + levels[1:])
    widths = np.diff(levels)
    qx = x[np.minimum(np.searchsorted(ca, mids), x.size - 1)]
    qy = y[np.minimum(np.searchsorted(cb, mids), y.size - 1)]
    return float(np.sum(widths * np.abs(qx - qy) ** p))


def random_directions(rng: np.random.Generator, n_projections: int, d: int) -> np.ndarray:
    theta = rng.standard_normal((n_projections, d))
    return theta / np.linalg.norm(theta, axis=1, keepdims=True)


def sliced_wasserstein_terms(P, Q, p: float = 2.0, n_projections: int = 100,
                             seed: int = 0) -> np.ndarray:
    """Per-direction W_p^p values of the projected distributions."""
    _same_dim(P, Q)
    if n_projections < 1:
        raise OtDistillError("n_projections must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    dirs = random_directions(rng, n_projections, P.d)
    xp, yq = P.points @ dirs.T, Q.points @ dirs.T
    return np.array([wasserstein_1d(xp[:, l], P.weights, yq[:, l], Q.weights, p)
                     for l in range(n_projections)])


def sliced_wasserstein(P: DiscreteDistribution, Q: DiscreteDistribution, p: float = 2.0,
                       n_projections: int = 100, seed: int = 0) -> float:
    terms = sliced_wasserstein_terms(P, Q, p, n_projections, seed)
    return float(np.mean(terms)) ** (1.0 / p)


def _check_grids(p_density, q_density):
    p = np.asarray(p_density, dtype=float)
    q = np.asarray(q_density, dtype=float)
    if p.shape != q.shape:
        raise GridMismatchError(f"grid shapes differ: {p.shape} vs {q.shape}")
    for g in (p, q):
        if np.any(g < 0) or abs(g.sum() - 1.0) > 1e-6:
            raise UnnormalizedInputError("grid densities must be nonnegative and sum to 1")
    return p, q


def kl_divergence_grid(p_density, q_density) -> float:
    p, q = _check_grids(p_density, q_density)
    mask = p > 0
    if np.any(q[mask] == 0):
        raise DisjointSupportError("p has mass where q vanishes")
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
