"""Numerical checks of the two risk-gap bounds.

For a loss surrogate ``g`` and measures P, Q:

    |E_P g - E_Q g| <= L * W_1(P, Q)              (g is L-Lipschitz)
    |E_P g - E_Q g| <= |g|_H * MMD_k(P, Q)        (g in the RKHS of k)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DiscreteDistribution, validate_distribution
from .metrics import KernelSpec, median_heuristic_gamma, mmd_squared
from .ot import pairwise_cost, wasserstein_distance

BOUND_TOL = 1e-9


@dataclass(frozen=True)
class LipschitzFunction:
    """``g(x) = scale * min_r |x - a_r| + offset``; Lipschitz constant |scale|."""

    anchors: np.ndarray
    scale: float
    offset: float = 0.0

    @property
    def lipschitz_constant(self) -> float:
        return abs(self.scale)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        dist = np.sqrt(pairwise_cost(x, np.atleast_2d(self.anchors), 2.0)).min(axis=1)
        return self.scale * dist + self.offset


@dataclass(frozen=True)
class RkhsFunction:
    """``g(x) = sum_s c_s k(z_s, x)`` for a kernel ``k``."""

    centers: np.ndarray
    coefficients: np.ndarray
    kernel: KernelSpec

    def gram(self) -> np.ndarray:
        z = np.atleast_2d(self.centers)
        return self.kernel.gram(z, z)

    @property
    def rkhs_norm(self) -> float:
        c = np.asarray(self.coefficients, dtype=float)
        return float(np.sqrt(max(c @ self.gram() @ c, 0.0)))

    def lipschitz_upper_bound(self) -> float:
        """Valid Lipschitz constant for the RBF family: sqrt(2 gamma / e) sum |c_s|."""
        if self.kernel.kind != "gaussian_rbf":
            raise ValueError("only defined for the Gaussian RBF kernel")
        return float(np.sqrt(2.0 * self.kernel.gamma / np.e) * np.sum(np.abs(self.coefficients)))

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.kernel.gram(x, np.atleast_2d(self.centers)) @ np.asarray(self.coefficients, dtype=float)


@dataclass(frozen=True)
class BoundReport:
    gap: float
    bound: float
    satisfied: bool
    slack: float


def expected_gap(g, P: DiscreteDistribution, Q: DiscreteDistribution) -> float:
    return abs(float(P.weights @ g(P.points)) - float(Q.weights @ g(Q.points)))


def _report(gap: float, bound: float) -> BoundReport:
    return BoundReport(gap, bound, bool(gap <= bound + BOUND_TOL), bound - gap)


def check_wasserstein_bound(g: LipschitzFunction, P, Q) -> BoundReport:
    return _report(expected_gap(g, P, Q), g.lipschitz_constant * wasserstein_distance(P, Q, 1.0))


def check_mmd_bound(g: RkhsFunction, P, Q) -> BoundReport:
    return _report(expected_gap(g, P, Q), g.rkhs_norm * np.sqrt(mmd_squared(P, Q, g.kernel)))


def random_pair(rng: np.random.Generator, d=None, max_points: int = 15):
    d = int(rng.integers(1, 4)) if d is None else d
    n, m = rng.integers(1, max_points + 1, size=2)
    P = validate_distribution(rng.normal(size=(n, d)), rng.dirichlet(np.ones(n)))
    Q = validate_distribution(rng.normal(size=(m, d)) + rng.normal(size=d),
                              rng.dirichlet(np.ones(m)))
    return P, Q


def random_lipschitz(rng: np.random.Generator, d: int) -> LipschitzFunction:
    r = int(rng.integers(1, 5))
    return LipschitzFunction(rng.normal(scale=2.0, size=(r, d)), float(rng.normal(scale=2.0)),
                             float(rng.normal()))


def random_rkhs(rng: np.random.Generator, d: int, kernel: KernelSpec) -> RkhsFunction:
    s = int(rng.integers(1, 6))
    return RkhsFunction(rng.normal(scale=1.5, size=(s, d)), rng.normal(size=s), kernel)


BOUND_COLUMNS = ("W1", "MMD_rbf", "gap", "L_bound", "rkhs_bound", "ratio")


def bound_comparison_sweep(seed: int, trials: int, identical: bool = False) -> list[dict]:
    """Per-trial comparison of ``L W_1`` and ``|g|_H MMD`` for one shared surrogate.

    Each trial draws (P, Q) and an RBF-expansion surrogate ``g``; such a
    function is both in the RKHS and Lipschitz with the constant from
    :meth:`RkhsFunction.lipschitz_upper_bound`, so both bounds apply to the
    same gap. ``ratio`` is W_1 / MMD (NaN when MMD vanishes).
    """
    rows = []
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(t,)))
        P, Q = random_pair(rng)
        if identical:
            Q = P
        kernel = KernelSpec("gaussian_rbf", median_heuristic_gamma(np.vstack([P.points, Q.points])))
        g = random_rkhs(rng, P.d, kernel)
        w1 = wasserstein_distance(P, Q, 1.0)
        mmd = float(np.sqrt(mmd_squared(P, Q, kernel)))
        gap = expected_gap(g, P, Q)
        rows.append({
            "W1": w1,
            "MMD_rbf": mmd,
            "gap": gap,
            "L_bound": g.lipschitz_upper_bound() * w1,
            "rkhs_bound": g.rkhs_norm * mmd,
            "ratio": w1 / mmd if mmd > 0 else float("nan"),
        })
    return rows
