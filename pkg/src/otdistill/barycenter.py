"""Free-support Wasserstein barycenters of a single empirical measure.

Alternates projected subgradient steps on the atom weights (the target
potentials of the transport LP are a subgradient of W_2^2 in the weights)
with Newton steps on atom positions. For W_2^2 with a fixed plan the
Hessian in atom j is ``2 w_j I``, so one Newton step lands exactly on the
plan-conditional mean ``sum_i t_ij x_i / w_j``.

Also provides the fixed-grid KL and MMD barycenters used as comparison
baselines and a Gaussian renderer for putting free-support atoms on a grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (DiscreteDistribution, OtDistillError, project_to_simplex,
                   validate_distribution, NonFiniteInputError)
from .metrics import DisjointSupportError, GridMismatchError, UnnormalizedInputError
from .ot import TransportSolution, build_cost_matrix, solve_exact


class PlanMismatchError(OtDistillError):
    pass


class EmptyGridError(OtDistillError):
    pass


INIT_STRATEGIES = ("subsample", "kmeans_seed", "random_gaussian")
# Below this transport cost the current weights are optimal and the zero
# subgradient is used instead of the vertex duals returned by the solver.
ZERO_COST = 1e-15


@dataclass(frozen=True)
class BarycenterConfig:
    m: int = 10
    K: int = 10
    eta: float = 0.05
    weight_floor: float = 1e-8
    p: float = 2.0
    init_strategy: str = "subsample"
    step_schedule: str = "inv_sqrt"
    single_solve: bool = False

    def __post_init__(self):
        if self.m < 1 or self.K < 1:
            raise OtDistillError("m and K must be >= 1")
        if not self.eta > 0:
            raise OtDistillError("eta must be > 0")
        if self.weight_floor < 0:
            raise OtDistillError("weight_floor must be >= 0")
        if self.p != 2:
            raise OtDistillError("free-support barycenters are implemented for p = 2 only")
        if self.init_strategy not in INIT_STRATEGIES:
            raise OtDistillError(f"unknown init_strategy {self.init_strategy!r}")
        if self.step_schedule not in ("inv_sqrt", "constant"):
            raise OtDistillError(f"unknown step_schedule {self.step_schedule!r}")

    def step_size(self, k: int) -> float:
        return self.eta / np.sqrt(k) if self.step_schedule == "inv_sqrt" else self.eta


@dataclass
class IterationRecord:
    """Per-iteration diagnostics of the position step."""

    fixed_plan_cost_before: float
    fixed_plan_cost_after: float
    resolved_objective: float
    mean_error: float


@dataclass
class BarycenterResult:
    atoms: np.ndarray
    weights: np.ndarray
    objective_trace: list
    iterations_run: int
    initial_objective: float = float("nan")
    history: list = field(default_factory=list)

    def as_distribution(self) -> DiscreteDistribution:
        return validate_distribution(self.atoms, self.weights)


def update_weights(current, dual_betas, eta: float) -> np.ndarray:
    """Projected subgradient step ``Project(w - eta * beta)``."""
    current = np.asarray(current, dtype=float)
    beta = np.asarray(dual_betas, dtype=float)
    if not (np.all(np.isfinite(beta)) and np.isfinite(eta)):
        raise NonFiniteInputError("non-finite subgradient or step size")
    if eta == 0:
        return current.copy()
    return project_to_simplex(current - eta * beta)


def update_positions(atoms, plan, source: DiscreteDistribution, weights,
                     weight_floor: float = 1e-8, tol: float = 1e-8) -> np.ndarray:
    """Newton step on every atom whose weight is at least ``weight_floor``."""
    T = plan.plan if isinstance(plan, TransportSolution) else np.asarray(plan, dtype=float)
    w = np.asarray(weights, dtype=float)
    cols = T.sum(axis=0)
    if T.shape != (source.n, w.size) or np.max(np.abs(cols - w)) > tol:
        raise PlanMismatchError("plan column sums do not match the atom weights")
    atoms = np.array(atoms, dtype=float, copy=True)
    active = w >= weight_floor
    if weight_floor == 0:
        active &= w > 0
    if np.any(active):
        atoms[active] = (T[:, active].T @ source.points) / w[active, None]
    return atoms


def initial_atoms(source: DiscreteDistribution, m: int, strategy: str,
                  rng: np.random.Generator) -> np.ndarray:
    x = source.points
    if strategy == "subsample":
        if m <= source.n:
            idx = rng.choice(source.n, size=m, replace=False)
        else:
            idx = np.concatenate([rng.permutation(source.n),
                                  rng.choice(source.n, size=m - source.n, replace=True)])
        return x[np.sort(idx)] if m >= source.n else x[idx]
    if strategy == "kmeans_seed":
        # k-means++ seeding with the source weights as sampling mass.
        chosen = [int(rng.choice(source.n, p=source.weights))]
        d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
        for _ in range(1, m):
            mass = source.weights * d2
            total = mass.sum()
            probs = mass / total if total > 0 else source.weights
            chosen.append(int(rng.choice(source.n, p=probs)))
            d2 = np.minimum(d2, np.sum((x - x[chosen[-1]]) ** 2, axis=1))
        return x[chosen].copy()
    mean = source.mean()
    std = np.sqrt(source.weights @ (x - mean) ** 2)
    return mean + std * rng.standard_normal((m, source.d))


def _fixed_plan_cost(T: np.ndarray, source, atoms) -> float:
    return float(np.sum(T * build_cost_matrix(source, _as_target(atoms, T.sum(axis=0)), 2).entries))


def _as_target(atoms, weights) -> DiscreteDistribution:
    return DiscreteDistribution(np.asarray(atoms, dtype=float), np.asarray(weights, dtype=float))


def free_support_barycenter(source: DiscreteDistribution, config: BarycenterConfig = BarycenterConfig(),
                            seed: int = 0, atoms0=None) -> BarycenterResult:
    """Best ``config.m``-atom approximation of ``source`` in W_2.

    Each outer iteration solves OT, takes a weight step with the target
    potentials, re-solves with the new weights (skipped when
    ``config.single_solve``) and moves the atoms by a Newton step.
    ``objective_trace[k]`` is W_2^2 after iteration k.
    """
    if config.m > source.n:
        warnings.warn(f"m={config.m} exceeds the source support size n={source.n}", stacklevel=2)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    if atoms0 is None:
        atoms = initial_atoms(source, config.m, config.init_strategy, rng)
    else:
        atoms = np.array(atoms0, dtype=float, copy=True)
    w = np.full(config.m, 1.0 / config.m)

    sol = solve_exact(source, _as_target(atoms, w))
    initial = sol.objective
    trace, history = [], []
    for k in range(1, config.K + 1):
        beta = sol.target_potentials
        if sol.objective <= ZERO_COST:
            beta = np.zeros_like(beta)
        w_new = update_weights(w, beta, config.step_size(k))
        if config.single_solve:
            plan = sol.plan
            w_plan = plan.sum(axis=0)
        else:
            plan = solve_exact(source, _as_target(atoms, w_new)).plan
            w_plan = w_new
        before = _fixed_plan_cost(plan, source, atoms)
        atoms = update_positions(atoms, plan, source, w_plan, config.weight_floor)
        after = _fixed_plan_cost(plan, source, atoms)
        w = w_new
        sol = solve_exact(source, _as_target(atoms, w))
        mean_err = float(np.max(np.abs(w_plan @ atoms - source.mean())))
        history.append(IterationRecord(before, after, sol.objective, mean_err))
        trace.append(max(sol.objective, 0.0))
    return BarycenterResult(atoms, w, trace, config.K, initial, history)


def barycenter_objective(atoms, weights, inputs, p: float = 2.0) -> float:
    """Average ``W_p^p`` from the measure (atoms, weights) to each input measure."""
    target = _as_target(atoms, weights)
    vals = [solve_exact(nu, target, build_cost_matrix(nu, target, p)).objective for nu in inputs]
    return float(np.mean(vals))


GRID_METRICS = ("kl_forward", "kl_reverse", "mmd_mixture")


def fixed_grid_barycenter(densities, metric: str = "kl_forward") -> np.ndarray:
    """Closed-form barycenter of densities sharing one grid.

    ``kl_forward`` (argmin sum_i KL(nu_i || mu)) and ``mmd_mixture`` are the
    arithmetic mean; ``kl_reverse`` (argmin sum_i KL(mu || nu_i)) is the
    normalized geometric mean.
    """
    if metric not in GRID_METRICS:
        raise OtDistillError(f"unknown grid metric {metric!r}")
    grids = [np.asarray(g, dtype=float) for g in densities]
    if not grids:
        raise EmptyGridError("no densities given")
    shape = grids[0].shape
    for g in grids:
        if g.shape != shape:
            raise GridMismatchError(f"grid shapes differ: {shape} vs {g.shape}")
        if np.any(g < 0) or abs(g.sum() - 1.0) > 1e-6:
            raise UnnormalizedInputError("each density must be nonnegative and sum to 1")
    stack = np.stack(grids)
    if metric in ("kl_forward", "mmd_mixture"):
        return stack.mean(axis=0)
    with np.errstate(divide="ignore"):
        logs = np.log(stack)
    geo = np.exp(logs.mean(axis=0))
    total = geo.sum()
    if total == 0:
        raise DisjointSupportError("geometric mean vanishes: densities have disjoint supports")
    return geo / total


@dataclass(frozen=True)
class GridSpec:
    """Square grid of ``size x size`` cell centers over [lo, hi]^2."""

    lo: float
    hi: float
    size: int

    def axis(self) -> np.ndarray:
        if self.size < 1:
            raise EmptyGridError("grid size must be >= 1")
        step = (self.hi - self.lo) / self.size
        return self.lo + step * (np.arange(self.size) + 0.5)

    @property
    def cell(self) -> float:
        return (self.hi - self.lo) / self.size

    def centers(self) -> np.ndarray:
        ax = self.axis()
        gx, gy = np.meshgrid(ax, ax, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])


def render_points_to_grid(points, weights, grid: GridSpec, bandwidth: float) -> np.ndarray:
    """Isotropic Gaussian smoothing of weighted points; grid[ix, iy] sums to 1."""
    if not bandwidth > 0:
        raise OtDistillError("bandwidth must be > 0")
    ax = grid.axis()
    pts = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    factors = []
    for c in range(2):
        k = np.exp(-0.5 * ((ax[None, :] - pts[:, c, None]) / bandwidth) ** 2)
        z = k.sum(axis=1)
        # Kernels that underflow on every cell collapse onto the nearest cell.
        for r in np.flatnonzero(z == 0):
            k[r, np.argmin(np.abs(ax - pts[r, c]))] = 1.0
        # Per-atom normalization keeps truncated tails from moving mass
        # between atoms.
        factors.append(k / k.sum(axis=1, keepdims=True))
    dens = np.einsum("r,ri,rj->ij", w, factors[0], factors[1])
    return dens / dens.sum()


def render_atoms_to_grid(result: BarycenterResult, grid: GridSpec, bandwidth: float) -> np.ndarray:
    return render_points_to_grid(result.atoms, result.weights, grid, bandwidth)


def displacement_midpoint(P: DiscreteDistribution, Q: DiscreteDistribution,
                          t: float = 0.5) -> DiscreteDistribution:
    """McCann interpolant ``((1 - t) x + t y)_# T*`` of two measures under W_2.

    For two inputs at t = 1/2 this is an exact W_2 barycenter.
    """
    sol = solve_exact(P, Q)
    ii, jj = np.nonzero(sol.plan > 0)
    pts = (1.0 - t) * P.points[ii] + t * Q.points[jj]
    mass = sol.plan[ii, jj]
    return validate_distribution(pts, mass / mass.sum())
