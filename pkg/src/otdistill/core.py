"""Shared domain types, validation, simplex projection and seeded data generation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

WEIGHT_INPUT_TOL = 1e-6
WEIGHT_INVARIANT_TOL = 1e-9


class OtDistillError(ValueError):
    """Base class for every domain error raised by the package."""


class NegativeWeightError(OtDistillError):
    pass


class WeightSumOutOfToleranceError(OtDistillError):
    pass


class NonFiniteCoordinateError(OtDistillError):
    pass


class EmptySupportError(OtDistillError):
    pass


class NonFiniteInputError(OtDistillError):
    pass


class UnknownGeometryError(OtDistillError):
    pass


class DimensionMismatchError(OtDistillError):
    pass


@dataclass(frozen=True)
class DiscreteDistribution:
    """Weighted point cloud ``sum_i weights[i] * delta(points[i])``.

    Build instances through :func:`validate_distribution`; the constructor
    does not re-check the invariants.
    """

    points: np.ndarray
    weights: np.ndarray
    label: Optional[int] = None

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def validate_distribution(points, weights=None, label=None) -> DiscreteDistribution:
    """Check and normalize a weighted point set.

    ``points`` may be one-dimensional, in which case each entry is a point
    in R^1. ``weights=None`` means uniform. Weights whose sum lies within
    1e-6 of one are rescaled to sum to one.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise EmptySupportError(f"points must be a non-empty n x d array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise NonFiniteCoordinateError("points contain NaN or infinite coordinates")
    n = pts.shape[0]
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=float).ravel()
        if w.shape[0] != n:
            raise DimensionMismatchError(f"{w.shape[0]} weights for {n} points")
        if not np.all(np.isfinite(w)):
            raise NonFiniteInputError("weights contain NaN or infinite values")
        if np.any(w < 0):
            raise NegativeWeightError(f"negative weight {w.min()!r}")
        total = w.sum()
        if abs(total - 1.0) > WEIGHT_INPUT_TOL:
            raise WeightSumOutOfToleranceError(f"weights sum to {total!r}, expected 1")
        w = w / total
    return DiscreteDistribution(_freeze(pts), _freeze(w), None if label is None else int(label))


def uniform_distribution(points, label=None) -> DiscreteDistribution:
    return validate_distribution(points, None, label)


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection of ``v`` onto the probability simplex.

    Sort-based algorithm: find the threshold ``theta`` such that
    ``max(v - theta, 0)`` sums to one.
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise EmptySupportError("cannot project an empty vector")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInputError("vector contains NaN or infinite values")
    # Points already on the simplex (to rounding) are returned as-is; this
    # makes the projection exactly idempotent.
    if v.min() >= 0.0 and abs(v.sum() - 1.0) <= 1e-12:
        return v.copy()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.count_nonzero(u - css / ind > 0)
    theta = css[rho - 1] / rho
    w = np.maximum(v - theta, 0.0)
    # Remove the rounding residue so the output sums to one to ~1 ulp.
    s = w.sum()
    if s != 1.0:
        w = w / s
    return w


GEOMETRIES = ("gaussian", "circle", "cross", "circles-crosses")


def _class_centers(classes: int, spacing: float = 4.0) -> np.ndarray:
    xs = spacing * np.arange(classes) - spacing * (classes - 1) / 2.0
    return np.column_stack([xs, np.zeros(classes)])


def _circle(rng, n, center, radius):
    t = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return center + radius * np.column_stack([np.cos(t), np.sin(t)])


def _cross(rng, n, center, half_length):
    arm = rng.integers(0, 2, size=n)
    s = rng.uniform(-half_length, half_length, size=n)
    pts = np.zeros((n, 2))
    pts[arm == 0, 0] = s[arm == 0]
    pts[arm == 1, 1] = s[arm == 1]
    return center + pts


def make_blob_dataset(seed: int, classes: int, points_per_class: int, d: int = 2,
                      geometry: str = "gaussian", noise: float = 0.0,
                      radius: float = 1.0) -> list[DiscreteDistribution]:
    """Generate one uniformly weighted point cloud per class.

    ``gaussian`` draws isotropic blobs around random centers in R^d (``noise``
    is added to the unit spread). The outline geometries live in R^2:
    ``circle`` and ``cross`` use the same shape for every class,
    ``circles-crosses`` alternates circle/cross. Outline classes are centered
    along the x-axis, 4 units apart and symmetric about the origin, so a
    single class sits at (0, 0).
    """
    if classes < 1 or points_per_class < 1 or d < 1:
        raise OtDistillError("classes, points_per_class and d must all be >= 1")
    if geometry not in GEOMETRIES:
        raise UnknownGeometryError(f"unknown geometry {geometry!r}; expected one of {GEOMETRIES}")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    out = []
    if geometry == "gaussian":
        centers = 3.0 * rng.standard_normal((classes, d))
        for k in range(classes):
            pts = centers[k] + (1.0 + noise) * rng.standard_normal((points_per_class, d))
            out.append(uniform_distribution(pts, label=k))
        return out
    if d != 2:
        raise OtDistillError(f"geometry {geometry!r} is two-dimensional, got d={d}")
    centers = _class_centers(classes)
    for k in range(classes):
        shape = geometry
        if geometry == "circles-crosses":
            shape = "circle" if k % 2 == 0 else "cross"
        if shape == "circle":
            pts = _circle(rng, points_per_class, centers[k], radius)
        else:
            pts = _cross(rng, points_per_class, centers[k], radius)
        if noise > 0:
            pts = pts + noise * rng.standard_normal(pts.shape)
        out.append(uniform_distribution(pts, label=k))
    return out


def class_rng(seed: int, label: Optional[int]) -> np.random.Generator:
    """Generator keyed on (seed, label) so per-class work is order independent."""
    key = () if label is None else (1 if label >= 0 else 2, abs(int(label)))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))
