"""Desk-scale distillation driver.

A frozen encoder ``f(x) = act(A x + b)`` stands in for a pretrained feature
extractor. For each class the driver

1. embeds the real points and records per-class statistics of the
   pre-activation (the map that would feed a BatchNorm layer),
2. computes a free-support barycenter of the embedded class,
3. optimizes synthetic inputs so that ``f(x_j)`` matches atom ``b_j`` while
   the weighted pre-activation statistics match the real ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .barycenter import BarycenterConfig, BarycenterResult, free_support_barycenter
from .core import (DimensionMismatchError, DiscreteDistribution, OtDistillError,
                   class_rng, validate_distribution)
from .pcbn import ClassBNStats, FeatureTensor, weighted_channel_mean, weighted_channel_var


class CountMismatchError(OtDistillError):
    pass


ACTIVATIONS = ("identity", "tanh")


@dataclass(frozen=True)
class ToyEncoder:
    weight_matrix: np.ndarray
    bias: np.ndarray
    activation: str = "tanh"
    seed: Optional[int] = None

    def __post_init__(self):
        A = np.array(self.weight_matrix, dtype=float)
        b = np.array(self.bias, dtype=float).ravel()
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise DimensionMismatchError("bias length must equal the number of rows of A")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise OtDistillError("encoder parameters must be finite")
        if self.activation not in ACTIVATIONS:
            raise OtDistillError(f"unknown activation {self.activation!r}")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weight_matrix", A)
        object.__setattr__(self, "bias", b)

    @classmethod
    def random(cls, d: int, d_f: int, activation: str = "tanh", seed: int = 0) -> "ToyEncoder":
        rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
        A = rng.standard_normal((d_f, d)) / np.sqrt(d)
        b = 0.1 * rng.standard_normal(d_f)
        return cls(A, b, activation, seed)

    @classmethod
    def identity(cls, d: int) -> "ToyEncoder":
        return cls(np.eye(d), np.zeros(d), "identity")

    @property
    def d(self) -> int:
        return self.weight_matrix.shape[1]

    @property
    def d_f(self) -> int:
        return self.weight_matrix.shape[0]

    def preactivate(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.d:
            raise DimensionMismatchError(f"input dimension {X.shape[-1]} != encoder dimension {self.d}")
        return X @ self.weight_matrix.T + self.bias

    def activate(self, Z: np.ndarray) -> np.ndarray:
        return np.tanh(Z) if self.activation == "tanh" else Z

    def activation_derivative(self, Z: np.ndarray) -> np.ndarray:
        if self.activation == "tanh":
            t = np.tanh(Z)
            return 1.0 - t * t
        return np.ones_like(Z)

    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.weight_matrix, 2))


def encoder_forward(enc: ToyEncoder, x):
    """Return ``(feature, preactivation)`` for one input or a batch of rows."""
    z = enc.preactivate(x)
    return enc.activate(z), z


def feature_loss(enc: ToyEncoder, synthetic_inputs, barycenter_atoms):
    """``sum_j |f(x_j) - b_j|^2`` and its gradient with respect to the inputs."""
    X = np.asarray(synthetic_inputs, dtype=float)
    B = np.asarray(barycenter_atoms, dtype=float)
    if X.shape[0] != B.shape[0]:
        raise CountMismatchError(f"{X.shape[0]} synthetic inputs for {B.shape[0]} atoms")
    Z = enc.preactivate(X)
    if B.shape[1] != enc.d_f:
        raise DimensionMismatchError(f"atom dimension {B.shape[1]} != feature dimension {enc.d_f}")
    r = enc.activate(Z) - B
    loss = float(np.sum(r * r))
    grad = (2.0 * r * enc.activation_derivative(Z)) @ enc.weight_matrix
    return loss, grad


def _bn_loss_and_grad_z(Z: np.ndarray, w: np.ndarray, target: ClassBNStats):
    F = FeatureTensor(Z, w)
    mean = weighted_channel_mean(F)
    var = weighted_channel_var(F)
    dm = mean - target.mean
    dv = var - target.var
    loss = float(dm @ dm + dv @ dv)
    share = (w / w.sum())[:, None]
    grad_z = 2.0 * share * (dm[None, :] + 2.0 * dv[None, :] * (Z - mean[None, :]))
    return loss, grad_z


def total_loss(enc: ToyEncoder, synthetic_inputs, weights, barycenter_atoms,
               bn_targets: Optional[ClassBNStats], lam: float):
    """Feature loss plus ``lam`` times the PCBN term for one class.

    Returns ``(loss, grad)``; the gradient is taken with respect to the
    synthetic inputs only (weights and encoder stay fixed).
    """
    loss, grad, _ = _loss_parts(enc, synthetic_inputs, weights, barycenter_atoms, bn_targets, lam)
    return loss, grad


def _loss_parts(enc, synthetic_inputs, weights, barycenter_atoms, bn_targets, lam):
    X = np.asarray(synthetic_inputs, dtype=float)
    f_loss, grad = feature_loss(enc, X, barycenter_atoms)
    bn = 0.0
    if bn_targets is not None:
        Z = enc.preactivate(X)
        w = np.asarray(weights, dtype=float)
        if w.shape != (X.shape[0],):
            raise CountMismatchError(f"{w.size} weights for {X.shape[0]} synthetic inputs")
        bn, grad_z = _bn_loss_and_grad_z(Z, w, bn_targets)
        if lam != 0:
            grad = grad + lam * (grad_z @ enc.weight_matrix)
    return f_loss + lam * bn, grad, (f_loss, bn)


@dataclass(frozen=True)
class DistillConfig:
    lam: float = 0.1
    lr: float = 0.05
    steps: int = 200
    m_per_class: int = 10
    barycenter: BarycenterConfig = field(default_factory=BarycenterConfig)
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0 or not self.lr > 0 or self.steps < 1 or self.m_per_class < 1:
            raise OtDistillError("need lam >= 0, lr > 0, steps >= 1, m_per_class >= 1")


@dataclass
class ClassDistillResult:
    label: Optional[int]
    synthetic: np.ndarray
    weights: np.ndarray
    atoms: np.ndarray
    feature_loss: float
    bn_loss: float
    total_loss: float
    loss_trace: list
    bn_stats: ClassBNStats
    barycenter: BarycenterResult


@dataclass
class DistillResult:
    classes: list

    def by_label(self) -> dict:
        return {c.label: c for c in self.classes}


def curvature_step_bound(enc: ToyEncoder) -> float:
    """``1 / (2 * 2|A|^2)``: half the inverse curvature of the identity-activation feature loss."""
    return 1.0 / (4.0 * enc.spectral_norm() ** 2)


def distill_class(real_points: DiscreteDistribution, enc: ToyEncoder,
                  config: DistillConfig) -> ClassDistillResult:
    rng = class_rng(config.seed, real_points.label)
    features, pre = encoder_forward(enc, real_points.points)
    label = 0 if real_points.label is None else real_points.label
    stats = ClassBNStats(weighted_channel_mean(FeatureTensor.uniform(pre)),
                         weighted_channel_var(FeatureTensor.uniform(pre)), label, 0)
    feat_dist = validate_distribution(features, real_points.weights, real_points.label)
    bary_cfg = replace(config.barycenter, m=config.m_per_class)
    bary = free_support_barycenter(feat_dist, bary_cfg, seed=int(rng.integers(0, 2**63)))

    X = real_points.points
    mean = real_points.mean()
    std = np.sqrt(real_points.weights @ (X - mean) ** 2)
    synth = mean + std * rng.standard_normal((config.m_per_class, real_points.d))

    trace = []
    for _ in range(config.steps):
        loss, grad = total_loss(enc, synth, bary.weights, bary.atoms, stats, config.lam)
        trace.append(loss)
        synth = synth - config.lr * grad
    loss, _, (f_part, bn_part) = _loss_parts(enc, synth, bary.weights, bary.atoms, stats, config.lam)
    trace.append(loss)
    return ClassDistillResult(real_points.label, synth, bary.weights.copy(), bary.atoms,
                              f_part, bn_part, loss, trace, stats, bary)


def distill_dataset(dataset, enc: ToyEncoder, config: DistillConfig) -> DistillResult:
    """Distill every class independently; results are ordered by label."""
    if len(dataset) == 0:
        raise OtDistillError("dataset has no classes")
    order = list(range(len(dataset)))
    if all(c.label is not None for c in dataset):
        order.sort(key=lambda i: dataset[i].label)
    return DistillResult([distill_class(dataset[i], enc, config) for i in order])
