"""Per-class weighted channel statistics and the PCBN regularizer.

Feature maps are N x C x H x U arrays. The aggregate operators weight
sample j by ``w_j`` and average over samples and spatial positions:

    mean_c = sum_j w_j sum_{h,u} F[j,c,h,u] / (H U sum_j w_j)
    var_c  = sum_j w_j sum_{h,u} (F[j,c,h,u] - mean_c)^2 / (H U sum_j w_j)

The variance is the biased (population) form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import OtDistillError


class ZeroTotalWeightError(OtDistillError):
    pass


class EmptyClassError(OtDistillError):
    pass


class MissingTargetError(OtDistillError):
    pass


class ShapeMismatchError(OtDistillError):
    pass


@dataclass(frozen=True)
class FeatureTensor:
    data: np.ndarray
    sample_weights: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 2:
            data = data[:, :, None, None]
        if data.ndim != 4:
            raise ShapeMismatchError(f"expected an N x C x H x U array, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise OtDistillError("feature tensor has non-finite entries")
        w = np.asarray(self.sample_weights, dtype=float).ravel()
        if w.size != data.shape[0]:
            raise ShapeMismatchError(f"{w.size} sample weights for {data.shape[0]} samples")
        if np.any(w < 0):
            raise OtDistillError("sample weights must be nonnegative")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "sample_weights", w)

    @classmethod
    def uniform(cls, data) -> "FeatureTensor":
        data = np.asarray(data, dtype=float)
        return cls(data, np.ones(data.shape[0]))

    @property
    def channels(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ClassBNStats:
    mean: np.ndarray
    var: np.ndarray
    class_label: int
    layer_index: int = 0


def _total_weight(F: FeatureTensor) -> float:
    total = float(F.sample_weights.sum())
    if not total > 0:
        raise ZeroTotalWeightError("sample weights sum to zero")
    return total


def weighted_channel_mean(F: FeatureTensor) -> np.ndarray:
    total = _total_weight(F)
    hu = F.data.shape[2] * F.data.shape[3]
    return np.einsum("j,jchu->c", F.sample_weights, F.data) / (hu * total)


def weighted_channel_var(F: FeatureTensor) -> np.ndarray:
    total = _total_weight(F)
    hu = F.data.shape[2] * F.data.shape[3]
    mean = weighted_channel_mean(F)
    dev = F.data - mean[None, :, None, None]
    return np.einsum("j,jchu->c", F.sample_weights, dev * dev) / (hu * total)


def compute_class_bn_stats(real_features) -> list[ClassBNStats]:
    """Statistics for every (class, layer) with uniform sample weights.

    ``real_features`` maps class label -> list of per-layer arrays (or
    FeatureTensors, whose weights are ignored).
    """
    stats = []
    for label in sorted(real_features):
        layers = real_features[label]
        for l, layer in enumerate(layers):
            data = layer.data if isinstance(layer, FeatureTensor) else np.asarray(layer, dtype=float)
            if data.shape[0] == 0:
                raise EmptyClassError(f"class {label} has no samples")
            F = FeatureTensor.uniform(data)
            stats.append(ClassBNStats(weighted_channel_mean(F), weighted_channel_var(F), label, l))
    return stats


def _index_targets(targets):
    return {(t.class_label, t.layer_index): t for t in targets}


def bn_regularization_loss(synthetic, targets) -> float:
    """Sum over (class, layer) of squared gaps in weighted mean and variance.

    ``synthetic`` maps class label -> list of per-layer FeatureTensors
    carrying the transport weights.
    """
    index = _index_targets(targets)
    total = 0.0
    for label in sorted(synthetic):
        for l, F in enumerate(synthetic[label]):
            t = index.get((label, l))
            if t is None:
                raise MissingTargetError(f"no target statistics for class {label}, layer {l}")
            if t.mean.shape != (F.channels,) or t.var.shape != (F.channels,):
                raise ShapeMismatchError(f"channel count mismatch for class {label}, layer {l}")
            dm = weighted_channel_mean(F) - t.mean
            dv = weighted_channel_var(F) - t.var
            total += float(dm @ dm + dv @ dv)
    return total


def write_feature_tensor(path, F) -> None:
    """ASCII header ``N C H U`` then little-endian float64 payload in C order."""
    data = F.data if isinstance(F, FeatureTensor) else np.asarray(F, dtype=float)
    if data.ndim != 4:
        raise ShapeMismatchError(f"expected 4 dimensions, got {data.ndim}")
    with open(path, "wb") as fh:
        fh.write(("%d %d %d %d\n" % data.shape).encode("ascii"))
        fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())


def read_feature_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        payload = fh.read()
    if len(header) != 4:
        raise ShapeMismatchError(f"bad feature tensor header {header!r}")
    shape = tuple(int(v) for v in header)
    data = np.frombuffer(payload, dtype="<f8")
    if data.size != int(np.prod(shape)):
        raise ShapeMismatchError(f"payload has {data.size} values, header says {shape}")
    return data.reshape(shape).astype(float)
