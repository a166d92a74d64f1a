"""Text formats: point-set CSV, plan CSV, grid-density CSV and weights CSV.

All floats are written with 17 significant digits so values round-trip.
"""

from __future__ import annotations

import csv
import json
from collections import OrderedDict

import numpy as np

from .core import DiscreteDistribution, OtDistillError, validate_distribution


class CsvFormatError(OtDistillError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_points_csv(path, distributions, include_weights: bool = True) -> None:
    """One row per point: ``label,weight,x0,...`` (weight column optional)."""
    d = distributions[0].d
    header = ["label"] + (["weight"] if include_weights else []) + [f"x{c}" for c in range(d)]
    lines = [",".join(header)]
    total = len(distributions)
    for dist in distributions:
        label = "" if dist.label is None else str(dist.label)
        for x, w in zip(dist.points, dist.weights):
            row = [label]
            if include_weights:
                row.append(fmt(w / total))
            row.extend(fmt(v) for v in x)
            lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_rows(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    coords = [h for h in header if h.startswith("x")]
    expected = [f"x{c}" for c in range(len(coords))]
    if coords != expected or not coords:
        raise CsvFormatError(f"{path}: coordinate columns must be x0..x{{d-1}}, got {coords}")
    col = {h: k for k, h in enumerate(header)}
    labels, weights, points = [], [], []
    for r in rows:
        if len(r) != len(header):
            raise CsvFormatError(f"{path}: row has {len(r)} fields, header has {len(header)}")
        lab = r[col["label"]].strip() if "label" in col else ""
        labels.append(int(lab) if lab else None)
        if "weight" in col:
            weights.append(float(r[col["weight"]]))
        points.append([float(r[col[h]]) for h in coords])
    if not points:
        raise CsvFormatError(f"{path}: no data rows")
    w = np.array(weights) if "weight" in col else None
    return labels, w, np.array(points, dtype=float)


def read_points_csv(path) -> DiscreteDistribution:
    """The whole file as one distribution (labels ignored)."""
    _, w, pts = _read_rows(path)
    return validate_distribution(pts, w)


def read_labeled_csv(path) -> list[DiscreteDistribution]:
    """One distribution per label, in ascending label order; row order kept.

    Weights, when present, are renormalized within each label group.
    """
    labels, w, pts = _read_rows(path)
    groups = OrderedDict()
    for k, lab in enumerate(labels):
        groups.setdefault(lab, []).append(k)
    keys = sorted(groups, key=lambda v: (v is None, v if v is not None else 0))
    out = []
    for lab in keys:
        idx = np.array(groups[lab])
        gw = None
        if w is not None:
            gw = w[idx]
            s = gw.sum()
            if not s > 0:
                raise CsvFormatError(f"label {lab} has zero total weight")
            gw = gw / s
        out.append(validate_distribution(pts[idx], gw, lab))
    return out


def write_plan_csv(path, plan: np.ndarray) -> None:
    lines = ["i,j,mass"]
    for i, j in zip(*np.nonzero(plan > 0)):
        lines.append(f"{i},{j},{fmt(plan[i, j])}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_grid_csv(path, grid_axis: np.ndarray, density: np.ndarray) -> None:
    """Rows ``x,y,density`` with x varying slowest."""
    lines = ["x,y,density"]
    for ix, x in enumerate(grid_axis):
        for iy, y in enumerate(grid_axis):
            lines.append(f"{fmt(x)},{fmt(y)},{fmt(density[ix, iy])}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid_csv(path) -> np.ndarray:
    """Inverse of :func:`write_grid_csv`; returns the size x size density."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    size = int(round(np.sqrt(data.shape[0])))
    if size * size != data.shape[0]:
        raise CsvFormatError(f"{path}: {data.shape[0]} rows is not a square grid")
    return data[:, 2].reshape(size, size)


def write_weights_csv(path, weights) -> None:
    lines = ["weight"] + [fmt(w) for w in np.asarray(weights, dtype=float)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_weights_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=1)


def dump_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
