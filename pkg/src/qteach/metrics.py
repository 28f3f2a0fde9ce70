"""Evaluation tools: prediction maps, relative entropy, accuracy.

A prediction map is the model output evaluated on a dense square grid of
input points; it is the object the relative-entropy comparison works on.
To compare two maps they are first offset and renormalized into strictly
positive distributions, then S(P||Q) = sum p ln(p/q) with P the teacher
map and Q the student map (S is asymmetric; this order is fixed
everywhere).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import CircuitSpec, forward_batch
from .errors import ConfigurationError, StructuralError
from .training import binarize

#: offset floor: keeps the normalized distribution strictly positive even
#: when the offset map is zero everywhere (constant maps)
EPSILON = 1e-9


@dataclass(frozen=True)
class PredictionMap:
    """Dense grid of model outputs over [lo, hi]^2.

    values[i, j] is the output at (axis[i], axis[j]) where axis is the
    inclusive linspace of length ``resolution``.
    """

    resolution: int
    lo: float
    hi: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.shape != (self.resolution, self.resolution):
            raise StructuralError(
                f"values must be {self.resolution}x{self.resolution}, got {self.values.shape}"
            )
        if np.any(np.abs(self.values) > 1.0):
            raise StructuralError("prediction-map values must lie in [-1, 1]")

    def axis(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.resolution)

    def same_grid(self, other: "PredictionMap") -> bool:
        return (self.resolution, self.lo, self.hi) == (other.resolution, other.lo, other.hi)


def prediction_map(circuit: CircuitSpec, w: np.ndarray, resolution: int,
                   bounds: tuple[float, float] = (-np.pi, np.pi)) -> PredictionMap:
    """Evaluate the model on a resolution x resolution grid."""
    if resolution < 2:
        raise ConfigurationError(f"resolution must be >= 2, got {resolution}")
    lo, hi = float(bounds[0]), float(bounds[1])
    axis = np.linspace(lo, hi, resolution)
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    points = np.column_stack([x1.ravel(), x2.ravel()])
    values = forward_batch(circuit, points, w).reshape(resolution, resolution)
    return PredictionMap(resolution, lo, hi, values)


def normalize_to_distribution(pmap: PredictionMap) -> np.ndarray:
    """Offset map values into a strictly positive distribution summing to 1.

    The offset is the map's own minimum (plus the EPSILON floor), so the
    distribution reflects the map's relief rather than its absolute
    level; constant maps normalize to uniform.
    """
    flat = pmap.values.ravel()
    shifted = flat - flat.min() + EPSILON
    return shifted / shifted.sum()


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """sum p ln(p/q) for two strictly positive distributions."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise StructuralError(f"distribution shape mismatch: {p.shape} vs {q.shape}")
    return float(np.sum(p * np.log(p / q)))


def relative_entropy(teacher_map: PredictionMap, student_map: PredictionMap) -> float:
    """S(P||Q) = sum p ln(p/q), P = teacher, Q = student; >= 0."""
    if not teacher_map.same_grid(student_map):
        raise StructuralError(
            f"grid mismatch: {(teacher_map.resolution, teacher_map.lo, teacher_map.hi)} vs "
            f"{(student_map.resolution, student_map.lo, student_map.hi)}"
        )
    return kl_divergence(normalize_to_distribution(teacher_map), normalize_to_distribution(student_map))


def accuracy(predictions: Sequence[float], y_binary: Sequence[float]) -> float:
    """Fraction of points where sign(prediction) matches the +-1 label."""
    predictions = np.asarray(predictions, dtype=float)
    y_binary = np.asarray(y_binary, dtype=float)
    if predictions.shape != y_binary.shape:
        raise StructuralError(
            f"length mismatch: {predictions.shape} predictions vs {y_binary.shape} labels"
        )
    return float(np.mean(binarize(predictions) == y_binary))


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------

def write_prediction_map(pmap: PredictionMap, path) -> None:
    """Header block (resolution, lo, hi) followed by the full-precision matrix."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["resolution", "lo", "hi"])
        writer.writerow([pmap.resolution, repr(float(pmap.lo)), repr(float(pmap.hi))])
        for row in pmap.values:
            writer.writerow([repr(float(v)) for v in row])


def read_prediction_map(path) -> PredictionMap:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3 or rows[0] != ["resolution", "lo", "hi"]:
        raise StructuralError(f"{path} is not a prediction-map CSV")
    resolution = int(rows[1][0])
    lo, hi = float(rows[1][1]), float(rows[1][2])
    values = np.array([[float(v) for v in row] for row in rows[2:]])
    return PredictionMap(resolution, lo, hi, values)
