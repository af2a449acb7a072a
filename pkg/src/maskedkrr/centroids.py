"""Class centroids over observed training entries.

A centroid is the per-dimension running mean of the observed entries of one
class; missing attributes are simply skipped, so no clustering is involved.
The centroid serves twice: as the third side of the three-side similarity and
as the vector of imputation values added onto a training sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .dataset import Dataset
from .errors import EmptyClassError, ShapeError
from .masking import MaskedVector


@dataclass(eq=False)
class ClassCentroid:
    """Per-class observed-entry means; count[i] = 0 flags a starved dimension
    (its mean is stored as 0)."""

    class_label: int
    mean: np.ndarray
    count: np.ndarray

    @property
    def missing_dims(self) -> np.ndarray:
        return self.count == 0

    @property
    def dims(self) -> int:
        return self.mean.shape[0]


def class_centroid(train: Dataset, label: int) -> ClassCentroid:
    """Mean over observed entries of the given class, dimension by dimension."""
    rows = train.labels == label
    if not rows.any():
        raise EmptyClassError(f"no training rows with label {label:+d}")
    mean, _, count = _backend.masked_column_moments(
        train.features[rows], train.presence[rows]
    )
    mean = np.where(count > 0, mean, 0.0)
    return ClassCentroid(int(label), mean, count)


def fit_class_centroids(train: Dataset) -> dict[int, ClassCentroid]:
    """Centroids for both classes, computed once on the training split."""
    return {label: class_centroid(train, label) for label in (1, -1)}


def centroid_augment(x: MaskedVector, z: ClassCentroid) -> np.ndarray:
    """Elementwise sum of a zero-padded vector and a class centroid.

    Observed dimensions hold value + class mean; missing dimensions receive
    the class mean alone, which is the imputation effect.
    """
    if x.dims != z.dims:
        raise ShapeError(f"dimension mismatch: {x.dims} vs {z.dims}")
    return x.values + z.mean
