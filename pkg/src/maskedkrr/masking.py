"""Presence masks, zero-padding, the double mask, and synthetic missingness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import ParameterError, ShapeError


@dataclass(eq=False)
class MaskedVector:
    """A vector together with its presence mask, stored zero-padded.

    values[t] is forced to 0 wherever mask[t] is False, so the stored vector
    is already the zero-padded form used by every similarity.
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.values.ndim != 1 or self.values.shape != self.mask.shape:
            raise ShapeError(
                f"values {self.values.shape} and mask {self.mask.shape} "
                "must be equal-length vectors"
            )
        self.values = np.where(self.mask, self.values, 0.0)
        self.values.setflags(write=False)
        self.mask.setflags(write=False)

    @property
    def dims(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class MissingSpec:
    rate: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ParameterError(f"missing rate must be in [0, 1), got {self.rate}")


def to_masked(values, mask) -> MaskedVector:
    """Zero-pad ``values`` by ``mask``."""
    values = np.asarray(values, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if values.shape != mask.shape:
        raise ShapeError(f"length mismatch: {values.shape} vs {mask.shape}")
    return MaskedVector(values, mask)


def double_mask(a: MaskedVector, b: MaskedVector) -> tuple[MaskedVector, MaskedVector]:
    """Restrict both vectors to the intersection of their observed supports.

    Output values agree with the inputs exactly on the common support and are
    0 elsewhere; both outputs carry the same (intersected) mask.
    """
    if a.dims != b.dims:
        raise ShapeError(f"dimension mismatch: {a.dims} vs {b.dims}")
    common = a.mask & b.mask
    return MaskedVector(a.values, common), MaskedVector(b.values, common)


def inject_missing(d: Dataset, spec: MissingSpec) -> Dataset:
    """Knock out each observed cell independently with probability rate.

    Cells already missing stay missing. Each row draws from its own stream
    spawned off the seed, so the pattern is reproducible and independent of
    how rows are processed.
    """
    if spec.rate == 0.0:
        return d
    keep = np.empty(d.presence.shape, dtype=bool)
    children = np.random.SeedSequence(spec.seed).spawn(d.n_rows)
    m = d.n_dims
    for i, child in enumerate(children):
        keep[i] = np.random.default_rng(child).random(m) >= spec.rate
    presence = d.presence & keep
    return Dataset(d.features, presence, d.labels, d.dim_names, d.label_names)
