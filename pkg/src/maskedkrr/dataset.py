"""Loading, encoding, and splitting of labeled datasets with missing entries.

A dataset keeps three aligned arrays: feature values, a boolean presence
matrix, and labels in {+1, -1}. Cells that are missing always store the value
0 next to presence=False, so the zero-padded view of a row is simply the row
itself; downstream code never reads a missing value except through a mask.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSplitError,
    LabelCardinalityError,
    ParameterError,
    ParseError,
    ShapeError,
)

DEFAULT_MISSING_TOKENS = ("", "?", "NaN")

_SPLIT_RETRIES = 100


@dataclass(eq=False)
class Dataset:
    """N x M feature matrix with per-entry presence and labels in {+1, -1}."""

    features: np.ndarray
    presence: np.ndarray
    labels: np.ndarray
    dim_names: list[str] | None = None
    label_names: dict[int, str] | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.presence = np.asarray(self.presence, dtype=bool)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.presence.shape != self.features.shape:
            raise ShapeError(
                f"features {self.features.shape} and presence "
                f"{self.presence.shape} must be identical 2-D shapes"
            )
        if self.labels.shape != (self.features.shape[0],):
            raise ShapeError(
                f"labels length {self.labels.shape} does not match "
                f"{self.features.shape[0]} rows"
            )
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise ParameterError("labels must be exactly +1 or -1")
        # Missing cells hold value 0 so the zero-padded view is free.
        self.features = np.where(self.presence, self.features, 0.0)
        for arr in (self.features, self.presence, self.labels):
            arr.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_dims(self) -> int:
        return self.features.shape[1]

    def take_rows(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(
            self.features[idx],
            self.presence[idx],
            self.labels[idx],
            self.dim_names,
            self.label_names,
        )

    def restrict(self, dims) -> "Dataset":
        """New dataset keeping only the given feature columns, in order."""
        dims = np.asarray(dims, dtype=np.int64)
        names = None
        if self.dim_names is not None:
            names = [self.dim_names[i] for i in dims]
        return Dataset(
            self.features[:, dims],
            self.presence[:, dims],
            self.labels,
            names,
            self.label_names,
        )

    def class_rows(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ParameterError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )


def _parse_cell(token: str, missing: frozenset, row: int, col: int):
    if token.strip() in missing or token in missing:
        return 0.0, False
    try:
        return float(token), True
    except ValueError:
        raise ParseError(
            f"row {row}, column {col}: cannot parse {token!r} as a number"
        ) from None


def load_csv(
    path,
    label_column: int,
    missing_tokens=DEFAULT_MISSING_TOKENS,
    positive_label: str | None = None,
    has_header: bool = False,
) -> Dataset:
    """Parse a comma-delimited file into a Dataset.

    Cells matching a missing token become presence=False with value 0. The
    label column must contain exactly two distinct values; ``positive_label``
    maps to +1 and the other value to -1 (first-seen value when omitted).
    """
    missing = frozenset(missing_tokens)
    values, present, raw_labels = [], [], []
    dim_names = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        width = None
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if width is None:
                width = len(row)
                if not -width <= label_column < width:
                    raise ParameterError(
                        f"label column {label_column} out of range for "
                        f"{width} columns"
                    )
            elif len(row) != width:
                raise ParseError(
                    f"row {lineno}: expected {width} columns, got {len(row)}"
                )
            if has_header and lineno == 1:
                dim_names = [
                    c for i, c in enumerate(row) if i != label_column % width
                ]
                continue
            lc = label_column % width
            raw_labels.append(row[lc])
            vals, pres = [], []
            for col, token in enumerate(row):
                if col == lc:
                    continue
                v, p = _parse_cell(token, missing, lineno, col + 1)
                vals.append(v)
                pres.append(p)
            values.append(vals)
            present.append(pres)
    if not values:
        raise ParseError(f"{path}: no data rows")
    distinct = list(dict.fromkeys(raw_labels))
    if len(distinct) != 2:
        raise LabelCardinalityError(
            f"label column must have exactly 2 distinct values, got "
            f"{len(distinct)}: {distinct[:5]}"
        )
    if positive_label is None:
        positive_label = distinct[0]
    elif positive_label not in distinct:
        raise LabelCardinalityError(
            f"positive label {positive_label!r} not among labels {distinct}"
        )
    negative_label = next(v for v in distinct if v != positive_label)
    labels = np.where(np.asarray(raw_labels) == positive_label, 1, -1)
    return Dataset(
        np.asarray(values, dtype=np.float64),
        np.asarray(present, dtype=bool),
        labels,
        dim_names,
        {1: positive_label, -1: negative_label},
    )


def load_feature_csv(path, missing_tokens=DEFAULT_MISSING_TOKENS, has_header=False):
    """Parse an unlabeled feature CSV into (values, presence, dim_names)."""
    missing = frozenset(missing_tokens)
    values, present = [], []
    dim_names = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        width = None
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(
                    f"row {lineno}: expected {width} columns, got {len(row)}"
                )
            if has_header and lineno == 1:
                dim_names = list(row)
                continue
            vals, pres = [], []
            for col, token in enumerate(row):
                v, p = _parse_cell(token, missing, lineno, col + 1)
                vals.append(v)
                pres.append(p)
            values.append(vals)
            present.append(pres)
    if not values:
        raise ParseError(f"{path}: no data rows")
    return (
        np.asarray(values, dtype=np.float64),
        np.asarray(present, dtype=bool),
        dim_names,
    )


def split(d: Dataset, s: SplitSpec) -> tuple[Dataset, Dataset]:
    """Seeded random row partition with |train| = round(fraction * N).

    Redraws (bounded) until the training side contains at least one row of
    each label; unsatisfiable inputs raise DegenerateSplitError.
    """
    if d.n_rows < 2:
        raise DegenerateSplitError("need at least 2 rows to split")
    n_train = int(round(s.train_fraction * d.n_rows))
    rng = np.random.default_rng(s.seed)
    wanted = set(np.unique(d.labels))
    for _ in range(_SPLIT_RETRIES):
        perm = rng.permutation(d.n_rows)
        train_idx, test_idx = perm[:n_train], perm[n_train:]
        if set(np.unique(d.labels[train_idx])) == wanted and len(wanted) == 2:
            return d.take_rows(np.sort(train_idx)), d.take_rows(np.sort(test_idx))
    raise DegenerateSplitError(
        f"could not draw a train split containing both classes after "
        f"{_SPLIT_RETRIES} tries (labels present: {sorted(wanted)})"
    )
