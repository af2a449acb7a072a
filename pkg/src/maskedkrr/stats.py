"""Class-conditional moments over observed entries and discriminant-ratio
feature ranking.

Moments use the streaming update

    mean[n+1] = mean[n] + (eta - mean[n]) / (n + 1)
    M2[n+1]   = M2[n] + (eta - mean[n]) * (eta - mean[n+1])

with sample variance M2 / (n - 1), undefined (NaN) below two observations.
Appending eta equal to the running mean leaves the mean unchanged and shrinks
the variance by (n-1)/n, which is why filling holes with class means cannot
lower the discriminant ratio, whereas zero-filling a dimension whose mean is
away from zero drags the ratio down.

The per-dimension discriminant ratio of two classes is

    f[t] = (mean_pos[t] - mean_neg[t])^2 / (var_pos[t] + var_neg[t] + eps)

computed over observed entries only; dimensions where either class has fewer
than two observations score 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .dataset import Dataset
from .errors import ParameterError

FDR_EPS = 1e-12


@dataclass(frozen=True)
class RunningMoments:
    """Streaming state for one dimension: running mean, M2, and count."""

    mean: float = 0.0
    m2: float = 0.0
    count: int = 0

    @property
    def var(self) -> float:
        if self.count < 2:
            return float("nan")
        return self.m2 / (self.count - 1)


@dataclass(eq=False)
class PartialMoments:
    """Per-dimension mean/variance/count over observed entries of one class.

    mean is NaN where count = 0 and var is NaN where count < 2; undefined
    moments are never silently zero.
    """

    mean: np.ndarray
    var: np.ndarray
    count: np.ndarray


@dataclass(eq=False)
class FdrReport:
    f: np.ndarray
    ranked_dims: np.ndarray


def incremental_mean(mu: float, n: int, eta: float) -> float:
    """One mean update; returns eta itself at n = 0."""
    if n < 0:
        raise ParameterError(f"count must be nonnegative, got {n}")
    if n == 0:
        return float(eta)
    return mu + (eta - mu) / (n + 1)


def incremental_moments(state: RunningMoments, eta: float) -> RunningMoments:
    """One streaming mean/variance update."""
    n = state.count + 1
    delta = eta - state.mean
    mean = state.mean + delta / n
    m2 = state.m2 + delta * (eta - mean)
    return RunningMoments(mean, m2, n)


def stream_moments(values) -> RunningMoments:
    """Run the streaming update along a sequence (compiled when available)."""
    mean, m2, count = _backend.welford_stream(values)
    return RunningMoments(float(mean), float(m2), int(count))


def partial_moments(d: Dataset, label: int) -> PartialMoments:
    """Per-dimension moments of one class, missing entries contributing nothing."""
    rows = d.labels == label
    mean, m2, count = _backend.masked_column_moments(
        d.features[rows], d.presence[rows]
    )
    mean = np.where(count > 0, mean, np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        var = np.where(count >= 2, m2 / np.maximum(count - 1, 1), np.nan)
    return PartialMoments(mean, var, count)


def partial_fdr(pos: PartialMoments, neg: PartialMoments, eps: float = FDR_EPS) -> FdrReport:
    """Rank dimensions by squared class-mean gap over summed class variances.

    Ties rank lower dimension index first.
    """
    if eps <= 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    valid = (pos.count >= 2) & (neg.count >= 2)
    f = np.zeros(pos.mean.shape[0])
    with np.errstate(invalid="ignore"):
        gap = pos.mean - neg.mean
        raw = gap * gap / (pos.var + neg.var + eps)
    f[valid] = raw[valid]
    ranked = np.argsort(-f, kind="stable")
    return FdrReport(f, ranked)


def select_top_k(r: FdrReport, k: int) -> np.ndarray:
    """First k ranked dimensions."""
    m = r.ranked_dims.shape[0]
    if not 1 <= k <= m:
        raise ParameterError(f"k must be in [1, {m}], got {k}")
    return r.ranked_dims[:k].copy()
