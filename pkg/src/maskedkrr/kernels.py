"""Similarity functions for incomplete vectors and Gram-matrix assembly.

Three groups of similarities:

* plain cosine over zero-padded vectors;
* masked partial similarities (``mpc`` and its Pearson variant ``mpp``),
  which compare two vectors only on the intersection of their observed
  supports (the double mask);
* three-side similarities (the ``mpt-*`` family), which compare a
  zero-padded left vector against a right training vector densified by
  adding its class centroid:

      k(a, b) = a . (b + z) / (|a| |b + z|),   z = centroid of b's class.

  The centroid fills the right side's holes (imputation) and anchors the
  similarity to the class, so no pairwise double mask is applied; the left
  side keeps its zeros. Because z depends on the *right* argument's class,
  these similarities are asymmetric and so are their Gram matrices, even
  with left = right.

Polynomial and RBF lifts reuse the cosine-like base value:

    poly: (1 + base / tau2)^p        rbf: exp(-(1 - base) / tau2)

where the rbf form is the squared unit-vector distance written out. During
bulk assembly any pair whose relevant norm falls below ``eps`` contributes
entry 0 and increments the Gram's degeneracy tally, for every family; an
all-missing row therefore cannot abort a large run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .centroids import ClassCentroid
from .dataset import Dataset
from .errors import ConfigError, ParameterError, PhaseMisuseError, ShapeError
from .masking import MaskedVector, double_mask

FAMILIES = (
    "cosine",
    "mpc",
    "mpp",
    "mpt-linear",
    "mpt-poly",
    "mpt-rbf",
    "masked-poly",
    "masked-rbf",
)

CENTROID_FAMILIES = ("mpp", "mpt-linear", "mpt-poly", "mpt-rbf")


@dataclass(frozen=True)
class KernelSpec:
    family: str = "mpt-linear"
    p: int = 3
    tau2: float = 1.0
    eps: float = 1e-12

    def __post_init__(self):
        fam = self.family.strip().lower().replace("_", "-")
        if fam not in FAMILIES:
            raise ParameterError(
                f"unknown kernel family {self.family!r}; choose from {FAMILIES}"
            )
        object.__setattr__(self, "family", fam)
        if not (isinstance(self.p, (int, np.integer)) and self.p >= 1):
            raise ParameterError(f"p must be an integer >= 1, got {self.p!r}")
        if not self.tau2 > 0:
            raise ParameterError(f"tau2 must be positive, got {self.tau2}")
        if not self.eps > 0:
            raise ParameterError(f"eps must be positive, got {self.eps}")


@dataclass(eq=False)
class GramMatrix:
    """Rectangular left x right kernel evaluations, asymmetric in general."""

    entries: np.ndarray
    left_ids: np.ndarray
    right_ids: np.ndarray
    spec: KernelSpec
    degenerate_count: int = 0


def _check_pair(a: MaskedVector, b: MaskedVector):
    if a.dims != b.dims:
        raise ShapeError(f"dimension mismatch: {a.dims} vs {b.dims}")


def _norm(v) -> float:
    return float(np.sqrt(np.dot(v, v)))


def cosine(a: MaskedVector, b: MaskedVector, eps: float = 1e-12) -> float:
    """Cosine of the raw zero-padded vectors; 0 when either norm < eps."""
    _check_pair(a, b)
    na, nb = _norm(a.values), _norm(b.values)
    if na < eps or nb < eps:
        return 0.0
    return float(np.dot(a.values, b.values) / (na * nb))


def mpc(a: MaskedVector, b: MaskedVector, eps: float = 1e-12) -> float:
    """Cosine restricted to the common observed support of the pair."""
    da, db = double_mask(a, b)
    return cosine(da, db, eps)


def mpp(
    a: MaskedVector,
    b: MaskedVector,
    zr: ClassCentroid | None,
    zq: ClassCentroid | None,
    eps: float = 1e-12,
) -> float:
    """Pearson-style similarity: cosine of centroid-centered deviations on the
    common support. Needs both samples' class centroids, so training phase only."""
    if zr is None or zq is None:
        raise PhaseMisuseError(
            "mpp needs class centroids for both samples; it is a "
            "training-phase similarity"
        )
    _check_pair(a, b)
    if zr.dims != a.dims or zq.dims != b.dims:
        raise ShapeError("centroid dimension does not match the vectors")
    common = a.mask & b.mask
    dev_a = np.where(common, a.values - zr.mean, 0.0)
    dev_b = np.where(common, b.values - zq.mean, 0.0)
    na, nb = _norm(dev_a), _norm(dev_b)
    if na < eps or nb < eps:
        return 0.0
    return float(np.dot(dev_a, dev_b) / (na * nb))


def mpt_linear(
    a: MaskedVector, b: MaskedVector, zq: ClassCentroid, eps: float = 1e-12
) -> float:
    """Three-side cosine: left zero-padded vector against right vector plus
    its class centroid. The left argument's class may be unknown."""
    _check_pair(a, b)
    if zq.dims != b.dims:
        raise ShapeError("centroid dimension does not match the vectors")
    right = b.values + zq.mean
    na, nr = _norm(a.values), _norm(right)
    if na < eps or nr < eps:
        return 0.0
    return float(np.dot(a.values, right) / (na * nr))


def mpt_poly(
    a: MaskedVector,
    b: MaskedVector,
    zq: ClassCentroid,
    p: int = 3,
    tau2: float = 1.0,
    eps: float = 1e-12,
) -> float:
    """Polynomial lift (1 + base/tau2)^p of the three-side cosine."""
    base = mpt_linear(a, b, zq, eps)
    return (1.0 + base / tau2) ** p


def mpt_rbf(
    a: MaskedVector,
    b: MaskedVector,
    zq: ClassCentroid,
    tau2: float = 1.0,
    eps: float = 1e-12,
) -> float:
    """RBF over the unit directions of the two three-side arguments.

    Evaluates exp(-|u - v|^2 / (2 tau2)) with u, v the normalized arguments;
    zero-norm arguments yield 0.
    """
    _check_pair(a, b)
    if zq.dims != b.dims:
        raise ShapeError("centroid dimension does not match the vectors")
    right = b.values + zq.mean
    na, nr = _norm(a.values), _norm(right)
    if na < eps or nr < eps:
        return 0.0
    diff = a.values / na - right / nr
    return float(np.exp(-np.dot(diff, diff) / (2.0 * tau2)))


def masked_poly(
    a: MaskedVector,
    b: MaskedVector,
    p: int = 3,
    tau2: float = 1.0,
    eps: float = 1e-12,
) -> float:
    """Polynomial lift of the double-masked cosine (pairwise baseline)."""
    return (1.0 + mpc(a, b, eps) / tau2) ** p


def masked_rbf(
    a: MaskedVector, b: MaskedVector, tau2: float = 1.0, eps: float = 1e-12
) -> float:
    """RBF over the unit directions of the double-masked pair; 0 when the
    common support drives either norm below eps."""
    da, db = double_mask(a, b)
    na, nb = _norm(da.values), _norm(db.values)
    if na < eps or nb < eps:
        return 0.0
    diff = da.values / na - db.values / nb
    return float(np.exp(-np.dot(diff, diff) / (2.0 * tau2)))


def _centroid_rows(centroids, labels, dims) -> np.ndarray:
    """Stack centroid means row-wise following a label vector."""
    out = np.empty((labels.shape[0], dims))
    seen = np.unique(labels)
    for label in seen:
        if label not in centroids:
            raise ConfigError(f"no centroid for class {label:+d}")
        z = centroids[label]
        if z.dims != dims:
            raise ShapeError("centroid dimension does not match the samples")
        out[labels == label] = z.mean
    return out


def _lift(family: str, base: np.ndarray, degenerate: np.ndarray, spec: KernelSpec):
    if family.endswith("-poly"):
        lifted = (1.0 + base / spec.tau2) ** spec.p
    elif family.endswith("-rbf"):
        lifted = np.minimum(np.exp(-(1.0 - base) / spec.tau2), 1.0)
    else:
        lifted = base
    return np.where(degenerate, 0.0, lifted)


def gram(
    left_values,
    left_mask,
    right_values,
    right_mask,
    spec: KernelSpec,
    right_labels=None,
    centroids=None,
    left_labels=None,
    left_ids=None,
    right_ids=None,
) -> GramMatrix:
    """Assemble K[i, j] = k(left_i, right_j, centroid of right_j's class).

    ``right_labels`` and ``centroids`` are required for the centroid-based
    families; ``mpp`` additionally needs ``left_labels`` (training phase).
    Entries touching a below-eps norm are 0 and counted in the degeneracy
    tally. Deterministic regardless of evaluation order.
    """
    xl = np.ascontiguousarray(left_values, dtype=np.float64)
    ml = np.ascontiguousarray(left_mask, dtype=bool)
    xr = np.ascontiguousarray(right_values, dtype=np.float64)
    mr = np.ascontiguousarray(right_mask, dtype=bool)
    if xl.shape != ml.shape or xr.shape != mr.shape:
        raise ShapeError("values and masks must have identical shapes")
    if xl.shape[1] != xr.shape[1]:
        raise ShapeError(
            f"left dims {xl.shape[1]} != right dims {xr.shape[1]}"
        )
    xl = np.where(ml, xl, 0.0)
    xr = np.where(mr, xr, 0.0)
    m = xl.shape[1]
    fam = spec.family
    eps = spec.eps

    if fam in CENTROID_FAMILIES:
        if right_labels is None or centroids is None:
            raise ConfigError(f"{fam} needs right_labels and centroids")
        right_labels = np.asarray(right_labels, dtype=np.int64)

    if fam == "cosine":
        s = xl @ xr.T
        nl = np.sqrt(np.einsum("ij,ij->i", xl, xl))
        nr = np.sqrt(np.einsum("ij,ij->i", xr, xr))
        deg = (nl < eps)[:, None] | (nr < eps)[None, :]
        base = np.zeros_like(s)
        np.divide(s, np.outer(nl, nr), out=base, where=~deg)
        entries = _lift(fam, base, deg, spec)
    elif fam in ("mpc", "masked-poly", "masked-rbf"):
        s, l2, r2 = _backend.masked_dot_norms(xl, ml, xr, mr)
        nl = np.sqrt(l2)
        nr = np.sqrt(r2)
        deg = (nl < eps) | (nr < eps)
        base = np.zeros_like(s)
        np.divide(s, nl * nr, out=base, where=~deg)
        entries = _lift(fam, base, deg, spec)
    elif fam == "mpp":
        if left_labels is None:
            raise PhaseMisuseError(
                "mpp Gram assembly needs left-side class labels; it is a "
                "training-phase similarity"
            )
        left_labels = np.asarray(left_labels, dtype=np.int64)
        zl = _centroid_rows(centroids, left_labels, m)
        zr = _centroid_rows(centroids, right_labels, m)
        ac = np.where(ml, xl - zl, 0.0)
        bc = np.where(mr, xr - zr, 0.0)
        s, l2, r2 = _backend.masked_dot_norms(ac, ml, bc, mr)
        nl = np.sqrt(l2)
        nr = np.sqrt(r2)
        deg = (nl < eps) | (nr < eps)
        base = np.zeros_like(s)
        np.divide(s, nl * nr, out=base, where=~deg)
        entries = _lift(fam, base, deg, spec)
    else:  # mpt-linear / mpt-poly / mpt-rbf
        z = _centroid_rows(centroids, right_labels, m)
        right = xr + z
        s = xl @ right.T
        nl = np.sqrt(np.einsum("ij,ij->i", xl, xl))
        nr = np.sqrt(np.einsum("ij,ij->i", right, right))
        deg = (nl < eps)[:, None] | (nr < eps)[None, :]
        base = np.zeros_like(s)
        np.divide(s, np.outer(nl, nr), out=base, where=~deg)
        entries = _lift(fam, base, deg, spec)

    if left_ids is None:
        left_ids = np.arange(xl.shape[0])
    if right_ids is None:
        right_ids = np.arange(xr.shape[0])
    return GramMatrix(
        entries,
        np.asarray(left_ids),
        np.asarray(right_ids),
        spec,
        int(np.count_nonzero(deg)),
    )


def gram_datasets(
    left: Dataset, right: Dataset, centroids, spec: KernelSpec
) -> GramMatrix:
    """Gram between two datasets; right-side labels come from ``right``."""
    return gram(
        left.features,
        left.presence,
        right.features,
        right.presence,
        spec,
        right_labels=right.labels,
        centroids=centroids,
        left_labels=left.labels,
    )
