"""Kernel ridge regression in intrinsic and empirical space.

Intrinsic space solves the (J+1) x (J+1) block system over explicit feature
rows F (one row per sample, G = F^T F, c = F^T e):

    [ G + rho*I   c ] [u]   [ F^T y ]
    [ c^T         N ] [b] = [ e^T y ]

Empirical space solves the dual stationarity equations by LU factorization,
never explicit inversion:

    w = (K + rho*I)^{-1} e
    b = (y . w) / (e . w)
    a = (K + rho*I)^{-1} (y - b e)

For a symmetric positive semidefinite K = F F^T the two routes produce the
same bias and the same scores (push-through identity). The three-side
training Gram is asymmetric; the equations above stay well-defined and are
solved verbatim, with the stationarity defect |sum(a)| recorded on the model
rather than assumed zero. Passing the symmetric surrogate K = R R^T built
from right-map rows R reproduces the intrinsic solution exactly.

Classification is by sign of the score, with 0 mapping to +1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .centroids import ClassCentroid
from .errors import (
    BiasDegeneracyError,
    ConfigError,
    DegenerateTargetError,
    ParameterError,
    PhaseMisuseError,
    ShapeError,
    SolverError,
)
from .kernels import KernelSpec, gram
from .masking import MaskedVector

MODEL_FORMAT_VERSION = 1

RESIDUAL_TOL = 1e-8

FEATURE_MAPS = ("identity", "unit", "three-side-right")


@dataclass(eq=False)
class IntrinsicModel:
    u: np.ndarray
    b: float
    rho: float
    feature_map_id: str = "identity"
    spec: KernelSpec | None = None
    centroids: dict | None = None
    selected_dims: np.ndarray | None = None
    solver_residual: float = 0.0
    degenerate_features: int = 0


@dataclass(eq=False)
class EmpiricalModel:
    a: np.ndarray
    b: float
    rho: float
    train_values: np.ndarray | None = None
    train_mask: np.ndarray | None = None
    train_labels: np.ndarray | None = None
    centroids: dict | None = None
    spec: KernelSpec | None = None
    selected_dims: np.ndarray | None = None
    solver_residual: float = 0.0
    stationarity_residual: float = 0.0


def left_feature_rows(values, mask, eps: float = 1e-12):
    """Unit rows of the zero-padded values; zero-norm rows map to zero rows.

    Returns (rows, degenerate_count)."""
    x = np.where(np.asarray(mask, dtype=bool), np.asarray(values, dtype=np.float64), 0.0)
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    deg = norms < eps
    out = np.zeros_like(x)
    np.divide(x, norms[:, None], out=out, where=~deg[:, None])
    return out, int(deg.sum())


def right_feature_rows(values, mask, labels, centroids, eps: float = 1e-12):
    """Unit rows of values + class centroid (the three-side right map)."""
    x = np.where(np.asarray(mask, dtype=bool), np.asarray(values, dtype=np.float64), 0.0)
    labels = np.asarray(labels, dtype=np.int64)
    z = np.empty_like(x)
    for label in np.unique(labels):
        if label not in centroids:
            raise ConfigError(f"no centroid for class {label:+d}")
        z[labels == label] = centroids[label].mean
    aug = x + z
    norms = np.sqrt(np.einsum("ij,ij->i", aug, aug))
    deg = norms < eps
    out = np.zeros_like(aug)
    np.divide(aug, norms[:, None], out=out, where=~deg[:, None])
    return out, int(deg.sum())


def intrinsic_feature_map(
    x: MaskedVector,
    side: str,
    centroid: ClassCentroid | None = None,
    eps: float = 1e-12,
) -> np.ndarray:
    """Explicit finite map of the three-side linear similarity.

    side="left": x / |x| over the zero-padded vector (class-free).
    side="right": (x + z) / |x + z|, which needs the sample's class centroid.
    Zero-norm inputs map to the zero vector.
    """
    if side == "left":
        n = float(np.sqrt(np.dot(x.values, x.values)))
        return np.zeros_like(x.values) if n < eps else x.values / n
    if side == "right":
        if centroid is None:
            raise PhaseMisuseError("right-side map needs the class centroid")
        if centroid.dims != x.dims:
            raise ShapeError("centroid dimension does not match the vector")
        aug = x.values + centroid.mean
        n = float(np.sqrt(np.dot(aug, aug)))
        return np.zeros_like(aug) if n < eps else aug / n
    raise ParameterError(f"side must be 'left' or 'right', got {side!r}")


def _check_targets(y):
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ParameterError("targets must be exactly +1 or -1")
    return y


def fit_intrinsic(
    features,
    y,
    rho: float,
    feature_map_id: str = "identity",
    spec: KernelSpec | None = None,
    centroids: dict | None = None,
    selected_dims=None,
    degenerate_features: int = 0,
) -> IntrinsicModel:
    """Solve the intrinsic block system over feature rows (N x J)."""
    if rho <= 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    if feature_map_id not in FEATURE_MAPS:
        raise ParameterError(f"unknown feature map {feature_map_id!r}")
    f = np.asarray(features, dtype=np.float64)
    y = _check_targets(y)
    n, j = f.shape
    if n < 2 or np.unique(y).size < 2:
        raise DegenerateTargetError(
            "intrinsic fit needs at least 2 samples with both classes present"
        )
    a = np.empty((j + 1, j + 1))
    a[:j, :j] = f.T @ f + rho * np.eye(j)
    c = f.sum(axis=0)
    a[:j, j] = c
    a[j, :j] = c
    a[j, j] = n
    rhs = np.concatenate([f.T @ y, [y.sum()]])
    try:
        sol = scipy.linalg.solve(a, rhs)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(
            f"intrinsic block system could not be solved: {exc} "
            f"(cond ~ {np.linalg.cond(a):.3e})",
            cond=float(np.linalg.cond(a)),
        ) from exc
    residual = float(
        np.linalg.norm(a @ sol - rhs) / max(np.linalg.norm(rhs), np.finfo(float).tiny)
    )
    if residual > RESIDUAL_TOL:
        raise SolverError(
            f"intrinsic solve residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e} "
            f"(cond ~ {np.linalg.cond(a):.3e})",
            cond=float(np.linalg.cond(a)),
        )
    dims = None if selected_dims is None else np.asarray(selected_dims, dtype=np.int64)
    return IntrinsicModel(
        u=sol[:j],
        b=float(sol[j]),
        rho=float(rho),
        feature_map_id=feature_map_id,
        spec=spec,
        centroids=centroids,
        selected_dims=dims,
        solver_residual=residual,
        degenerate_features=degenerate_features,
    )


def fit_empirical(
    K,
    y,
    rho: float,
    train_values=None,
    train_mask=None,
    train_labels=None,
    centroids: dict | None = None,
    spec: KernelSpec | None = None,
    selected_dims=None,
) -> EmpiricalModel:
    """Solve the dual equations over an N x N training Gram (may be asymmetric)."""
    if rho <= 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    k = np.asarray(K, dtype=np.float64)
    y = _check_targets(y)
    n = y.shape[0]
    if k.shape != (n, n):
        raise ShapeError(f"Gram shape {k.shape} does not match {n} targets")
    m = k + rho * np.eye(n)
    e = np.ones(n)
    try:
        lu = scipy.linalg.lu_factor(m)
        w = scipy.linalg.lu_solve(lu, e)
        t1 = scipy.linalg.lu_solve(lu, y)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(
            f"dual system could not be factorized: {exc} "
            f"(cond ~ {np.linalg.cond(m):.3e})",
            cond=float(np.linalg.cond(m)),
        ) from exc
    den = float(e @ w)
    if abs(den) < 1e-12 * max(1.0, np.linalg.norm(w) * np.sqrt(n)):
        raise BiasDegeneracyError(
            f"bias denominator e.(K+rho I)^-1 e = {den:.3e} is degenerate"
        )
    b = float(y @ w) / den
    a = t1 - b * w
    rhs = y - b * e
    tiny = np.finfo(float).tiny
    res_a = np.linalg.norm(m @ a - rhs) / max(np.linalg.norm(rhs), tiny)
    res_w = np.linalg.norm(m @ w - e) / np.sqrt(n)
    residual = float(max(res_a, res_w))
    if residual > RESIDUAL_TOL:
        raise SolverError(
            f"dual solve residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e} "
            f"(cond ~ {np.linalg.cond(m):.3e})",
            cond=float(np.linalg.cond(m)),
        )
    stationarity = float(abs(a.sum()) / max(1.0, np.linalg.norm(a) * np.sqrt(n)))
    dims = None if selected_dims is None else np.asarray(selected_dims, dtype=np.int64)
    return EmpiricalModel(
        a=a,
        b=b,
        rho=float(rho),
        train_values=None if train_values is None else np.asarray(train_values, dtype=np.float64),
        train_mask=None if train_mask is None else np.asarray(train_mask, dtype=bool),
        train_labels=None if train_labels is None else np.asarray(train_labels, dtype=np.int64),
        centroids=centroids,
        spec=spec,
        selected_dims=dims,
        solver_residual=residual,
        stationarity_residual=stationarity,
    )


def _restrict(values, mask, model):
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    mask = np.atleast_2d(np.asarray(mask, dtype=bool))
    if values.shape != mask.shape:
        raise ShapeError("values and mask must have identical shapes")
    if model.selected_dims is not None:
        dims = model.selected_dims
        if values.shape[1] <= int(dims.max()):
            raise ShapeError(
                f"input width {values.shape[1]} cannot be restricted by "
                f"selected dimensions up to {int(dims.max())}"
            )
        values = values[:, dims]
        mask = mask[:, dims]
    return values, mask


def predict_scores(model, values, mask):
    """Batch scores for rows of (values, mask); returns (scores, degenerate_count).

    Inputs are full-width; the model's selected dimensions are applied before
    any kernel evaluation.
    """
    values, mask = _restrict(values, mask, model)
    if isinstance(model, IntrinsicModel):
        j = model.u.shape[0]
        if values.shape[1] != j:
            raise ShapeError(f"expected {j} dims after selection, got {values.shape[1]}")
        if model.feature_map_id == "identity":
            f = np.where(mask, values, 0.0)
            deg = 0
        else:
            # Prediction always uses the class-free left (unit) map;
            # feature_map_id records what produced the training features.
            f, deg = left_feature_rows(values, mask)
        return f @ model.u + model.b, deg
    if isinstance(model, EmpiricalModel):
        if model.train_values is None or model.spec is None:
            raise ConfigError(
                "empirical model lacks training references; fit with "
                "train_values/train_mask/train_labels and spec"
            )
        if values.shape[1] != model.train_values.shape[1]:
            raise ShapeError(
                f"expected {model.train_values.shape[1]} dims after selection, "
                f"got {values.shape[1]}"
            )
        g = gram(
            values,
            mask,
            model.train_values,
            model.train_mask,
            model.spec,
            right_labels=model.train_labels,
            centroids=model.centroids,
        )
        return g.entries @ model.a + model.b, g.degenerate_count
    raise ParameterError(f"unknown model type {type(model).__name__}")


def predict(model, x: MaskedVector) -> float:
    """Score one full-width sample."""
    scores, _ = predict_scores(model, x.values[None, :], x.mask[None, :])
    return float(scores[0])


def classify(scores) -> np.ndarray:
    """Sign decision; a score of exactly 0 maps to +1."""
    return np.where(np.asarray(scores) >= 0, 1, -1).astype(np.int64)


def _centroids_to_json(centroids):
    if centroids is None:
        return None
    return {
        str(label): {
            "mean": z.mean.tolist(),
            "count": z.count.tolist(),
        }
        for label, z in sorted(centroids.items())
    }


def _centroids_from_json(obj):
    if obj is None:
        return None
    return {
        int(label): ClassCentroid(
            int(label),
            np.asarray(v["mean"], dtype=np.float64),
            np.asarray(v["count"], dtype=np.int64),
        )
        for label, v in obj.items()
    }


def _spec_to_json(spec):
    if spec is None:
        return None
    return {"family": spec.family, "p": spec.p, "tau2": spec.tau2, "eps": spec.eps}


def _spec_from_json(obj):
    if obj is None:
        return None
    return KernelSpec(**obj)


def save_model(model, path):
    """Persist a fitted model as one self-describing, byte-stable JSON file."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "rho": model.rho,
        "b": model.b,
        "kernel": _spec_to_json(model.spec),
        "selected_dims": None
        if model.selected_dims is None
        else model.selected_dims.tolist(),
        "centroids": _centroids_to_json(model.centroids),
    }
    if isinstance(model, IntrinsicModel):
        doc["model_type"] = "intrinsic"
        doc["u"] = model.u.tolist()
        doc["feature_map_id"] = model.feature_map_id
        doc["solver_residual"] = model.solver_residual
    elif isinstance(model, EmpiricalModel):
        doc["model_type"] = "empirical"
        doc["a"] = model.a.tolist()
        doc["train_values"] = model.train_values.tolist()
        doc["train_mask"] = model.train_mask.astype(int).tolist()
        doc["train_labels"] = model.train_labels.tolist()
        doc["solver_residual"] = model.solver_residual
        doc["stationarity_residual"] = model.stationarity_residual
    else:
        raise ParameterError(f"unknown model type {type(model).__name__}")
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ConfigError(f"unsupported model format version {version!r}")
    dims = doc.get("selected_dims")
    dims = None if dims is None else np.asarray(dims, dtype=np.int64)
    common = dict(
        rho=doc["rho"],
        spec=_spec_from_json(doc.get("kernel")),
        centroids=_centroids_from_json(doc.get("centroids")),
        selected_dims=dims,
    )
    if doc["model_type"] == "intrinsic":
        return IntrinsicModel(
            u=np.asarray(doc["u"], dtype=np.float64),
            b=doc["b"],
            feature_map_id=doc["feature_map_id"],
            solver_residual=doc.get("solver_residual", 0.0),
            **common,
        )
    if doc["model_type"] == "empirical":
        return EmpiricalModel(
            a=np.asarray(doc["a"], dtype=np.float64),
            b=doc["b"],
            train_values=np.asarray(doc["train_values"], dtype=np.float64),
            train_mask=np.asarray(doc["train_mask"], dtype=bool),
            train_labels=np.asarray(doc["train_labels"], dtype=np.int64),
            solver_residual=doc.get("solver_residual", 0.0),
            stationarity_residual=doc.get("stationarity_residual", 0.0),
            **common,
        )
    raise ConfigError(f"unknown model type {doc['model_type']!r}")
