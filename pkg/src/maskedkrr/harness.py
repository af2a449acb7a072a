"""Experiment runner: masking sweeps, train/test modes, accuracy tables.

A run walks the grid (mode, missing rate, seed). Each cell splits the data
80/20 (configurable), optionally subsamples, injects synthetic missingness
into the training side when the mode starts with I and into the testing side
when it ends with I (with distinct derived seeds, so the two masks never
coincide), ranks dimensions when selection is active, fits centroids and a
model on the training side, and scores the testing side.

Derived seeds are a stable hash of (master seed, rate index, mode, phase),
so a report is a pure function of its config: the JSON report is
byte-identical across runs. Wall-clock timings are volatile by nature and
are therefore carried only in the per-cell CSV, not in the JSON report.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._backend import backend_name
from .centroids import fit_class_centroids
from .dataset import DEFAULT_MISSING_TOKENS, Dataset, SplitSpec, load_csv, split
from .errors import ComparisonError, ConfigError, MaskedKrrError
from .kernels import KernelSpec, gram_datasets
from .krr import (
    classify,
    fit_empirical,
    fit_intrinsic,
    left_feature_rows,
    predict_scores,
    right_feature_rows,
)
from .masking import MissingSpec, inject_missing
from .stats import partial_fdr, partial_moments, select_top_k

MODES = ("II", "IC", "CI", "CC")

INTRINSIC_FAMILIES = ("cosine", "mpt-linear")

CELL_CSV_COLUMNS = (
    "mode",
    "rate",
    "seed",
    "accuracy",
    "tp",
    "tn",
    "fp",
    "fn",
    "degenerate_kernels",
    "ms",
)


@dataclass
class ExperimentConfig:
    dataset_path: str
    label_column: int = 0
    positive_label: str | None = None
    has_header: bool = False
    missing_tokens: tuple = DEFAULT_MISSING_TOKENS
    train_fraction: float = 0.8
    missing_rates: tuple = (0.0, 0.1, 0.2, 0.3, 0.4)
    modes: tuple = ("II",)
    kernel: KernelSpec = field(default_factory=KernelSpec)
    solver: str = "auto"
    rho: float = 5.0
    top_k: int | None = None  # None = auto policy, 0 = off, k = forced
    seeds: tuple = (0,)
    subsample: int | None = None
    subsample_test: int | None = None

    def validate(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if not self.missing_rates:
            raise ConfigError("at least one missing rate is required")
        for r in self.missing_rates:
            if not 0.0 <= r < 1.0:
                raise ConfigError(f"missing rate must be in [0, 1), got {r}")
        if not self.modes:
            raise ConfigError("at least one mode is required")
        for m in self.modes:
            if m not in MODES:
                raise ConfigError(f"mode must be one of {MODES}, got {m!r}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.rho <= 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        if self.solver not in ("auto", "intrinsic", "empirical"):
            raise ConfigError(f"solver must be auto | intrinsic | empirical, got {self.solver!r}")
        if self.solver == "intrinsic" and self.kernel.family not in INTRINSIC_FAMILIES:
            raise ConfigError(
                f"intrinsic space only has explicit maps for {INTRINSIC_FAMILIES}; "
                f"{self.kernel.family} runs in empirical space"
            )
        if self.top_k is not None and self.top_k < 0:
            raise ConfigError(f"top_k must be >= 0, got {self.top_k}")
        for name in ("subsample", "subsample_test"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"{name} must be >= 1, got {v}")

    def to_dict(self) -> dict:
        return {
            "dataset_path": self.dataset_path,
            "label_column": self.label_column,
            "positive_label": self.positive_label,
            "has_header": self.has_header,
            "missing_tokens": list(self.missing_tokens),
            "train_fraction": self.train_fraction,
            "missing_rates": list(self.missing_rates),
            "modes": list(self.modes),
            "kernel": {
                "family": self.kernel.family,
                "p": self.kernel.p,
                "tau2": self.kernel.tau2,
                "eps": self.kernel.eps,
            },
            "solver": self.solver,
            "rho": self.rho,
            "top_k": self.top_k,
            "seeds": list(self.seeds),
            "subsample": self.subsample,
            "subsample_test": self.subsample_test,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        kernel = d.pop("kernel", None)
        if isinstance(kernel, dict):
            kernel = KernelSpec(**kernel)
        elif kernel is None:
            kernel = KernelSpec()
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for name in ("missing_tokens", "missing_rates", "modes", "seeds"):
            if name in d and d[name] is not None:
                d[name] = tuple(d[name])
        return cls(kernel=kernel, **d)


@dataclass
class CellResult:
    mode: str
    rate: float
    seed: int
    status: str = "ok"
    error: str | None = None
    accuracy: float | None = None
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0
    degenerate_kernels: int = 0
    wall_ms: float = 0.0
    n_train: int = 0
    n_test: int = 0
    selected_dims: list | None = None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    cells: list
    aggregates: list
    provenance: dict


def derived_seed(master: int, *parts) -> int:
    """Stable 64-bit seed derived from the master seed and context parts."""
    text = repr((int(master),) + tuple(parts)).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


def _subsample(d: Dataset, cap: int | None, seed: int) -> Dataset:
    if cap is None or cap >= d.n_rows:
        return d
    idx = np.random.default_rng(seed).permutation(d.n_rows)[:cap]
    return d.take_rows(np.sort(idx))


def _resolve_top_k(top_k, n_train: int, m: int):
    if top_k is None:
        return min(200, m) if m > n_train else None
    if top_k == 0:
        return None
    return top_k


def _resolve_solver(solver: str, family: str, n_train: int, j: int) -> str:
    if solver == "empirical":
        return "empirical"
    if solver == "intrinsic":
        if family not in INTRINSIC_FAMILIES:
            raise ConfigError(
                f"intrinsic space only has explicit maps for {INTRINSIC_FAMILIES}"
            )
        return "intrinsic"
    if family in INTRINSIC_FAMILIES and n_train > j:
        return "intrinsic"
    return "empirical"


def train_model(
    train: Dataset,
    spec: KernelSpec,
    solver: str = "auto",
    rho: float = 5.0,
    top_k: int | None = None,
):
    """Select dimensions, fit centroids, and fit a model on a training split.

    Returns (model, info) where info carries the resolved solver, selected
    dimensions, and training-side degeneracy tally.
    """
    dims = None
    k = _resolve_top_k(top_k, train.n_rows, train.n_dims)
    if k is not None:
        report = partial_fdr(partial_moments(train, 1), partial_moments(train, -1))
        dims = select_top_k(report, k)
        train_r = train.restrict(dims)
    else:
        train_r = train
    centroids = fit_class_centroids(train_r)
    resolved = _resolve_solver(solver, spec.family, train_r.n_rows, train_r.n_dims)
    y = train_r.labels.astype(np.float64)
    if resolved == "intrinsic":
        if spec.family == "cosine":
            rows, deg = left_feature_rows(train_r.features, train_r.presence, spec.eps)
            map_id = "unit"
        else:
            rows, deg = right_feature_rows(
                train_r.features, train_r.presence, train_r.labels, centroids, spec.eps
            )
            map_id = "three-side-right"
        model = fit_intrinsic(
            rows,
            y,
            rho,
            feature_map_id=map_id,
            spec=spec,
            centroids=centroids,
            selected_dims=dims,
            degenerate_features=deg,
        )
        train_degenerate = deg
    else:
        g = gram_datasets(train_r, train_r, centroids, spec)
        model = fit_empirical(
            g.entries,
            y,
            rho,
            train_values=train_r.features,
            train_mask=train_r.presence,
            train_labels=train_r.labels,
            centroids=centroids,
            spec=spec,
            selected_dims=dims,
        )
        train_degenerate = g.degenerate_count
    info = {
        "solver": resolved,
        "selected_dims": dims,
        "train_degenerate": train_degenerate,
    }
    return model, info


def _confusion(pred, truth):
    tp = int(np.count_nonzero((pred == 1) & (truth == 1)))
    tn = int(np.count_nonzero((pred == -1) & (truth == -1)))
    fp = int(np.count_nonzero((pred == 1) & (truth == -1)))
    fn = int(np.count_nonzero((pred == -1) & (truth == 1)))
    return tp, tn, fp, fn


def run_cell(cfg: ExperimentConfig, dataset: Dataset, seed: int, rate_index: int, mode: str) -> CellResult:
    rate = cfg.missing_rates[rate_index]
    cell = CellResult(mode=mode, rate=rate, seed=seed)
    t0 = time.perf_counter()
    try:
        train, test = split(dataset, SplitSpec(cfg.train_fraction, seed))
        train = _subsample(train, cfg.subsample, derived_seed(seed, "subsample", "train"))
        test = _subsample(test, cfg.subsample_test, derived_seed(seed, "subsample", "test"))
        if mode[0] == "I" and rate > 0:
            train = inject_missing(
                train, MissingSpec(rate, derived_seed(seed, rate_index, mode, "train"))
            )
        if mode[1] == "I" and rate > 0:
            test = inject_missing(
                test, MissingSpec(rate, derived_seed(seed, rate_index, mode, "test"))
            )
        cell.n_train, cell.n_test = train.n_rows, test.n_rows
        model, info = train_model(train, cfg.kernel, cfg.solver, cfg.rho, cfg.top_k)
        scores, test_degenerate = predict_scores(model, test.features, test.presence)
        pred = classify(scores)
        tp, tn, fp, fn = _confusion(pred, test.labels)
        cell.tp, cell.tn, cell.fp, cell.fn = tp, tn, fp, fn
        cell.accuracy = (tp + tn) / test.n_rows
        cell.degenerate_kernels = info["train_degenerate"] + test_degenerate
        dims = info["selected_dims"]
        cell.selected_dims = None if dims is None else [int(i) for i in dims]
    except (MaskedKrrError, np.linalg.LinAlgError) as exc:
        cell.status = "failed"
        cell.error = f"{type(exc).__name__}: {exc}"
    cell.wall_ms = (time.perf_counter() - t0) * 1000.0
    return cell


def run_experiment(cfg: ExperimentConfig, dataset: Dataset | None = None) -> ExperimentReport:
    """Run the full (mode, rate, seed) grid; fully deterministic given cfg.

    Cells are independent and may run on several threads (MASKEDKRR_WORKERS,
    default 1); the report order and content do not depend on the schedule.
    """
    cfg.validate()
    if dataset is None:
        dataset = load_csv(
            cfg.dataset_path,
            cfg.label_column,
            cfg.missing_tokens,
            cfg.positive_label,
            cfg.has_header,
        )
    grid = [
        (seed, rate_index, mode)
        for mode in cfg.modes
        for rate_index in range(len(cfg.missing_rates))
        for seed in cfg.seeds
    ]
    workers = int(os.environ.get("MASKEDKRR_WORKERS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(
                pool.map(lambda args: run_cell(cfg, dataset, *args), grid)
            )
    else:
        cells = [run_cell(cfg, dataset, *args) for args in grid]
    aggregates = []
    for mode in cfg.modes:
        for rate in cfg.missing_rates:
            group = [c for c in cells if c.mode == mode and c.rate == rate]
            ok = [c.accuracy for c in group if c.status == "ok"]
            aggregates.append(
                {
                    "mode": mode,
                    "rate": rate,
                    "n_seeds": len(group),
                    "n_failed": len(group) - len(ok),
                    "mean_accuracy": float(np.mean(ok)) if ok else None,
                    "std_accuracy": (
                        float(np.std(ok, ddof=1)) if len(ok) > 1 else (0.0 if ok else None)
                    ),
                }
            )
    provenance = {"library_version": __version__, "backend": backend_name}
    return ExperimentReport(cfg, cells, aggregates, provenance)


def _cell_to_json(c: CellResult) -> dict:
    # wall_ms is deliberately absent: the JSON report is byte-stable.
    return {
        "mode": c.mode,
        "rate": c.rate,
        "seed": c.seed,
        "status": c.status,
        "error": c.error,
        "accuracy": c.accuracy,
        "tp": c.tp,
        "tn": c.tn,
        "fp": c.fp,
        "fn": c.fn,
        "degenerate_kernels": c.degenerate_kernels,
        "n_train": c.n_train,
        "n_test": c.n_test,
        "selected_dims": c.selected_dims,
    }


def report_to_json(report: ExperimentReport) -> str:
    doc = {
        "config": report.config.to_dict(),
        "cells": [_cell_to_json(c) for c in report.cells],
        "aggregates": report.aggregates,
        "provenance": report.provenance,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_report(report: ExperimentReport, path):
    with open(path, "w") as fh:
        fh.write(report_to_json(report))


def write_cells_csv(report: ExperimentReport, path):
    """Flat per-cell rows, including the volatile wall-clock column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CELL_CSV_COLUMNS)
        for c in report.cells:
            if c.status == "ok":
                row = [
                    c.mode,
                    repr(float(c.rate)),
                    c.seed,
                    repr(float(c.accuracy)),
                    c.tp,
                    c.tn,
                    c.fp,
                    c.fn,
                    c.degenerate_kernels,
                    f"{c.wall_ms:.3f}",
                ]
            else:
                row = [c.mode, repr(float(c.rate)), c.seed, "", "", "", "", "", "", f"{c.wall_ms:.3f}"]
            writer.writerow(row)


def _report_axes(doc):
    if isinstance(doc, ExperimentReport):
        doc = json.loads(report_to_json(doc))
    cfg = doc["config"]
    return tuple(cfg["modes"]), tuple(cfg["missing_rates"]), doc


def compare(labeled_reports):
    """Side-by-side mean accuracy per (mode, rate) for several reports.

    ``labeled_reports`` is a list of (label, report) pairs sharing identical
    mode and rate grids; reports may be ExperimentReport objects or loaded
    report JSON dicts. ``delta_vs_first`` columns subtract the first method.
    """
    if not labeled_reports:
        raise ComparisonError("nothing to compare")
    labels = [label for label, _ in labeled_reports]
    if len(set(labels)) != len(labels):
        raise ComparisonError(f"duplicate method labels: {labels}")
    axes = None
    docs = {}
    for label, rep in labeled_reports:
        modes, rates, doc = _report_axes(rep)
        if axes is None:
            axes = (modes, rates)
        elif axes != (modes, rates):
            raise ComparisonError(
                f"report {label!r} has axes modes={modes} rates={rates}, "
                f"expected modes={axes[0]} rates={axes[1]}"
            )
        docs[label] = {
            (agg["mode"], agg["rate"]): agg["mean_accuracy"]
            for agg in doc["aggregates"]
        }
    modes, rates = axes
    rows = []
    first = labels[0]
    for mode in modes:
        for rate in rates:
            row = {"mode": mode, "rate": rate}
            for label in labels:
                row[label] = docs[label].get((mode, rate))
            base = row[first]
            for label in labels:
                v = row[label]
                row[f"delta_vs_first:{label}"] = (
                    None if (v is None or base is None) else v - base
                )
            rows.append(row)
    return {"modes": list(modes), "rates": list(rates), "methods": labels, "rows": rows}


def comparison_to_json(cmp: dict) -> str:
    return json.dumps(cmp, sort_keys=True, indent=2) + "\n"


def write_comparison_csv(cmp: dict, path):
    """Plot-ready rows: mode, rate, one accuracy column per method."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "rate"] + list(cmp["methods"]))
        for row in cmp["rows"]:
            writer.writerow(
                [row["mode"], repr(float(row["rate"]))]
                + [("" if row[m] is None else repr(float(row[m]))) for m in cmp["methods"]]
            )


def write_csv(d: Dataset, path, missing_token: str = ""):
    """Serialize a dataset back to CSV (label first, then features).

    Feature values are written with repr, so finite decimals round-trip
    bit-exactly through load_csv; missing cells emit ``missing_token``.
    """
    names = d.label_names or {1: "1", -1: "-1"}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if d.dim_names is not None:
            writer.writerow(["label"] + list(d.dim_names))
        for i in range(d.n_rows):
            row = [names[int(d.labels[i])]]
            for j in range(d.n_dims):
                row.append(
                    repr(float(d.features[i, j])) if d.presence[i, j] else missing_token
                )
            writer.writerow(row)
