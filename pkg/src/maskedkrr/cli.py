"""Command-line interface.

Subcommands: experiment, fit, predict, fdr, inject, compare. Exit codes:
0 success, 2 usage error, 1 runtime failure (diagnostic on stderr).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .dataset import DEFAULT_MISSING_TOKENS, load_csv, load_feature_csv
from .errors import MaskedKrrError
from .harness import (
    ExperimentConfig,
    compare,
    comparison_to_json,
    run_experiment,
    train_model,
    write_cells_csv,
    write_comparison_csv,
    write_csv,
    write_report,
)
from .kernels import KernelSpec
from .krr import classify, load_model, predict_scores, save_model
from .masking import MissingSpec, inject_missing
from .stats import partial_fdr, partial_moments, select_top_k


def _parse_floats(text):
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _parse_ints(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _parse_modes(text):
    return tuple(m.strip().upper() for m in text.split(","))


def _parse_top_k(text):
    if text == "auto":
        return None
    if text == "off":
        return 0
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected auto, off, or an integer, got {text!r}")


def _add_parse_flags(p, label_required=True):
    p.add_argument("--label-col", type=int, required=label_required, default=None,
                   help="index of the label column")
    p.add_argument("--positive-label", default=None,
                   help="label value mapped to +1 (default: first seen)")
    p.add_argument("--has-header", action="store_true",
                   help="first row is a header")
    p.add_argument("--missing-tokens", default=",".join(DEFAULT_MISSING_TOKENS),
                   help="comma-separated tokens read as missing")


def _add_model_flags(p, concrete_defaults=True):
    # None defaults let the experiment command tell "flag not given" apart
    # from "given its usual value" when merging over a config file.
    p.add_argument("--kernel", default="mpt-linear" if concrete_defaults else None,
                   help="kernel family")
    p.add_argument("--p", type=int, default=3 if concrete_defaults else None,
                   help="polynomial order")
    p.add_argument("--tau2", type=float, default=1.0 if concrete_defaults else None,
                   help="kernel variance")
    p.add_argument("--rho", type=float, default=5.0 if concrete_defaults else None,
                   help="ridge parameter")
    p.add_argument("--solver", default="auto" if concrete_defaults else None,
                   choices=["auto", "intrinsic", "empirical"])
    p.add_argument("--top-k", type=_parse_top_k, default=None,
                   help="feature selection: auto, off, or a count")


def _missing_tokens(args):
    return tuple(args.missing_tokens.split(","))


def _load_labeled(args):
    return load_csv(
        args.infile,
        args.label_col,
        _missing_tokens(args),
        args.positive_label,
        args.has_header,
    )


def _build_parser():
    parser = argparse.ArgumentParser(prog="maskedkrr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("experiment", help="run a masking-sweep experiment grid")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--dataset", default=None, help="dataset CSV (overrides config)")
    _add_parse_flags(p, label_required=False)
    _add_model_flags(p, concrete_defaults=False)
    p.add_argument("--train-fraction", type=float, default=None)
    p.add_argument("--rates", type=_parse_floats, default=None,
                   help="comma-separated missing rates")
    p.add_argument("--modes", type=_parse_modes, default=None,
                   help="comma-separated subset of II,IC,CI,CC")
    p.add_argument("--seeds", type=_parse_ints, default=None,
                   help="comma-separated seeds")
    p.add_argument("--subsample", type=int, default=None,
                   help="max training rows per cell")
    p.add_argument("--subsample-test", type=int, default=None,
                   help="max testing rows per cell")
    p.add_argument("--out", default="report.json", help="report JSON path")
    p.add_argument("--cells-csv", default=None, help="per-cell CSV path")

    p = sub.add_parser("fit", help="train a model on a CSV and persist it")
    p.add_argument("--in", dest="infile", required=True)
    _add_parse_flags(p)
    _add_model_flags(p)
    p.add_argument("--out", required=True, help="model JSON path")

    p = sub.add_parser("predict", help="score a CSV with a persisted model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    _add_parse_flags(p, label_required=False)
    p.add_argument("--out", required=True, help="predictions CSV path")

    p = sub.add_parser("fdr", help="emit the discriminant-ratio ranking")
    p.add_argument("--in", dest="infile", required=True)
    _add_parse_flags(p)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("inject", help="emit a masked copy of a CSV")
    p.add_argument("--in", dest="infile", required=True)
    _add_parse_flags(p)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare", help="tabulate several reports side by side")
    p.add_argument("--reports", nargs="+", required=True, help="report JSON files")
    p.add_argument("--labels", nargs="+", required=True, help="one label per report")
    p.add_argument("--out", required=True, help="comparison JSON path")
    p.add_argument("--plot-csv", default=None, help="plot-ready CSV path")
    return parser


def _experiment_config(args) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_dict(json.load(fh))
    elif args.dataset is not None:
        cfg = ExperimentConfig(dataset_path=args.dataset)
        if args.has_header:
            cfg.has_header = True
        cfg.missing_tokens = _missing_tokens(args)
    else:
        raise MaskedKrrError("either --config or --dataset is required")
    if args.kernel is not None or args.p is not None or args.tau2 is not None:
        cfg.kernel = KernelSpec(
            args.kernel if args.kernel is not None else cfg.kernel.family,
            args.p if args.p is not None else cfg.kernel.p,
            args.tau2 if args.tau2 is not None else cfg.kernel.tau2,
        )
    overrides = {
        "dataset_path": args.dataset,
        "label_column": args.label_col,
        "positive_label": args.positive_label,
        "train_fraction": args.train_fraction,
        "missing_rates": args.rates,
        "modes": args.modes,
        "solver": args.solver,
        "rho": args.rho,
        "top_k": args.top_k,
        "seeds": args.seeds,
        "subsample": args.subsample,
        "subsample_test": args.subsample_test,
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    report = run_experiment(cfg)
    write_report(report, args.out)
    if args.cells_csv:
        write_cells_csv(report, args.cells_csv)
    n_failed = sum(1 for c in report.cells if c.status != "ok")
    print(f"wrote {args.out}: {len(report.cells)} cells, {n_failed} failed")
    return 0 if n_failed == 0 else 1


def cmd_fit(args) -> int:
    d = _load_labeled(args)
    spec = KernelSpec(args.kernel, args.p, args.tau2)
    model, info = train_model(d, spec, args.solver, args.rho, args.top_k)
    save_model(model, args.out)
    dims = info["selected_dims"]
    kept = "all" if dims is None else str(len(dims))
    print(f"wrote {args.out}: solver={info['solver']}, dims kept={kept}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    truth = None
    if args.label_col is not None:
        d = _load_labeled(args)
        values, mask, truth = d.features, d.presence, d.labels
    else:
        values, mask, _ = load_feature_csv(args.infile, _missing_tokens(args), args.has_header)
    scores, _ = predict_scores(model, values, mask)
    pred = classify(scores)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["row", "score", "label"]
        if truth is not None:
            header += ["true_label", "correct"]
        writer.writerow(header)
        for i in range(len(pred)):
            row = [i, repr(float(scores[i])), int(pred[i])]
            if truth is not None:
                row += [int(truth[i]), int(pred[i] == truth[i])]
            writer.writerow(row)
    if truth is not None:
        acc = float(np.mean(pred == truth))
        print(f"wrote {args.out}: {len(pred)} predictions, accuracy {acc:.4f}")
    else:
        print(f"wrote {args.out}: {len(pred)} predictions")
    return 0


def cmd_fdr(args) -> int:
    d = _load_labeled(args)
    report = partial_fdr(partial_moments(d, 1), partial_moments(d, -1))
    doc = {
        "f": report.f.tolist(),
        "ranked_dims": report.ranked_dims.tolist(),
    }
    if args.top_k is not None:
        doc["selected"] = select_top_k(report, args.top_k).tolist()
    with open(args.out, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"wrote {args.out}")
    return 0


def cmd_inject(args) -> int:
    d = _load_labeled(args)
    masked = inject_missing(d, MissingSpec(args.rate, args.seed))
    write_csv(masked, args.out)
    before = int(d.presence.sum())
    after = int(masked.presence.sum())
    print(f"wrote {args.out}: masked {before - after} of {before} observed cells")
    return 0


def cmd_compare(args) -> int:
    if len(args.reports) != len(args.labels):
        raise MaskedKrrError(
            f"{len(args.reports)} reports but {len(args.labels)} labels"
        )
    loaded = []
    for label, path in zip(args.labels, args.reports):
        with open(path) as fh:
            loaded.append((label, json.load(fh)))
    cmp = compare(loaded)
    with open(args.out, "w") as fh:
        fh.write(comparison_to_json(cmp))
    if args.plot_csv:
        write_comparison_csv(cmp, args.plot_csv)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "experiment": cmd_experiment,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "fdr": cmd_fdr,
    "inject": cmd_inject,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except MaskedKrrError as exc:
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return 1


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
