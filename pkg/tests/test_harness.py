import json

import numpy as np
import pytest

from maskedkrr import ComparisonError, ConfigError, KernelSpec
from maskedkrr.harness import (
    CELL_CSV_COLUMNS,
    ExperimentConfig,
    compare,
    derived_seed,
    report_to_json,
    run_experiment,
    write_cells_csv,
    write_comparison_csv,
    write_csv,
)
from _synth import two_class_gaussian

pytestmark = pytest.mark.filterwarnings("ignore::RuntimeWarning")


@pytest.fixture(scope="module")
def synth_csv(tmp_path_factory):
    d = two_class_gaussian(80, 12, informative=5, gap=2.5, seed=7)
    path = tmp_path_factory.mktemp("data") / "synth.csv"
    write_csv(d, path)
    return str(path)


def _config(synth_csv, **kw):
    base = dict(
        dataset_path=synth_csv,
        label_column=0,
        positive_label="1",
        missing_rates=(0.0, 0.2),
        modes=("II",),
        kernel=KernelSpec("mpt-linear"),
        solver="auto",
        rho=5.0,
        seeds=(1, 2),
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_report_is_byte_deterministic(synth_csv):
    cfg = _config(synth_csv)
    a = report_to_json(run_experiment(cfg))
    b = report_to_json(run_experiment(cfg))
    assert a == b


def test_report_independent_of_worker_count(synth_csv, monkeypatch):
    cfg = _config(synth_csv, missing_rates=(0.0, 0.2, 0.4), seeds=(1, 2, 3))
    sequential = report_to_json(run_experiment(cfg))
    monkeypatch.setenv("MASKEDKRR_WORKERS", "4")
    threaded = report_to_json(run_experiment(cfg))
    assert threaded == sequential


def test_cc_ignores_rate(synth_csv):
    cfg = _config(synth_csv, modes=("CC",), missing_rates=(0.0, 0.4))
    rep = run_experiment(cfg)
    by_rate = {}
    for c in rep.cells:
        by_rate.setdefault(c.rate, []).append((c.seed, c.accuracy, c.tp, c.tn))
    assert by_rate[0.0] == by_rate[0.4]


def test_ic_ci_at_rate_zero_match_cc(synth_csv):
    cfg = _config(synth_csv, modes=("IC", "CI", "CC"), missing_rates=(0.0,))
    rep = run_experiment(cfg)
    rows = {}
    for c in rep.cells:
        rows.setdefault(c.mode, []).append((c.seed, c.accuracy, c.tp, c.tn, c.fp, c.fn))
    assert rows["IC"] == rows["CC"]
    assert rows["CI"] == rows["CC"]


def test_train_and_test_masks_use_distinct_seeds():
    s_train = derived_seed(3, 1, "II", "train")
    s_test = derived_seed(3, 1, "II", "test")
    assert s_train != s_test
    assert derived_seed(3, 1, "II", "train") == s_train


def test_confusion_counts_sum_to_test_size(synth_csv):
    rep = run_experiment(_config(synth_csv, missing_rates=(0.0, 0.3)))
    for c in rep.cells:
        assert c.status == "ok"
        assert 0.0 <= c.accuracy <= 1.0
        assert c.tp + c.tn + c.fp + c.fn == c.n_test


def test_subsample_at_or_above_size_is_identity(synth_csv):
    plain = run_experiment(_config(synth_csv))
    capped = run_experiment(_config(synth_csv, subsample=10_000, subsample_test=10_000))
    for a, b in zip(plain.cells, capped.cells):
        assert (a.accuracy, a.tp, a.tn, a.fp, a.fn) == (b.accuracy, b.tp, b.tn, b.fp, b.fn)


def test_subsample_caps_rows(synth_csv):
    rep = run_experiment(_config(synth_csv, subsample=20, subsample_test=5))
    for c in rep.cells:
        assert c.n_train == 20 and c.n_test == 5


def test_mpp_cells_fail_and_are_recorded(synth_csv):
    cfg = _config(synth_csv, kernel=KernelSpec("mpp"), solver="empirical",
                  missing_rates=(0.0,), seeds=(1,))
    rep = run_experiment(cfg)
    assert all(c.status == "failed" for c in rep.cells)
    assert "PhaseMisuse" in rep.cells[0].error
    assert rep.aggregates[0]["n_failed"] == 1
    assert rep.aggregates[0]["mean_accuracy"] is None


def test_auto_solver_prefers_intrinsic_for_wide_n(synth_csv):
    # n = 80 rows, 12 dims -> intrinsic for mpt-linear; empirical for rbf
    from maskedkrr.harness import _resolve_solver

    assert _resolve_solver("auto", "mpt-linear", 64, 12) == "intrinsic"
    assert _resolve_solver("auto", "cosine", 64, 12) == "intrinsic"
    assert _resolve_solver("auto", "mpt-rbf", 64, 12) == "empirical"
    assert _resolve_solver("auto", "mpt-linear", 10, 12) == "empirical"
    with pytest.raises(ConfigError):
        _resolve_solver("intrinsic", "mpt-rbf", 64, 12)


def test_intrinsic_and_empirical_solvers_run(synth_csv):
    for solver in ("intrinsic", "empirical"):
        rep = run_experiment(_config(synth_csv, solver=solver, missing_rates=(0.1,)))
        assert all(c.status == "ok" for c in rep.cells)


def test_top_k_policy_auto_only_when_wide():
    from maskedkrr.harness import _resolve_top_k

    assert _resolve_top_k(None, n_train=60, m=12) is None
    assert _resolve_top_k(None, n_train=60, m=500) == 200
    assert _resolve_top_k(None, n_train=60, m=90) == 90
    assert _resolve_top_k(0, n_train=60, m=500) is None
    assert _resolve_top_k(7, n_train=60, m=12) == 7


def test_selection_recorded_in_cells(synth_csv):
    rep = run_experiment(_config(synth_csv, top_k=4, missing_rates=(0.0,), seeds=(1,)))
    cell = rep.cells[0]
    assert len(cell.selected_dims) == 4


def test_aggregates_recomputable(synth_csv):
    rep = run_experiment(_config(synth_csv, seeds=(1, 2, 3)))
    for agg in rep.aggregates:
        accs = [
            c.accuracy
            for c in rep.cells
            if c.mode == agg["mode"] and c.rate == agg["rate"] and c.status == "ok"
        ]
        assert agg["n_seeds"] == 3
        assert agg["mean_accuracy"] == pytest.approx(np.mean(accs))
        assert agg["std_accuracy"] == pytest.approx(np.std(accs, ddof=1))


def test_cells_csv_layout(synth_csv, tmp_path):
    rep = run_experiment(_config(synth_csv, seeds=(1,)))
    path = tmp_path / "cells.csv"
    write_cells_csv(rep, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == ",".join(CELL_CSV_COLUMNS)
    assert len(lines) == 1 + len(rep.cells)
    first = lines[1].split(",")
    assert first[0] == "II" and float(first[3]) == rep.cells[0].accuracy


def test_config_json_round_trip(synth_csv):
    cfg = _config(synth_csv, kernel=KernelSpec("mpt-poly", p=2, tau2=0.5), top_k=6)
    back = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back.to_dict() == cfg.to_dict()
    assert back.kernel == cfg.kernel


def test_config_rejects_unknown_fields():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"dataset_path": "x", "bogus": 1})


def test_config_validation():
    cfg = ExperimentConfig(dataset_path="x", modes=("XX",))
    with pytest.raises(ConfigError):
        cfg.validate()
    cfg = ExperimentConfig(dataset_path="x", missing_rates=(0.0, 1.5))
    with pytest.raises(ConfigError):
        cfg.validate()
    cfg = ExperimentConfig(dataset_path="x", rho=0.0)
    with pytest.raises(ConfigError):
        cfg.validate()


def test_compare_self_is_zero_delta(synth_csv):
    rep = run_experiment(_config(synth_csv))
    cmp = compare([("a", rep), ("b", rep)])
    for row in cmp["rows"]:
        assert row["delta_vs_first:b"] == 0.0


def test_compare_mismatched_axes(synth_csv):
    r1 = run_experiment(_config(synth_csv, missing_rates=(0.0, 0.2)))
    r2 = run_experiment(_config(synth_csv, missing_rates=(0.0, 0.3)))
    with pytest.raises(ComparisonError):
        compare([("a", r1), ("b", r2)])


def test_compare_plot_csv(synth_csv, tmp_path):
    r1 = run_experiment(_config(synth_csv))
    r2 = run_experiment(_config(synth_csv, kernel=KernelSpec("mpc"), solver="empirical"))
    cmp = compare([("mpt", r1), ("mpc", r2)])
    path = tmp_path / "plot.csv"
    write_comparison_csv(cmp, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "mode,rate,mpt,mpc"
    assert len(lines) == 1 + len(cmp["rows"])


def test_failed_dataset_propagates():
    cfg = ExperimentConfig(dataset_path="/nonexistent/file.csv")
    with pytest.raises(OSError):
        run_experiment(cfg)
