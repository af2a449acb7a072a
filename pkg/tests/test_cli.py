import json

import numpy as np
import pytest

from maskedkrr.cli import main
from maskedkrr.harness import write_csv
from _synth import two_class_gaussian


@pytest.fixture(scope="module")
def data_csv(tmp_path_factory):
    d = two_class_gaussian(60, 10, informative=4, gap=2.5, seed=3)
    path = tmp_path_factory.mktemp("cli") / "data.csv"
    write_csv(d, path)
    return str(path)


def test_experiment_happy_path(data_csv, tmp_path, capsys):
    out = tmp_path / "report.json"
    cells = tmp_path / "cells.csv"
    code = main([
        "experiment", "--dataset", data_csv, "--label-col", "0",
        "--positive-label", "1", "--rates", "0,0.2", "--seeds", "1,2",
        "--modes", "II", "--out", str(out), "--cells-csv", str(cells),
    ])
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["cells"]) == 4
    assert doc["provenance"]["library_version"]
    assert cells.read_text().startswith("mode,rate,seed,accuracy")


def test_experiment_config_file_with_overrides(data_csv, tmp_path):
    cfg = {
        "dataset_path": data_csv,
        "label_column": 0,
        "positive_label": "1",
        "missing_rates": [0.0],
        "modes": ["II"],
        "seeds": [5],
        "kernel": {"family": "mpt-linear"},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "r.json"
    code = main(["experiment", "--config", str(cfg_path), "--rates", "0,0.1",
                 "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["missing_rates"] == [0.0, 0.1]
    assert doc["config"]["seeds"] == [5]


def test_experiment_bad_rates_usage_error(data_csv, tmp_path):
    code = main(["experiment", "--dataset", data_csv, "--label-col", "0",
                 "--rates", "0,0.1,abc", "--out", str(tmp_path / "r.json")])
    assert code == 2


def test_unknown_flag_usage_error():
    assert main(["experiment", "--frobnicate"]) == 2


def test_missing_required_input():
    assert main(["experiment", "--out", "r.json"]) == 1


def test_fit_predict_round_trip(data_csv, tmp_path):
    model = tmp_path / "model.json"
    code = main(["fit", "--in", data_csv, "--label-col", "0",
                 "--positive-label", "1", "--kernel", "mpt-linear",
                 "--rho", "5.0", "--out", str(model)])
    assert code == 0
    preds = tmp_path / "preds.csv"
    code = main(["predict", "--model", str(model), "--in", data_csv,
                 "--label-col", "0", "--positive-label", "1",
                 "--out", str(preds)])
    assert code == 0
    lines = preds.read_text().strip().splitlines()
    assert lines[0] == "row,score,label,true_label,correct"
    assert len(lines) == 1 + 60  # one prediction per input row
    correct = [int(l.split(",")[4]) for l in lines[1:]]
    assert np.mean(correct) > 0.9  # easy synthetic, trained on itself


def test_predict_without_labels(data_csv, tmp_path):
    model = tmp_path / "model.json"
    main(["fit", "--in", data_csv, "--label-col", "0", "--positive-label", "1",
          "--out", str(model)])
    # strip the label column to make a feature-only file
    rows = [line.split(",")[1:] for line in open(data_csv).read().strip().splitlines()]
    feat_csv = tmp_path / "features.csv"
    feat_csv.write_text("\n".join(",".join(r) for r in rows) + "\n")
    preds = tmp_path / "p.csv"
    code = main(["predict", "--model", str(model), "--in", str(feat_csv),
                 "--out", str(preds)])
    assert code == 0
    lines = preds.read_text().strip().splitlines()
    assert lines[0] == "row,score,label"
    assert len(lines) == 61


def test_fdr_emits_ranking(data_csv, tmp_path):
    out = tmp_path / "fdr.json"
    code = main(["fdr", "--in", data_csv, "--label-col", "0",
                 "--positive-label", "1", "--top-k", "3", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["f"]) == 10
    assert len(doc["selected"]) == 3
    assert sorted(doc["ranked_dims"]) == list(range(10))
    # informative dimensions are the first four in the generator
    assert set(doc["selected"]) <= {0, 1, 2, 3}


def test_inject_masks_cells(data_csv, tmp_path):
    out = tmp_path / "masked.csv"
    code = main(["inject", "--in", data_csv, "--label-col", "0",
                 "--positive-label", "1", "--rate", "0.3", "--seed", "9",
                 "--out", str(out)])
    assert code == 0
    text = out.read_text()
    n_empty = sum(1 for line in text.strip().splitlines()
                  for cell in line.split(",") if cell == "")
    assert abs(n_empty / 600 - 0.3) < 0.06


def test_compare_command(data_csv, tmp_path):
    r1, r2 = tmp_path / "a.json", tmp_path / "b.json"
    for path, fam in ((r1, "mpt-linear"), (r2, "mpc")):
        assert main(["experiment", "--dataset", data_csv, "--label-col", "0",
                     "--positive-label", "1", "--rates", "0,0.2", "--seeds", "1",
                     "--kernel", fam, "--solver", "empirical",
                     "--out", str(path)]) == 0
    out = tmp_path / "cmp.json"
    plot = tmp_path / "plot.csv"
    code = main(["compare", "--reports", str(r1), str(r2),
                 "--labels", "mpt", "mpc", "--out", str(out),
                 "--plot-csv", str(plot)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["methods"] == ["mpt", "mpc"]
    assert plot.read_text().splitlines()[0] == "mode,rate,mpt,mpc"
