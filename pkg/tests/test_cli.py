import csv
import json
import xml.etree.ElementTree as ET

import pytest

from texturekit.cli import RunConfig, main
from texturekit.learners import load_model


@pytest.fixture(scope="module")
def run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data, out = root / "data", root / "run"
    common = ["--out", str(out), "--seed", "3", "--threads", "1"]
    manifest = str(data / "manifest.csv")
    assert main(["synth", "--data-dir", str(data), "--patients", "6", "--samples-per-patient", "1",
                 *common]) == 0
    assert main(["extract", "--dataset", manifest, "--augment-count", "1", "--augment", *common]) == 0
    assert main(["grid", "--dataset", manifest, "--augment-count", "1", "--grid-trees", "2,3,4",
                 "--grid-depth", "0", "--grid-leaf", "2", "--grid-split", "1", "--folds", "3", *common]) == 0
    assert main(["cluster", "--clusters", "3", *common]) == 0
    return root, out, manifest, common


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_grid_and_cluster_write_ranked_metrics(run):
    _, out, _, _ = run
    rows = read_csv(out / "metrics.csv")
    assert rows[0][:3] == ["config_id", "auc_mean", "auc_std"] and rows[0][-1] == "cluster"
    assert len(rows) == 4
    aucs = [float(r[1]) for r in rows[1:]]
    assert aucs == sorted(aucs, reverse=True)
    # configs with identical metrics may share a cluster
    assert {r[-1] for r in rows[1:]} <= {"0", "1", "2"} and rows[1][-1] == "0"
    assert json.loads((out / "clusters.json").read_text())["k"] == 3


def test_extract_appends_augmented_rows(run):
    _, out, _, _ = run
    rows = read_csv(out / "features.csv")
    assert len(rows[0]) == 3 + 159
    assert len(rows) == 1 + 6 * 2
    assert sum("~" in r[0] for r in rows[1:]) == 6


def test_run_log_records_each_stage(run):
    _, out, _, _ = run
    recs = [json.loads(line) for line in (out / "run_log.jsonl").read_text().splitlines()]
    assert [r["command"] for r in recs][:4] == ["synth", "extract", "grid", "cluster"]
    for r in recs:
        assert r["seed"] == 3 and "numpy" in r["versions"] and r["wall_time_s"] >= 0
    echo = json.loads((out / "config.echo").read_text())
    assert echo["seed"] == 3


def test_train_best_config_flags(run):
    _, out, manifest, common = run
    assert main(["train", "--trees", "100", "--max-depth", "0", "--min-leaf", "2", "--min-split", "1",
                 *common]) == 0
    m = load_model(out / "models" / "model.json")
    assert len(m.trees) == 100
    assert (m.params.max_depth, m.params.min_samples_leaf, m.params.min_samples_split) == (0, 2, 1)


def test_cv_explain_correlate_report(run):
    _, out, manifest, common = run
    assert main(["cv", "--dataset", manifest, "--trees", "5", "--folds", "3", "--augment-count", "1",
                 *common]) == 0
    folds = read_csv(out / "folds.csv")
    assert folds[0] == ["fold", "sample_id", "parent_id", "patient_id", "role"]
    test_patients = {(r[0], r[3]) for r in folds[1:] if r[4] == "test"}
    train_patients = {(r[0], r[3]) for r in folds[1:] if r[4] == "train"}
    assert test_patients.isdisjoint(train_patients)
    assert main(["train", "--trees", "5", *common]) == 0
    assert main(["explain", *common]) == 0
    assert (out / "shap" / "shap_values.csv").exists()
    assert main(["correlate", *common]) == 0
    assert read_csv(out / "correlation.csv")[0][0] == "feature"
    assert main(["report", "--no-timestamp", *common]) == 0
    svgs = sorted((out / "figures").glob("*.svg"))
    assert {p.name for p in svgs} == {"correlation.svg", "shap.svg", "metrics.svg"}
    for p in svgs:
        root = ET.parse(p).getroot()
        assert root.tag.endswith("svg")
        assert "generated" not in p.read_text()


def test_usage_error_exit_2(capsys):
    assert main(["train", "--trees", "x"]) == 2
    assert main(["nonsense"]) == 2


def test_config_error_exit_2_one_line(tmp_path, capsys):
    code = main(["train", "--out", str(tmp_path), "--min-leaf", "0", "--features", str(tmp_path / "f.csv")])
    err = capsys.readouterr().err
    assert code == 2
    assert len(err.strip().splitlines()) == 1 and err.startswith("texturekit train:")


def test_missing_input_exit_3_one_line(tmp_path, capsys):
    code = main(["extract", "--dataset", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "r")])
    err = capsys.readouterr().err
    assert code == 3
    assert len(err.strip().splitlines()) == 1


def test_bad_feature_table_header(tmp_path, capsys):
    (tmp_path / "features.csv").write_text("a,b,c\n")
    assert main(["train", "--out", str(tmp_path)]) == 3
    assert "feature table" in capsys.readouterr().err


def test_config_file_and_override(tmp_path, run):
    _, out, manifest, _ = run
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dataset": manifest, "seed": 11, "model": {"n_trees": 4}}))
    dest = tmp_path / "r"
    assert main(["extract", "--config", str(cfg), "--out", str(dest), "--threads", "1"]) == 0
    assert main(["train", "--config", str(cfg), "--out", str(dest), "--trees", "6", "--threads", "1"]) == 0
    echo = RunConfig.from_json(dest / "config.echo")
    assert echo.seed == 11 and echo.model["n_trees"] == 6
    assert len(load_model(dest / "models" / "model.json").trees) == 6
    cfg.write_text(json.dumps({"unknown_field": 1}))
    assert main(["train", "--config", str(cfg), "--out", str(dest)]) == 2


def test_threads_from_environment(tmp_path, run, monkeypatch):
    _, _, manifest, _ = run
    monkeypatch.setenv("TEXTUREKIT_THREADS", "2")
    dest = tmp_path / "r"
    assert main(["extract", "--dataset", manifest, "--out", str(dest)]) == 0
    rec = json.loads((dest / "run_log.jsonl").read_text().splitlines()[-1])
    assert rec["threads"] == 2
    assert main(["extract", "--dataset", manifest, "--out", str(dest), "--threads", "0"]) == 2
