import json

import pytest

from dddkit.cli import main


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    prof = root / "profile.json"
    prof.write_text(json.dumps({"duration": 240.0, "dynamics_effect": 1.0,
                                "dynamics_noise": 0.001}))
    assert main(["synth", "--profile", str(prof), "--sessions", "2", "--seed", "3",
                 "--out", str(root / "data")]) == 0
    return root


def _fast_config(root, method="rf"):
    path = root / f"{method}.json"
    path.write_text(json.dumps({"method": method, "model": {"kind": "rf", "config": {"n_trees": 20}}}))
    return path


def test_synth_writes_sessions(dataset):
    dirs = sorted(p.name for p in (dataset / "data").iterdir())
    assert dirs == ["synthetic_00", "synthetic_01"]
    assert (dataset / "data" / "synthetic_00" / "manifest.json").exists()


def test_label_and_extract(dataset, tmp_path):
    assert main(["label", "--data", str(dataset / "data"), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "labels.csv").read_text().splitlines()
    assert lines[0] == "session_id,subject_id,start_time,ratio,label" and len(lines) > 100
    assert "np." not in "".join(lines)
    assert main(["extract", "--method", "svmw", "--data", str(dataset / "data"),
                 "--out", str(tmp_path)]) == 0
    header = (tmp_path / "features.csv").read_text().splitlines()[0].split(",")
    assert header[:4] == ["session_id", "subject_id", "start_time", "label"] and len(header) == 12


def test_train_then_evaluate(dataset, tmp_path):
    cfg = _fast_config(dataset)
    assert main(["--config", str(cfg), "train", "--data", str(dataset / "data"),
                 "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["test_reads_before_evaluation"] == 0
    assert main(["evaluate", "--model", str(tmp_path / "model.json"), "--data",
                 str(dataset / "data"), "--out", str(tmp_path)]) == 0
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert set(metrics["confusion"]) == {"tp", "fp", "tn", "fn"}


def test_compare_is_byte_identical(dataset, tmp_path):
    args = ["compare", "--methods", "svmw,lstm_lite", "--data", str(dataset / "data")]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a, b = ((tmp_path / d / "report.json").read_bytes() for d in "ab")
    assert a == b
    assert (tmp_path / "a" / "table.txt").read_text().startswith("method")


def test_preset_command(capsys, tmp_path):
    assert main(["preset", "--method", "svma", "--config", "c1", "--out", str(tmp_path)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["split"] == {"kind": "none"} and doc["eval_target"] == "train"
    assert (tmp_path / "svma_c1.json").exists()


def test_exit_codes(dataset, tmp_path):
    data = str(dataset / "data")
    # leaky preset without acknowledgement is a config error
    assert main(["train", "--method", "svma", "--preset", "c1", "--data", data,
                 "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"method": "rf", "colour": "red"}))
    assert main(["train", "--config", str(bad), "--data", data]) == 2
    assert main(["train", "--data", str(tmp_path / "missing")]) == 3
    assert main(["synth", "--profile", "nope", "--out", str(tmp_path)]) == 2
    assert main(["evaluate", "--model", str(tmp_path / "none.json"), "--data", data]) == 3
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_pipeline_failure_exits_4(dataset, tmp_path):
    cfg = tmp_path / "one_class.json"
    # with thresholds this extreme almost nothing is drowsy, so a k-fold training fold lacks it
    cfg.write_text(json.dumps({"method": "lstm_lite", "split": {"kind": "kfold", "k": 2},
                               "thresholds": {"awake_pct": 0.5, "drowsy_pct": 0.0001}}))
    code = main(["train", "--config", str(cfg), "--data", str(dataset / "data")])
    assert code == 4
