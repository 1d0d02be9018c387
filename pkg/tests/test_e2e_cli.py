import json
import shutil
import tempfile
from pathlib import Path

import pandas as pd
import pytest

from app.cli.main import run
from tests.conftest import TINY

WORKDIR = Path()


def setup_module(module):
    # Временный каталог с маленькой конфигурацией
    global WORKDIR
    WORKDIR = Path(tempfile.mkdtemp(prefix="kd-e2e-"))
    (WORKDIR / "config.json").write_text(json.dumps(TINY), encoding="utf-8")


def teardown_module(module):
    shutil.rmtree(WORKDIR, ignore_errors=True)


def cli(*args: str, run_dir: str = "run") -> int:
    return run([*args, "-c", str(WORKDIR / "config.json"), "-o", str(WORKDIR / run_dir)])


def digests(run_dir: str) -> dict:
    manifest = json.loads((WORKDIR / run_dir / "manifest.json").read_text(encoding="utf-8"))
    return manifest["files"]


def test_full_flow():
    run_dir = WORKDIR / "run"

    # 1) Сгенерировать данные
    assert cli("gen-data") == 0
    train = pd.read_csv(run_dir / "data" / "train.csv")
    assert list(train.columns) == ["x1", "x2", "target"]
    assert len(train) == 40
    sidecar = json.loads((run_dir / "data" / "train.json").read_text(encoding="utf-8"))
    assert sidecar["benchmark"] == "env" and sidecar["n"] == 40 and sidecar["window"] == "1"

    # 2) Построить ориентиры
    assert cli("build-landmarks") == 0
    landmarks = json.loads((run_dir / "landmarks" / "landmarks.json").read_text(encoding="utf-8"))
    assert len(landmarks["landmarks"]) == 4
    native = pd.read_csv(run_dir / "landmarks" / "landmarks_native.csv")
    assert list(native.columns) == ["context", "cluster", "x1", "x2", "y_center", "y_spread", "specificity"]
    assert native["x1"].between(0.0, 3.0).all() and native["x2"].between(0.0, 60.0).all()
    assert native["x1"].tolist() == pytest.approx([3.0 * lm["input"]["centers"][0] for lm in landmarks["landmarks"]])

    # 3) Перебор λ
    assert cli("sweep") == 0
    sweep = pd.read_csv(run_dir / "sweeps" / "sweep.csv")
    assert list(sweep.columns) == ["lambda", "q1", "q2", "q_total", "valid"]
    assert sweep["lambda"].tolist() == [0.0, 0.5, 1.0]
    summary = json.loads((run_dir / "sweeps" / "sweep.json").read_text(encoding="utf-8"))
    assert summary["test_q_total"] == summary["test_q1"] + summary["test_q2"]
    trace = pd.read_csv(run_dir / "sweeps" / "traces" / f"{summary['params_ref']}.csv")
    assert list(trace.columns) == ["epoch", "loss", "loss_data", "loss_knowledge"]
    assert len(trace) == 30

    # 4) Исследование окон и отчёт
    assert run(["study-windows", "--windows", "1", "2", "-c", str(WORKDIR / "config.json"), "-o", str(run_dir)]) == 0
    assert cli("report") == 0
    report = pd.read_csv(run_dir / "studies" / "report.csv")
    assert report["window"].astype(str).tolist() == ["1", "2"]
    assert "improvement_pct" in report.columns
    assert (run_dir / "studies" / "report.txt").exists()

    # 5) Все файлы в манифесте с контрольными суммами
    files = digests("run")
    for name in ["data/train.csv", "landmarks/landmarks.json", "landmarks/landmarks_native.csv", "sweeps/sweep.csv", "studies/windows.csv", "studies/windows_summary.csv"]:
        assert name in files and len(files[name]) == 64
    raw = (run_dir / "sweeps" / "sweep.csv").read_bytes()
    assert b"\r\n" not in raw


def test_rerun_reproduces_digests():
    for run_dir, jobs in (("a", "1"), ("b", "2")):
        assert cli("gen-data", run_dir=run_dir) == 0
        assert cli("build-landmarks", "-j", jobs, run_dir=run_dir) == 0
        assert cli("sweep", "-j", jobs, run_dir=run_dir) == 0
    assert digests("a") == digests("b")


def test_missing_artifact_names_prior_subcommand(capsys):
    assert cli("sweep", run_dir="empty") == 2
    assert "gen-data" in capsys.readouterr().err
    assert cli("report", run_dir="empty") == 2


def test_usage_and_config_errors():
    assert run(["frobnicate"]) == 2
    assert run([]) == 2

    bad = WORKDIR / "bad.json"
    bad.write_text(json.dumps({**TINY, "window": "5"}), encoding="utf-8")
    assert run(["gen-data", "-c", str(bad), "-o", str(WORKDIR / "bad")]) == 2
    assert not (WORKDIR / "bad").exists()


def test_config_schema(capsys):
    assert run(["config-schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert "grid_step" in schema["properties"]


def test_unknown_log_level_is_a_usage_error():
    assert run(["--log-level", "bogus", "config-schema"]) == 2
    assert run(["--log-level", "debug", "config-schema"]) == 0
