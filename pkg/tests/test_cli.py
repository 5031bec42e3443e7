import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from heattrace.cli import config_from_dict, main, UsageError
from heattrace.measures import empty_triple, serialize_triple

SMALL = {"grid": {"nx": 8, "nt": 4, "t_min": 0.1, "t_max": 1.0}, "oracle": {"probes": 4}, "kernel_probes": 20,
         "schedule": {"bins": 4}}


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(SMALL))
    return str(p)


def test_eval_writes_exact_and_reproducible_output(tmp_path, small_config):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["eval", "--fixture", "eigenfunction", "--config", small_config, "--out", str(out1)]) == 0
    assert main(["eval", "--fixture", "eigenfunction", "--config", small_config, "--out", str(out2)]) == 0
    for name in ("solution.csv", "manifest.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    data = np.loadtxt(out1 / "solution.csv", delimiter=",", skiprows=1)
    assert data.shape == (32, 4)
    assert np.allclose(data[:, 2], np.exp(-data[:, 1]) * np.sin(data[:, 0]), atol=1e-9)
    manifest = json.loads((out1 / "manifest.json").read_text())
    digest = hashlib.sha256((out1 / "solution.csv").read_bytes()).hexdigest()
    assert manifest["outputs"]["solution.csv"]["sha256"] == digest
    assert manifest["inputs"]["triple"]["fixture"] == "eigenfunction"
    assert len(manifest["config_sha256"]) == 64


def test_malformed_triple_is_a_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "heattrace.triple/1",\n "mu": {"atoms": [1,}}')
    assert main(["eval", "--triple", str(bad)]) == 2
    assert "line 2, column" in capsys.readouterr().err


def test_schema_errors(tmp_path, capsys):
    bad = tmp_path / "neg.json"
    bad.write_text('{"schema": "heattrace.triple/1", "lambda": {"atoms": [{"side": "left", "mass": -1}]}}')
    assert main(["eval", "--triple", str(bad)]) == 2
    assert "lambda.atoms[0].mass" in capsys.readouterr().err


def test_config_validation(tmp_path):
    with pytest.raises(UsageError, match="grid"):
        config_from_dict({"grid": {"bogus": 1}})
    with pytest.raises(UsageError, match="unknown key"):
        config_from_dict({"colour": 1})
    with pytest.raises(UsageError, match="schema"):
        config_from_dict({"schema": "x/2"})
    assert config_from_dict({"domain": {"bounds": [0, "pi"]}}).domain.bounds == (0.0, np.pi)
    p = tmp_path / "c.json"
    p.write_text('{"tolerances": {"kernel": 0}}')
    assert main(["kernel-check", "--config", str(p)]) == 2


def test_unachievable_tolerances(tmp_path, monkeypatch, small_config):
    monkeypatch.setenv("HEATTRACE_TOL_SCALE", "1e-5")
    assert main(["kernel-check", "--config", small_config]) == 3
    monkeypatch.delenv("HEATTRACE_TOL_SCALE")
    p = tmp_path / "c.json"
    p.write_text('{"tolerances": {"oracle_relative": 1e-10}}')
    assert main(["oracle-compare", "--fixture", "eigenfunction", "--config", str(p)]) == 3


def test_missing_source_and_unknown_fixture():
    assert main(["eval"]) == 2
    assert main(["eval", "--fixture", "nope"]) == 2
    assert main(["bogus-command"]) == 2


def test_kernel_check_and_mutation(tmp_path, small_config):
    out = tmp_path / "k"
    assert main(["kernel-check", "--config", small_config, "--out", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == {"kernel_probes.csv", "manifest.json", "report.json", "report.txt"}
    report = json.loads((out / "report.json").read_text())
    assert all(c["passed"] for c in report["checks"])
    assert main(["kernel-check", "--config", small_config, "--mutation", "asymmetric"]) == 1
    assert main(["kernel-check", "--mutation", "nonexistent"]) == 2


def test_roundtrip_empty_triple_and_mutation(tmp_path, small_config):
    p = tmp_path / "empty.json"
    p.write_text(serialize_triple(empty_triple()))
    assert main(["roundtrip", "--triple", str(p), "--config", small_config]) == 0
    assert main(["roundtrip", "--fixture", "corner-atom", "--config", small_config]) == 0
    assert main(["roundtrip", "--fixture", "corner-atom", "--config", small_config, "--mutation", "scaled"]) == 1


def test_oracle_compare_eigenfunction(small_config):
    assert main(["oracle-compare", "--fixture", "eigenfunction", "--config", small_config]) == 0


def test_traces_from_triple_and_from_sampled_field(tmp_path, small_config):
    out = tmp_path / "t"
    assert main(["traces", "--fixture", "corner-atom", "--config", small_config, "--out", str(out)]) == 0
    doc = json.loads((out / "traces.json").read_text())
    lam = {a["side"]: a["mass"] for a in doc["estimate"]["lambda"]["atoms"]}
    assert lam["left"] == pytest.approx(0.3, abs=1e-3)

    cfg = tmp_path / "field.json"
    cfg.write_text(json.dumps({"grid": {"nx": 64, "nt": 64, "t_min": 0.01, "t_max": 1.0},
                               "schedule": {"t0": 0.64, "levels": 6, "bins": 4}}))
    ev = tmp_path / "ev"
    assert main(["eval", "--fixture", "eigenfunction", "--config", str(cfg), "--out", str(ev)]) == 0
    tf = tmp_path / "tf"
    assert main(["traces", "--field", str(ev / "solution.csv"), "--config", str(cfg), "--out", str(tf)]) == 0
    doc = json.loads((tf / "traces.json").read_text())
    assert all(a["mass"] < 1e-3 for a in doc["estimate"]["lambda"]["atoms"])
    # the default schedule reaches below the first sampled time
    assert main(["traces", "--field", str(ev / "solution.csv")]) == 1


def test_output_may_not_overwrite_input(tmp_path):
    p = tmp_path / "traces.json"
    p.write_text(serialize_triple(empty_triple()))
    assert main(["traces", "--triple", str(p), "--out", str(tmp_path)]) == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "heattrace", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "kernel-check" in r.stdout
