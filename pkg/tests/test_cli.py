from __future__ import annotations

import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
import pytest
from click.testing import CliRunner, Result

import diagorbit as do
from diagorbit.cli import _load_config, cli
from diagorbit.diagorbit import encode_scalar


@pytest.fixture
def runner():
    """Return a CliRunner."""
    return CliRunner()


def _report(result: Result) -> dict[str, Any]:
    """The JSON document written to stdout."""
    lines = [ln for ln in result.stdout.splitlines() if ln.startswith("{")]
    return json.loads(lines[-1])


def _write(path: Path, p: do.Tensor3) -> Path:
    path.write_text(p.dumps())
    return path


def test_gen_into_analyze(runner: CliRunner) -> None:
    ret = runner.invoke(cli, ["gen", "--family", "werner"])
    assert ret.exit_code == 0
    doc = _report(ret)
    assert doc["n"] == 2
    assert doc["schema_version"] == "1.0"
    ret = runner.invoke(cli, ["analyze"], input=ret.stdout)
    assert ret.exit_code == 2
    doc = _report(ret)
    assert doc["verdict"] == "boundary"
    assert doc["delta"] == "0"
    assert doc["multilinear_rank"] == [2, 2, 2]


def test_perturbed_family_is_in_orbit(runner: CliRunner) -> None:
    ret = runner.invoke(cli, ["gen", "--family", "kn-eps", "--n", "3", "--eps", "1/2"])
    ret = runner.invoke(cli, ["analyze", "-i", "-"], input=ret.stdout)
    assert ret.exit_code == 0
    assert _report(ret)["membership"]["in_orbit"] == "yes"


def test_outside_and_parse_errors(runner: CliRunner, tmp_path: Path, random3: do.Tensor3) -> None:
    path = _write(tmp_path / "generic.json", random3)
    ret = runner.invoke(cli, ["analyze", "--input", str(path)])
    assert ret.exit_code == 3
    assert _report(ret)["verdict"] == "outside"
    ret = runner.invoke(cli, ["analyze"], input="{not json")
    assert ret.exit_code == 64
    assert _report(ret)["error"] == "TensorParseError"
    ret = runner.invoke(cli, ["analyze", "-i", str(tmp_path / "missing.json")])
    assert ret.exit_code == 64
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 2, "field": "real", "entries": [[[1.0]]]}))
    ret = runner.invoke(cli, ["analyze", "-i", str(bad)])
    assert ret.exit_code == 65
    assert _report(ret)["error"] == "DimensionMismatchError"


def test_invariants_of_unit_tensor(runner: CliRunner) -> None:
    ret = runner.invoke(cli, ["invariants", "--pretty"], input=do.unit_tensor(3).dumps())
    assert ret.exit_code == 0
    doc = json.loads(ret.stdout)
    assert doc["tau3"] == "6"
    assert doc["h"] == ["1*x1*x2*x3"] * 3
    assert doc["f"] == ["2*x1*x2*x3"] * 3


def test_decompose(runner: CliRunner, orbit3: do.Tensor3) -> None:
    ret = runner.invoke(cli, ["decompose"], input=orbit3.dumps())
    assert ret.exit_code == 0
    doc = _report(ret)
    assert doc["normalization"] == "leading-one"
    assert doc["field"] == "rational"
    ret = runner.invoke(cli, ["decompose"], input=do.gen_Kn(3).dumps())
    assert ret.exit_code == 2
    doc = _report(ret)
    assert doc["error"] == "NotInOrbitError"
    assert doc["membership"]["verdict"] == "boundary"


def test_classify_real(runner: CliRunner) -> None:
    _, p = do.gen_Jk(3, 1)
    ret = runner.invoke(cli, ["classify-real"], input=p.dumps())
    assert ret.exit_code == 0
    doc = _report(ret)
    assert doc["signature"] == [1, 1]
    assert doc["r_sign"] == "-"


def test_check_model(runner: CliRunner) -> None:
    counts = json.dumps({"counts": [[[30, 0], [0, 0]], [[0, 0], [0, 30]]]})
    ret = runner.invoke(cli, ["check-model"], input=counts)
    assert ret.exit_code == 0
    doc = _report(ret)
    assert doc["verdict"] == "pass"
    assert doc["recovered"]["pi"] == ["1/2", "1/2"]
    ret = runner.invoke(cli, ["check-model", "--strict"], input=counts)
    assert ret.exit_code == 3
    assert _report(ret)["conditions"][4]["status"] == "fail"


def test_batch(runner: CliRunner, tmp_path: Path) -> None:
    _write(tmp_path / "a.json", do.unit_tensor(3))
    _write(tmp_path / "b.json", do.gen_Kn(3))
    (tmp_path / "c.json").write_text("[1, 2]")
    ret = runner.invoke(cli, ["analyze", "--batch", str(tmp_path), "--n-jobs", "1"])
    doc = _report(ret)
    assert [r["exit_code"] for r in doc["results"]] == [0, 2, 64]
    assert ret.exit_code == 64


def test_config_file(runner: CliRunner, tmp_path: Path) -> None:
    cfg = do.Config(backend="float", seed=7, tolerances=do.Tolerances(rank=1e-8))
    path = tmp_path / "config.yml"
    do.write_config(cfg, path)
    assert do.read_config(path) == cfg
    ret = runner.invoke(cli, ["analyze", "--config", str(path)], input=do.unit_tensor(2).dumps())
    assert ret.exit_code == 0
    assert _report(ret)["membership"]["backend"] == "float"
    path.write_text("samples: 0\n")
    with pytest.raises(ValueError, match="samples"):
        do.read_config(path)


def test_tolerance_override() -> None:
    cfg = _load_config(None, "exact", 1e-6, 3, strict=True)
    assert cfg.backend == "exact"
    assert cfg.seed == 3
    assert cfg.strict
    assert cfg.tolerances.rank == cfg.tolerances.psd == 1e-6
    assert cfg.tolerances.pairing == 1e-7


def test_run_requests(orbit3: do.Tensor3) -> None:
    doc, code = do.run(do.AnalysisRequest(command="analyze", tensor=orbit3.to_json()))
    assert code == 0
    assert doc["tau3"] != "0"
    doc, code = do.run(do.AnalysisRequest(command="invariants", tensor=do.unit_tensor(6).to_json()))
    assert code == 0
    assert "f" not in doc
    doc, code = do.run(do.AnalysisRequest(command="gen", family="kn", n=2))
    assert code == 0
    with pytest.raises(ValueError, match="Exactly one"):
        do.AnalysisRequest(command="analyze")
    with pytest.raises(ValueError, match="family"):
        do.AnalysisRequest(command="gen")


def test_versions(runner: CliRunner) -> None:
    ret = runner.invoke(cli, ["versions"])
    assert ret.exit_code == 0
    assert "numpy" in ret.output
    ret = runner.invoke(cli, ["--version"])
    assert ret.exit_code == 0


def test_show_versions() -> None:
    f = io.StringIO()
    do.show_versions(file=f)
    assert "SYS INFO" in f.getvalue()


def test_encode_scalar() -> None:
    assert encode_scalar(Fraction(-3, 4)) == "-3/4"
    assert encode_scalar(Fraction(5)) == "5"
    assert encode_scalar(np.float64(0.5)) == 0.5
    assert encode_scalar(1 + 2j) == [1.0, 2.0]
    assert encode_scalar(np.int64(7)) == 7


def test_batch_uses_every_cpu_by_default() -> None:
    assert do.Config().n_jobs == -1
    assert _load_config(None, None, None, None).n_jobs == -1
    assert _load_config(None, None, None, None, n_jobs=2).n_jobs == 2


def test_invariants_float_backend(runner: CliRunner, orbit3: do.Tensor3) -> None:
    ret = runner.invoke(cli, ["invariants", "--backend", "float"], input=orbit3.dumps())
    assert ret.exit_code == 0
    doc = _report(ret)
    assert doc["backend"] == "float"
    assert "h" not in doc
    assert len(doc["points"]) == 5
    x0 = doc["points"][0]
    assert doc["h_values"][0][0] == pytest.approx(float(do.h_eval(orbit3, 1, x0)), rel=1e-8)
    assert doc["f_values"][2][0] == pytest.approx(float(do.f_eval(orbit3, 3, x0)), rel=1e-8)
    assert isinstance(doc["tau3"], float)
    ret = runner.invoke(cli, ["invariants"], input=orbit3.to_float().dumps())
    assert _report(ret)["backend"] == "float"
    ret = runner.invoke(cli, ["invariants", "--backend", "exact"], input=orbit3.to_float().dumps())
    assert ret.exit_code == 65
    assert _report(ret)["error"] == "FieldMismatchError"
    ret = runner.invoke(cli, ["invariants", "--backend", "exact"], input=orbit3.dumps())
    assert _report(ret)["backend"] == "exact"


def test_analyze_reports_notes(runner: CliRunner) -> None:
    ret = runner.invoke(cli, ["analyze"], input=do.unit_tensor(3).dumps())
    assert _report(ret)["membership"]["notes"] == []
