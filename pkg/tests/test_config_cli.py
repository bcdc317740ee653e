import csv
import io
import json

import pytest

from qpcocycle.cli import main, run_command
from qpcocycle.config import ConfigError, parse_config
from qpcocycle.report import emit_report, fmt_value, render_csv

MINIMAL = """\
[potential]
preset = amo

[run]
lambda = 40
E = 0
"""


def _write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_minimal_config_parses():
    cfg = parse_config(MINIMAL)
    assert cfg.lambdas == (40.0,) and cfg.energies == (0.0,)
    assert cfg.potential_label == "amo"
    assert len(cfg.sha256) == 64


def test_violations_are_collected():
    text = MINIMAL.replace("E = 0", "E = 0\nrho = 0.6\nlamda = 3\nM = 4")
    with pytest.raises(ConfigError) as ei:
        parse_config(text)
    msgs = ei.value.violations
    assert any("rho must satisfy 0 < rho < min(h,1)/2" in m for m in msgs)
    assert any("'lamda'" in m and "did you mean 'lambda'" in m for m in msgs)
    assert any("M must be at least 16" in m for m in msgs)


def test_syntax_error_reports_line():
    with pytest.raises(ConfigError) as ei:
        parse_config("lambda = 3\n")
    assert "line 1" in ei.value.violations[0]


def test_coeffs_and_mu():
    cfg = parse_config("[potential]\ncoeffs = 1:1, -1:1, 2:0.25, -2:0.25\n[run]\nlambda = 50\nmu = 0.5, 1\n")
    assert cfg.potential.degree == 2
    assert cfg.energies_for(50.0) == (25.0, 50.0)
    assert cfg.shifts() == (0.5, 1.0)
    with pytest.raises(ConfigError):
        parse_config("[run]\nlambda = 50\nmu = 0.5\nE = 1\n")
    with pytest.raises(ConfigError):
        parse_config("[potential]\npreset = amo\ncoeffs = 1:1\n")


def test_stratum_section():
    cfg = parse_config(MINIMAL + "[stratum]\nmu1 = -1\nmu2 = 1\nenforce_threshold = no\n")
    assert (cfg.mu1, cfg.mu2, cfg.enforce_threshold) == (-1.0, 1.0, False)
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "[stratum]\nmu1 = 1\n")


def test_fmt_value_and_csv():
    assert fmt_value(1 / 3, 4) == 0.3333
    assert fmt_value(float("nan")) == "nan"
    assert fmt_value(1 + 2j) == {"re": 1.0, "im": 2.0}
    assert render_csv([], ["a", "b"]) == "a,b\n"


def test_empty_result_header_only(tmp_path):
    paths = emit_report("le", [], ["lambda", "L"], "csv", tmp_path)
    assert paths[0].read_text() == "lambda,L\n"
    assert json.loads(paths[1].read_text())["rows"] == 0
    cfg = parse_config(MINIMAL.replace("lambda = 40", "lambda ="))
    assert run_command("le", cfg).exit_code == 0


def test_cli_usage_errors(tmp_path, capsys):
    assert main(["nope"]) == 3
    assert main(["le"]) == 3
    bad = _write(tmp_path, MINIMAL + "rho = 0.6\n")
    assert main(["le", "--config", str(bad), "--out", str(tmp_path / "o")]) == 3
    assert "rho must satisfy" in capsys.readouterr().err
    assert main(["le", "--config", str(tmp_path / "missing.ini")]) == 3


def test_cli_zeros_json(tmp_path):
    cfg = _write(tmp_path, "[potential]\npreset = amo\n[run]\nmu = 3\n")
    out = tmp_path / "o"
    assert main(["zeros", "--config", str(cfg), "--out", str(out), "--format", "json"]) == 0
    data = json.loads((out / "zeros.json").read_text())
    ims = sorted(r["im"] for r in data["rows"])
    assert ims == pytest.approx([-0.15317, 0.15317], abs=1e-5)


def test_cli_csv_json_identical_and_manifest(tmp_path):
    cfg = _write(tmp_path, "[potential]\npreset = amo\n[run]\nlambda = 40\nE = 120, 160\nn = 500\nM = 32\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["le", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["le", "--config", str(cfg), "--out", str(b), "--format", "json"]) == 0
    rows_csv = list(csv.DictReader(io.StringIO((a / "le.csv").read_text())))
    rows_json = json.loads((b / "le.json").read_text())["rows"]
    for rc, rj in zip(rows_csv, rows_json):
        assert float(rc["L"]) == rj["L"]
    man = json.loads((a / "manifest.json").read_text())
    assert man["command"] == "le" and man["files"] == ["le.csv"] and man["rows"] == 2
    cfg2 = _write(tmp_path, cfg.read_text() + "# changed\n", "c2.ini")
    assert main(["le", "--config", str(cfg2), "--out", str(tmp_path / "c")]) == 0
    man2 = json.loads((tmp_path / "c" / "manifest.json").read_text())
    assert man2["config_sha256"] != man["config_sha256"]


def test_cli_byte_identical_reruns(tmp_path):
    cfg = _write(tmp_path, "[potential]\npreset = bichromatic\n[run]\nlambda = 5\nE = 0.5\ny = 0, 0.1\nn = 300\nM = 32\n")
    outs = []
    for k, w in enumerate(("1", "3")):
        d = tmp_path / f"r{k}"
        assert main(["le", "--config", str(cfg), "--out", str(d), "--workers", w]) == 0
        outs.append(((d / "le.csv").read_bytes(), (d / "manifest.json").read_bytes()))
    assert outs[0] == outs[1]


def test_cli_verify_constants(tmp_path, capsys):
    assert main(["verify-constants", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "verify-constants.csv").read_text()
    assert "K2" in text and "K3" in text and "case1_c" in text


def test_cli_precision_and_env(tmp_path, monkeypatch):
    cfg = _write(tmp_path, MINIMAL)
    assert main(["le", "--config", str(cfg), "--precision", "40"]) == 3
    monkeypatch.setenv("COCYCLE_WORKERS", "x")
    assert main(["le", "--config", str(cfg)]) == 3
