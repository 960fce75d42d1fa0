"""CLI surface: exit-code discipline, report schema validation, CSV
format, and the cheap command paths."""

import csv
import json

import pytest

from lyapcert.cli import main, validate_report


def test_usage_error_exit_code(capsys):
    assert main(["pitchfork-rate", "--alpha", "1..2"]) == 64
    assert "usage error" in capsys.readouterr().err


def test_unknown_subcommand_is_usage_error():
    assert main(["no-such-command"]) == 64


def test_missing_required_flag_is_usage_error():
    assert main(["pitchfork-minimum"]) == 64


def test_shear_validate_p_range_usage_error():
    assert main(["shear-validate", "--p-min", "2", "--p-max", "1"]) == 64


def test_pitchfork_minimum_needs_three_alphas():
    assert main(["pitchfork-minimum", "--alphas", "1.0,2.0"]) == 64


def test_oracle_command_report(tmp_path, capsys):
    out = tmp_path / "oracle.json"
    rc = main([
        "oracle", "--model", "shear", "--alpha", "1", "--b", "0",
        "--sigma", "1", "--t", "2", "--count", "32", "--dt", "0.01",
        "--seed", "5", "--p", "1.0", "--out", str(out),
    ])
    assert rc == 0
    report = json.loads(out.read_text())
    validate_report(report)
    assert report["status"] == "ok"
    assert report["oracle"]["fk_lambda"]["value"] == pytest.approx(-1.0)
    assert report["oracle"]["ftle"]["mean"] == pytest.approx(-1.0)
    assert report["oracle"]["empirical_mle"]["estimate"] == \
        pytest.approx(-1.0, abs=1e-9)


def test_figure_data_fig2_csv(tmp_path):
    out = tmp_path / "fig2.csv"
    rc = main(["figure-data", "--which", "fig2", "--out", str(out),
               "--alpha-list", "0.0,0.25,0.5"])
    assert rc == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["alpha", "lambda_fk"]
    assert len(rows) == 4
    assert all(float(r[1]) < 0 for r in rows[1:])
    # RFC 4180: CRLF line endings
    assert b"\r\n" in out.read_bytes()


def test_shear_validate_b_zero(tmp_path, capsys):
    """b = 0: Lambda(p) = -alpha p is affine, so the derivative encloses
    -alpha, the variance encloses 0, and rate bracketing reports a
    bracket failure without failing the run."""
    out = tmp_path / "sv.json"
    rc = main([
        "shear-validate", "--alpha", "1", "--b", "0", "--sigma", "1",
        "--p-min=-0.5", "--p-max", "0.5", "--N", "8", "--K", "4",
        "--out", str(out),
    ])
    assert rc == 0
    report = json.loads(out.read_text())
    validate_report(report)
    d1 = report["enclosures"]["dLambda0"]
    assert float(d1["lo"]) <= -1.0 <= float(d1["hi"])
    d2 = report["enclosures"]["d2Lambda0"]
    assert float(d2["lo"]) <= 0.0 <= float(d2["hi"])
    assert report["enclosures"]["I0"] is None
    assert any("bracket" in n for n in report.get("notes", []))


def test_report_hexfloat_roundtrip(tmp_path):
    out = tmp_path / "sv.json"
    main([
        "shear-validate", "--alpha", "1", "--b", "0", "--sigma", "1",
        "--p-min=-0.5", "--p-max", "0.5", "--N", "8", "--K", "4",
        "--out", str(out),
    ])
    report = json.loads(out.read_text())
    enc = report["enclosures"]["dLambda0"]
    assert float.fromhex(enc["lo_hex"]) == float(enc["lo"])
    assert float.fromhex(enc["hi_hex"]) == float(enc["hi"])


def test_schema_rejects_malformed_report():
    jsonschema = pytest.importorskip("jsonschema")
    with pytest.raises(jsonschema.ValidationError):
        validate_report({"schema_version": 1, "command": "x"})
