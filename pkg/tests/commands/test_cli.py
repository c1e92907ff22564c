import json

import pytest

from phi4lambert.exception_handlers import EXIT_CONFIG, EXIT_DOMAIN, EXIT_OK
from phi4lambert.main import build_parser, main
from phi4lambert.services.domains import LAMBDA_RADIUS


def _json_out(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def test_eval_free_point_json(capsys):
    assert main(["eval", "0", "0", "0", "--format", "json"]) == EXIT_OK
    doc = _json_out(capsys)
    assert doc["schema"] == "phi4-lambert/1"
    assert doc["kind"] == "eval"
    record = doc["result"]["records"][0]
    assert record["G"] == pytest.approx(1.0)
    assert record["N"] == pytest.approx(0.0)
    assert doc["result"]["metadata"]["points"] == 1


def test_eval_defaults_to_table(capsys):
    assert main(["eval", "1", "2", "0.5"]) == EXIT_OK
    out = capsys.readouterr().out
    header = next(line for line in out.splitlines() if not line.startswith("#"))
    assert header.split() == ["a", "b", "lambda", "G", "N", "factor_a", "factor_b", "err_estimate"]


def test_eval_grid_row_major(capsys):
    assert main(["eval", "0.5", "--grid", "0:1:2", "0:2:3", "--format", "json"]) == EXIT_OK
    records = _json_out(capsys)["result"]["records"]
    assert len(records) == 6
    assert [(r["a"], r["b"]) for r in records] == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]


def test_eval_outside_domain_exit_code(capsys):
    assert main(["eval", "1", "1", "-0.73"]) == EXIT_DOMAIN
    err = capsys.readouterr().err
    assert "DomainError" in err


def test_eval_complex_coupling(capsys):
    assert main(["eval", "1", "1", "0.5+0.1j", "--format", "json"]) == EXIT_OK
    record = _json_out(capsys)["result"]["records"][0]
    assert set(record["G"]) == {"re", "im"}
    assert record["G"]["im"] != 0


def test_series_single_point(capsys):
    assert main(["series", "--order", "4", "--at", "1", "--format", "json"]) == EXIT_OK
    doc = _json_out(capsys)
    assert len(doc["result"]["records"]) == 5
    for record in doc["result"]["records"]:
        assert record["stirling"] == pytest.approx(record["derivative_form"], rel=1e-7, abs=1e-12)


@pytest.mark.slow
def test_series_two_point_reports_radii(capsys):
    assert main(["series", "--order", "6", "--at", "1,1", "--format", "json"]) == EXIT_OK
    metadata = _json_out(capsys)["result"]["metadata"]
    assert metadata["joint_radius"] == pytest.approx(LAMBDA_RADIUS, rel=1e-9)
    assert "radius_estimate" in metadata


def test_series_negative_order(capsys):
    assert main(["series", "--order", "-1", "--at", "1"]) == EXIT_CONFIG


def test_series_bad_point():
    with pytest.raises(SystemExit) as exc:
        main(["series", "--order", "2", "--at", "1,2,3"])
    assert exc.value.code == 2


def test_oracle_free_coupling(capsys):
    assert main(["oracle", "--lambda", "0", "--cutoff", "25", "--nodes", "16", "--format", "json"]) == EXIT_OK
    doc = _json_out(capsys)
    record = doc["result"]["records"][0]
    assert record["iterations"] == 1
    assert record["max_deviation"] < 1e-12


def test_oracle_grid_out(tmp_path, capsys):
    target = tmp_path / "grid.csv"
    code = main(["oracle", "--lambda", "0.5", "--cutoff", "25", "--nodes", "16", "--grid-out", str(target)])
    assert code == EXIT_OK
    assert target.exists()
    assert target.with_suffix(".json").exists()


def test_verify_single_identity(capsys):
    assert main(["verify", "--suite", "StrongCoupling", "--format", "json"]) == EXIT_OK
    doc = _json_out(capsys)
    assert doc["result"]["metadata"]["all_passed"] is True
    assert all(r["identity_id"] == "StrongCoupling" for r in doc["result"]["records"])
    assert all(r["pass"] for r in doc["result"]["records"])


def test_verify_unknown_identity(capsys):
    assert main(["verify", "--suite", "NoSuchIdentity"]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "ConfigError" in err


def test_curves_envelope_csv(capsys):
    assert main(["curves", "--which", "envelope", "--samples", "64"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert any(line.startswith("# t_E=0.58") for line in lines)
    assert any(line.startswith("# psi=") for line in lines)
    assert "param,re,im,curve_id" in lines


def test_curves_cochleoid_has_cut_column(capsys):
    assert main(["curves", "--which", "cochleoid", "--a", "1", "--samples", "32"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert "param,re,im,curve_id,cut" in lines


def test_output_to_file(tmp_path, capsys):
    target = tmp_path / "out" / "critical.csv"
    assert main(["curves", "--which", "critical", "--samples", "16", "--output", str(target)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    text = target.read_text(encoding="utf-8")
    assert "# curve=critical" in text
    assert ",C_critical" in text


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["eval"],
        ["curves", "--which", "spiral"],
        ["eval", "1", "1", "0.5", "--format", "xml"],
        ["eval", "1", "1", "not-a-number"],
    ],
)
def test_argument_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_parser_lists_all_commands():
    parser = build_parser()
    help_text = parser.format_help()
    for name in ("eval", "series", "oracle", "verify", "curves"):
        assert name in help_text


def test_invalid_parameters_map_to_config_exit(capsys):
    assert main(["eval", "-1", "1", "0.5"]) == EXIT_CONFIG
    assert main(["oracle", "--lambda", "0.5", "--cutoff", "25", "--tol", "0"]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "Invalid parameters" in err


def test_oracle_reference_grid(capsys):
    code = main(["oracle", "--lambda", "0.5", "--cutoff", "100", "--nodes", "64", "--format", "json"])
    assert code == EXIT_OK
    record = _json_out(capsys)["result"]["records"][0]
    assert record["residual"] <= 1e-10
    assert record["max_deviation"] < 0.1
