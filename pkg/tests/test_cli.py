"""End to end tests for the command line front end.

Every test drives grflab.cli.main(argv) in process and inspects the exit
status, the one-line summary, and the artifacts left in a scratch
directory.  Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

import json
import math
import os

import numpy as np
import pytest

from grflab import cli


@pytest.fixture()
def invoke(capsys):
    def _invoke(*argv):
        code = cli.main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _invoke


def read_csv(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    rows = [[float(x) for x in line.split(",")] for line in lines[1:]]
    return header, rows


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


# --------------------------------------------------------------------------
# happy paths and artifact contents


def test_cylinder_flow_writes_csv_with_closed_form_values(invoke, tmp_path):
    code, out, err = invoke("cylinder-flow", "--h0sq", "0.5", "--out", str(tmp_path))
    assert code == 0 and err == ""
    assert out.startswith("cylinder-flow h0sq=0.5:")
    assert "T_sing=2.000000" in out
    header, rows = read_csv(tmp_path / "cylinder_flow.csv")
    assert header[:4] == ["t", "lambda", "h", "beta"]
    # dt_out = 0.01 puts a sample exactly at t = 1; there lambda = 1 - t/2
    by_t = {row[0]: row for row in rows}
    assert abs(by_t[1.0][1] - 0.5) < 1e-9
    assert abs(by_t[1.0][3] - 1.0 / math.sqrt(0.5)) < 1e-9


def test_artifacts_are_byte_identical_across_runs(invoke, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out_dir in (a, b):
        code, _, _ = invoke("shoot", "--csv", "--out", str(out_dir))
        assert code == 0
    for name in ("shoot.json", "shoot_trajectory.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_shoot_report_payload(invoke, tmp_path):
    code, out, err = invoke("shoot", "--out", str(tmp_path))
    assert code == 0
    assert out.startswith("shoot: milestones=[")
    assert "u_max=2.279507" in out
    payload = read_json(tmp_path / "shoot.json")
    milestones = payload["milestones"]
    assert list(milestones) == ["r1", "r2", "r3", "r4"]
    values = [milestones[k] for k in ("r1", "r2", "r3", "r4")]
    assert all(isinstance(v, float) and math.isfinite(v) for v in values)
    assert values == sorted(values)
    assert abs(payload["u_max"] - 3.0 ** 0.75) < 1e-6
    assert payload["terminated_at_zero"] is True
    # the trajectory CSV only appears with the flag
    assert not (tmp_path / "shoot_trajectory.csv").exists()


def test_torsion_crossing_matches_closed_form(invoke, tmp_path):
    code, out, err = invoke(
        "torsion", "--h0sq", "0.5", "--psi0", "12", "--out", str(tmp_path)
    )
    assert code == 0
    assert "crossing=1.729329" in out
    payload = read_json(tmp_path / "torsion.json")
    # h0^2 = 1/2 collapses at T = 2 and the integral crosses 12 at 2 - 2/e^2
    assert abs(payload["crossing_time"] - (2.0 - 2.0 * math.exp(-2.0))) < 1e-6
    assert abs(payload["log_coefficient"] - 6.0) < 1e-4


def test_soliton_residual_payload(invoke, tmp_path):
    code, out, err = invoke(
        "soliton-residual", "--soliton", "gaussian", "--out", str(tmp_path)
    )
    assert code == 0
    assert out.startswith("soliton-residual gaussian:")
    assert "convention_ok=True" in out
    payload = read_json(tmp_path / "soliton_residual.json")
    assert set(payload) == {
        "soliton", "grid", "ode_sup", "tensor_sup", "convention_ok",
        "factor_gap", "lambda_ode", "lambda_soliton",
    }
    assert payload["convention_ok"] is True
    assert payload["factor_gap"] < 1e-10
    assert max(payload["ode_sup"].values()) < 1e-10
    assert max(payload["tensor_sup"].values()) < 1e-10
    assert payload["lambda_soliton"] == pytest.approx(2 * payload["lambda_ode"])


def test_entropy_artifact_starts_at_pinned_value(invoke, tmp_path):
    code, out, err = invoke("entropy", "--dt", "0", "--out", str(tmp_path))
    assert code == 0
    assert out.startswith("entropy h0sq=0:")
    assert "W0=-0.734488" in out
    header, rows = read_csv(tmp_path / "entropy.csv")
    assert header == ["t", "tau", "W", "dW_fd", "dW_formula", "gap"]
    assert rows[0][0] == 0.0
    # default u0 normalizes mass to 1; at t = 0 then W = log(2 sqrt(pi)) - 2
    assert abs(rows[0][2] - (math.log(2.0 * math.sqrt(math.pi)) - 2.0)) < 1e-9


def test_entropy_without_collapse_needs_explicit_reference_time(invoke, tmp_path):
    # lam0 = 100 under pure Ricci flow only reaches lam = 90 by tmax
    code, out, err = invoke("entropy", "--lam0", "100", "--out", str(tmp_path))
    assert code == 3
    assert err.startswith("numerical failure:")
    assert "T_ref" in err
    code, out, err = invoke(
        "entropy", "--lam0", "100", "--T-ref", "200", "--dt", "0",
        "--out", str(tmp_path),
    )
    assert code == 0


def test_heat_check_writes_both_reports(invoke, tmp_path):
    code, out, err = invoke(
        "heat-check", "--soliton", "gaussian", "--points", "60",
        "--dt", "1e-3", "--out", str(tmp_path),
    )
    assert code == 0
    assert out.startswith("heat-check gaussian: heat_sup=")
    assert "monotonicity_sup=" in out
    heat = read_json(tmp_path / "heat_check.json")
    mono = read_json(tmp_path / "monotonicity_check.json")
    assert max(abs(v) for v in heat["sup"].values()) < 1e-4
    assert max(abs(v) for v in mono["sup"].values()) < 1e-4


def test_hodge_refine_reports_fourth_order_rate(invoke, tmp_path):
    code, out, err = invoke(
        "hodge-check", "--identity", "twisted", "--size", "16", "--refine",
        "--out", str(tmp_path),
    )
    assert code == 0
    assert "rate=" in out
    payload = read_json(tmp_path / "hodge_twisted.json")
    assert 3.0 < payload["rate"] < 5.0
    assert any(key.startswith("refined_") for key in payload["residuals"])


# --------------------------------------------------------------------------
# config handling


def test_dump_config_resolves_flags_over_file(invoke, tmp_path):
    cfg = write_config(tmp_path, {
        "command": "cylinder-flow",
        "parameters": {"h0sq": 0.1, "tmax": 4.0},
    })
    code, out, err = invoke(
        "cylinder-flow", "--config", cfg, "--h0sq", "0.5",
        "--dump-config", "--out", str(tmp_path / "scratch"),
    )
    assert code == 0 and err == ""
    resolved = json.loads(out)
    assert resolved["command"] == "cylinder-flow"
    assert resolved["parameters"]["h0sq"] == 0.5  # flag wins
    assert resolved["parameters"]["tmax"] == 4.0  # file survives
    assert resolved["output"]["directory"] == str(tmp_path / "scratch")
    assert not (tmp_path / "scratch").exists()  # dump never runs anything


def test_grid_tolerance_feeds_the_resolution_parameter(invoke, tmp_path):
    cfg = write_config(tmp_path, {"tolerances": {"grid": 24}})
    code, out, _ = invoke("hodge-check", "--config", cfg, "--dump-config")
    assert code == 0
    assert json.loads(out)["parameters"]["size"] == 24


def test_output_directory_precedence(invoke, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUTPUT_DIR, str(tmp_path / "from_env"))
    code, out, _ = invoke("shoot", "--dump-config")
    assert json.loads(out)["output"]["directory"] == str(tmp_path / "from_env")

    cfg = write_config(tmp_path, {"output": {"directory": str(tmp_path / "from_cfg")}})
    code, out, _ = invoke("shoot", "--config", cfg, "--dump-config")
    assert json.loads(out)["output"]["directory"] == str(tmp_path / "from_cfg")

    code, out, _ = invoke("shoot", "--config", cfg, "--dump-config",
                          "--out", str(tmp_path / "from_flag"))
    assert json.loads(out)["output"]["directory"] == str(tmp_path / "from_flag")

    monkeypatch.delenv(cli.ENV_OUTPUT_DIR)
    code, out, _ = invoke("shoot", "--dump-config")
    assert json.loads(out)["output"]["directory"] == "grflab_out"


def test_env_output_dir_receives_artifacts(invoke, tmp_path, monkeypatch):
    target = tmp_path / "env_out"
    monkeypatch.setenv(cli.ENV_OUTPUT_DIR, str(target))
    code, out, _ = invoke("shoot")
    assert code == 0
    assert (target / "shoot.json").exists()


def test_output_format_switches_suppress_artifacts(invoke, tmp_path):
    cfg = write_config(tmp_path, {"output": {"csv": False}})
    out_dir = tmp_path / "run"
    code, out, _ = invoke("cylinder-flow", "--config", cfg, "--out", str(out_dir))
    assert code == 0
    assert "->" not in out
    assert not (out_dir / "cylinder_flow.csv").exists()

    cfg = write_config(tmp_path, {"output": {"json": False}}, name="nojson.json")
    out_dir = tmp_path / "run2"
    code, out, _ = invoke("shoot", "--csv", "--config", cfg, "--out", str(out_dir))
    assert code == 0
    assert not (out_dir / "shoot.json").exists()
    assert (out_dir / "shoot_trajectory.csv").exists()


def test_run_subcommand_takes_command_from_config(invoke, tmp_path):
    cfg = write_config(tmp_path, {"command": "shoot"})
    out_dir = tmp_path / "run"
    code, out, err = invoke("run", "--config", cfg, "--out", str(out_dir))
    assert code == 0
    assert (out_dir / "shoot.json").exists()

    code, _, err = invoke("run")
    assert code == 2 and "--config is required" in err

    cfg = write_config(tmp_path, {"parameters": {}}, name="nocmd.json")
    code, _, err = invoke("run", "--config", cfg)
    assert code == 2 and "no 'command'" in err


# --------------------------------------------------------------------------
# rejection paths


def test_empty_config_is_rejected(invoke, tmp_path):
    cfg = write_config(tmp_path, {})
    out_dir = tmp_path / "never"
    code, out, err = invoke("cylinder-flow", "--config", cfg, "--out", str(out_dir))
    assert code == 2
    assert err.startswith("config error:")
    assert "empty config" in err
    assert out == ""
    assert not out_dir.exists()


def test_unknown_parameter_is_named(invoke, tmp_path):
    cfg = write_config(tmp_path, {"parameters": {"h0qs": 0.5}})
    code, _, err = invoke("cylinder-flow", "--config", cfg)
    assert code == 2
    assert "h0qs" in err


def test_malformed_json_reports_position(invoke, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, err = invoke("cylinder-flow", "--config", str(path))
    assert code == 2
    assert "line 1" in err


def test_config_command_mismatch_is_rejected(invoke, tmp_path):
    cfg = write_config(tmp_path, {"command": "shoot"})
    code, _, err = invoke("cylinder-flow", "--config", cfg)
    assert code == 2
    assert "declares command 'shoot'" in err


def test_zero_torsion_witness_is_a_config_error(invoke, tmp_path):
    code, _, err = invoke("torsion", "--h0sq", "0", "--out", str(tmp_path))
    assert code == 2
    assert "nonzero" in err


def test_short_horizon_blowup_is_a_numerical_failure(invoke, tmp_path):
    code, out, err = invoke("blowup", "--tmax", "0.05", "--out", str(tmp_path))
    assert code == 3
    assert err.startswith("numerical failure:")
    assert "collapse" in err
    assert not (tmp_path / "blowup.json").exists()


def test_missing_command_prints_usage(invoke):
    code, _, err = invoke()
    assert code == 2
    assert "usage" in err.lower()


# --------------------------------------------------------------------------
# sweeps


def test_sweep_fans_out_into_subdirectories(invoke, tmp_path):
    sweep = write_config(tmp_path, {
        "runs": [
            {"name": "ricci", "parameters": {"h0sq": 0.0}},
            {"name": "separatrix", "parameters": {"h0sq": 0.5}},
        ],
    }, name="sweep.json")
    out_dir = tmp_path / "sweep_out"
    code, out, err = invoke("cylinder-flow", "--sweep", sweep, "--out", str(out_dir))
    assert code == 0
    assert (out_dir / "ricci" / "cylinder_flow.csv").exists()
    assert (out_dir / "separatrix" / "cylinder_flow.csv").exists()
    lines = out.splitlines()
    assert any(line.startswith("[ricci] cylinder-flow h0sq=0:") for line in lines)
    assert any("T_sing=2.000000" in line for line in lines if line.startswith("[separatrix]"))


def test_sweep_exit_code_is_the_worst_run(invoke, tmp_path):
    sweep = write_config(tmp_path, {
        "runs": [
            {"name": "ok"},
            {"name": "bad", "parameters": {"tmax": 0.05}},
        ],
    }, name="sweep.json")
    out_dir = tmp_path / "sweep_out"
    code, out, err = invoke("blowup", "--sweep", sweep, "--out", str(out_dir))
    assert code == 3
    lines = out.splitlines()
    assert any(line.startswith("[bad] numerical failure:") for line in lines)
    assert (out_dir / "ok" / "blowup.json").exists()
    assert not (out_dir / "bad" / "blowup.json").exists()


def test_sweep_rejects_unknown_run_keys(invoke, tmp_path):
    sweep = write_config(tmp_path, {
        "runs": [{"name": "x", "parameters": {}, "extra": 1}],
    }, name="sweep.json")
    code, _, err = invoke("shoot", "--sweep", sweep)
    assert code == 2
    assert "unknown key" in err
