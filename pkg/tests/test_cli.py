"""Command line pipelines: config handling, artifacts, determinism."""

import hashlib
import json
import os

import pytest

from nlsfloer.cli import main


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_manifest(out_dir):
    with open(os.path.join(out_dir, "manifest.json")) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# config handling


def test_empty_config_validates_without_computing(tmp_path, capsys):
    cfg = write_config(tmp_path, {})
    out = tmp_path / "out"
    rc = main(["divisors", "--config", cfg, "--out", str(out)])
    captured = capsys.readouterr().out
    assert rc == 0
    assert not out.exists()
    assert "validation ok" in captured
    report = json.loads(captured[: captured.rindex("}") + 1])
    assert report["pipeline"] == "divisors"
    assert report["divisors"]["m_max"] == 2000
    assert report["model"]["kind"] == "potential"


def test_unknown_field_reports_path(tmp_path, capsys):
    cfg = write_config(tmp_path, {"pipeline": "divisors", "divisors": {"mmax": 10}})
    rc = main(["divisors", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "divisors.mmax" in capsys.readouterr().err


def test_wrong_type_reports_path(tmp_path, capsys):
    cfg = write_config(
        tmp_path, {"pipeline": "divisors", "divisors": {"m_max": "large"}}
    )
    rc = main(["divisors", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "divisors.m_max" in capsys.readouterr().err


def test_pipeline_selector_mismatch(tmp_path, capsys):
    cfg = write_config(tmp_path, {"pipeline": "hofer"})
    rc = main(["divisors", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "pipeline" in capsys.readouterr().err


def test_malformed_json_is_config_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    rc = main(["divisors", "--config", str(path), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_missing_config_is_io_error(tmp_path, capsys):
    rc = main(
        ["divisors", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]
    )
    assert rc == 4
    assert "cannot read config" in capsys.readouterr().err


def test_invalid_mode_rejected_before_running(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {"pipeline": "simulate", "model": {"k": 2}, "simulate": {"n0": 5}},
    )
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "simulate.n0" in capsys.readouterr().err


def test_bad_thread_count_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, {"pipeline": "divisors"})
    rc = main(
        ["divisors", "--config", cfg, "--out", str(tmp_path / "o"), "--threads", "0"]
    )
    assert rc == 2


# ---------------------------------------------------------------------------
# divisors pipeline and the manifest


def test_divisors_csv_contains_m5_record(tmp_path):
    cfg = write_config(
        tmp_path, {"pipeline": "divisors", "divisors": {"m_max": 100, "n": 0}}
    )
    out = tmp_path / "out"
    rc = main(["divisors", "--config", cfg, "--out", str(out)])
    assert rc == 0
    rows = (out / "divisors.csv").read_text().strip().split("\n")
    header = rows[0].split(",")
    assert header == ["m", "q", "p_star", "value", "is_record", "log10_m",
                      "log10_value"]
    m5 = dict(zip(header, rows[5].split(",")))
    assert m5["m"] == "5"
    assert m5["is_record"] == "1"
    assert abs(float(m5["value"]) - 0.132741) < 1e-6
    conv = (out / "convergents.csv").read_text().strip().split("\n")
    assert conv[0] == "index,p,q,error"
    assert len(conv) > 3


def test_manifest_records_digests_and_config(tmp_path):
    cfg = write_config(
        tmp_path,
        {"pipeline": "divisors", "seed": 7, "divisors": {"m_max": 50, "n": 1}},
    )
    out = tmp_path / "out"
    rc = main(["divisors", "--config", cfg, "--out", str(out)])
    assert rc == 0
    manifest = read_manifest(str(out))
    assert manifest["status"] == "success"
    assert manifest["exit_code"] == 0
    assert manifest["pipeline"] == "divisors"
    assert manifest["seed"] == 7
    assert manifest["config"]["divisors"]["m_max"] == 50
    assert manifest["version"]
    assert manifest["timestamp"]
    names = {e["path"] for e in manifest["artifacts"]}
    assert names == {"divisors.csv", "convergents.csv", "divisors_summary.json"}
    for entry in manifest["artifacts"]:
        digest = hashlib.sha256((out / entry["path"]).read_bytes()).hexdigest()
        assert digest == entry["sha256"]
    leftovers = [f for f in os.listdir(out) if f.startswith(".tmp-artifact-")]
    assert leftovers == []


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path, {"pipeline": "divisors", "seed": 3,
                                  "divisors": {"m_max": 20}})
    out = tmp_path / "out"
    rc = main(["divisors", "--config", cfg, "--out", str(out), "--seed", "11"])
    assert rc == 0
    assert read_manifest(str(out))["seed"] == 11


def test_identical_config_and_seed_reproduce_bytes(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "pipeline": "galerkin",
            "seed": 5,
            "model": {"kind": "hartree", "eps": 0.1, "k": 6},
            "galerkin": {"k_values": [2, 3], "samples": 4},
        },
    )
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["galerkin", "--config", cfg, "--out", str(out)]) == 0
        outs.append(out)
    for artifact in ("galerkin.csv", "galerkin_summary.json"):
        assert (outs[0] / artifact).read_bytes() == (outs[1] / artifact).read_bytes()


def test_different_seed_changes_sampled_gaps(tmp_path):
    body = {
        "pipeline": "galerkin",
        "model": {"kind": "hartree", "eps": 0.1, "k": 6},
        "galerkin": {"k_values": [2], "samples": 4},
    }
    cfg = write_config(tmp_path, body)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["galerkin", "--config", cfg, "--out", str(a), "--seed", "0"]) == 0
    assert main(["galerkin", "--config", cfg, "--out", str(b), "--seed", "1"]) == 0
    assert (a / "galerkin.csv").read_text() != (b / "galerkin.csv").read_text()


# ---------------------------------------------------------------------------
# the remaining pipelines


def test_hofer_constant_prints_zero(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "pipeline": "hofer",
            "model": {"kind": "constant", "eps": 0.3, "k": 2},
            "hofer": {"t_nodes": 4, "starts": 2},
        },
    )
    rc = main(["hofer", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 0
    assert "estimate 0 " in capsys.readouterr().out
    summary = json.loads((tmp_path / "o" / "hofer_summary.json").read_text())
    assert summary["estimate"] == 0.0


def test_simulate_hartree_matches_closed_form(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "pipeline": "simulate",
            "model": {"kind": "hartree", "eps": 0.1, "k": 3},
            "simulate": {"n0": 1, "steps": 200, "samples": 4},
        },
    )
    out = tmp_path / "o"
    rc = main(["simulate", "--config", cfg, "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "simulate_summary.json").read_text())
    assert summary["max_closed_form_error"] < 1e-12
    assert summary["max_drift"] < 1e-12
    rows = (out / "simulate.csv").read_text().strip().split("\n")
    assert rows[0] == "time,l2_norm,l2_drift,closed_form_error"
    assert len(rows) == 1 + 5


def test_fixed_points_pipeline_emits_points_and_distances(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "pipeline": "fixed-points",
            "model": {"kind": "potential", "eps": 0.05, "k": 3},
            "fixed_points": {"modes": [0, 1], "steps": 200},
        },
    )
    out = tmp_path / "o"
    rc = main(["fixed-points", "--config", cfg, "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "fixed_points_summary.json").read_text())
    assert all(m["converged"] for m in summary["modes"])
    assert summary["min_distance"] > 0.5
    assert summary["flagged_pairs"] == []
    assert (out / "fixed_point_n0.json").exists()
    assert (out / "fixed_point_n1.json").exists()
    assert (out / "distances.csv").exists()


def test_floer_trivial_solve_takes_zero_iterations(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "pipeline": "floer",
            "model": {"kind": "potential", "eps": 0.0, "k": 3},
            "floer": {"T": 0.0, "S": 2.0, "N_s": 24, "N_t": 8,
                      "n_left": 1, "n_right": 1, "gamma_max": 1},
        },
    )
    out = tmp_path / "o"
    rc = main(["floer", "--config", cfg, "--out", str(out)])
    assert rc == 0
    history = (out / "floer_history.csv").read_text().strip().split("\n")
    assert history[0] == "iteration,residual_norm,energy,damping"
    assert len(history) == 2
    summary = json.loads((out / "floer_summary.json").read_text())
    assert summary["iterations"] == 0
    assert summary["endpoint_distance"] == 0.0
    assert (out / "floer_state.json").exists()
    assert (out / "floer_slices.csv").exists()


def test_floer_non_convergence_exits_3_with_artifacts(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "pipeline": "floer",
            "model": {"kind": "potential", "eps": 0.05, "k": 3},
            "floer": {"T": 1.0, "S": 4.0, "N_s": 24, "N_t": 8,
                      "n_left": 0, "n_right": 0, "tol": 1e-12,
                      "max_iter": 1, "gamma_max": 1, "continuation_steps": 200},
        },
    )
    out = tmp_path / "o"
    rc = main(["floer", "--config", cfg, "--out", str(out)])
    assert rc == 3
    assert "numeric failure" in capsys.readouterr().err
    manifest = read_manifest(str(out))
    assert manifest["status"] == "numeric-failure"
    assert manifest["exit_code"] == 3
    names = {e["path"] for e in manifest["artifacts"]}
    assert "floer_history.csv" in names
    assert "floer_state.json" in names


def test_diagnose_missing_state_exits_4_with_manifest(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "pipeline": "diagnose",
            "model": {"kind": "potential", "eps": 0.0, "k": 3},
            "diagnose": {"states": [str(tmp_path / "missing.json")], "T": 0.0},
        },
    )
    out = tmp_path / "o"
    rc = main(["diagnose", "--config", cfg, "--out", str(out)])
    assert rc == 4
    assert "i/o error" in capsys.readouterr().err
    assert read_manifest(str(out))["status"] == "io-error"


def test_diagnose_runs_on_stored_artifacts(tmp_path):
    model = {"kind": "potential", "eps": 0.0, "k": 3}
    fp_cfg = write_config(
        tmp_path,
        {"pipeline": "fixed-points", "model": model,
         "fixed_points": {"modes": [0, 1], "steps": 100}},
        name="fp.json",
    )
    fp_out = tmp_path / "fp"
    assert main(["fixed-points", "--config", fp_cfg, "--out", str(fp_out)]) == 0

    fl_cfg = write_config(
        tmp_path,
        {"pipeline": "floer", "model": model,
         "floer": {"T": 0.0, "S": 2.0, "N_s": 24, "N_t": 8,
                   "n_left": 1, "n_right": 1, "gamma_max": 1}},
        name="fl.json",
    )
    fl_out = tmp_path / "fl"
    assert main(["floer", "--config", fl_cfg, "--out", str(fl_out)]) == 0

    dg_cfg = write_config(
        tmp_path,
        {
            "pipeline": "diagnose",
            "model": model,
            "diagnose": {
                "states": [str(fl_out / "floer_state.json")],
                "points": [str(fp_out / "fixed_point_n0.json"),
                           str(fp_out / "fixed_point_n1.json")],
                "T": 0.0,
            },
        },
        name="dg.json",
    )
    dg_out = tmp_path / "dg"
    rc = main(["diagnose", "--config", dg_cfg, "--out", str(dg_out)])
    assert rc == 0
    summary = json.loads((dg_out / "diagnose_summary.json").read_text())
    assert summary["monitors"][0]["sup_ds"] == 0.0
    assert summary["flagged_pairs"] == []
    decay = (dg_out / "state0_decay_alpha0.csv").read_text().strip().split("\n")
    assert decay[0].startswith("ell,alpha,norm")
    assert (dg_out / "distances.csv").exists()
    assert (dg_out / "monitors.json").exists()
