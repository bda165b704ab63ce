"""Run configuration, sweep driver, serialization, and the CLI front end."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from resgate.cli import TRAJECTORY_COLUMNS, main
from resgate.config import RunConfig, config_from_dict, load_config
from resgate.errors import ConfigError
from resgate.sweep import (
    CSV_COLUMNS,
    evaluate_point,
    load_results,
    optimize_point,
    render_csv,
    render_json,
    resolve_operating_point,
    run_sweep,
)


# ---------------------------------------------------------------- config --


def test_defaults_round_trip():
    cfg = config_from_dict({}, source="test")
    assert cfg.mode == "analytic"
    assert cfg.z_r_ohm == 5000.0
    assert cfg.q_factor == 20000.0
    assert cfg.j_ghz is None and cfg.eps_d_over_eps_a is None
    again = config_from_dict(cfg.to_json_dict(), source="round-trip")
    assert again.to_json_dict() == cfg.to_json_dict()


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="qbits"):
        config_from_dict({"qbits": 3}, source="test")


@pytest.mark.parametrize(
    "payload, fragment",
    [
        ({"q_factor": -1.0}, "q_factor"),
        ({"n": 2.5}, "n"),
        ({"n": True}, "n"),
        ({"mode": "explore"}, "mode"),
        ({"format": "yaml"}, "format"),
        ({"axes": {"bogus_key": [1, 2]}}, "bogus_key"),
        ({"axes": {"q_factor": {"start": 1, "stop": 2}}}, "axes.q_factor"),
        ({"axes": {"q_factor": {"start": -1, "stop": 2, "num": 3, "spacing": "log"}}},
         "axes.q_factor"),
        ({"initial_cavity": {"kind": "squeezed"}}, "initial_cavity"),
        ({"initial_cavity": {"kind": "thermal", "n_bar": -0.5}}, "n_bar"),
    ],
)
def test_rejections_carry_the_offending_path(payload, fragment):
    with pytest.raises(ConfigError, match=fragment):
        config_from_dict(payload, source="test")


def test_axis_forms():
    cfg = config_from_dict(
        {
            "axes": {
                "z_r_ohm": [50.0, 500.0],
                "q_factor": {"start": 1e3, "stop": 1e5, "num": 3, "spacing": "log"},
            }
        },
        source="test",
    )
    axes = dict(cfg.axes)
    assert axes["z_r_ohm"] == (50.0, 500.0)
    assert axes["q_factor"] == pytest.approx((1e3, 1e4, 1e5), rel=1e-12)


def test_coherent_cavity_forms():
    cfg = config_from_dict(
        {"initial_cavity": {"kind": "coherent", "alpha": [0.3, -0.4]}}, source="t"
    )
    assert cfg.initial_cavity.kind == "coherent"
    assert cfg.initial_cavity.alpha == pytest.approx(0.3 - 0.4j)
    cfg2 = config_from_dict(
        {"initial_cavity": {"kind": "coherent", "alpha": 0.5}}, source="t"
    )
    assert cfg2.initial_cavity.alpha == pytest.approx(0.5 + 0j)


def test_load_config_file(tmp_path):
    p = tmp_path / "run.json"
    p.write_text(json.dumps({"q_factor": 1234.0}))
    cfg = load_config(p)
    assert cfg.q_factor == 1234.0
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


# ----------------------------------------------------------------- sweep --


def test_operating_point_refinement_improves():
    cfg = config_from_dict({}, source="t")  # refine on by default
    pt = resolve_operating_point(cfg)
    assert pt.refined
    closed = pt.diagnostics["infidelity_closed_form"]
    refined = pt.diagnostics["infidelity_refined"]
    assert refined < closed
    improvement = (closed - refined) / closed
    assert 0.003 < improvement < 0.03
    assert pt.params.t_g * 1e9 == pytest.approx(7.29373812458119, rel=1e-9)


def test_operating_point_pinned_skips_refinement():
    cfg = config_from_dict(
        {"j_ghz": 0.0852, "eps_d_over_eps_a": 2.4, "refine": True}, source="t"
    )
    pt = resolve_operating_point(cfg)
    assert not pt.refined
    assert pt.J == pytest.approx(0.0852 * 6.62607015e-34 * 1e9, rel=1e-12)
    assert pt.y == pytest.approx(2.4)


def test_operating_point_clamp_is_reported():
    cfg = config_from_dict({"j_max_ghz": 0.06, "refine": False}, source="t")
    pt = resolve_operating_point(cfg)
    assert pt.clamped
    assert "j_opt_unclamped_ghz" in pt.diagnostics


def test_evaluate_point_analytic_row():
    cfg = config_from_dict({"refine": False}, source="t")
    row = evaluate_point(cfg)
    assert row.f_analytic == pytest.approx(0.9909047093653808, rel=1e-10)
    assert row.t_g_ns == pytest.approx(6.364032401360536, rel=1e-10)
    assert row.f_numeric is None or math.isnan(row.f_numeric)
    assert not row.failed


def test_evaluate_point_captures_domain_errors():
    cfg = config_from_dict({"c_r": 1.5}, source="t")  # passes config, fails physics
    row = evaluate_point(cfg)
    assert row.failed
    assert "error" in row.diagnostics
    assert "DomainError" in row.diagnostics["error"]
    assert math.isnan(row.f_analytic)


def test_single_loop_drops_power_law_only():
    row = evaluate_point(config_from_dict({"n": 1}, source="t"))
    assert not row.failed
    assert row.f_analytic > 0.9
    assert row.infidelity_powerlaw is None


def test_run_sweep_ordering_and_parallel_equivalence():
    payload = {
        "axes": {
            "z_r_ohm": [500.0, 5000.0],
            "q_factor": [5000.0, 20000.0],
        },
        "refine": False,
    }
    serial = run_sweep(config_from_dict(payload, source="t"))
    assert [(r.z_ohm, r.q) for r in serial.rows] == [
        (500.0, 5000.0), (500.0, 20000.0), (5000.0, 5000.0), (5000.0, 20000.0)
    ]
    parallel = run_sweep(config_from_dict({**payload, "jobs": 2}, source="t"))
    assert render_csv(serial) == render_csv(parallel)
    assert not serial.any_failed


def test_sweep_single_point_equals_optimize():
    cfg = config_from_dict({"refine": False}, source="t")
    row_a = run_sweep(cfg).rows[0]
    row_b = optimize_point(cfg, 5000.0, 20000.0)
    assert row_a.as_record() == row_b.as_record()


def test_csv_and_json_rendering(tmp_path):
    cfg = config_from_dict({"axes": {"q_factor": [1e4, 2e4]}, "refine": False}, source="t")
    result = run_sweep(cfg)
    csv_text = render_csv(result)
    lines = csv_text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    # unavailable numeric column renders as an empty cell
    assert lines[1].split(",")[CSV_COLUMNS.index("f_numeric")] == ""
    assert lines[1].split(",")[CSV_COLUMNS.index("clamped")] in ("true", "false")
    # byte-identical determinism
    assert render_csv(run_sweep(cfg)) == csv_text

    json_text = render_json(result)
    path = tmp_path / "rows.json"
    path.write_text(json_text)
    back = load_results(path)
    assert back["schema_version"] == 1
    assert len(back["rows"]) == 2
    assert back["rows"][0]["q"] == 1e4
    assert back["config"]["q_factor"] == 20000.0


# ------------------------------------------------------------------- cli --


def test_cli_analytic_stdout(capsys):
    assert main(["analytic"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2
    # rerun is byte-identical
    main(["analytic"])
    assert capsys.readouterr().out == out


def test_cli_rejects_unknown_config_key(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"qbits": 2}))
    assert main(["analytic", "--config", str(p)]) == 2
    err = capsys.readouterr().err
    assert "qbits" in err


def test_cli_optimize_json(capsys):
    assert main(["optimize", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    row = payload["rows"][0]
    assert row["f_analytic"] == pytest.approx(0.9911025881268543, rel=1e-9)
    assert payload["config"]["mode"] == "optimize"


def test_cli_simulate_with_trajectory(tmp_path, capsys):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"j_ghz": 0.3, "eps_d_over_eps_a": 2.0, "n_ph": 7}))
    out_csv = tmp_path / "sim.csv"
    traj_csv = tmp_path / "traj.csv"
    code = main([
        "simulate", "--config", str(cfg),
        "--out", str(out_csv), "--trajectory", str(traj_csv),
    ])
    assert code == 0
    rows = out_csv.read_text().strip().split("\n")
    rec = dict(zip(rows[0].split(","), rows[1].split(",")))
    assert float(rec["f_numeric"]) == pytest.approx(float(rec["f_analytic"]), abs=2e-3)
    assert float(rec["max_fock_pop"]) < 1e-4
    traj_lines = traj_csv.read_text().strip().split("\n")
    assert traj_lines[0] == ",".join(TRAJECTORY_COLUMNS)
    assert len(traj_lines) > 100
    last = dict(zip(TRAJECTORY_COLUMNS, traj_lines[-1].split(",")))
    assert float(last["mean_photon"]) < 1e-2
    assert float(last["polaron_residual"]) < 1e-4


def test_cli_simulate_flags_small_fock_space(tmp_path, capsys):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"j_ghz": 0.3, "eps_d_over_eps_a": 2.0, "n_ph": 6}))
    code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o.csv")])
    assert code == 3
    assert "failed" in capsys.readouterr().err


def test_cli_sweep_to_file(tmp_path, capsys):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({"axes": {"q_factor": [1e4, 2e4, 4e4]}, "refine": False}))
    out = tmp_path / "rows.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    assert "wrote 3 row(s)" in capsys.readouterr().out
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 4
    qs = [float(line.split(",")[1]) for line in lines[1:]]
    assert qs == [1e4, 2e4, 4e4]


def test_cli_seed_override(tmp_path):
    # the seed only matters for thermal sampling; check it is plumbed through
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 5}))
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(["analytic", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["analytic", "--config", str(cfg), "--seed", "9", "--out", str(out2)]) == 0
    # analytic output is seed-independent
    assert out1.read_text() == out2.read_text()
