import json

import numpy as np
import pytest

from eprgate.cli import ConfigError, ExperimentSpec, load_config, main, run

E12 = 10.0 ** (-1.2)


def write_config(tmp_path, payload):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return path


def read_rows(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        rows.append({k: (None if v == "" else v) for k, v in zip(header, cells)})
    return header, rows


def test_load_config_minimal_fills_defaults(tmp_path):
    path = write_config(tmp_path, {"command": "gate", "target_db": 10, "epr_db": 12})
    spec = load_config(path)
    assert spec.seed == 0
    assert spec.coupler_rd == 1.0
    assert spec.detection_eta == 1.0
    assert spec.format == "csv"


def test_load_config_rejects_negative_target(tmp_path):
    path = write_config(tmp_path, {"command": "gate", "target_db": -3})
    with pytest.raises(ConfigError, match="negative target"):
        load_config(path)


def test_load_config_rejects_unknown_key(tmp_path):
    path = write_config(tmp_path, {"command": "gate", "gian_x": 1.2})
    with pytest.raises(ConfigError, match="gian_x"):
        load_config(path)


def test_load_config_reports_parse_location(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"command": "gate",\n  bad}')
    with pytest.raises(ConfigError, match=r":2:"):
        load_config(path)


def test_load_config_rejects_type_mismatch(tmp_path):
    path = write_config(tmp_path, {"command": "gate", "seed": "zero"})
    with pytest.raises(ConfigError, match="seed"):
        load_config(path)
    path = write_config(tmp_path, {"command": "gate", "target_db": "ten"})
    with pytest.raises(ConfigError, match="target_db"):
        load_config(path)


def test_unknown_command_rejected():
    with pytest.raises(ConfigError, match="unknown command"):
        ExperimentSpec(command="explode")


def test_gate_command_single_row(tmp_path):
    out = tmp_path / "gate.csv"
    code = main(["gate", "--target-db", "10", "--epr-db", "12", "--out", str(out)])
    assert code == 0
    header, rows = read_rows(out)
    assert header == [
        "target_db", "epr_db", "R", "gx", "gp",
        "fidelity", "sq_out_db", "antisq_out_db", "mc_fidelity", "mc_stderr",
    ]
    assert len(rows) == 1
    row = rows[0]
    assert float(row["R"]) == pytest.approx(1.0 / 11.0, abs=1e-12)
    assert float(row["fidelity"]) == pytest.approx(0.7805718703129106, abs=1e-9)
    assert row["mc_fidelity"] is None
    assert row["mc_stderr"] is None


def test_sweep_target_row_count_and_golden_row(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main([
        "sweep-target", "--sweep-start", "1", "--sweep-stop", "15",
        "--sweep-step", "0.5", "--epr-db", "12", "--out", str(out),
    ])
    assert code == 0
    _, rows = read_rows(out)
    assert len(rows) == 29
    at_ten = [r for r in rows if float(r["target_db"]) == 10.0]
    assert len(at_ten) == 1
    assert float(at_ten[0]["fidelity"]) == pytest.approx(0.7805718703129106, abs=1e-9)
    assert float(at_ten[0]["sq_out_db"]) == pytest.approx(-6.455237790800759, abs=1e-9)
    for row in rows:
        assert 0.0 < float(row["fidelity"]) <= 1.0
        assert 0.0 < float(row["R"]) < 1.0


def test_sweep_epr_monotone_and_values(tmp_path):
    out = tmp_path / "sweep_epr.csv"
    code = main([
        "sweep-epr", "--target-db", "10", "--sweep-start", "0",
        "--sweep-stop", "20", "--sweep-step", "1", "--out", str(out),
    ])
    assert code == 0
    _, rows = read_rows(out)
    assert len(rows) == 21
    fidelities = [float(r["fidelity"]) for r in rows]
    assert all(b > a for a, b in zip(fidelities, fidelities[1:]))
    by_epr = {float(r["epr_db"]): float(r["fidelity"]) for r in rows}
    assert by_epr[4.0] == pytest.approx(0.4394014224515538, abs=1e-9)
    assert by_epr[6.0] == pytest.approx(0.5270388813463509, abs=1e-9)


def test_sweep_target_near_ideal_ancilla(tmp_path):
    out = tmp_path / "ideal.csv"
    code = main(["sweep-target", "--epr-db", "60", "--out", str(out)])
    assert code == 0
    _, rows = read_rows(out)
    assert min(float(r["fidelity"]) for r in rows) >= 0.999


def test_byte_identical_reruns(tmp_path):
    args = [
        "sweep-target", "--sweep-start", "2", "--sweep-stop", "4", "--sweep-step", "1",
        "--shots", "1500", "--seed", "7", "--epr-db", "12",
    ]
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_mc_columns_populated_and_consistent(tmp_path):
    out = tmp_path / "mc.csv"
    code = main([
        "gate", "--target-db", "6", "--epr-db", "12",
        "--shots", "4000", "--seed", "3", "--out", str(out),
    ])
    assert code == 0
    _, rows = read_rows(out)
    row = rows[0]
    mc = float(row["mc_fidelity"])
    se = float(row["mc_stderr"])
    assert 0.0 < mc <= 1.0
    assert se > 0.0
    assert abs(mc - float(row["fidelity"])) <= 5.0 * se


def test_json_format_mirrors_columns(tmp_path):
    out_csv = tmp_path / "gate.csv"
    out_json = tmp_path / "gate.json"
    main(["gate", "--out", str(out_csv)])
    main(["gate", "--format", "json", "--out", str(out_json)])
    _, rows = read_rows(out_csv)
    payload = json.loads(out_json.read_text())
    assert isinstance(payload, list) and len(payload) == 1
    assert payload[0].keys() == rows[0].keys()
    assert payload[0]["fidelity"] == float(rows[0]["fidelity"])
    assert payload[0]["mc_fidelity"] is None


def test_complex_command_emits_wigner_panels(tmp_path):
    out = tmp_path / "complex.csv"
    prefix = tmp_path / "panels"
    code = main([
        "complex", "--target-db", "10", "--epr-db", "12",
        "--in-dp", repr(float(np.sqrt(4.5))),
        "--out", str(out), "--wigner-out", str(prefix),
    ])
    assert code == 0
    _, rows = read_rows(out)
    assert 0.762 <= float(rows[0]["fidelity"]) <= 0.796
    for tag in ("input", "output"):
        grid = tmp_path / f"panels_{tag}.csv"
        lines = grid.read_text().strip().splitlines()
        assert lines[0] == "x,p,w"
        assert len(lines) > 1000


def test_tomo_command_artifacts(tmp_path):
    out = tmp_path / "states.csv"
    code = main([
        "tomo", "--target-db", "10", "--epr-db", "12", "--shots", "3000",
        "--seed", "5", "--label", "headline", "--out", str(out),
    ])
    assert code == 0
    header, rows = read_rows(out)
    assert header == ["label", "source", "mu_x", "mu_p", "v_xx", "v_xp", "v_pp"]
    assert {r["source"] for r in rows} == {"measured", "theory"}
    assert all(r["label"] == "headline" for r in rows)
    theory = next(r for r in rows if r["source"] == "theory")
    assert float(theory["v_xx"]) == pytest.approx(0.05 + E12, abs=1e-12)
    shots = tmp_path / "states_shots.csv"
    assert shots.exists()
    sidecar = json.loads((tmp_path / "states_shots.json").read_text())
    assert sidecar["n_shots"] == 3000
    assert sidecar["seed"] == 5


def test_validate_command(tmp_path):
    out = tmp_path / "validate.json"
    code = main(["validate", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["all_pass"] is True
    assert all(v["pass"] for v in payload["verdicts"])
    assert {"name", "closed_form", "brute_force", "abs_diff", "pass"} == set(
        payload["verdicts"][0]
    )


def test_exit_codes(tmp_path):
    assert main(["no-such-command"]) == 1
    bad_config = tmp_path / "bad.json"
    bad_config.write_text('{"command": "gate", "target_db": -3}')
    assert main(["gate", "--config", str(bad_config)]) == 1
    missing_dir = tmp_path / "nowhere" / "out.csv"
    assert main(["gate", "--out", str(missing_dir)]) == 1


def test_flags_override_config(tmp_path):
    config = write_config(tmp_path, {"command": "gate", "target_db": 4.0, "seed": 9})
    out = tmp_path / "gate.csv"
    code = main(["gate", "--config", str(config), "--target-db", "10", "--out", str(out)])
    assert code == 0
    _, rows = read_rows(out)
    assert float(rows[0]["target_db"]) == 10.0


def test_out_dir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("EPRGATE_OUT_DIR", str(tmp_path))
    assert main(["gate"]) == 0
    assert (tmp_path / "gate.csv").exists()


def test_run_requires_existing_out_dir(tmp_path):
    spec = ExperimentSpec(command="gate", out=str(tmp_path / "ghost" / "x.csv"))
    with pytest.raises(ConfigError, match="output directory"):
        run(spec)
