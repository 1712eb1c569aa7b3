import json
import subprocess
import sys

import pytest

from raydamp.cli import load_config, main
from raydamp.errors import ConfigError


def write_config(tmp_path, **overrides):
    cfg = {
        "profile": {"name": "poiseuille", "type": "builtin"},
        "alpha_list": [1.0],
        "grids": {"ny": 513, "nc": 64, "n_oracle": 129},
        "t_max": 20.0,
        "t_samples": 33,
        "data": {"omega0": "mixed_smooth"},
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_missing_profile_names_field(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"alpha_list": [1.0]}))
    with pytest.raises(ConfigError, match="profile"):
        load_config(str(path), "simulate")


def test_alpha_zero_rejected(tmp_path):
    path = write_config(tmp_path, alpha_list=[0.0])
    with pytest.raises(ConfigError, match="alpha > 0"):
        load_config(str(path), "spectral")


def test_bad_grid_rejected(tmp_path):
    path = write_config(tmp_path, grids={"ny": 500, "nc": 64, "n_oracle": 129})
    with pytest.raises(ConfigError, match="power of two"):
        load_config(str(path), "simulate")


def test_t_samples_floor(tmp_path):
    path = write_config(tmp_path, t_samples=8)
    with pytest.raises(ConfigError, match="t_samples"):
        load_config(str(path), "simulate")


def test_toml_config(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text(
        'alpha_list = [1.0]\nt_samples = 16\n[profile]\nname = "poiseuille"\n'
        'type = "builtin"\n[grids]\nny = 257\nnc = 32\nn_oracle = 65\n'
    )
    cfg = load_config(str(path), "simulate")
    assert cfg.ny == 257


def test_simulate_series_header(tmp_path):
    path = write_config(tmp_path)
    out = tmp_path / "runs"
    rc = main(["simulate", "--config", str(path), "--out", str(out)])
    assert rc == 0
    series = (out / "series_alpha1.csv").read_text().splitlines()
    assert series[0] == "t,norm_V,norm_V2,omega0_abs,omega_probe_abs"
    assert len(series) == 34
    manifest = json.loads((out / "manifest_simulate.json").read_text())
    assert manifest["runs"][0]["projection_report"]["projection"].startswith("no-op")


def test_simulate_determinism(tmp_path):
    path = write_config(tmp_path, seed=99)
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert main(["simulate", "--config", str(path), "--out", str(out)]) == 0
        outs.append((out / "series_alpha1.csv").read_bytes())
    assert outs[0] == outs[1]


def test_spectral_tables_and_scan(tmp_path):
    path = write_config(tmp_path)
    out = tmp_path / "runs"
    assert main(["spectral", "--config", str(path), "--out", str(out)]) == 0
    lines = (out / "tables_alpha1.csv").read_text().splitlines()
    assert lines[0] == "c,y_c,A1,A,B,J,A2,B2,II2,II3"
    assert len(lines[1].split(",")) == 10
    manifest = json.loads((out / "manifest_spectral.json").read_text())
    assert manifest["scan"][0]["embedding_candidates"] == []


def test_kernels_csv(tmp_path):
    path = write_config(tmp_path)
    out = tmp_path / "runs"
    assert main(["kernels", "--config", str(path), "--out", str(out)]) == 0
    lines = (out / "kernels_alpha1.csv").read_text().splitlines()
    assert lines[0] == "c,K_o,K_e,Lambda1,Lambda2,Lambda3,Lambda4"


def test_report_missing_run(tmp_path):
    path = write_config(tmp_path)
    rc = main(["report", "--config", str(path), "--out", str(tmp_path / "nowhere")])
    assert rc == 2  # MissingRun surfaces as a clean error exit


def test_report_after_simulate(tmp_path, capsys):
    path = write_config(tmp_path, t_max=100.0, t_samples=64, alpha_list=[1.0, 2.0])
    out = tmp_path / "runs"
    assert main(["simulate", "--config", str(path), "--out", str(out)]) == 0
    assert main(["report", "--config", str(path), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert len(rep["alphas"]) == 2  # one summary row per alpha
    assert "exponent_V" in rep["alphas"][0]


def test_verify_passes(tmp_path):
    path = write_config(tmp_path)
    assert main(["verify", "--config", str(path)]) == 0


def test_cli_entrypoint_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "raydamp.cli", "simulate", "--config", "/nonexistent.json"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2
    assert "config file not found" in proc.stderr


def test_threads_env_cap(tmp_path, monkeypatch):
    from raydamp.cli import worker_count

    monkeypatch.setenv("RAYDAMP_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("RAYDAMP_THREADS", "zebra")
    with pytest.raises(ConfigError):
        worker_count()
