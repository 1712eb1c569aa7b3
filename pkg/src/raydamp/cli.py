"""Command-line driver: configuration, orchestration, and data export.

    raydamp <simulate|spectral|kernels|depletion|transport|verify|report>
            --config <path> [--out <dir>]

Configs are JSON or TOML.  All floats are serialized with 17 significant
digits and each run writes a manifest embedding every tolerance and grid,
so published numbers are reproducible bit for bit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, errors
from .errors import ConfigError, MissingRun
from .evolution import decay_fit, depletion_series, transport_reference
from .kernels import TestFunctionPair, VorticityData, build_kernels
from .profiles import build_profile, sqrt_coordinate
from .spectral import build_tables, normalized_gaps, scan_embedding
from . import oracle

_FMT = "%.17g"


# ---------------------------------------------------------------------------
# function registry (initial data and dual test functions)


def _fn_sin_pi(y):
    return np.sin(np.pi * np.asarray(y, dtype=float))


def _fn_cos_half_pi(y):
    return np.cos(0.5 * np.pi * np.asarray(y, dtype=float))


def _fn_mixed_smooth(y):
    y = np.asarray(y, dtype=float)
    return np.sin(np.pi * y) * (1.0 + 0.5 * y) * (1.0 - y**2)


def _fn_even_bump(y):
    y = np.asarray(y, dtype=float)
    return np.cos(0.5 * np.pi * y) ** 2


_FUNCTIONS = {
    "sin_pi_y": _fn_sin_pi,
    "cos_half_pi_y": _fn_cos_half_pi,
    "mixed_smooth": _fn_mixed_smooth,
    "even_bump": _fn_even_bump,
}


def resolve_function(desc, default: str):
    if desc is None:
        desc = default
    if isinstance(desc, str):
        if desc not in _FUNCTIONS:
            raise ConfigError(f"data: unknown function {desc!r}")
        return _FUNCTIONS[desc], desc
    if isinstance(desc, dict) and desc.get("type") == "poly":
        coeffs = [float(a) for a in desc["coeffs"]]
        poly = np.polynomial.Polynomial(coeffs)
        return (lambda y: poly(np.asarray(y, dtype=float))), f"poly{coeffs}"
    raise ConfigError(f"data: cannot resolve function descriptor {desc!r}")


def default_test_pairs(alpha: float):
    g_o = TestFunctionPair(
        _fn_sin_pi, lambda y: -np.pi**2 * _fn_sin_pi(y), "odd", alpha
    )
    g_e = TestFunctionPair(
        _fn_cos_half_pi, lambda y: -0.25 * np.pi**2 * _fn_cos_half_pi(y), "even", alpha
    )
    return g_o, g_e


# ---------------------------------------------------------------------------
# configuration


def _pow2_pm1(n: int) -> bool:
    for k in range(2, 24):
        if n in (2**k - 1, 2**k, 2**k + 1):
            return True
    return False


@dataclass
class RunConfig:
    profile: dict
    alpha_list: list
    ny: int = 1025
    nc: int = 1024
    n_oracle: int = 513
    t_max: float = 100.0
    t_samples: int = 64
    omega0: object = "mixed_smooth"
    probe_y: float = 0.6
    seed: int = 1234
    out_dir: str = "runs"
    experiment: str = "simulate"
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict, experiment: str) -> "RunConfig":
        if "profile" not in raw:
            raise ConfigError("config field 'profile' is required")
        grids = raw.get("grids", {})
        cfg = cls(
            profile=raw["profile"],
            alpha_list=[float(a) for a in raw.get("alpha_list", [1.0])],
            ny=int(grids.get("ny", 1025)),
            nc=int(grids.get("nc", 1024)),
            n_oracle=int(grids.get("n_oracle", 513)),
            t_max=float(raw.get("t_max", 100.0)),
            t_samples=int(raw.get("t_samples", 64)),
            omega0=raw.get("data", {}).get("omega0", "mixed_smooth"),
            probe_y=float(raw.get("probe_y", 0.6)),
            seed=int(raw.get("seed", 1234)),
            out_dir=raw.get("out", "runs"),
            experiment=experiment,
            extras=raw.get("extras", {}),
        )
        for name in ("ny", "nc", "n_oracle"):
            n = getattr(cfg, name)
            if not _pow2_pm1(n):
                raise ConfigError(f"grids.{name} = {n} is not a power of two (+-1)")
        if cfg.t_samples < 16:
            raise ConfigError(f"t_samples = {cfg.t_samples} < 16")
        for a in cfg.alpha_list:
            if a <= 0:
                raise ConfigError(
                    f"alpha_list: alpha = {a:g} rejected (evolution formulas require alpha > 0)"
                )
        return cfg


def load_config(path: str, experiment: str) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    text = p.read_text()
    if p.suffix.lower() == ".toml":
        try:
            import tomllib
        except ImportError:  # python < 3.11
            import tomli as tomllib

        raw = tomllib.loads(text)
    else:
        raw = json.loads(text)
    return RunConfig.from_dict(raw, experiment)


def worker_count() -> int:
    cap = os.environ.get("RAYDAMP_THREADS")
    if cap:
        try:
            return max(1, int(cap))
        except ValueError:
            raise ConfigError(f"RAYDAMP_THREADS = {cap!r} is not an integer")
    return 1


# ---------------------------------------------------------------------------
# output helpers


def write_csv(path: Path, header: str, rows: np.ndarray):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in np.atleast_2d(rows):
            fh.write(",".join(_FMT % float(x) for x in row) + "\n")


def write_manifest(path: Path, cfg: RunConfig, payload: dict, t_wall: float):
    import scipy

    manifest = {
        "raydamp_version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "experiment": cfg.experiment,
        "profile": cfg.profile,
        "alpha_list": cfg.alpha_list,
        "grids": {"ny": cfg.ny, "nc": cfg.nc, "n_oracle": cfg.n_oracle},
        "t_max": cfg.t_max,
        "t_samples": cfg.t_samples,
        "probe_y": cfg.probe_y,
        "seed": cfg.seed,
        "tolerances": {
            "picard_tol": 1e-12,
            "yc_root_tol": 1e-12,
            "degeneracy_floor": 1e-8,
            "endpoint_gap_fraction": 1.0 / 4096.0,
        },
        "wall_time_s": t_wall,
    }
    manifest.update(payload)
    path.write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"unserializable {type(obj)}")


# ---------------------------------------------------------------------------
# commands


def _time_grid(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.t_max, cfg.t_samples)


def _safe_ratio(num: float, den: float):
    """Final/initial ratio; None when the initial value is numerically zero
    (e.g. odd-dominant data whose center vorticity starts at 0)."""
    if abs(den) < 1e-300:
        return None
    return float(num / den)


def _simulate_one_alpha(cfg: RunConfig, alpha: float, out: Path):
    profile = build_profile(cfg.profile)
    om0, om0_name = resolve_function(cfg.omega0, "mixed_smooth")
    M = oracle.assemble(profile, alpha, cfg.n_oracle)
    spec_rep = oracle.discrete_spectrum(M)
    state = oracle.make_state(M, om0, _time_grid(cfg), probe_y=cfg.probe_y,
                              spectrum_report=spec_rep)
    header = "t,norm_V,norm_V2,omega0_abs,omega_probe_abs"
    rows = np.column_stack([
        state.t_samples, state.norm_V, state.norm_V2,
        state.omega_center_abs, state.omega_probe_abs,
    ])
    write_csv(out / f"series_alpha{alpha:g}.csv", header, rows)
    # snapshots at a few times
    snap_t = [0.0, cfg.t_max / 4, cfg.t_max / 2, cfg.t_max]
    for ts in snap_t:
        j = int(np.argmin(np.abs(state.t_samples - ts)))
        srows = np.column_stack([
            state.y, state.psi_hat[j].real, state.psi_hat[j].imag,
            state.omega_hat[j].real, state.omega_hat[j].imag,
        ])
        write_csv(out / f"snapshot_alpha{alpha:g}_t{state.t_samples[j]:g}.csv",
                  "y,re_psi,im_psi,re_omega,im_omega", srows)
    return {
        "alpha": alpha,
        "omega0": om0_name,
        "projection_report": state.projection_report,
        "series_file": f"series_alpha{alpha:g}.csv",
    }


def cmd_simulate(cfg: RunConfig) -> int:
    t0 = time.time()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = cfg.alpha_list
    nw = min(worker_count(), len(jobs))
    if nw > 1:
        with ThreadPoolExecutor(max_workers=nw) as ex:
            results = list(ex.map(lambda a: _simulate_one_alpha(cfg, a, out), jobs))
    else:
        results = [_simulate_one_alpha(cfg, a, out) for a in jobs]
    write_manifest(out / "manifest_simulate.json", cfg, {"runs": results}, time.time() - t0)
    return 0


def cmd_spectral(cfg: RunConfig) -> int:
    t0 = time.time()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profile = build_profile(cfg.profile)
    coord = sqrt_coordinate(profile)
    summary = []
    for alpha in cfg.alpha_list:
        tables = build_tables(profile, coord, alpha, n_c=cfg.nc, n_y=cfg.ny,
                              keep_solutions=False)
        header, rows = tables.csv_rows()
        write_csv(out / f"tables_alpha{alpha:g}.csv", header, rows)
        cands = scan_embedding(profile, coord, alpha, tables=tables)
        g1, g2 = normalized_gaps(tables)
        summary.append({
            "alpha": alpha,
            "embedding_candidates": cands,
            "gap_AB_min": float(np.min(g1)),
            "gap_A2B2_min": float(np.min(g2)),
        })
    M = oracle.assemble(profile, cfg.alpha_list[0], min(cfg.n_oracle, 257))
    rep = oracle.discrete_spectrum(M)
    lam = rep["eigenvalues"]
    write_csv(out / "oracle_eigenvalues.csv", "re_lambda,im_lambda",
              np.column_stack([lam.real, lam.imag]))
    write_manifest(out / "manifest_spectral.json", cfg, {
        "scan": summary,
        "oracle_spectrum": {
            "max_abs_im": rep["max_abs_im"],
            "threshold": rep["threshold"],
            "n_flagged": int(len(rep["flagged_indices"])),
        },
    }, time.time() - t0)
    return 0


def cmd_kernels(cfg: RunConfig) -> int:
    t0 = time.time()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profile = build_profile(cfg.profile)
    coord = sqrt_coordinate(profile)
    om0, om0_name = resolve_function(cfg.omega0, "mixed_smooth")
    info = []
    for alpha in cfg.alpha_list:
        tables = build_tables(profile, coord, alpha, n_c=cfg.nc, n_y=cfg.ny)
        data = VorticityData(om0, alpha)
        g_o, g_e = default_test_pairs(alpha)
        ktab = build_kernels(tables, data, g_o, g_e)
        header, rows = ktab.csv_rows()
        write_csv(out / f"kernels_alpha{alpha:g}.csv", header, rows)
        dc = np.gradient(tables.c)
        info.append({
            "alpha": alpha,
            "K_o_L1": float(np.sum(np.abs(ktab.K_o) * dc)),
            "K_e_L1": float(np.sum(np.abs(ktab.K_e) * dc)),
            "K_o_endpoint_ratio": float(
                max(abs(ktab.K_o[0]), abs(ktab.K_o[-1])) / np.max(np.abs(ktab.K_o))
            ),
            "K_e_endpoint_ratio": float(
                max(abs(ktab.K_e[0]), abs(ktab.K_e[-1])) / np.max(np.abs(ktab.K_e))
            ),
        })
    write_manifest(out / "manifest_kernels.json", cfg,
                   {"omega0": om0_name, "kernels": info}, time.time() - t0)
    return 0


def cmd_depletion(cfg: RunConfig) -> int:
    t0 = time.time()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profile = build_profile(cfg.profile)
    om0, om0_name = resolve_function(cfg.omega0, "even_bump")
    info = []
    for alpha in cfg.alpha_list:
        M = oracle.assemble(profile, alpha, cfg.n_oracle)
        state = oracle.make_state(M, om0, _time_grid(cfg), probe_y=cfg.probe_y)
        dep = depletion_series(state, snapshot_times=[0.0, cfg.t_max / 2, cfg.t_max])
        rows = np.column_stack([dep["t"], dep["center_abs"], dep["probe_abs"]])
        write_csv(out / f"depletion_alpha{alpha:g}.csv",
                  "t,omega_center_abs,omega_probe_abs", rows)
        for ts, prof in dep["snapshots"]:
            write_csv(out / f"depletion_profile_alpha{alpha:g}_t{ts:g}.csv",
                      "y,abs_omega", np.column_stack([state.y, prof]))
        info.append({
            "alpha": alpha,
            "center_ratio_final": _safe_ratio(dep["center_abs"][-1], dep["center_abs"][0]),
            "probe_ratio_final": _safe_ratio(dep["probe_abs"][-1], dep["probe_abs"][0]),
        })
    write_manifest(out / "manifest_depletion.json", cfg,
                   {"omega0": om0_name, "depletion": info}, time.time() - t0)
    return 0


def cmd_transport(cfg: RunConfig) -> int:
    t0 = time.time()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profile = build_profile(cfg.profile)
    coord = sqrt_coordinate(profile)
    om0, om0_name = resolve_function(cfg.omega0, "even_bump")
    eta, eta_name = resolve_function(cfg.extras.get("eta"), "even_bump")
    t_lo = float(cfg.extras.get("t_lo", 10.0))
    t_hi = float(cfg.extras.get("t_hi", cfg.t_max))
    info = []
    for alpha in cfg.alpha_list:
        ts = np.geomspace(t_lo, t_hi, max(cfg.t_samples, 24))
        vals = np.array([
            abs(transport_reference(profile, coord, om0, eta, alpha, t)) for t in ts
        ])
        write_csv(out / f"transport_alpha{alpha:g}.csv", "t,abs_integral",
                  np.column_stack([ts, vals]))
        slope, r2 = decay_fit(ts, vals)
        info.append({"alpha": alpha, "slope": slope, "r2": r2})
    write_manifest(out / "manifest_transport.json", cfg,
                   {"omega0": om0_name, "eta": eta_name, "fits": info},
                   time.time() - t0)
    return 0


def cmd_report(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    if not out.exists():
        raise MissingRun(f"run directory {out} does not exist")
    summary = {"alphas": []}
    found = False
    for alpha in cfg.alpha_list:
        series = out / f"series_alpha{alpha:g}.csv"
        entry = {"alpha": alpha}
        if series.exists():
            found = True
            arr = np.loadtxt(series, delimiter=",", skiprows=1)
            t, nv, nv2 = arr[:, 0], arr[:, 1], arr[:, 2]
            window = (10.0, float(t[-1]))
            try:
                entry["exponent_V"], entry["r2_V"] = decay_fit(t, nv, window)
                entry["exponent_V2"], entry["r2_V2"] = decay_fit(t, nv2, window)
            except errors.DegenerateSeries as exc:
                entry["fit_error"] = str(exc)
            entry["depletion_ratio"] = _safe_ratio(arr[-1, 3], arr[0, 3])
        tr = out / f"transport_alpha{alpha:g}.csv"
        if tr.exists():
            found = True
            arr = np.loadtxt(tr, delimiter=",", skiprows=1)
            entry["exponent_transport"], entry["r2_transport"] = decay_fit(
                arr[:, 0], arr[:, 1]
            )
        summary["alphas"].append(entry)
    if not found:
        raise MissingRun(f"no series/transport artifacts under {out}")
    (out / "report.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    """Cheap invariant suite; prints one PASS/FAIL line per check."""
    from .verify import run_verification

    results = run_verification(cfg)
    failed = 0
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} invariants passed")
    return 1 if failed else 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "spectral": cmd_spectral,
    "kernels": cmd_kernels,
    "depletion": cmd_depletion,
    "transport": cmd_transport,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="raydamp",
        description="Linear inviscid damping and vorticity depletion experiments",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON or TOML run config")
    parser.add_argument("--out", default=None, help="output directory override")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.command)
        if args.out is not None:
            cfg.out_dir = args.out
        return _COMMANDS[args.command](cfg)
    except errors.RaydampError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
