"""Command line entry point: solve, reconstruct, verify and export.

    pointdirac --config run.cfg --out-dir out          full pipeline
    pointdirac --config run.cfg --verify               limit harness only
    pointdirac --config run.cfg --oracle               store reference fixtures
    pointdirac --config run.cfg --check                compare against fixtures

Exit status is 0 when every enabled check passes, 1 when one fails and 2 on
configuration or numerical errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import field_energy as fe
from .config import ConfigError, RunConfig, Scenario, dump_config, load_config
from .field_energy import SimulationReport, VerificationRecord
from .free_field import lambda_of_t
from .zeta_solver import extend_globally, solve_picard, write_trajectory_csv

__all__ = ["run_simulation", "run_verification", "write_outputs", "main", "OUT_DIR_ENV"]

log = logging.getLogger("pointdirac")

OUT_DIR_ENV = "POINTDIRAC_OUT_DIR"


def _record(name, closed, numeric, error, tol, details=None):
    return VerificationRecord(name, closed, numeric, float(error), float(tol),
                              bool(error <= tol), details or {})


def _t0_record(scn: Scenario, traj) -> VerificationRecord:
    data, cut = scn.data, scn.cutoff
    want = 4 * math.pi * (lambda_of_t(data, 0.0) - cut.F(data.zeta0))
    err = float(np.max(np.abs(traj.zeta_dot[0] - want)))
    tol = 1e-12 * max(1.0, float(np.max(np.abs(want))))
    return _record("t0_cancellation", want, traj.zeta_dot[0], err, tol)


def _picard_record(scn: Scenario, traj) -> VerificationRecord | None:
    cfg = scn.config
    if cfg.picard_window <= 0:
        return None
    tau = min(cfg.picard_window, cfg.t_end)
    tau = cfg.h * max(1, int(round(tau / cfg.h)))
    pic = solve_picard(scn.ctx, window_tau=tau, h=cfg.h)
    n = len(pic.zeta)
    dist = float(np.max(np.abs(pic.zeta - traj.zeta[:n])))
    return _record(f"picard_vs_stepping(tau={tau:g})", 0.0, dist, dist, cfg.picard_tol,
                   {"contraction_ratio": pic.info["contraction_ratio"],
                    "iterations": pic.info["iterations"]})


def _inertness_record(scn: Scenario, traj) -> VerificationRecord:
    # within the threshold F~ and F agree, so the two dynamics coincide
    diff = float(np.max(np.abs(scn.cutoff.F(traj.zeta) - scn.spec.F(traj.zeta))))
    return _record("cutoff_inertness", 0.0, diff, diff, 1e-9)


def run_simulation(cfg: RunConfig):
    """Full pipeline.  Returns ``(report, extras)``; nothing is written here."""
    scn = Scenario.from_config(cfg)
    log.info("H0 = %.17g, threshold = %.17g", scn.H0, scn.threshold)
    traj = extend_globally(scn.ctx, cfg.t_end, cfg.h, window=cfg.window,
                           bound=scn.threshold, bound_tol=cfg.bound_tol,
                           corrector_tol=cfg.corrector_tol, max_corrector=cfg.max_corrector)
    times = scn.sample_times(cfg.energy_stride)
    log.info("energy at %d times", len(times))
    _, H = fe.energy_series(traj, scn.data, scn.cutoff, times, r_max=cfg.r_max)
    norms = traj.norms()[np.rint(times / cfg.h).astype(int)]

    records = [_t0_record(scn, traj)]
    drift = float(np.max(np.abs(H - scn.H0))) / max(1.0, abs(scn.H0))
    records.append(_record("energy_drift", scn.H0, H, drift, cfg.energy_tol))
    peak = float(np.max(traj.norms()))
    records.append(_record("a_priori_bound", scn.threshold, peak, max(0.0, peak - scn.threshold),
                           cfg.bound_tol))
    records.append(_inertness_record(scn, traj))
    pic = _picard_record(scn, traj)
    if pic is not None:
        records.append(pic)

    resid = np.full(len(times), np.nan)
    res_times = {float(t) for t in scn.sample_times(cfg.residual_stride) if t > 0}
    for i, t in enumerate(times):
        if float(t) in res_times:
            log.info("boundary residual at t = %g", t)
            rec = fe.boundary_residual(traj, scn.data, scn.cutoff, float(t), cfg.rho, cfg.eps,
                                       cfg.r_max, cfg.residual_tol)
            resid[i] = rec.error
            records.append(rec)
    report = SimulationReport(times, H, norms, resid, records)
    return report, {"scenario": scn, "trajectory": traj, "drift": drift, "peak": peak}


def run_verification(cfg: RunConfig, traj=None, scn: Scenario | None = None) -> list:
    """Limit harness for the toggles in ``cfg.verify``; empty toggles give []."""
    kinds = list(cfg.verify)
    if not kinds:
        return []
    if scn is None:
        scn = Scenario.from_config(cfg)
    needs_traj = any(k != "mu" for k in kinds)
    if needs_traj and traj is None:
        t_stop = max(cfg.verify_times)
        traj = extend_globally(scn.ctx, t_stop, cfg.h, bound=scn.threshold, bound_tol=cfg.bound_tol,
                               corrector_tol=cfg.corrector_tol, max_corrector=cfg.max_corrector)
    out = []
    for t in cfg.verify_times:
        for kind in kinds:
            log.info("verify %s at t = %g", kind, t)
            if kind == "mu":
                out.append(fe.verify_mu_limit(t, cfg.mass, cfg.rho, cfg.eps, cfg.mu_tol))
            elif kind == "phi":
                out.append(fe.verify_phi_limit(traj, scn.data, t, cfg.rho, cfg.eps, cfg.limit_tol, cfg.r_max))
            elif kind == "dp":
                out.append(fe.verify_dp_limit(traj, scn.data, t, cfg.rho, cfg.eps, cfg.limit_tol, cfg.r_max))
            elif kind == "grad":
                out.append(fe.demonstrate_unsmoothed_gradient(traj, scn.data, t, tolerance=cfg.grad_tol, r_max=cfg.r_max))
            elif kind == "residual":
                out.append(fe.boundary_residual(traj, scn.data, scn.cutoff, t, cfg.rho, cfg.eps,
                                                cfg.r_max, cfg.residual_tol))
    return out


def _g17(v) -> str:
    return f"{float(v):.17g}"


def write_energy_csv(report: SimulationReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "H", "abs_zeta", "residual_norm"])
        for row in zip(report.times, report.energy, report.zeta_norm, report.residual_norm):
            w.writerow([_g17(v) for v in row])


def _dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _report_json(cfg, records, extra=None):
    doc = {"config": dump_config(cfg), "records": [r.to_json() for r in records],
           "passed": all(r.passed for r in records)}
    if extra:
        doc.update(extra)
    return doc


def write_outputs(out_dir, cfg: RunConfig, report: SimulationReport, extras) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"trajectory": out / "trajectory.csv", "energy": out / "energy.csv",
             "report": out / "report.json"}
    write_trajectory_csv(extras["trajectory"], paths["trajectory"])
    write_energy_csv(report, paths["energy"])
    scn = extras["scenario"]
    _dump_json(_report_json(cfg, report.records, {
        "H0": scn.H0, "threshold": scn.threshold, "lipschitz": scn.cutoff.lipschitz,
        "max_relative_drift": extras["drift"], "max_abs_zeta": extras["peak"]}), paths["report"])
    return paths


# ------------------------------------------------------------------ fixtures

def _fixture_values(report: SimulationReport, extras, records) -> dict:
    traj = extras["trajectory"]
    idx = np.rint(report.times / traj.h).astype(int)
    z = traj.zeta[idx]
    vals = {"H0": [extras["scenario"].H0], "threshold": [extras["scenario"].threshold],
            "energy": list(report.energy), "zeta_re": z.real.ravel().tolist(),
            "zeta_im": z.imag.ravel().tolist()}
    for r in records:
        num = np.atleast_1d(np.asarray(r.numeric))
        vals[f"record:{r.name}"] = np.concatenate([num.real.ravel(), np.imag(num).ravel()]).tolist()
    return vals


def check_fixtures(current: dict, stored: dict, tol: float) -> list:
    problems = []
    for key, ref in stored.items():
        if key not in current:
            problems.append(f"{key}: missing from this run")
            continue
        a, b = np.asarray(current[key], dtype=float), np.asarray(ref, dtype=float)
        if a.shape != b.shape:
            problems.append(f"{key}: shape {a.shape} != stored {b.shape}")
            continue
        scale = max(1.0, float(np.max(np.abs(b)))) if b.size else 1.0
        err = float(np.max(np.abs(a - b))) if b.size else 0.0
        if not err <= tol * scale:
            problems.append(f"{key}: max deviation {err:.3g} > {tol * scale:.3g}")
    return problems


# ------------------------------------------------------------------ main

def _parser():
    p = argparse.ArgumentParser(prog="pointdirac", description=__doc__.split("\n\n")[0])
    p.add_argument("--config", type=Path, help="key = value run configuration (defaults if omitted)")
    p.add_argument("--out-dir", type=Path, help=f"output directory (overrides ${OUT_DIR_ENV} and the config)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--verify", action="store_true", help="run the limit harness only")
    mode.add_argument("--oracle", action="store_true", help="regenerate reference fixtures")
    mode.add_argument("--check", action="store_true", help="compare a fresh run against stored fixtures")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _out_dir(args, cfg) -> Path:
    if args.out_dir is not None:
        return args.out_dir
    return Path(os.environ.get(OUT_DIR_ENV) or cfg.out_dir)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
    except (OSError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = _out_dir(args, cfg)
    try:
        if args.verify:
            records = run_verification(cfg)
            out.mkdir(parents=True, exist_ok=True)
            _dump_json(_report_json(cfg, records), out / "verification.json")
            ok = all(r.passed for r in records)
        else:
            report, extras = run_simulation(cfg)
            records = report.records + run_verification(cfg, extras["trajectory"], extras["scenario"])
            report.records = records
            write_outputs(out, cfg, report, extras)
            ok = report.all_passed
            fix_path = out / "fixtures.json"
            if args.oracle:
                _dump_json({"config": dump_config(cfg),
                            "values": _fixture_values(report, extras, records)}, fix_path)
            elif args.check:
                with open(fix_path) as fh:
                    stored = json.load(fh)["values"]
                problems = check_fixtures(_fixture_values(report, extras, records), stored, cfg.fixture_tol)
                for msg in problems:
                    print(f"fixture mismatch: {msg}", file=sys.stderr)
                ok = ok and not problems
    except Exception as exc:   # report any module error with its type
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for r in records:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} error={r.error:.3e} tol={r.tolerance:.1e}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
