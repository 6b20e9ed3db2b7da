"""Acceptance suite: one test per criterion, each reported as a PASS/FAIL line.

Run under pytest (the lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from field_oracles import TimeQuadratureField, radial_kinetic, tensor_grid_kinetic  # noqa: E402
from pointdirac import kernels as kern  # noqa: E402
from pointdirac import specfun as sf  # noqa: E402
from pointdirac.cli import main  # noqa: E402
from pointdirac.config import RunConfig, Scenario  # noqa: E402
from pointdirac.field_energy import (  # noqa: E402
    assemble_psi_reg_hat,
    boundary_residual,
    demonstrate_unsmoothed_gradient,
    energy_series,
    verify_mu_limit,
)
from pointdirac.free_field import lambda_of_t  # noqa: E402
from pointdirac.zeta_solver import DelayRHSContext, solve_picard, solve_stepping  # noqa: E402

RESULTS = {}

TITLES = {
    1: "kernel normalization",
    2: "mu endpoints",
    3: "t=0 cancellation",
    4: "energy conservation",
    5: "a priori bound",
    6: "solver order",
    7: "Picard cross-validation",
    8: "cutoff inertness",
    9: "boundary residual",
    10: "unsmoothed gradient",
    11: "Plancherel audit",
    12: "determinism",
}


def report(n, passed, detail, started):
    RESULTS[n] = (bool(passed), f"{detail} [{time.perf_counter() - started:.1f}s]")
    assert passed, detail


def summary_lines():
    lines = []
    for n in sorted(TITLES):
        if n in RESULTS:
            ok, detail = RESULTS[n]
            lines.append(f"criterion {n:2d} {TITLES[n]}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            lines.append(f"criterion {n:2d} {TITLES[n]}: NOT RUN")
    return lines


@pytest.fixture(scope="module")
def scn():
    return Scenario.from_config(RunConfig())


@pytest.fixture(scope="module")
def traj(scn):
    return solve_stepping(scn.ctx, 5.0, 1e-3)


def _random_scenario(rng, t_end=5.0):
    terms = [(j, 1, float(rng.uniform(1.0, 2.0))) for j in range(1, 5)]
    terms += [(int(j), 2, float(rng.uniform(0.2, 1.0))) for j in rng.choice(4, 2, replace=False) + 1]
    z0 = rng.normal(size=4) * 0.4 + 1j * rng.normal(size=4) * 0.4
    c = rng.normal(size=4) + 1j * rng.normal(size=4)
    cfg = RunConfig(mass=float(rng.uniform(0.5, 2.0)), amplitude=float(rng.uniform(-2, 2)),
                    sigma=float(rng.uniform(0.6, 1.5)), spinor=tuple(c / np.linalg.norm(c)),
                    zeta0=tuple(z0), potential=tuple(terms), t_end=t_end)
    return Scenario.from_config(cfg)


def test_criterion_01_kernel_normalization():
    t0 = time.perf_counter()
    X = 200.0
    est = sf.j1_over_u_cumulative(X) + sf.bessel_j0(X) / X + sf.bessel_j1(X) / X ** 2
    err = abs(est - 1.0)
    elapsed = time.perf_counter() - t0
    report(1, err < 1e-6 and elapsed < 1.0, f"|G(200)+tail-1| = {err:.2e} (tol 1e-6)", t0)


def test_criterion_02_mu_endpoints():
    t0 = time.perf_counter()
    exact0 = kern.mu(0.0, 1.0) == -1.0 / (4 * math.pi)
    errs = [verify_mu_limit(t, 1.0).error for t in (0.5, 1.0, 2.0)]
    ok = exact0 and max(errs) < 1e-5 and time.perf_counter() - t0 < 30
    report(2, ok, f"mu(0) exact: {exact0}; limit errors {', '.join(f'{e:.1e}' for e in errs)} (tol 1e-5)", t0)


def test_criterion_03_t0_cancellation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(31)
    worst = 0.0
    for _ in range(5):
        s = _random_scenario(rng, t_end=0.01)
        want = 4 * math.pi * (lambda_of_t(s.data, 0.0) - s.cutoff.F(s.data.zeta0))
        got = solve_stepping(s.ctx, 0.01, 1e-3).zeta_dot[0]
        worst = max(worst, float(np.max(np.abs(got - want))) / max(1.0, float(np.max(np.abs(want)))))
    report(3, worst < 1e-12 and time.perf_counter() - t0 < 1.0,
           f"max relative deviation {worst:.1e} over 5 configs (tol 1e-12)", t0)


def test_criterion_04_energy_conservation(scn, traj):
    t0 = time.perf_counter()
    times = np.round(np.linspace(0, 5, 51), 12)
    drifts = []
    for tr in (traj, solve_stepping(scn.ctx, 5.0, 5e-4)):
        _, H = energy_series(tr, scn.data, scn.cutoff, times)
        drifts.append(float(np.max(np.abs(H - scn.H0))) / max(1.0, abs(scn.H0)))
    ratio = drifts[0] / drifts[1]
    ok = drifts[0] < 1e-3 and ratio >= 3 and time.perf_counter() - t0 < 300
    report(4, ok, f"drift {drifts[0]:.2e} at h=1e-3, {drifts[1]:.2e} at h=5e-4, ratio {ratio:.2f}", t0)


def test_criterion_05_a_priori_bound(scn, traj):
    t0 = time.perf_counter()
    rng = np.random.default_rng(55)
    margins = [float(np.max(traj.norms())) - scn.threshold]
    for _ in range(3):
        s = _random_scenario(rng)
        margins.append(float(np.max(solve_stepping(s.ctx, 5.0, 1e-3).norms())) - s.threshold)
    report(5, max(margins) <= 1e-6,
           "max|zeta| - Lambda = " + ", ".join(f"{m:.3f}" for m in margins) + " (must be <= 1e-6)", t0)


@pytest.mark.slow
def test_criterion_06_solver_order(scn):
    t0 = time.perf_counter()
    T = 2.0
    ref = solve_stepping(scn.ctx, T, 1e-5).zeta[-1]
    errs = [float(np.max(np.abs(solve_stepping(scn.ctx, T, h).zeta[-1] - ref))) for h in (4e-3, 2e-3, 1e-3)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = all(3.5 <= r <= 4.5 for r in ratios) and time.perf_counter() - t0 < 600
    report(6, ok, f"errors {', '.join(f'{e:.2e}' for e in errs)} at t={T:g}; ratios "
                  f"{ratios[0]:.3f}, {ratios[1]:.3f}", t0)


def test_criterion_07_picard(scn):
    t0 = time.perf_counter()
    pic = solve_picard(scn.ctx, 0.02, h=1e-3)
    dist = float(np.max(np.abs(pic.zeta - solve_stepping(scn.ctx, 0.02, 1e-3).zeta)))
    q = pic.info["contraction_ratio"]
    report(7, dist < 1e-6 and q < 1, f"sup distance {dist:.1e} (tol 1e-6), contraction ratio {q:.3f}", t0)


def test_criterion_08_cutoff_inertness(scn, traj):
    t0 = time.perf_counter()
    exact = solve_stepping(DelayRHSContext(scn.data, scn.spec, scn.ctx.kernels), 5.0, 1e-3)
    bound_ok = float(np.max(traj.norms())) <= scn.threshold + 1e-6
    diff = float(np.max(np.abs(traj.zeta - exact.zeta)))
    report(8, bound_ok and diff < 1e-9, f"max |zeta_F~ - zeta_F| = {diff:.1e} (tol 1e-9)", t0)


def test_criterion_09_boundary_residual(scn, traj):
    t0 = time.perf_counter()
    errs = [boundary_residual(traj, scn.data, scn.cutoff, t).error for t in (1.0, 3.0)]
    report(9, max(errs) < 1e-3, f"residual {errs[0]:.1e} at t=1, {errs[1]:.1e} at t=3 (tol 1e-3)", t0)


def test_criterion_10_unsmoothed_gradient(scn, traj):
    t0 = time.perf_counter()
    rec = demonstrate_unsmoothed_gradient(traj, scn.data, 1.0)
    report(10, rec.error < 0.02, f"|grad| {rec.numeric:.6e} vs |zeta'|/8pi {rec.closed_form:.6e}, "
                                 f"relative error {rec.error:.1e} (tol 2%)", t0)


def test_criterion_11_plancherel(scn, traj):
    t0 = time.perf_counter()
    prof = assemble_psi_reg_hat(traj, scn.data, 1.0)
    grid = tensor_grid_kinetic(TimeQuadratureField(traj, scn.data, 1.0))
    rad = radial_kinetic(prof)
    rel = abs(grid - rad) / grid
    report(11, rel < 1e-6 and time.perf_counter() - t0 < 120,
           f"radial {rad:.12f} vs tensor grid {grid:.12f}, relative {rel:.1e} (tol 1e-6)", t0)


def test_criterion_12_determinism(tmp_path):
    t0 = time.perf_counter()
    cfg = tmp_path / "run.cfg"
    cfg.write_text("t_end = 0.5\nenergy_stride = 0.1\nresidual_stride = 0.5\n")
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert main(["--config", str(cfg), "--out-dir", str(d)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    same = outs[0] == outs[1]
    report(12, same, f"{len(outs[0])} output files byte-identical: {same}", t0)


if __name__ == "__main__":
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    print("\n".join(summary_lines()))
    sys.exit(code)
