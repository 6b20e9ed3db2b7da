"""Time stepping and Picard iteration for the point amplitude zeta(t).

The equation solved is

    zeta' = 4 pi [lambda + zeta0 mu - F(zeta)] + m zeta - m (K1 * zeta)
            + i m beta [zeta0 a + zeta - m (T_m * zeta)],      zeta(0) = zeta0,

where ``(K * zeta)(t) = int_0^t K(s) zeta(t - s) ds``.  Convolutions use
product-trapezoid weights: the kernel is integrated exactly (Gauss-Legendre
per cell) against the piecewise-linear interpolant of zeta.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as kern
from .dirac_algebra import BETA_DIAG, DiracRep
from .free_field import RadialInitialData, build_lambda_table, lambda_of_t
from .kernels import KernelSet
from .quadrature import gauss_legendre

__all__ = [
    "DelayRHSContext",
    "ZetaTrajectory",
    "HistoryGapError",
    "NonFiniteStateError",
    "NoContractionError",
    "BoundViolationError",
    "product_trapezoid_moments",
    "delay_rhs",
    "solve_stepping",
    "solve_picard",
    "extend_globally",
    "write_trajectory_csv",
]

_FOUR_PI = 4.0 * math.pi


class HistoryGapError(ValueError):
    pass


class NonFiniteStateError(FloatingPointError):
    pass


class NoContractionError(RuntimeError):
    pass


class BoundViolationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DelayRHSContext:
    """Everything the right-hand side needs.  ``potential`` provides ``F``."""

    data: RadialInitialData
    potential: object
    kernels: KernelSet | None = None
    dirac: DiracRep | None = None
    overflow_bound: float | None = None

    def __post_init__(self):
        m = self.data.mass
        if self.kernels is None:
            object.__setattr__(self, "kernels", KernelSet(m, t_max=1.0))
        if self.dirac is None:
            object.__setattr__(self, "dirac", DiracRep(m))
        if not (self.kernels.mass == m and self.dirac.mass == m):
            raise ValueError("data, kernels and dirac must share the same mass")

    @property
    def mass(self) -> float:
        return self.data.mass

    @property
    def zeta0(self) -> np.ndarray:
        return self.data.zeta0

    def bound(self) -> float:
        if self.overflow_bound is not None:
            return self.overflow_bound
        lam = getattr(self.potential, "lambda_threshold", 1.0)
        return 1e6 * max(1.0, lam)


@dataclass(frozen=True)
class ZetaTrajectory:
    h: float
    zeta: np.ndarray
    zeta_dot: np.ndarray
    method: str
    error_estimate: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.h * np.arange(len(self.zeta))

    @property
    def t_end(self) -> float:
        return self.h * (len(self.zeta) - 1)

    @property
    def zeta0(self):
        return self.zeta[0]

    def index(self, t: float) -> int:
        n = int(round(t / self.h))
        if n < 0 or n >= len(self.zeta) or abs(n * self.h - t) > 1e-9 * max(1.0, t):
            raise HistoryGapError(f"t = {t} is not a node of the trajectory")
        return n

    def norms(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.zeta) ** 2, axis=1))


def product_trapezoid_moments(kernel, h: float, n: int, order: int = 4):
    """A_k = int_{cell k} K(s)(s_{k+1}-s)/h ds and B_k = int K(s)(s-s_k)/h ds."""
    x, w = gauss_legendre(order)
    u = 0.5 * (x + 1.0)          # position inside the cell, in [0, 1]
    wu = 0.5 * w
    s = h * (np.arange(n)[:, None] + u[None, :])
    ks = kernel(s.ravel()).reshape(s.shape)
    A = h * (ks * ((1.0 - u) * wu)).sum(axis=1)
    B = h * (ks * (u * wu)).sum(axis=1)
    return A, B


def _combined_weights(A, B):
    # conv_n = sum_{l=0}^{n} W_l zeta_{n-l} - A_n zeta_0
    W = A.copy()
    W[1:] += B[:-1]
    W = np.append(W, 0.0)
    W[-1] = B[-1] if len(B) else 0.0
    return W


class _Stepper:
    """Resumable predictor-corrector with full memory."""

    def __init__(self, ctx: DelayRHSContext, h: float, n_total: int,
                 corrector_tol: float = 1e-12, max_corrector: int = 3):
        if not h > 0:
            raise ValueError("h must be positive")
        self.ctx = ctx
        self.h = float(h)
        self.N = int(n_total)
        self.tol = corrector_tol
        self.max_corr = max_corrector
        m = ctx.mass
        N = self.N

        t = self.h * np.arange(N + 1)
        table = build_lambda_table(ctx.data, self.h * N, self.h)
        lam = np.asarray(table.values)
        z0 = np.asarray(ctx.zeta0, dtype=complex)
        ib = 1j * m * BETA_DIAG
        self.forcing = (_FOUR_PI * (lam + np.outer(kern.mu(t, m), z0))
                        + np.outer(kern.a_coef(t, m), ib * z0))

        # N+1 cells so that A_N is available for the zeta0 correction
        Ak, Bk = product_trapezoid_moments(lambda s: kern.memory_kernel_k1(s, m), self.h, N + 1)
        At, Bt = product_trapezoid_moments(lambda s: kern.tail_kernel(s, m), self.h, N + 1)
        # W_n = A_n + B_{n-1} up to n = N; the end weight is restored via A_end
        Wk = _combined_weights(Ak, Bk)[: N + 1]
        Wt = _combined_weights(At, Bt)[: N + 1]
        self.A_end = np.stack([Ak, At])          # A_n for the j=0 correction
        self.Wrev = np.ascontiguousarray(np.stack([Wk, Wt])[:, ::-1])
        self.lin = m - m * Ak[0] + ib * (1.0 - m * At[0])
        self.hist_coef = np.array([-m, -1j * m * m]) [:, None] * np.ones(4)
        self.hist_coef[1] *= BETA_DIAG

        self.Z = np.zeros((N + 1, 4), dtype=complex)
        self.Zf = self.Z.view(float)
        self.Zdot = np.zeros((N + 1, 4), dtype=complex)
        self.Z[0] = z0
        self.n = 0
        self.max_corr_change = 0.0
        self.max_iters_used = 0
        # empty convolutions at t = 0, so no A_0 self-weight there
        self.Zdot[0] = (self.forcing[0] + (m + ib) * z0
                        - _FOUR_PI * ctx.potential.F(z0))
        self._check(0)

    def _f(self, base, z):
        return base + self.lin * z - _FOUR_PI * self.ctx.potential.F(z)

    def history(self, n: int):
        """Known part of the two convolutions at node n (excludes the A_0 zeta_n term)."""
        if n == 0:
            return np.zeros((2, 4), dtype=complex)
        N = self.N
        hv = (self.Wrev[:, N - n:N] @ self.Zf[:n]).view(complex)
        hv -= self.A_end[:, n][:, None] * self.Z[0]
        return hv

    def _check(self, n):
        z = self.Z[n]
        if not np.all(np.isfinite(z)) or np.sqrt(np.sum(np.abs(z) ** 2)) > self.ctx.bound():
            raise NonFiniteStateError(f"|zeta| left the admissible range at t = {n * self.h:.6g}")

    def step(self):
        n = self.n
        if n >= self.N:
            raise HistoryGapError("stepper reached the end of its grid")
        h = self.h
        zn, fn = self.Z[n], self.Zdot[n]
        # history for node n+1 only needs zeta_0..zeta_n
        hv = self.history(n + 1)
        base = self.forcing[n + 1] + (self.hist_coef * hv).sum(axis=0)
        z = zn + h * fn
        used = 0
        change = 0.0
        for used in range(1, self.max_corr + 1):
            znew = zn + 0.5 * h * (fn + self._f(base, z))
            change = float(np.max(np.abs(znew - z)))
            z = znew
            if change <= self.tol * max(1.0, float(np.max(np.abs(z)))):
                break
        self.max_corr_change = max(self.max_corr_change, change)
        self.max_iters_used = max(self.max_iters_used, used)
        self.Z[n + 1] = z
        self.Zdot[n + 1] = self._f(base, z)
        self.n = n + 1
        self._check(n + 1)

    def run_to(self, n_stop: int):
        while self.n < n_stop:
            self.step()

    def trajectory(self, method: str, **info) -> ZetaTrajectory:
        n = self.n
        zeta = self.Z[: n + 1].copy()
        zdot = self.Zdot[: n + 1].copy()
        zeta.setflags(write=False)
        zdot.setflags(write=False)
        info = dict(info, max_corrector_iterations=self.max_iters_used)
        return ZetaTrajectory(self.h, zeta, zdot, method, self.max_corr_change, info)


def _n_steps(t_end, h):
    if not (t_end > 0 and h > 0):
        raise ValueError("t_end and h must be positive")
    n = int(round(t_end / h))
    if abs(n * h - t_end) > 1e-9 * t_end:
        raise ValueError("t_end must be a multiple of h")
    return n


def delay_rhs(ctx: DelayRHSContext, t: float, zeta_now, history, h: float) -> np.ndarray:
    """zeta'(t) from zeta(t) and the samples ``history[k] = zeta(k h)``, k < t/h.

    ``history[0]`` is taken as zeta0 regardless of its stored value only if the
    history is empty (t = 0).
    """
    m = ctx.mass
    n = int(round(t / h)) if t > 0 else 0
    if t < 0 or abs(n * h - t) > 1e-9 * max(1.0, t):
        raise ValueError("t must be a non-negative multiple of h")
    history = np.asarray(history, dtype=complex).reshape(-1, 4)
    if len(history) < n:
        raise HistoryGapError(f"history covers {len(history)} nodes, {n} needed")
    z = np.asarray(zeta_now, dtype=complex)
    path = np.vstack([history[:n], z[None, :]])
    z0 = np.asarray(ctx.zeta0, dtype=complex)
    ib = 1j * m * BETA_DIAG
    conv_k = conv_t = np.zeros(4, dtype=complex)
    if n > 0:
        Ak, Bk = product_trapezoid_moments(lambda s: kern.memory_kernel_k1(s, m), h, n)
        At, Bt = product_trapezoid_moments(lambda s: kern.tail_kernel(s, m), h, n)
        rev = path[::-1]
        conv_k = Ak @ rev[:-1] + Bk @ rev[1:]
        conv_t = At @ rev[:-1] + Bt @ rev[1:]
    lam = lambda_of_t(ctx.data, t)
    return (_FOUR_PI * (lam + z0 * kern.mu(t, m) - ctx.potential.F(z))
            + m * z - m * conv_k + ib * (z0 * kern.a_coef(t, m) + z - m * conv_t))


def solve_stepping(ctx: DelayRHSContext, t_end: float, h: float,
                   corrector_tol: float = 1e-12, max_corrector: int = 3) -> ZetaTrajectory:
    """Heun predictor, trapezoid corrector (at most ``max_corrector`` sweeps)."""
    n = _n_steps(t_end, h)
    st = _Stepper(ctx, h, n, corrector_tol, max_corrector)
    st.run_to(n)
    return st.trajectory("stepping")


def _all_convolutions(W, A_end, Z):
    """conv_n for every n of a (n+1, 4) complex history."""
    n1 = len(Z)
    out = np.empty_like(Z)
    for col in range(4):
        re = np.convolve(W[:n1], Z[:, col].real)[:n1]
        im = np.convolve(W[:n1], Z[:, col].imag)[:n1]
        out[:, col] = re + 1j * im
    out -= A_end[:n1, None] * Z[0]
    return out


def solve_picard(ctx: DelayRHSContext, window_tau: float = 0.02, n_iter: int = 60,
                 h: float = 1e-3, tol: float = 1e-14) -> ZetaTrajectory:
    """Fixed-point iteration of zeta = zeta0 + int_0^t RHS on [0, window_tau].

    The time integral is the cumulative trapezoid rule, so the fixed point
    coincides with the trapezoid scheme used by :func:`solve_stepping`.
    """
    n = _n_steps(window_tau, h)
    m = ctx.mass
    st = _Stepper(ctx, h, n)   # reuse forcing and weights
    Wk = st.Wrev[0, ::-1]
    Wt = st.Wrev[1, ::-1]
    z0 = np.asarray(ctx.zeta0, dtype=complex)
    ib = 1j * m * BETA_DIAG
    Z = np.tile(z0, (n + 1, 1))
    dists = []
    ratio = 0.0
    for it in range(1, n_iter + 1):
        ck = _all_convolutions(Wk, st.A_end[0], Z)
        ct = _all_convolutions(Wt, st.A_end[1], Z)
        F = ctx.potential.F(Z)
        rhs = st.forcing + m * Z - m * ck + ib * (Z - m * ct) - _FOUR_PI * F
        Znew = np.empty_like(Z)
        Znew[0] = z0
        Znew[1:] = z0 + np.cumsum(0.5 * h * (rhs[1:] + rhs[:-1]), axis=0)
        d = float(np.max(np.abs(Znew - Z)))
        Z = Znew
        if dists and dists[-1] > 1e3 * tol * max(1.0, float(np.max(np.abs(Z)))):
            r = d / dists[-1]
            ratio = max(ratio, r)
            if r >= 1.0:
                raise NoContractionError(
                    f"iteration {it}: distance ratio {r:.3g} >= 1; shrink window_tau")
        dists.append(d)
        if d <= tol * max(1.0, float(np.max(np.abs(Z)))):
            break
    else:
        raise NoContractionError(f"no convergence in {n_iter} iterations (last distance {dists[-1]:.3g})")
    ck = _all_convolutions(Wk, st.A_end[0], Z)
    ct = _all_convolutions(Wt, st.A_end[1], Z)
    zdot = st.forcing + m * Z - m * ck + ib * (Z - m * ct) - _FOUR_PI * ctx.potential.F(Z)
    Z.setflags(write=False)
    zdot.setflags(write=False)
    return ZetaTrajectory(h, Z, zdot, "picard", dists[-1],
                          {"iterations": len(dists), "contraction_ratio": ratio,
                           "distances": dists})


def extend_globally(ctx: DelayRHSContext, t_end: float, h: float, window: float | None = None,
                    bound: float | None = None, bound_tol: float = 1e-6,
                    corrector_tol: float = 1e-12, max_corrector: int = 3) -> ZetaTrajectory:
    """Continue the solution window by window, checking |zeta| <= bound at each boundary.

    ``bound`` defaults to the cutoff threshold of ``ctx.potential``.
    """
    n = _n_steps(t_end, h)
    if bound is None:
        bound = getattr(ctx.potential, "lambda_threshold", None)
    per = n if window is None else max(1, int(round(window / h)))
    st = _Stepper(ctx, h, n, corrector_tol, max_corrector)
    checks = []
    while st.n < n:
        st.run_to(min(n, st.n + per))
        zn = float(np.sqrt(np.sum(np.abs(st.Z[st.n]) ** 2)))
        if bound is not None:
            # the bound must hold on the whole window, not just the endpoint
            peak = float(np.max(np.sqrt(np.sum(np.abs(st.Z[: st.n + 1]) ** 2, axis=1))))
            checks.append((st.n * h, zn))
            if peak > bound + bound_tol:
                raise BoundViolationError(
                    f"|zeta| = {peak:.9g} exceeds the a priori bound {bound:.9g} by t = {st.n * h:.6g}")
    return st.trajectory("stepping", windows=len(checks) or 1, boundary_checks=checks)


def write_trajectory_csv(traj: ZetaTrajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["t"]
        for j in range(1, 5):
            header += [f"re_zeta{j}", f"im_zeta{j}"]
        w.writerow(header + ["abs_zeta"])
        norms = traj.norms()
        for n, t in enumerate(traj.times):
            row = [t]
            for z in traj.zeta[n]:
                row += [z.real, z.imag]
            row.append(norms[n])
            w.writerow([f"{v:.17g}" for v in row])
