"""Radial initial data and the free-field trace lambda(t) = psi_f(0, t).

For ``f^(xi) = phi(|xi|) c`` the alpha.xi part of the free propagator is odd
in xi and drops out at x = 0, leaving

    lambda(t) = L_c(t) c - i m L_s(t) beta c,
    L_c = 1/(2 pi^2) int cos(t w) phi(r) r^2 dr,
    L_s = 1/(2 pi^2) int sin(t w)/w phi(r) r^2 dr,      w = sqrt(r^2 + m^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .dirac_algebra import BETA_DIAG, as_spinor
from .quadrature import panel_rule, uniform_panels

__all__ = [
    "GaussianProfile",
    "RadialInitialData",
    "LambdaTable",
    "QuadratureError",
    "lambda_of_t",
    "lambda_dot",
    "build_lambda_table",
]

_TWO_PI2 = 2.0 * math.pi ** 2


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class GaussianProfile:
    """phi(r) = A exp(-sigma^2 r^2 / 2)."""

    amplitude: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * np.exp(-0.5 * self.sigma ** 2 * r * r)

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0.0

    @property
    def scale(self) -> float:
        """Frequency scale over which phi varies."""
        return 1.0 / self.sigma

    def real_space(self, rho):
        """Inverse transform (2 pi)^-3 int e^{i xi.x} phi d^3 xi at |x| = rho."""
        s2 = self.sigma ** 2
        rho = np.asarray(rho, dtype=float)
        return self.amplitude * (2 * math.pi * s2) ** -1.5 * np.exp(-rho * rho / (2 * s2))

    def tail_bound(self, R: float, power: int = 2) -> float:
        """Bound on int_R^inf |phi| r^power dr (power 2 or 4)."""
        al = 0.5 * self.sigma ** 2
        A = abs(self.amplitude)
        e = math.exp(-al * R * R)
        base = R * e / (2 * al) + math.sqrt(math.pi) * erfc(math.sqrt(al) * R) / (4 * al ** 1.5)
        if power == 2:
            return A * base
        if power == 4:
            return A * (R ** 3 * e / (2 * al) + 1.5 / al * base)
        raise ValueError("power must be 2 or 4")

    def cutoff_radius(self, tol: float, power: int = 2) -> float:
        R = self.scale
        while self.tail_bound(R, power) > tol:
            R *= 1.25
        return R


@dataclass(frozen=True)
class RadialInitialData:
    """psi_0 = f + zeta0 g with f^(xi) = phi(|xi|) c."""

    profile: GaussianProfile
    spinor: np.ndarray
    zeta0: np.ndarray
    mass: float = 1.0
    tail_tol: float = 1e-13
    panel_order: int = 16

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        object.__setattr__(self, "spinor", as_spinor(self.spinor))
        object.__setattr__(self, "zeta0", as_spinor(self.zeta0))

    @property
    def r_max(self) -> float:
        # the bound is scaled by 1/(2 pi^2) at the point of use
        return self.profile.cutoff_radius(self.tail_tol * _TWO_PI2, power=4)

    def radial_rule(self, t: float = 0.0):
        """Gauss-Legendre panels on [0, r_max] resolving phi and cos(t w)."""
        width = 0.5 * self.profile.scale
        if t != 0.0:
            width = min(width, math.pi / abs(t))
        return panel_rule(uniform_panels(0.0, self.r_max, width), self.panel_order)

    def f_hat(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.profile(np.linalg.norm(xi, axis=-1))[..., None] * self.spinor

    def f_at_origin(self):
        r, w = self.radial_rule()
        return np.sum(w * self.profile(r) * r * r) / _TWO_PI2 * self.spinor

    def h2_moment(self) -> float:
        """int (r^2+m^2)^2 |phi|^2 r^2 dr, finite for f in H^2."""
        r, w = self.radial_rule()
        val = float(np.sum(w * (r * r + self.mass ** 2) ** 2 * self.profile(r) ** 2 * r * r))
        if not math.isfinite(val):
            raise QuadratureError("H^2 moment of the profile is not finite")
        return val

    def free_energy(self) -> float:
        """||D_m f||^2 = 1/(2 pi^2) int (r^2+m^2) |phi|^2 r^2 dr |c|^2."""
        r, w = self.radial_rule()
        c2 = float(np.sum(np.abs(self.spinor) ** 2))
        return float(np.sum(w * (r * r + self.mass ** 2) * self.profile(r) ** 2 * r * r)) / _TWO_PI2 * c2


def _scalar_parts(data: RadialInitialData, t: float):
    if data.profile.is_zero:
        return 0.0, 0.0, 0.0, 0.0
    r, w = data.radial_rule(t)
    om = np.sqrt(r * r + data.mass ** 2)
    base = w * data.profile(r) * r * r / _TWO_PI2
    c, s = np.cos(t * om), np.sin(t * om)
    return (np.sum(base * c), np.sum(base * s / om),
            -np.sum(base * om * s), np.sum(base * c))


def _combine(data, pc, ps):
    beta_c = BETA_DIAG * data.spinor
    return pc * data.spinor - 1j * data.mass * ps * beta_c


def lambda_of_t(data: RadialInitialData, t: float) -> np.ndarray:
    """lambda(t) in C^4; negative t evolves backwards."""
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    lc, ls, _, _ = _scalar_parts(data, t)
    return _combine(data, lc, ls)


def lambda_dot(data: RadialInitialData, t: float) -> np.ndarray:
    _, _, dc, ds = _scalar_parts(data, float(t))
    return _combine(data, dc, ds)


@dataclass(frozen=True)
class LambdaTable:
    """lambda on a uniform grid, interpolated by cubic Hermite with exact slopes."""

    dt: float
    values: np.ndarray
    slopes: np.ndarray = field(repr=False)
    order: int = 3

    @property
    def times(self):
        return self.dt * np.arange(len(self.values))

    @property
    def t_end(self) -> float:
        return self.dt * (len(self.values) - 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.t_end * (1 + 1e-14)):
            raise ValueError("time outside the table")
        x = t / self.dt
        i = np.minimum(np.floor(x).astype(int), len(self.values) - 2)
        s = (x - i)[..., None]
        y0, y1 = self.values[i], self.values[i + 1]
        d0, d1 = self.slopes[i] * self.dt, self.slopes[i + 1] * self.dt
        s2, s3 = s * s, s * s * s
        return ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * d0
                + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * d1)


def build_lambda_table(data: RadialInitialData, t_end: float, dt: float) -> LambdaTable:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t_end >= 0:
        raise ValueError("t_end must be non-negative")
    n = max(1, int(round(t_end / dt)))
    if abs(n * dt - t_end) > 1e-9 * max(1.0, t_end):
        n = int(math.ceil(t_end / dt))
    times = dt * np.arange(n + 1)
    vals = np.array([lambda_of_t(data, t) for t in times])
    slopes = np.array([lambda_dot(data, t) for t in times])
    vals.setflags(write=False)
    slopes.setflags(write=False)
    return LambdaTable(dt, vals, slopes)
