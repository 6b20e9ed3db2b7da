"""Scalar kernels of the point-amplitude equation.

With ``G(x) = int_0^x J1(u)/u du`` and ``T = 1 - G``:

    mu(t)  = (m / 4 pi) (G(m t) - 1)
    K1(s)  = J1(m s) / s                    (memory kernel, K1(0) = m/2)
    T_m(s) = T(m s)                         (tail kernel)
    a(t)   = m t T(m t) - J0(m t)           (coefficient of zeta0)

plus the real-space Klein-Gordon pieces ``g`` and ``gamma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .quadrature import panel_rule

__all__ = [
    "mu",
    "mu_derivative",
    "memory_kernel_k1",
    "tail_kernel",
    "a_coef",
    "a_derivative",
    "gamma_kernel",
    "g_green",
    "HermiteTable",
    "KernelSet",
]

_FOUR_PI = 4.0 * math.pi


def _arg(t, name="t"):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError(f"{name} must be non-negative")
    return t


def _out(like, val):
    return float(val) if np.ndim(like) == 0 else val


def mu(t, m: float = 1.0):
    t = _arg(t)
    return _out(t, m / _FOUR_PI * (specfun.j1_over_u_cumulative(m * t) - 1.0))


def mu_derivative(t, m: float = 1.0):
    t = _arg(t)
    return _out(t, m * m / _FOUR_PI * specfun.j1_over_x(m * t))


def memory_kernel_k1(s, m: float = 1.0):
    """J1(m s)/s, equal to m/2 at s = 0."""
    s = _arg(s, "s")
    return _out(s, m * specfun.j1_over_x(m * s))


def tail_kernel(s, m: float = 1.0):
    s = _arg(s, "s")
    return _out(s, specfun.j1_over_u_tail(m * s))


def a_coef(t, m: float = 1.0):
    t = _arg(t)
    x = m * t
    return _out(t, x * specfun.j1_over_u_tail(x) - specfun.bessel_j0(x))


def a_derivative(t, m: float = 1.0):
    # d/dt [mt T(mt) - J0(mt)] = m T(mt); the J1 terms cancel
    t = _arg(t)
    return _out(t, m * specfun.j1_over_u_tail(m * t))


def g_green(rho, m: float = 1.0):
    """e^{-m rho} / (4 pi rho)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("rho must be positive")
    return _out(rho, np.exp(-m * rho) / (_FOUR_PI * rho))


def _gamma_edges(rho, upper, m):
    # geometric panels resolve the 1/sqrt(u^2+rho^2) scale, then
    # panels of width <= 1/m follow the Bessel oscillation
    scale = 1.0 / max(m, 1e-300)
    edges = [0.0]
    x = rho
    while x < min(upper, scale):
        edges.append(x)
        x *= 2.0
    start = edges[-1]
    n = max(1, int(math.ceil((upper - start) * max(m, 1.0))))
    edges.extend(np.linspace(start, upper, n + 1)[1:])
    return np.array(edges)


def gamma_kernel(rho: float, t: float, m: float = 1.0, order: int = 24) -> float:
    """gamma(rho, t): the retarded Klein-Gordon kernel at |x| = rho.

    Substituting u = sqrt(s^2 - rho^2) removes the inverse square root
    at the light cone:

        gamma = 1/(4 pi rho) - (m/4 pi) int_0^{sqrt(t^2-rho^2)} J1(m u)/sqrt(u^2+rho^2) du
    """
    if not rho > 0:
        raise ValueError("gamma_kernel is singular at rho = 0; use the limit routines")
    if t < rho:
        return 0.0
    upper = math.sqrt(max(t * t - rho * rho, 0.0))
    if upper == 0.0 or m == 0.0:
        return 1.0 / (_FOUR_PI * rho)
    nodes, weights = panel_rule(_gamma_edges(rho, upper, m), order)
    integral = np.dot(weights, specfun.bessel_j1(m * nodes) / np.sqrt(nodes ** 2 + rho ** 2))
    return 1.0 / (_FOUR_PI * rho) - m / _FOUR_PI * float(integral)


@dataclass(frozen=True)
class HermiteTable:
    """Cubic Hermite interpolant on a uniform grid with exact derivatives."""

    t0: float
    dt: float
    values: np.ndarray
    slopes: np.ndarray

    @classmethod
    def build(cls, func, deriv, t_end: float, dt: float) -> "HermiteTable":
        n = max(1, int(math.ceil(t_end / dt)))
        grid = dt * np.arange(n + 1)
        return cls(0.0, dt, np.asarray(func(grid)), np.asarray(deriv(grid)))

    @property
    def t_max(self) -> float:
        return self.t0 + self.dt * (len(self.values) - 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t0) or np.any(t > self.t_max * (1 + 1e-14)):
            raise ValueError("time outside tabulated range")
        x = (t - self.t0) / self.dt
        i = np.minimum(np.floor(x).astype(int), len(self.values) - 2)
        s = x - i
        y0, y1 = self.values[i], self.values[i + 1]
        d0, d1 = self.slopes[i] * self.dt, self.slopes[i + 1] * self.dt
        s2 = s * s
        s3 = s2 * s
        out = (
            (2 * s3 - 3 * s2 + 1) * y0
            + (s3 - 2 * s2 + s) * d0
            + (-2 * s3 + 3 * s2) * y1
            + (s3 - s2) * d1
        )
        return _out(t, out)


@dataclass(frozen=True)
class KernelSet:
    """The kernels for one mass, with interpolation tables up to ``t_max``.

    Tables are used in loops that sample off-grid times; the solver itself
    evaluates kernels directly at its quadrature nodes.
    """

    mass: float = 1.0
    t_max: float = 10.0
    table_dt: float = 1e-2
    mu_table: HermiteTable = field(init=False, repr=False)
    a_table: HermiteTable = field(init=False, repr=False)

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not (self.t_max > 0 and self.table_dt > 0):
            raise ValueError("t_max and table_dt must be positive")
        m = self.mass
        object.__setattr__(self, "mu_table", HermiteTable.build(
            lambda t: mu(t, m), lambda t: mu_derivative(t, m), self.t_max, self.table_dt))
        object.__setattr__(self, "a_table", HermiteTable.build(
            lambda t: a_coef(t, m), lambda t: a_derivative(t, m), self.t_max, self.table_dt))

    def mu(self, t):
        return mu(t, self.mass)

    def a(self, t):
        return a_coef(t, self.mass)

    def k1(self, s):
        return memory_kernel_k1(s, self.mass)

    def tail(self, s):
        return tail_kernel(s, self.mass)

    def gamma(self, rho, t):
        return gamma_kernel(rho, t, self.mass)

    def g(self, rho):
        return g_green(rho, self.mass)
