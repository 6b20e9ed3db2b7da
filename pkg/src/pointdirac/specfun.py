"""Bessel-type special functions used by the memory kernels.

All functions are vectorised over numpy arrays and return a float for a
scalar argument.  Arguments must be non-negative.

Three regimes are used for J0, J1 and the cumulative integral
``G(x) = int_0^x J1(u)/u du``:

* power series for ``x < series_cutoff``,
* Miller's backward recurrence (normalised with ``J0 + 2 sum J_2k = 1``)
  for moderate ``x``; the same recurrence gives ``int_0^x J0`` through the
  Neumann series ``2 sum J_{2k+1}``,
* Hankel's asymptotic expansion for ``x > asymptotic_cutoff`` (J0, J1 only).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpecFunConfig",
    "DEFAULT_CONFIG",
    "bessel_j0",
    "bessel_j1",
    "j1_over_x",
    "integral_j0",
    "j1_over_u_cumulative",
    "j1_over_u_tail",
    "i0_minus_struve_l0",
]


@dataclass(frozen=True)
class SpecFunConfig:
    series_cutoff: float = 1.0
    asymptotic_cutoff: float = 25.0
    target_abs_tol: float = 1e-13

    def __post_init__(self):
        if not self.series_cutoff > 0:
            raise ValueError("series_cutoff must be positive")
        if not self.asymptotic_cutoff > self.series_cutoff:
            raise ValueError("asymptotic_cutoff must exceed series_cutoff")
        if not 0 < self.target_abs_tol <= 1e-6:
            raise ValueError("target_abs_tol must lie in (0, 1e-6]")


DEFAULT_CONFIG = SpecFunConfig()

_RESCALE = 1e200


def _prepare(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(~np.isfinite(x)):
        raise ValueError("argument must be finite and non-negative")
    return x


def _finish(x, out):
    if out.ndim == 0 or np.ndim(x) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------- series

def _series_j0(x):
    q = -0.25 * x * x
    term = np.ones_like(x)
    total = term.copy()
    for k in range(1, 30):
        term = term * q / (k * k)
        total += term
    return total


def _series_j1_over_x(x):
    # J1(x)/x = 1/2 sum (-x^2/4)^k / (k! (k+1)!)
    q = -0.25 * x * x
    term = np.full_like(x, 0.5)
    total = term.copy()
    for k in range(1, 30):
        term = term * q / (k * (k + 1))
        total += term
    return total


def _series_g(x):
    # int_0^x J1(u)/u du = sum (-1)^k (x/2)^(2k+1) / (k! (k+1)! (2k+1))
    q = -0.25 * x * x
    term = 0.5 * x  # (x/2)^(2k+1)/(k!(k+1)!) at k=0
    total = term.copy()
    for k in range(1, 30):
        term = term * q / (k * (k + 1))
        total += term / (2 * k + 1)
    return total


def _series_int_j0(x):
    q = -0.25 * x * x
    term = x.copy()
    total = term.copy()
    for k in range(1, 30):
        term = term * q / (k * k)
        total += term / (2 * k + 1)
    return total


# ---------------------------------------------------------------- Miller

def _miller(x):
    """Return (J0, J1, int_0^x J0) for x >= ~1 by backward recurrence."""
    start = 2 * np.ceil((x + 30.0 + 12.0 * np.cbrt(x)) / 2.0).astype(int)
    nmax = int(start.max())
    f_next = np.zeros_like(x)  # f_{n+1}
    f_cur = np.zeros_like(x)   # f_n
    even_sum = np.zeros_like(x)
    odd_sum = np.zeros_like(x)
    f1 = np.zeros_like(x)
    for n in range(nmax, 0, -1):
        seed = start == n
        if np.any(seed):
            f_cur = np.where(seed, 1e-30, f_cur)
        f_prev = (2.0 * n / x) * f_cur - f_next
        k = n - 1
        if k == 1:
            f1 = f_prev
        if k % 2 == 1:
            odd_sum += f_prev
        elif k > 0:
            even_sum += 2.0 * f_prev
        f_next, f_cur = f_cur, f_prev
        big = np.abs(f_cur) > _RESCALE
        if np.any(big):
            s = np.where(big, 1.0 / _RESCALE, 1.0)
            f_cur *= s
            f_next *= s
            even_sum *= s
            odd_sum *= s
            f1 *= s
    f0 = f_cur
    norm = f0 + even_sum
    return f0 / norm, f1 / norm, 2.0 * odd_sum / norm


# ---------------------------------------------------------------- Hankel

def _hankel_coeffs(nu, nterms):
    mu = 4.0 * nu * nu
    a = [1.0]
    for k in range(1, nterms):
        a.append(a[-1] * (mu - (2 * k - 1) ** 2) / (k * 8.0))
    return a


_A0 = _hankel_coeffs(0.0, 24)
_A1 = _hankel_coeffs(1.0, 24)


def _hankel(nu, x):
    a = _A0 if nu == 0 else _A1
    inv = 1.0 / x
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for k, ak in enumerate(a):
        term = ak * inv ** k
        if k % 4 == 0:
            p += term
        elif k % 4 == 1:
            q += term
        elif k % 4 == 2:
            p -= term
        else:
            q -= term
    chi = x - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


# ---------------------------------------------------------------- public

def _regimes(x, cfg):
    small = x < cfg.series_cutoff
    large = x > cfg.asymptotic_cutoff
    mid = ~small & ~large
    return small, mid, large


def bessel_j0(x, config: SpecFunConfig = DEFAULT_CONFIG):
    """Bessel function of the first kind, order zero."""
    x = _prepare(x)
    xa = np.atleast_1d(x)
    out = np.empty_like(xa)
    small, mid, large = _regimes(xa, config)
    out[small] = _series_j0(xa[small])
    if np.any(mid):
        out[mid] = _miller(xa[mid])[0]
    out[large] = _hankel(0, xa[large])
    return _finish(x, out.reshape(x.shape))


def bessel_j1(x, config: SpecFunConfig = DEFAULT_CONFIG):
    """Bessel function of the first kind, order one."""
    x = _prepare(x)
    xa = np.atleast_1d(x)
    out = np.empty_like(xa)
    small, mid, large = _regimes(xa, config)
    out[small] = xa[small] * _series_j1_over_x(xa[small])
    if np.any(mid):
        out[mid] = _miller(xa[mid])[1]
    out[large] = _hankel(1, xa[large])
    return _finish(x, out.reshape(x.shape))


def j1_over_x(x, config: SpecFunConfig = DEFAULT_CONFIG):
    """J1(x)/x with the removable singularity filled in (value 1/2 at 0)."""
    x = _prepare(x)
    xa = np.atleast_1d(x)
    out = np.empty_like(xa)
    small = xa < config.series_cutoff
    out[small] = _series_j1_over_x(xa[small])
    rest = ~small
    out[rest] = bessel_j1(xa[rest], config) / xa[rest]
    return _finish(x, out.reshape(x.shape))


def integral_j0(x, config: SpecFunConfig = DEFAULT_CONFIG):
    """int_0^x J0(u) du."""
    x = _prepare(x)
    xa = np.atleast_1d(x)
    out = np.empty_like(xa)
    small = xa < config.series_cutoff
    out[small] = _series_int_j0(xa[small])
    if np.any(~small):
        out[~small] = _miller(xa[~small])[2]
    return _finish(x, out.reshape(x.shape))


def _cumulative_and_tail(x, config):
    xa = np.atleast_1d(x)
    g = np.empty_like(xa)
    small = xa < config.series_cutoff
    g[small] = _series_g(xa[small])
    rest = ~small
    if np.any(rest):
        j0, j1, ij0 = _miller(xa[rest])
        # J1(u)/u = J0(u) - J1'(u)
        g[rest] = ij0 - j1
    return g


def j1_over_u_cumulative(x, config: SpecFunConfig = DEFAULT_CONFIG):
    """G(x) = int_0^x J1(u)/u du; G(0) = 0 and G(inf) = 1."""
    x = _prepare(x)
    return _finish(x, _cumulative_and_tail(x, config).reshape(x.shape))


def j1_over_u_tail(x, config: SpecFunConfig = DEFAULT_CONFIG):
    """T(x) = int_x^inf J1(u)/u du = 1 - G(x)."""
    x = _prepare(x)
    return _finish(x, (1.0 - _cumulative_and_tail(x, config)).reshape(x.shape))


# ---------------------------------------------------------------- I0 - L0

_GL_THETA = np.polynomial.legendre.leggauss(48)


def _i0l0_series(x):
    # sum_k (x/2)^(2k) / (k!)^2  -  (x/2)^(2k+1) / Gamma(k+3/2)^2
    h = 0.5 * x
    term_i = np.ones_like(x)
    term_l = h / math.gamma(1.5) ** 2
    total = term_i - term_l
    for k in range(1, 60):
        term_i = term_i * h * h / (k * k)
        term_l = term_l * h * h / (k + 0.5) ** 2
        total += term_i - term_l
    return total


def _i0l0_integral(x):
    # (2/pi) int_0^{pi/2} exp(-x cos theta) d theta, on four panels
    nodes, weights = _GL_THETA
    edges = np.array([0.0, 1.0, 1.3, 1.5, 0.5 * math.pi])
    total = np.zeros_like(x)
    for lo, hi in zip(edges[:-1], edges[1:]):
        th = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        w = 0.5 * (hi - lo) * weights
        total += np.exp(-np.outer(x, np.cos(th))) @ w
    return 2.0 / math.pi * total


def _i0l0_asymptotic(x):
    # sum_k Gamma(k+1/2)^2 / pi^2 (2/x)^(2k+1)
    total = np.zeros_like(x)
    g = math.gamma(0.5)
    for k in range(0, 14):
        gk = g * g / math.pi ** 2
        total += gk * (2.0 / x) ** (2 * k + 1)
        g *= k + 0.5
    return total


def i0_minus_struve_l0(x):
    """I0(x) - L0(x), evaluated without forming the two large terms."""
    x = _prepare(x)
    xa = np.atleast_1d(x)
    out = np.empty_like(xa)
    small = xa <= 4.0
    large = xa > 32.0
    mid = ~small & ~large
    out[small] = _i0l0_series(xa[small])
    out[mid] = _i0l0_integral(xa[mid])
    out[large] = _i0l0_asymptotic(xa[large])
    return _finish(x, out.reshape(x.shape))
