"""Small quadrature and extrapolation helpers shared by the modules."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "gauss_legendre",
    "gauss_laguerre",
    "panel_rule",
    "uniform_panels",
    "richardson",
]


@lru_cache(maxsize=None)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def _laggauss(n: int):
    x, w = np.polynomial.laguerre.laggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int):
    """Nodes and weights on [-1, 1] (cached, read-only)."""
    return _leggauss(int(n))


def gauss_laguerre(n: int):
    """Nodes and weights for int_0^inf e^{-y} f(y) dy."""
    return _laggauss(int(n))


def panel_rule(edges, order: int = 16):
    """Composite Gauss-Legendre rule on consecutive panels ``edges``.

    Returns flat ``(nodes, weights)``.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def uniform_panels(a: float, b: float, width: float):
    n = max(1, int(np.ceil((b - a) / width - 1e-12)))
    return np.linspace(a, b, n + 1)


def richardson(hs, values, exponents):
    """Extrapolate ``values(h) = L + sum_k c_k h**p_k`` to h = 0.

    ``exponents`` lists the p_k to eliminate; ``len(hs)`` must be
    ``len(exponents) + 1``.  Values may be arrays (extrapolated
    elementwise, complex allowed).
    """
    hs = np.asarray(hs, dtype=float)
    values = np.asarray(values)
    p = list(exponents)
    if len(hs) != len(p) + 1:
        raise ValueError("need exactly len(exponents)+1 samples")
    mat = np.ones((len(hs), len(hs)))
    for j, pk in enumerate(p):
        mat[:, j + 1] = hs ** pk
    flat = values.reshape(len(hs), -1)
    coef = np.linalg.solve(mat, flat.astype(complex) if np.iscomplexobj(flat) else flat)
    lim = coef[0].reshape(values.shape[1:])
    if lim.ndim == 0:
        return lim.item()
    return lim
