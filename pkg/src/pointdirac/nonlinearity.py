"""Separable polynomial potentials and their Lipschitz cutoff.

A potential is ``U(zeta) = sum_j u_j(|zeta_j|^2)`` with
``u_j(s) = sum_k c_{j,k} s^k``.  The gradient used by the dynamics is the
Wirtinger derivative ``F_j = d U / d conj(zeta_j) = u_j'(|zeta_j|^2) zeta_j``.

The cutoff works on the radial profile ``p_j(r) = u_j(r^2)``: it is kept on
``[0, Lam]``, bridged by a quintic Hermite polynomial on ``[Lam, Lam + w]``
and continued by ``kappa_j r^2 + d_j`` beyond, so that ``F~_j`` is linear in
``zeta_j`` for large amplitudes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

__all__ = [
    "PotentialSpec",
    "CutoffPotential",
    "InvalidEnergyError",
    "CutoffConstructionError",
    "evaluate_U",
    "evaluate_F",
    "lambda_threshold",
    "build_cutoff",
]


class InvalidEnergyError(ValueError):
    pass


class CutoffConstructionError(RuntimeError):
    pass


def _radial_grid(r_max: float, n: int = 4001):
    return np.linspace(0.0, r_max, n)


@dataclass(frozen=True)
class PotentialSpec:
    """``coefficients[j, k-1]`` multiplies ``|zeta_j|^(2k)``; ``U >= b|zeta|^2 - a``."""

    coefficients: np.ndarray
    a: float = 0.0
    b: float = 1.0
    check_radius: float | None = None

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.ndim != 2 or c.shape[0] != 4 or c.shape[1] < 1:
            raise ValueError("coefficients must have shape (4, K)")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        if not self.b > 0:
            raise ValueError("b must be positive")
        for j in range(4):
            nz = np.nonzero(c[j])[0]
            if nz.size == 0 or c[j, nz[-1]] <= 0:
                raise ValueError(f"component {j + 1} needs a positive leading coefficient")
        lo = coercivity_margin(self)
        if lo < -self.a - 1e-12:
            raise ValueError(
                f"U >= b|zeta|^2 - a fails on the check grid (min of U - b|zeta|^2 is {lo:.6g})")

    @classmethod
    def from_terms(cls, terms, a: float = 0.0, b: float = 1.0) -> "PotentialSpec":
        """Build from ``(component, power, coefficient)`` triples, components 1..4."""
        terms = list(terms)
        kmax = max([int(k) for _, k, _ in terms] + [1])
        c = np.zeros((4, kmax))
        for j, k, coef in terms:
            j, k = int(j), int(k)
            if not (1 <= j <= 4 and k >= 1):
                raise ValueError(f"bad term ({j}, {k}, {coef})")
            c[j - 1, k - 1] += float(coef)
        return cls(c, a, b)

    def terms(self):
        out = []
        for j in range(4):
            for k in range(self.coefficients.shape[1]):
                if self.coefficients[j, k] != 0.0:
                    out.append((j + 1, k + 1, float(self.coefficients[j, k])))
        return out

    def U(self, zeta):
        return evaluate_U(self, zeta)

    def F(self, zeta):
        return evaluate_F(self, zeta)

    def radial(self, j: int) -> Polynomial:
        """p_j(r) = u_j(r^2) as a polynomial in r."""
        c = np.zeros(2 * self.coefficients.shape[1] + 1)
        c[2::2] = self.coefficients[j]
        return Polynomial(c)

    def max_power(self, j: int) -> int:
        nz = np.nonzero(self.coefficients[j])[0]
        return int(nz[-1]) + 1

    def u_prime(self, j: int, s):
        c = self.coefficients[j]
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for k in range(len(c) - 1, -1, -1):
            out = out * s + (k + 1) * c[k]
        return out


def _check_radius(spec: PotentialSpec) -> float:
    if spec.check_radius is not None:
        return float(spec.check_radius)
    # beyond the largest root scale the leading term dominates
    c = spec.coefficients
    scale = 1.0 + math.sqrt(max(spec.a, 0.0) / spec.b)
    for j in range(4):
        K = spec.max_power(j)
        lead = c[j, K - 1]
        for k in range(K - 1):
            if c[j, k]:
                scale = max(scale, (abs(c[j, k]) / lead) ** (1.0 / (2 * (K - 1 - k))))
    return 10.0 * scale


def coercivity_margin(spec: PotentialSpec, profile=None) -> float:
    """min over the check grid of U - b|zeta|^2 (sum of per-component minima)."""
    r = _radial_grid(_check_radius(spec))
    total = 0.0
    for j in range(4):
        p = spec.radial(j)(r) if profile is None else profile(j, r)
        total += float(np.min(p - spec.b * r * r))
    return total


def _moduli2(zeta):
    zeta = np.asarray(zeta, dtype=complex)
    if zeta.shape[-1] != 4:
        raise ValueError("last axis must have length 4")
    return zeta, zeta.real ** 2 + zeta.imag ** 2


def _component_values(spec: PotentialSpec, s):
    c = spec.coefficients
    out = np.zeros(s.shape)
    for k in range(c.shape[1] - 1, -1, -1):
        out = (out + c[:, k]) * s
    return out


def evaluate_U(spec: PotentialSpec, zeta):
    zeta, s = _moduli2(zeta)
    total = _component_values(spec, s).sum(axis=-1)
    return float(total) if total.ndim == 0 else total


def evaluate_F(spec: PotentialSpec, zeta):
    """Wirtinger gradient F_j = u_j'(|zeta_j|^2) zeta_j."""
    zeta, s = _moduli2(zeta)
    weight = np.stack([spec.u_prime(j, s[..., j]) for j in range(4)], axis=-1)
    return weight * zeta


def lambda_threshold(H0: float, a: float, b: float) -> float:
    if not b > 0:
        raise ValueError("b must be positive")
    if H0 + a < 0:
        raise InvalidEnergyError(f"H0 + a = {H0 + a:.6g} is negative")
    return math.sqrt((H0 + a) / b)


def _quintic_bridge(x0, w, left, right) -> Polynomial:
    """Polynomial in t = (r - x0)/w matching (p, p', p'') at both ends."""
    mat = np.zeros((6, 6))
    rhs = np.zeros(6)
    for row, (tt, der, val) in enumerate(
        [(0.0, 0, left[0]), (0.0, 1, left[1]), (0.0, 2, left[2]),
         (1.0, 0, right[0]), (1.0, 1, right[1]), (1.0, 2, right[2])]
    ):
        for k in range(6):
            if k >= der:
                mat[row, k] = math.perm(k, der) * tt ** (k - der)
        rhs[row] = val * w ** der
    return Polynomial(np.linalg.solve(mat, rhs))


@dataclass(frozen=True)
class _Component:
    identity: bool
    lam: float = 0.0
    width: float = 0.0
    kappa: float = 0.0
    offset: float = 0.0
    bridge: Polynomial | None = None


@dataclass(frozen=True)
class CutoffPotential:
    base: PotentialSpec
    lambda_threshold: float
    blend_width: float
    components: tuple = field(repr=False)
    lipschitz: float = 0.0

    @property
    def a(self) -> float:
        return self.base.a

    @property
    def b(self) -> float:
        return self.base.b

    def slope_caps(self):
        return tuple(c.kappa if not c.identity else None for c in self.components)

    def profile(self, j: int, r, der: int = 0):
        """p~_j(r) or its r-derivatives (der <= 2)."""
        r = np.asarray(r, dtype=float)
        comp = self.components[j]
        exact = self.base.radial(j).deriv(der)(r) if der else self.base.radial(j)(r)
        if comp.identity:
            return exact
        q = Polynomial([comp.offset, 0.0, comp.kappa]).deriv(der)(r) if der else \
            comp.offset + comp.kappa * r * r
        t = (r - comp.lam) / comp.width
        br = comp.bridge.deriv(der)(t) / comp.width ** der if der else comp.bridge(t)
        return np.where(r <= comp.lam, exact, np.where(r >= comp.lam + comp.width, q, br))

    def _weights(self, s):
        # F~_j = w_j(r) zeta_j with w = p'(r)/(2r); s = |zeta_j|^2 as in evaluate_F
        out = np.empty(s.shape)
        for j, comp in enumerate(self.components):
            sj = s[..., j]
            wj = self.base.u_prime(j, sj)
            if not comp.identity:
                rj = np.sqrt(sj)
                far = rj >= comp.lam + comp.width
                mid = (rj > comp.lam) & ~far
                if np.any(far):
                    wj = np.where(far, comp.kappa, wj)
                if np.any(mid):
                    safe = np.where(mid, rj, 1.0)
                    t = (safe - comp.lam) / comp.width
                    dp = comp.bridge.deriv(1)(t) / comp.width
                    wj = np.where(mid, dp / (2.0 * safe), wj)
            out[..., j] = wj
        return out

    def U(self, zeta):
        zeta, s = _moduli2(zeta)
        vals = _component_values(self.base, s)
        for j, comp in enumerate(self.components):
            if not comp.identity:
                r = np.sqrt(s[..., j])
                vals[..., j] = np.where(r <= comp.lam, vals[..., j], self.profile(j, r))
        total = vals.sum(axis=-1)
        return float(total) if total.ndim == 0 else total

    def F(self, zeta):
        zeta, s = _moduli2(zeta)
        return self._weights(s) * zeta


def build_cutoff(spec: PotentialSpec, lam: float, blend_width: float | None = None) -> CutoffPotential:
    """Lipschitz modification of ``spec`` that agrees with it for |zeta_j| <= lam."""
    if not lam > 0:
        raise ValueError("lambda threshold must be positive")
    w = float(lam if blend_width is None else blend_width)
    if not w > 0:
        raise ValueError("blend_width must be positive")
    comps = []
    for j in range(4):
        if spec.max_power(j) <= 1:
            comps.append(_Component(identity=True))
            continue
        p = spec.radial(j)
        kappa = max(float(spec.u_prime(j, lam * lam)), spec.b)
        offset = float(p(lam)) - kappa * lam * lam
        r1 = lam + w
        left = (float(p(lam)), float(p.deriv(1)(lam)), float(p.deriv(2)(lam)))
        right = (kappa * r1 * r1 + offset, 2 * kappa * r1, 2 * kappa)
        comps.append(_Component(False, lam, w, kappa, offset, _quintic_bridge(lam, w, left, right)))
    cut = CutoffPotential(spec, float(lam), w, tuple(comps))

    margin = coercivity_margin(spec, lambda j, r: cut.profile(j, r))
    if margin < -spec.a - 1e-12:
        raise CutoffConstructionError(
            f"cutoff potential dips below b|zeta|^2 - a (margin {margin + spec.a:.3g}); widen blend_width")
    # Lipschitz constant of F~: radial slope p''/2 and tangential slope p'/(2r)
    # beyond lam + w both slopes equal kappa; the bridge and the exact part
    # are scanned densely with the breakpoints included
    r = np.union1d(np.linspace(0.0, lam + w, 40001)[1:], [lam, lam + w])
    L = 0.0
    for j in range(4):
        L = max(L, float(np.max(np.abs(cut.profile(j, r, 2)) / 2.0)),
                float(np.max(np.abs(cut.profile(j, r, 1) / (2.0 * r)))),
                cut.components[j].kappa)
    object.__setattr__(cut, "lipschitz", L)
    return cut
