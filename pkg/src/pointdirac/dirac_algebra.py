"""4-spinors and the Dirac matrices in the standard (Dirac-Pauli) representation.

Fourier symbols use the convention ``f^(xi) = int exp(-i xi.x) f(x) dx`` so
that ``D_m = -i alpha.grad + m beta`` has symbol ``alpha.xi + m beta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Spinor4",
    "DiracRep",
    "as_spinor",
    "norm2",
    "apply_symbol",
    "apply_propagator",
    "apply_inverse_symbol",
    "BETA_DIAG",
]

Spinor4 = np.ndarray  # shape (4,), complex128

# beta = diag(1, 1, -1, -1); used as a componentwise sign in hot loops
BETA_DIAG = np.array([1.0, 1.0, -1.0, -1.0])

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _alpha(sigma):
    out = np.zeros((4, 4), dtype=complex)
    out[:2, 2:] = sigma
    out[2:, :2] = sigma
    return out


def as_spinor(v) -> Spinor4:
    """Coerce a length-4 sequence to a read-only complex spinor."""
    arr = np.array(v, dtype=complex).reshape(4)
    arr.setflags(write=False)
    return arr


def norm2(v) -> float:
    v = np.asarray(v)
    return float(np.sum(np.abs(v) ** 2))


@dataclass(frozen=True)
class DiracRep:
    """alpha_1..3 and beta for a mass ``m >= 0``."""

    mass: float = 1.0
    alpha: tuple = field(init=False, repr=False)
    beta: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.mass >= 0:
            raise ValueError("mass must be non-negative")
        alpha = tuple(_alpha(s) for s in _PAULI)
        beta = np.diag(BETA_DIAG).astype(complex)
        for a in alpha:
            a.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    def symbol(self, xi) -> np.ndarray:
        """The 4x4 matrix alpha.xi + m beta."""
        xi = np.asarray(xi, dtype=float)
        return (
            xi[0] * self.alpha[0]
            + xi[1] * self.alpha[1]
            + xi[2] * self.alpha[2]
            + self.mass * self.beta
        )


def apply_symbol(rep: DiracRep, xi, v) -> Spinor4:
    return rep.symbol(xi) @ np.asarray(v, dtype=complex)


def apply_propagator(rep: DiracRep, xi, t: float, v) -> Spinor4:
    """exp(-i t (alpha.xi + m beta)) v."""
    xi = np.asarray(xi, dtype=float)
    v = np.asarray(v, dtype=complex)
    omega = np.sqrt(xi @ xi + rep.mass ** 2)
    if omega == 0.0:
        return v.copy()
    return np.cos(t * omega) * v - 1j * (np.sin(t * omega) / omega) * (rep.symbol(xi) @ v)


def apply_inverse_symbol(rep: DiracRep, xi, v) -> Spinor4:
    """(alpha.xi + m beta)^{-1} v = (alpha.xi + m beta) v / (xi^2 + m^2)."""
    if not rep.mass > 0:
        raise ValueError("inverse symbol requires m > 0")
    xi = np.asarray(xi, dtype=float)
    return apply_symbol(rep, xi, v) / (xi @ xi + rep.mass ** 2)
