import math

import numpy as np
import pytest

from pointdirac.dirac_algebra import BETA_DIAG, DiracRep
from pointdirac.free_field import (
    GaussianProfile,
    RadialInitialData,
    build_lambda_table,
    lambda_dot,
    lambda_of_t,
)

# 40-digit quadrature of the two radial integrals, A = sigma = m = 1
LC_1, LS_1 = -0.017348768013123701229, 0.031022282328653803748
FREE_ENERGY = 0.056120975664114550528
E1 = np.array([1, 0, 0, 0], dtype=complex)


@pytest.fixture(scope="module")
def data():
    return RadialInitialData(GaussianProfile(1.0, 1.0), E1, np.zeros(4), 1.0)


def _tensor_grid_lambda(data, t, n_r=120, n_theta=24, n_phi=24):
    """(2 pi)^-3 int exp(-i t D^) f^ d^3 xi on a spherical tensor grid, alpha.xi term included."""
    rep = DiracRep(data.mass)
    x, w = np.polynomial.legendre.leggauss(n_r)
    R = 9.0
    r, wr = 0.5 * R * (x + 1), 0.5 * R * w
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    ph = 2 * np.pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1 - ct ** 2)
    total = np.zeros(4, dtype=complex)
    odd = np.zeros(4, dtype=complex)
    c = data.spinor
    ac = [rep.alpha[k] @ c for k in range(3)]
    bc = rep.beta @ c
    for i, rr in enumerate(r):
        om = math.hypot(rr, data.mass)
        phi = float(data.profile(rr))
        for j in range(n_theta):
            for k in range(n_phi):
                xi = rr * np.array([st[j] * np.cos(ph[k]), st[j] * np.sin(ph[k]), ct[j]])
                wgt = wr[i] * rr * rr * wt[j] * (2 * np.pi / n_phi) * phi
                sym = xi[0] * ac[0] + xi[1] * ac[1] + xi[2] * ac[2]
                total += wgt * (np.cos(t * om) * c - 1j * np.sin(t * om) / om * (sym + data.mass * bc))
                odd += wgt * sym
    return total / (2 * np.pi) ** 3, odd / (2 * np.pi) ** 3


def test_lambda_at_zero_is_f_origin(data):
    want = (2 * np.pi) ** -1.5 * E1
    assert np.allclose(lambda_of_t(data, 0.0), want, atol=1e-15)
    assert np.allclose(data.f_at_origin(), want, atol=1e-15)
    assert data.profile.real_space(0.0) == pytest.approx((2 * np.pi) ** -1.5)


def test_lambda_reference(data):
    want = LC_1 * E1 - 1j * LS_1 * BETA_DIAG * E1
    assert np.max(np.abs(lambda_of_t(data, 1.0) - want)) < 1e-15


def test_lambda_against_3d_oracle(data):
    grid, odd = _tensor_grid_lambda(data, 1.0)
    assert np.max(np.abs(odd)) < 1e-12        # the alpha.xi part integrates to zero
    assert np.max(np.abs(grid - lambda_of_t(data, 1.0))) < 1e-10


def test_lambda_bound(data):
    r, w = data.radial_rule()
    bound = np.sum(w * np.abs(data.profile(r)) * r * r) / (2 * np.pi ** 2)
    for t in np.linspace(0, 30, 61):
        assert np.linalg.norm(lambda_of_t(data, t)) <= bound * (1 + 1e-12)


def test_time_reversal(data):
    for t in (0.3, 1.0, 4.2):
        assert np.allclose(lambda_of_t(data, -t), np.conj(lambda_of_t(data, t)), atol=1e-15)


def test_continuity_bound(data):
    r, w = data.radial_rule()
    om = np.sqrt(r * r + 1)
    slope = np.sum(w * om * np.abs(data.profile(r)) * r * r) / (2 * np.pi ** 2)
    for t in (0.0, 0.7, 3.0):
        for h in (1e-2, 1e-4):
            step = np.linalg.norm(lambda_of_t(data, t + h) - lambda_of_t(data, t))
            assert step <= h * slope * (1 + 1e-9)


def test_lambda_dot_fd(data):
    h = 1e-6
    for t in (0.2, 1.5):
        fd = (lambda_of_t(data, t + h) - lambda_of_t(data, t - h)) / (2 * h)
        assert np.max(np.abs(fd - lambda_dot(data, t))) < 1e-8


def test_table(data):
    tab = build_lambda_table(data, 2.0, 0.01)
    for n in (0, 17, 200):
        assert np.array_equal(tab.values[n], lambda_of_t(data, n * 0.01))
    assert np.max(np.abs(tab(0.005) - lambda_of_t(data, 0.005))) < 1e-8
    t = np.random.default_rng(2).uniform(0, 2, 50)
    assert np.max(np.abs(tab(t) - np.array([lambda_of_t(data, s) for s in t]))) < 1e-8
    with pytest.raises(ValueError):
        tab(2.5)


def test_zero_profile_table():
    zero = RadialInitialData(GaussianProfile(0.0, 1.0), E1, np.zeros(4), 1.0)
    tab = build_lambda_table(zero, 1.0, 0.1)
    assert not np.any(tab.values)


def test_energy_and_moments(data):
    assert data.free_energy() == pytest.approx(FREE_ENERGY, abs=1e-15)
    assert np.isfinite(data.h2_moment())
    assert data.profile.tail_bound(data.r_max, 4) <= 1e-13 * 2 * np.pi ** 2


def test_validation():
    with pytest.raises(ValueError):
        GaussianProfile(1.0, 0.0)
    with pytest.raises(ValueError):
        RadialInitialData(GaussianProfile(), E1, np.zeros(4), 0.0)
    with pytest.raises(ValueError):
        lambda_of_t(RadialInitialData(GaussianProfile(), E1, np.zeros(4)), float("nan"))
