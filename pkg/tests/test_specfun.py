import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate, special

from pointdirac import specfun as sf

# oracles: 60-term power series / adaptive quadrature in 40-digit arithmetic
J0_1 = 0.76519768655796655145
J1_2 = 0.5767248077568733872
G_1 = 0.47967982434482672335
T_10 = -0.023538557787875420863
I0L0_1 = 0.55582269181411744686


def test_j0_examples():
    assert sf.bessel_j0(0.0) == 1.0
    assert abs(sf.bessel_j0(1.0) - J0_1) < 1e-14
    x = np.linspace(0, 60, 3001)
    assert np.all(np.abs(sf.bessel_j0(x)) <= 1.0)


def test_j1_examples():
    assert sf.bessel_j1(0.0) == 0.0
    assert abs(sf.bessel_j1(1e-6) / 1e-6 - 0.5) < 1e-10
    assert abs(sf.bessel_j1(2.0) - J1_2) < 1e-14
    assert sf.j1_over_x(0.0) == 0.5


@pytest.mark.parametrize("x", [0.0, 0.3, 0.999, 1.0, 3.7, 11.9, 12.1, 24.9, 25.1, 40.0, 150.0, 800.0])
def test_bessel_against_scipy(x):
    assert abs(sf.bessel_j0(x) - special.j0(x)) < 1e-13
    assert abs(sf.bessel_j1(x) - special.j1(x)) < 1e-13


def test_regime_crossovers_are_continuous():
    mp.mp.dps = 30
    g = lambda t: mp.quad(lambda u: mp.besselj(1, u) / u, [0, t])
    refs = ((sf.bessel_j0, lambda t: mp.besselj(0, t)), (sf.bessel_j1, lambda t: mp.besselj(1, t)),
            (sf.j1_over_u_cumulative, g))
    for c in (sf.DEFAULT_CONFIG.series_cutoff, sf.DEFAULT_CONFIG.asymptotic_cutoff):
        for x in (c * (1 - 1e-12), c * (1 + 1e-12)):
            for f, ref in refs:
                assert abs(f(x) - float(ref(x))) < 1e-14


def test_derivative_of_j0():
    x = np.linspace(0, 20, 401)[1:]
    h = 1e-5
    fd = -(sf.bessel_j0(x + h) - sf.bessel_j0(x - h)) / (2 * h)
    assert np.max(np.abs(fd - sf.bessel_j1(x))) < 1e-8


def test_integral_of_j1_closed_form():
    for t in (0.5, 2.0, 7.5, 30.0):
        q, _ = integrate.quad(sf.bessel_j1, 0, t, limit=200, epsabs=1e-13)
        assert abs(q - (1 - sf.bessel_j0(t))) < 1e-9


def test_cumulative_examples():
    assert sf.j1_over_u_cumulative(0.0) == 0.0
    assert abs(sf.j1_over_u_cumulative(1.0) - G_1) < 1e-14
    assert abs(sf.j1_over_u_cumulative(200.0) - 1.0) < 5e-3


def test_cumulative_increments():
    f = lambda u: special.j1(u) / u
    for a, b in [(0.5, 3.0), (3.0, 17.0), (20.0, 60.0)]:
        q, _ = integrate.quad(f, a, b, limit=200, epsabs=1e-14, epsrel=1e-14)
        diff = sf.j1_over_u_cumulative(b) - sf.j1_over_u_cumulative(a)
        assert abs(diff - q) < 1e-10


def test_cumulative_limit_is_one():
    # G(X) + J0(X)/X + J1(X)/X^2 leaves a remainder of order X^(-7/2)
    X = 200.0
    est = sf.j1_over_u_cumulative(X) + sf.bessel_j0(X) / X + sf.bessel_j1(X) / X ** 2
    assert abs(est - 1.0) < 1e-6


def test_tail_examples():
    assert sf.j1_over_u_tail(0.0) == 1.0
    assert abs(sf.j1_over_u_tail(10.0) - T_10) < 1e-13
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 100, 50)
    assert np.allclose(sf.j1_over_u_tail(x) + sf.j1_over_u_cumulative(x), 1.0, atol=1e-15)


def test_i0_minus_l0_examples():
    assert abs(sf.i0_minus_struve_l0(0.0) - 1.0) < 1e-15
    assert abs(sf.i0_minus_struve_l0(1.0) - I0L0_1) < 1e-13
    assert abs(sf.i0_minus_struve_l0(50.0) / (2 / (math.pi * 50)) - 1) < 0.02


def test_i0_minus_l0_against_oscillatory_quadrature():
    # int_0^inf sin(r)/sqrt(r^2+1) dr over half periods, with Euler (mpmath nsum) acceleration
    mp.mp.dps = 30
    f = lambda r: mp.sin(r) / mp.sqrt(r * r + 1)
    total = mp.nsum(lambda k: mp.quad(f, [k * mp.pi, (k + 1) * mp.pi]), [0, mp.inf], method="euler-maclaurin+richardson")
    assert abs(sf.i0_minus_struve_l0(1.0) - float(2 / mp.pi * total)) < 1e-7


def test_i0_minus_l0_positive_decreasing():
    x = np.linspace(0, 80, 2001)
    v = sf.i0_minus_struve_l0(x)
    assert np.all(v > 0) and np.all(np.diff(v) < 0)
    ref = np.array([float(mp.besseli(0, t) - mp.struvel(0, t)) for t in (2.0, 5.0, 10.0, 20.0)])
    assert np.allclose(sf.i0_minus_struve_l0(np.array([2.0, 5.0, 10.0, 20.0])), ref, rtol=1e-11)


def test_domain_and_config():
    with pytest.raises(ValueError):
        sf.bessel_j0(-1.0)
    with pytest.raises(ValueError):
        sf.SpecFunConfig(target_abs_tol=1e-3)
    with pytest.raises(ValueError):
        sf.SpecFunConfig(series_cutoff=0)
    assert isinstance(sf.bessel_j0(1.0), float)
    assert sf.bessel_j0(np.zeros((2, 3))).shape == (2, 3)
