import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointdirac.nonlinearity import (
    CutoffConstructionError,
    InvalidEnergyError,
    PotentialSpec,
    build_cutoff,
    evaluate_F,
    evaluate_U,
    lambda_threshold,
)

cnum = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
spinor = st.tuples(cnum, cnum, cnum, cnum).map(lambda t: np.array(t, dtype=complex))

# |zeta_1|^4 plus quadratic terms so that every component is bounded below
QUARTIC = PotentialSpec.from_terms([(1, 2, 1.0), (2, 1, 1.0), (3, 1, 1.0), (4, 1, 1.0)], a=0.25, b=1.0)
DEFAULT = PotentialSpec.from_terms([(1, 1, 1.0), (1, 2, 1.0), (2, 1, 1.0), (3, 1, 1.0), (4, 1, 1.0)])
SEXTIC = PotentialSpec.from_terms([(1, 1, 2.0), (1, 3, 0.5), (2, 2, 1.0), (2, 1, 1.0), (3, 1, 1.0), (4, 1, 1.0)])
QUADRATIC = PotentialSpec.from_terms([(j, 1, 1.5) for j in range(1, 5)], b=1.0)


def _fd_wirtinger(U, z, h=1e-6):
    g = np.zeros(4, dtype=complex)
    for j in range(4):
        e = np.zeros(4)
        e[j] = 1
        dx = (U(z + h * e) - U(z - h * e)) / (2 * h)
        dy = (U(z + 1j * h * e) - U(z - 1j * h * e)) / (2 * h)
        g[j] = 0.5 * (dx + 1j * dy)
    return g


def test_U_examples():
    assert evaluate_U(DEFAULT, np.zeros(4)) == 0.0
    assert evaluate_U(QUARTIC, np.array([1 + 1j, 0, 0, 0])) == pytest.approx(4.0, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(spinor, st.tuples(*[st.floats(-np.pi, np.pi)] * 4))
def test_U_phase_invariance(z, th):
    rot = z * np.exp(1j * np.array(th))
    assert evaluate_U(SEXTIC, rot) == pytest.approx(evaluate_U(SEXTIC, z), rel=1e-12, abs=1e-12)


def test_F_examples():
    z = np.array([0.3 - 0.7j, 0.1, 0, 0])
    assert np.allclose(evaluate_F(QUADRATIC, z), 1.5 * z)
    F = evaluate_F(QUARTIC, z)
    assert F[0] == pytest.approx(2 * abs(z[0]) ** 2 * z[0])


def test_F_matches_finite_differences(rng):
    for spec in (DEFAULT, QUARTIC, SEXTIC):
        for _ in range(20):
            z = rng.normal(size=4) + 1j * rng.normal(size=4)
            fd = _fd_wirtinger(lambda v: evaluate_U(spec, v), z)
            assert np.max(np.abs(fd - evaluate_F(spec, z))) < 1e-6 * max(1, np.max(np.abs(fd)))


def test_F_vectorised():
    z = np.random.default_rng(1).normal(size=(7, 3, 4)) + 0j
    out = evaluate_F(SEXTIC, z)
    assert out.shape == z.shape
    assert np.allclose(out[2, 1], evaluate_F(SEXTIC, z[2, 1]))
    assert evaluate_U(SEXTIC, z).shape == (7, 3)


def test_spec_validation():
    with pytest.raises(ValueError):
        PotentialSpec.from_terms([(1, 2, 1.0)])          # components 2..4 unbounded
    with pytest.raises(ValueError):
        PotentialSpec.from_terms([(j, 2, -1.0) for j in range(1, 5)])
    with pytest.raises(ValueError):
        PotentialSpec.from_terms([(j, 1, 0.5) for j in range(1, 5)], b=1.0)   # 0.5 s < b s
    with pytest.raises(ValueError):
        PotentialSpec.from_terms([(5, 1, 1.0)])
    assert np.array_equal(PotentialSpec.from_terms(DEFAULT.terms()).coefficients, DEFAULT.coefficients)


def test_lambda_threshold_examples():
    assert lambda_threshold(1.0 - 0.5, 0.5, 1.0) == 1.0
    assert lambda_threshold(-2.0, 2.0, 3.0) == 0.0
    assert lambda_threshold(3.0, 1.0, 4.0) == 1.0
    with pytest.raises(InvalidEnergyError):
        lambda_threshold(-1.0, 0.5, 1.0)


def test_cutoff_agrees_inside_threshold(rng):
    cut = build_cutoff(DEFAULT, 0.6)
    for _ in range(200):
        z = rng.normal(size=4) + 1j * rng.normal(size=4)
        z *= 0.6 * rng.uniform() / np.max(np.abs(z))
        assert np.array_equal(cut.F(z), evaluate_F(DEFAULT, z))
        assert cut.U(z) == evaluate_U(DEFAULT, z)


def test_quadratic_potential_is_untouched(rng):
    cut = build_cutoff(QUADRATIC, 0.3)
    z = 10 * (rng.normal(size=(50, 4)) + 1j * rng.normal(size=(50, 4)))
    assert np.array_equal(cut.F(z), evaluate_F(QUADRATIC, z))
    assert cut.slope_caps() == (None, None, None, None)


def test_quartic_cutoff_grows_linearly():
    cut = build_cutoff(QUARTIC, 1.0)
    r = np.linspace(2.0, 50.0, 200)
    z = np.zeros((200, 4), dtype=complex)
    z[:, 0] = r * np.exp(0.3j)
    F1 = np.abs(cut.F(z)[:, 0])
    slope = np.diff(F1) / np.diff(r)
    assert np.allclose(slope, slope[0], rtol=1e-12)
    assert slope[0] == pytest.approx(cut.slope_caps()[0])
    # Lipschitz constant from a dense slope scan
    s = np.linspace(0, 6, 60001)
    zz = np.zeros((len(s), 4), dtype=complex)
    zz[:, 0] = s
    scan = np.max(np.abs(np.diff(cut.F(zz)[:, 0])) / np.diff(s))
    assert scan <= cut.lipschitz * (1 + 1e-6)
    assert cut.lipschitz <= scan * 1.001


def test_cutoff_lipschitz_on_random_pairs(rng):
    for spec, lam in ((DEFAULT, 0.6), (QUARTIC, 1.0), (SEXTIC, 1.3)):
        cut = build_cutoff(spec, lam)
        for _ in range(500):
            a = 4 * (rng.normal(size=4) + 1j * rng.normal(size=4))
            b = a + rng.normal(size=4) * rng.uniform(1e-3, 3)
            lhs = np.abs(cut.F(a) - cut.F(b))
            assert np.all(lhs <= cut.lipschitz * np.abs(a - b) * (1 + 1e-9) + 1e-12)


def test_cutoff_coercive_and_c2():
    for spec, lam in ((DEFAULT, 0.6), (QUARTIC, 1.0), (SEXTIC, 1.3)):
        cut = build_cutoff(spec, lam)
        r = np.linspace(0, 30, 30001)
        total = sum(cut.profile(j, r) for j in range(4))
        assert np.all(total >= spec.b * r * r - spec.a - 1e-12)
        for j in range(4):
            for edge in (lam, lam + cut.blend_width):
                for der in range(3):
                    lo, hi = cut.profile(j, np.array([edge - 1e-9, edge + 1e-9]), der)
                    assert abs(hi - lo) < 1e-6


def test_cutoff_path_identity(rng):
    cut = build_cutoff(SEXTIC, 1.0)
    for U, F in ((cut.U, cut.F), (SEXTIC.U, SEXTIC.F)):
        for _ in range(10):
            z0 = 2 * (rng.normal(size=4) + 1j * rng.normal(size=4))
            v = rng.normal(size=4) + 1j * rng.normal(size=4)
            path = lambda t: z0 + t * v + 0.3 * t * t * v.conj()
            h = 1e-6
            dU = (U(path(0.4 + h)) - U(path(0.4 - h))) / (2 * h)
            zdot = v + 0.6 * 0.4 * v.conj()
            want = 2 * np.real(np.sum(np.conj(F(path(0.4))) * zdot))
            assert abs(dU - want) < 1e-6 * max(1.0, abs(want))


def test_cutoff_construction_failure():
    # a tilted octic whose quintic bridge undershoots the coercive parabola
    spec = PotentialSpec.from_terms([(1, 1, -4.4), (1, 2, -1.8), (1, 3, 4.1), (1, 4, 22.2),
                                     (2, 1, 1.0), (3, 1, 1.0), (4, 1, 1.0)], a=1.8, b=1.0)
    with pytest.raises(CutoffConstructionError):
        build_cutoff(spec, 0.377, blend_width=2.09)
    build_cutoff(spec, 0.377, blend_width=0.2)
    with pytest.raises(ValueError):
        build_cutoff(DEFAULT, 0.0)
