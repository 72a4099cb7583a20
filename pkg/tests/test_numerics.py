import math

import numpy as np
import pytest
from scipy.linalg import expm

from vibnet.errors import NonFinite
from vibnet.netcore import NetworkSystem, Permutation, permute
from vibnet.numerics import (
    charpoly_coefficients,
    charpoly_spectrum,
    integrate_ltv,
    spectral_abscissa,
)

from conftest import random_system


def test_diagonal_abscissa():
    s = spectral_abscissa(np.diag([-1.0, -2.0]))
    assert s.abscissa == pytest.approx(-1.0, abs=1e-12)
    assert len(s.eigenvalues) == 2


def test_example1_unstable(example1):
    qr = spectral_abscissa(example1.a)
    cp = charpoly_spectrum(example1.a)
    assert qr.abscissa > 0
    assert qr.abscissa == pytest.approx(cp.abscissa, abs=1e-9)
    assert qr.abscissa == pytest.approx(0.5687276354506723, abs=1e-9)


def test_example1_stabilized_target(example1):
    a_bar = example1.a.copy()
    a_bar[3, 0] = 7.0
    qr = spectral_abscissa(a_bar)
    assert qr.abscissa < 0
    assert qr.abscissa == pytest.approx(charpoly_spectrum(a_bar).abscissa, abs=1e-9)


def test_charpoly_coefficients_match_numpy():
    rng = np.random.default_rng(2)
    for _ in range(10):
        m = rng.normal(size=(4, 4))
        ours = charpoly_coefficients(m)
        ref = np.poly(m)
        assert np.allclose(ours, ref, atol=1e-9)


def test_charpoly_cross_check_random_4x4():
    rng = np.random.default_rng(4)
    for _ in range(15):
        m = rng.normal(size=(4, 4))
        qr = spectral_abscissa(m)
        cp = charpoly_spectrum(m)
        assert qr.abscissa == pytest.approx(cp.abscissa, abs=1e-8)


def test_triangular_eigenvalues_exact():
    rng = np.random.default_rng(8)
    m = np.tril(rng.normal(size=(6, 6)))
    s = spectral_abscissa(m)
    assert sorted(s.eigenvalues.real) == pytest.approx(sorted(np.diag(m)), abs=1e-12)
    assert not s.eigenvalues.imag.any()


def test_permutation_similarity_spectrum():
    rng = np.random.default_rng(13)
    net = random_system(rng, 6, density=0.5, diag=(-1.0, 1.0))
    p = Permutation((3, 1, 6, 2, 5, 4))
    s1 = spectral_abscissa(net.a)
    s2 = spectral_abscissa(permute(net, p).a)
    assert np.allclose(s1.eigenvalues, s2.eigenvalues, atol=1e-9)


def test_integrate_ltv_scalar_decay():
    f = lambda t: np.array([[-1.0]])
    times, states = integrate_ltv(f, [1.0], (0.0, 1.0), 1e-3)
    assert states[-1, 0] == pytest.approx(math.exp(-1.0), abs=1e-6)
    assert times[-1] == pytest.approx(1.0)


def test_integrate_ltv_matches_expm(example1):
    f = lambda t: example1.a
    _, states = integrate_ltv(f, np.ones(4), (0.0, 2.0), 1e-3)
    ref = expm(2.0 * example1.a) @ np.ones(4)
    assert np.allclose(states[-1], ref, atol=1e-6)


def test_integrate_ltv_periodic_bounded():
    # auxiliary flow of a zero-mean dither stays bounded
    u = np.zeros((3, 3))
    u[1, 0] = 2.0
    f = lambda t: u * math.sin(t)
    x0 = np.array([1.0, 0.0, 0.0])
    _, states = integrate_ltv(f, x0, (0.0, 200.0), 2 * math.pi / 1000)
    assert np.abs(states).max() <= 4.0 + 1e-6  # sup of 2(1 - cos t)


def test_integrate_ltv_blowup_reports_time():
    f = lambda t: np.array([[200.0]])
    with pytest.raises(NonFinite) as err:
        integrate_ltv(f, [1e300], (0.0, 10.0), 1e-2)
    assert err.value.time is not None


def test_rk4_order():
    f = lambda t: np.array([[-1.0]])
    errs = []
    for h in (1e-2, 5e-3):
        _, states = integrate_ltv(f, [1.0], (0.0, 1.0), h)
        errs.append(abs(states[-1, 0] - math.exp(-1.0)))
    assert errs[0] / errs[1] > 12.0  # close to the nominal 16x of order 4
