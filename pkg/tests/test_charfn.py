import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from rosenlab import charfn, oracles, spectrum
from rosenlab.core import DomainError, Spectrum, StepProfile


@pytest.fixture(scope="module")
def unit07():
    return spectrum.unit_spectrum(0.7)


def test_single_weight_closed_form():
    assert charfn.char_modulus(Spectrum(np.array([0.5])), 1.0) == pytest.approx(2 ** -0.25)
    z = charfn.char_complex(Spectrum(np.array([0.5])), 1.0)
    assert z == pytest.approx(np.exp(-0.5j) / np.sqrt(1 - 1j))


@settings(max_examples=30)
@given(st.lists(st.floats(-1, 1).filter(lambda v: abs(v) > 1e-3), min_size=1, max_size=8),
       st.floats(0, 20))
def test_complex_modulus_consistent(lam, xi):
    s = Spectrum(np.array(lam))
    z = charfn.char_complex(s, xi)
    assert abs(z) == pytest.approx(charfn.char_modulus(s, xi), rel=1e-12)
    direct = np.prod(np.exp(-1j * xi * np.array(lam)) / np.sqrt(1 - 2j * xi * np.array(lam)))
    assert z == pytest.approx(direct, rel=1e-10, abs=1e-300)


def test_modulus_is_even_and_decreasing(unit07):
    xi = np.linspace(0, 10, 41)
    m = charfn.char_modulus(unit07, xi)
    assert m[0] == 1.0
    assert np.all(np.diff(m) < 0)
    np.testing.assert_allclose(charfn.char_modulus(unit07, -xi), m)


def test_small_xi_matches_variance(unit07):
    # |phi(xi)| = 1 - xi^2 Var/2 + O(xi^4) with Var Z_1 = 1
    xi = 1e-3
    assert (1 - charfn.char_modulus(unit07, xi)) / xi ** 2 == pytest.approx(0.5, rel=1e-5)


def test_third_cumulant_from_phase(unit07):
    # arg phi(xi) = -kappa_3 xi^3 / 6 + O(xi^5)
    xi = 1e-2
    ph = np.angle(charfn.char_complex(unit07, xi))
    k3 = oracles.chaos_cumulant(unit07.eigenvalues, 3)
    assert -6 * ph / xi ** 3 == pytest.approx(k3, rel=1e-3)


def test_tail_model_against_longer_spectrum():
    # 100 kept weights plus the tail model against 400 kept weights plus the tail model
    short = spectrum.rosenblatt_spectrum(StepProfile((1.0,), (1.0,)), 0.6, 800, keep=100)
    long_ = spectrum.rosenblatt_spectrum(StepProfile((1.0,), (1.0,)), 0.6, 800, keep=400)
    xi = np.array([1.0, 3.0, 10.0, 30.0])
    a, b = charfn.log_char_modulus(short, xi), charfn.log_char_modulus(long_, xi)
    np.testing.assert_allclose(a, b, rtol=2e-3)
    bare = Spectrum(short.eigenvalues)
    # ignoring the tail is visibly worse
    assert np.max(np.abs(charfn.log_char_modulus(bare, xi) / b - 1)) > 10 * np.max(np.abs(a / b - 1))


def test_tail_integral_against_direct_sum():
    # power-law tail: the closed form equals the sum up to the midpoint-rule error
    K, p, b = 100, 1.4, 50.0
    N = 10 ** 7
    k = np.arange(K + 1, N, dtype=float)
    # beyond N, log(1 + b k^-p) = b k^-p to high accuracy
    direct = np.sum(np.log1p(b * k ** -p)) + b * (N - 0.5) ** (1 - p) / (p - 1)
    closed = float(charfn._tail_log_integral(np.array(b), K + 0.5, p))
    assert closed == pytest.approx(direct, rel=2e-3)


def test_marginal_spectrum_scaling(unit07):
    sp = charfn.marginal_spectrum(unit07, 2.0, -1.5)
    np.testing.assert_allclose(sp.eigenvalues, -1.5 * 2 ** 0.7 * unit07.eigenvalues)
    assert sp.tail_sq == pytest.approx(unit07.tail_sq * (1.5 * 2 ** 0.7) ** 2)
    with pytest.raises(DomainError):
        charfn.marginal_spectrum(unit07, 0.0)


def test_g_function_values_and_bound():
    g = charfn.GFunction(0.7)
    assert g(0.0) == 1.0
    vals = g(np.array([0.5, 1.0, 2.0, 8.0]))
    assert np.all(np.diff(vals) < 0) and vals[-1] > 0
    with pytest.raises(DomainError):
        g(-1.0)
    r = charfn.verify_gamma_bound(g)
    assert np.all(np.isfinite(r.integrals)) and r.spread < 2.0
    # G(s) <= exp(-c s^{1/H}): the envelope of log G / s^{1/H} is negative and flat
    assert r.envelope[1] < 0 and r.envelope[0] / r.envelope[1] < 1.1


def test_fourier_integral_one_time_by_direct_quadrature(unit07):
    H = 0.7
    U = 1.0
    val = charfn.fourier_integral_one_time(unit07, U)

    def inner(t):
        f = lambda x: charfn.char_modulus(unit07, x * t ** H)
        return 2 * sum(integrate.quad(f, a, b, limit=200)[0]
                       for a, b in ((0, 5), (5, 50), (50, np.inf)))

    direct = integrate.quad(inner, 0, U, limit=100, epsrel=1e-6)[0]
    assert val == pytest.approx(direct, rel=1e-4)


@pytest.mark.parametrize("eta", [0.0, 0.15])
def test_fourier_bound_scaling_one_time(unit07, eta):
    H = 0.7
    a = charfn.fourier_integral_one_time(unit07, 1.0, eta, rtol=1e-5)
    b = charfn.fourier_integral_one_time(unit07, 2.0, eta, rtol=1e-5)
    assert math.log2(b / a) == pytest.approx(1 - H * (1 + eta), abs=1e-6)


def test_fourier_bound_two_times_scaling():
    a = charfn.fourier_integral_two_times(0.7, 1.0, n_rho=6, n_theta=12, n_nodes=200)
    b = charfn.fourier_integral_two_times(0.7, 2.0, n_rho=6, n_theta=12, n_nodes=200)
    assert math.isfinite(a) and a > 0
    assert math.log2(b / a) == pytest.approx(2 * (1 - 0.7), abs=1e-6)


def test_fourier_bound_rejects_eta():
    with pytest.raises(DomainError):
        charfn.verify_fourier_bound(0.7, 1, eta=0.3)
    with pytest.raises(DomainError):
        charfn.verify_fourier_bound(0.7, 3)
