import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rosenlab import oracles, spectrum
from rosenlab.core import DomainError, Hurst, StepProfile

UNIT = StepProfile((1.0,), (1.0,))


@pytest.mark.parametrize("alpha", [0.3, 0.35, 0.45])
def test_riesz_spectrum_matches_gegenbauer_oracle(alpha):
    ours = spectrum.riesz_spectrum(alpha, (0, 1), 400).eigenvalues[:8]
    ref = oracles.gegenbauer_riesz_spectrum(alpha, (0, 1), 400)[:8]
    np.testing.assert_allclose(ours, ref, rtol=2e-6)


@pytest.mark.parametrize("alpha", [0.3, 0.45])
def test_riesz_decay_exponent(alpha):
    slope, err = spectrum.fit_decay_exponent(spectrum.riesz_spectrum(alpha, (0, 1), 800), 10, 50)
    assert abs(slope + alpha) < 0.02
    assert err < 0.01


@settings(max_examples=8, deadline=None)
@given(st.floats(0.2, 0.45), st.floats(0.1, 4.0))
def test_riesz_interval_scaling(alpha, c):
    a = spectrum.riesz_spectrum(alpha, (0, 1), 200).eigenvalues
    b = spectrum.riesz_spectrum(alpha, (3.0, 3.0 + c), 200).eigenvalues
    np.testing.assert_allclose(b, a * c ** alpha, rtol=1e-10)


def test_unit_spectrum_normalization():
    u = spectrum.unit_spectrum(0.7)
    assert 2 * u.hs_norm_sq() == pytest.approx(1.0, abs=1e-12)
    assert u.eigenvalues[0] == pytest.approx(0.630528, abs=2e-6)
    assert u.meta["alpha"] == pytest.approx(0.7)
    assert np.all(np.diff(u.singular_values) <= 1e-15)


@pytest.mark.parametrize("H", [0.6, 0.85])
def test_unit_spectrum_variance_one(H):
    u = spectrum.unit_spectrum(H)
    assert 2 * u.hs_norm_sq() == pytest.approx(1.0, abs=1e-10)
    assert u.tail_sq > 0


def test_unit_spectrum_disk_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("ROSENLAB_CACHE_DIR", str(tmp_path))
    spectrum._unit_spectrum.cache_clear()
    a = spectrum.unit_spectrum(0.65, n_nodes=200)
    files = list(tmp_path.iterdir())
    assert len(files) == 1 and files[0].read_bytes()[:8] == b"RLSPEC01"
    spectrum._unit_spectrum.cache_clear()
    b = spectrum.unit_spectrum(0.65, n_nodes=200)
    np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)
    spectrum._unit_spectrum.cache_clear()


@settings(max_examples=6, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(-3, 3).filter(lambda x: abs(x) > 0.05))
def test_rosenblatt_self_similarity(t, xi):
    # weights of xi Z_t are xi t^H times those of Z_1
    H = 0.7
    a = spectrum.rosenblatt_spectrum(StepProfile((t,), (xi,)), H, 200).eigenvalues
    b = spectrum.rosenblatt_spectrum(UNIT, H, 200).eigenvalues
    np.testing.assert_allclose(np.sort(a), np.sort(xi * t ** H * b), rtol=1e-9, atol=1e-14)


def test_time_and_spectral_domain_agree_unit():
    sd = spectrum.eig_spectral_domain(spectrum.SpectralDomainOperator(Hurst(0.7), UNIT))
    td = spectrum.unit_spectrum(0.7)
    np.testing.assert_allclose(sd.eigenvalues[:6], td.eigenvalues[:6], rtol=1e-4)


def test_time_and_spectral_domain_agree_two_steps():
    p = StepProfile((0.5, 1.0), (1.0, -0.5))
    td = np.sort(spectrum.rosenblatt_spectrum(p, 0.7, 400).eigenvalues)
    sd = np.sort(spectrum.eig_spectral_domain(spectrum.SpectralDomainOperator(Hurst(0.7), p)).eigenvalues)
    np.testing.assert_allclose(td[:3], sd[:3], rtol=1e-4)
    np.testing.assert_allclose(td[-3:], sd[-3:], rtol=1e-4)


def test_variance_of_linear_combination():
    # Var(Z_s - c Z_1) from the covariance (1 + s^{2H} - |1-s|^{2H}) / 2
    H, s, c = 0.7, 0.5, 0.5
    sp = spectrum.rosenblatt_spectrum(StepProfile((s, 1.0), (1.0, -c)), H, 400)
    cov = 0.5 * (1 + s ** (2 * H) - (1 - s) ** (2 * H))
    var = s ** (2 * H) + c ** 2 - 2 * c * cov
    assert 2 * sp.hs_norm_sq() == pytest.approx(var, rel=1e-10)


def test_lower_bound_and_localization():
    p = StepProfile((0.5, 1.0), (1.0, -0.5))
    lb = spectrum.verify_lower_bound(p, 0.7, n_nodes=400)
    assert lb.min_ratio > 0.2
    assert lb.ratios.shape == (30,)
    loc = spectrum.verify_localization(p, 0.7, n_nodes=400)
    assert np.isfinite(loc.sup_ratio) and loc.sup_ratio < 5


def test_errors():
    with pytest.raises(DomainError):
        spectrum.eig_time_domain(UNIT, 0.6)
    with pytest.raises(DomainError):
        spectrum.verify_lower_bound(StepProfile((2.0,), (1.0,)), 0.7)
    with pytest.raises(spectrum.InsufficientSpectrum):
        spectrum.fit_decay_exponent(np.ones(10), 2, 20)
