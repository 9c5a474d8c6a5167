import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from rosenlab import oracles, simulate, spectrum
from rosenlab.core import BudgetExceeded, DomainError, PathSample, rng_stream


@pytest.mark.parametrize("Hp", [0.8, 0.925])
def test_fgn_autocovariance(Hp):
    gen = simulate.FgnGenerator(Hp, 1024)
    x = np.array([gen.sample(rng_stream(1, i)) for i in range(400)])
    emp = np.array([np.mean(x[:, : 1024 - k] * x[:, k:]) for k in range(6)])
    np.testing.assert_allclose(emp, oracles.fgn_autocovariance(np.arange(6), Hp), atol=0.03)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.76, 0.99), st.integers(1, 2000))
def test_hermite_normalization_exact(Hp, N):
    # brute-force variance of sum (X_j^2 - 1) from the covariance matrix
    if N > 300:
        N = N % 300 + 1
    g = oracles.fgn_autocovariance(np.subtract.outer(np.arange(N), np.arange(N)), Hp)
    var = 2 * np.sum(g ** 2)
    assert simulate.hermite_normalization(Hp, N) == pytest.approx(var ** -0.5, rel=1e-10)


def test_marginal_moments():
    ms = simulate.MarginalSampler.for_hurst(0.7)
    assert ms.variance() == pytest.approx(1.0, abs=1e-12)
    z = simulate.sample_marginal(ms, rng_stream(3, 0), 400_000)
    assert abs(z.mean()) < 0.01
    assert z.var() == pytest.approx(1.0, abs=0.02)
    k3 = oracles.chaos_cumulant(spectrum.unit_spectrum(0.7).eigenvalues, 3)
    assert stats.skew(z) == pytest.approx(k3, rel=0.05)


def test_paths_match_marginal_law(paths07):
    ms = simulate.MarginalSampler.for_hurst(0.7)
    ends = np.array([p.values[-1] for p in simulate.sample_paths(0.7, 256, 2000, seed=5)])
    ref = simulate.sample_marginal(ms, rng_stream(6, 0), 20000)
    d, crit = simulate.ks_two_sample(ends, ref)
    assert d < crit


def test_path_variance_self_similar():
    paths = simulate.sample_paths(0.7, 512, 1500, seed=11, horizon=2.0)
    z = np.array([p.values for p in paths])
    for i in (128, 256, 512):
        t = paths[0].times[i]
        assert z[:, i].var() == pytest.approx(t ** 1.4, rel=0.15)


def test_sample_paths_reproducible_and_thread_invariant():
    a = simulate.sample_paths(0.8, 128, 6, seed=9, threads=1)
    b = simulate.sample_paths(0.8, 128, 6, seed=9, threads=3)
    for p, q in zip(a, b):
        np.testing.assert_array_equal(p.values, q.values)
    assert not np.array_equal(a[0].values, a[1].values)
    assert a[0].values[0] == 0.0 and a[0].n_steps == 128


def test_budget_and_domain():
    with pytest.raises(BudgetExceeded):
        simulate.sample_path(0.7, 2 ** 20, m=16, budget=2 ** 22)
    with pytest.raises(DomainError):
        simulate.sample_path(1.3, 16)


def test_path_file_roundtrip(tmp_path):
    paths = simulate.sample_paths(0.75, 64, 3, seed=4)
    f = simulate.write_paths(paths, tmp_path / "p.bin")
    raw = f.read_bytes()
    assert raw[:8] == b"RLPATH01"
    back = simulate.read_paths(f)
    assert len(back) == 3 and back[0].hurst.h == 0.75 and back[0].seed == 4
    for p, q in zip(paths, back):
        np.testing.assert_array_equal(p.values, q.values)
    (tmp_path / "bad.bin").write_bytes(b"XXXXXXXX" + raw[8:])
    with pytest.raises(DomainError):
        simulate.read_paths(tmp_path / "bad.bin")


def test_window_maxima_by_hand():
    v = np.array([0.0, 1.0, -2.0, 0.5, 0.5, 3.0, 0.0])
    # windows [0..2], [2..4], [4..6] measured from their left ends
    np.testing.assert_allclose(simulate._window_maxima(v, 2), [2.0, 2.5, 2.5])


def test_sup_tail_scaling():
    paths = simulate.sample_paths(0.7, 2 ** 11, 600, seed=77)
    r = simulate.verify_sup_tail(paths, (0.5, 0.25))
    assert np.all(r.slopes < 0) and np.all(r.r2 > 0.9)
    assert r.slope_ratio == pytest.approx(r.expected_ratio, rel=0.25)


def test_sup_tail_needs_events():
    paths = simulate.sample_paths(0.7, 256, 20, seed=1)
    with pytest.raises(simulate.InsufficientTailEvents):
        simulate.verify_sup_tail(paths, (0.5, 0.25), min_events=50)


def test_exp_moment_flags_radius():
    ms = simulate.MarginalSampler.for_hurst(0.7)
    r = simulate.verify_exp_moment(0.7, [0.3, 1.5], n_samples=1 << 18, seed=2, sampler=ms)
    assert r.radius == pytest.approx(1 / (2 * 0.630528), rel=1e-4)
    assert list(r.divergent) == [False, True]


def test_injected_path_is_accepted():
    p = PathSample.injected(np.linspace(0, 1, 11), 0.1)
    assert p.generator == "injected"
