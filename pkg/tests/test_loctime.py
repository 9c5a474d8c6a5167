import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rosenlab import loctime
from rosenlab.core import DomainError, PathSample


def linear_path(n=20000):
    return PathSample.injected(np.linspace(0.0, 1.0, n + 1), 1.0 / n)


def test_histogram_of_linear_path_is_flat():
    est = loctime.local_time_histogram(linear_path(), (0, 1), 0.01)
    inner = est.density[2:-2]
    # grid points on bin edges may fall either side: one sample is dt / w = 0.005
    np.testing.assert_allclose(inner, 1.0, atol=0.0051)
    assert est.mass() == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.002, 0.05), st.floats(0.0, 0.45), st.floats(0.5, 1.0))
def test_histogram_mass_is_occupation_time(seed, w, a, b):
    rng = np.random.default_rng(seed)
    v = np.concatenate([[0.0], np.cumsum(rng.standard_normal(1000)) * 0.03])
    p = PathSample.injected(v, 1e-3)
    est = loctime.local_time_histogram(p, (a, b), w)
    lo, hi = est.interval
    assert est.mass() + est.clipped_mass == pytest.approx(hi - lo, abs=1e-9)


def test_fourier_agrees_with_histogram(paths07):
    diffs = []
    for p in paths07[:10]:
        h = loctime.local_time_histogram(p, (0, 1), 0.01)
        f = loctime.local_time_fourier(p, (0, 1), 0.01, x_range=(h.x_grid[0], h.x_grid[-1]))
        diffs.append(loctime.l2_relative_difference(h, f))
        assert f.mass() == pytest.approx(1.0, abs=0.01)
    assert max(diffs) < 0.05


def test_fourier_linear_path():
    p = linear_path()
    h = loctime.local_time_histogram(p, (0, 1), 0.01)
    f = loctime.local_time_fourier(p, (0, 1), 0.01, cutoff=200.0, x_range=(h.x_grid[0], h.x_grid[-1]))
    assert loctime.l2_relative_difference(h, f) < 0.05


def test_fourier_errors():
    p = linear_path(1000)
    with pytest.raises(DomainError):
        loctime.local_time_fourier(p, (0, 1), 0.0)
    with pytest.raises(DomainError):
        loctime.local_time_histogram(p, (0.5, 0.5), 0.01)
    with pytest.raises(loctime.EmptyInterval):
        loctime.local_time_histogram(p, (0.5, 0.5005), 0.01)


def test_moment_scaling(paths07):
    for n in (1, 2):
        r = loctime.verify_moment_scaling(paths07, n)
        assert r.slope == pytest.approx(n * (1 - 0.7), abs=0.1)


def test_space_holder(paths07):
    r = loctime.verify_space_holder(paths07, 0.15)
    assert r.passed
    assert r.slope > 0.15 - 0.1


def test_limsup_bounded(paths07):
    r = loctime.limsup_diagnostic(paths07, r=2.0 ** -np.arange(3, 9))
    assert r.bounded
    assert np.all(np.isfinite(r.ratios))
    assert np.all(np.diff(r.running_max) >= 0)


def test_irregularity_positive_and_negative_control(paths07):
    r = loctime.irregularity_diagnostic(paths07[:40])
    assert r.passed
    lin = loctime.irregularity_diagnostic([linear_path(2 ** 13)])
    assert not lin.passed
    assert lin.trend == pytest.approx(0.3, abs=0.02)
