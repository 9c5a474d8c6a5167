import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rosenlab.core import (DomainError, Hurst, LocalTimeEstimate, PathSample, RunManifest,
                           Spectrum, StepProfile, make_rng_streams, read_config, rng_stream)


@pytest.mark.parametrize("h", [0.5, 1.0, 1.2, -0.3, float("nan"), float("inf")])
def test_hurst_rejects_outside_open_interval(h):
    with pytest.raises(DomainError, match=r"H out of \(0.5,1\)"):
        Hurst(h)


@given(st.floats(0.501, 0.999))
def test_hurst_derived_quantities(h):
    H = Hurst(h)
    assert H.alpha() == pytest.approx(h / 2)
    assert 0.75 < H.hurst_prime() < 1
    assert 0 < H.holder_space_limit() < 0.5
    assert Hurst.of(H) is H


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=6))
def test_profile_levels_roundtrip(levels):
    times = tuple(np.arange(1, len(levels) + 1) / len(levels))
    p = StepProfile.from_levels(times, levels)
    np.testing.assert_allclose(p.levels(), levels, atol=1e-12)
    # the multiplier takes level j on the interior of I_j
    mids = [(a + b) / 2 for a, b in p.intervals()]
    np.testing.assert_allclose(p(np.array(mids)), levels, atol=1e-12)


def test_profile_validation():
    with pytest.raises(DomainError):
        StepProfile((0.5, 0.5), (1, 1))
    with pytest.raises(DomainError):
        StepProfile((0.0,), (1,))
    with pytest.raises(DomainError):
        StepProfile((1.0,), (1, 2))
    assert StepProfile((0.25, 1.0), (1, 2)).horizon == 1.0


def test_spectrum_norms_and_scaling():
    s = Spectrum(np.array([0.5, -0.25]), tail_sq=0.01)
    assert s.hs_norm_sq() == pytest.approx(0.25 + 0.0625 + 0.01)
    np.testing.assert_allclose(s.singular_values, [0.5, 0.25])
    t = s.scaled(2.0)
    assert t.hs_norm_sq() == pytest.approx(4 * s.hs_norm_sq())
    with pytest.raises(DomainError):
        Spectrum(np.array([np.nan]))


def test_path_sample_validation():
    p = PathSample.injected([0.0, 1.0, 0.5], 0.5)
    assert p.n_steps == 2 and p.horizon == 1.0
    np.testing.assert_allclose(p.times, [0, 0.5, 1.0])
    with pytest.raises(DomainError):
        PathSample.injected([1.0, 0.0], 0.1)
    with pytest.raises(DomainError):
        PathSample.injected([0.0, 1.0], -0.1)


def test_local_time_estimate_mass():
    e = LocalTimeEstimate((0, 1), 0.5, np.array([0.0, 0.5]), np.array([1.0, 1.0]), "histogram")
    assert e.mass() == pytest.approx(1.0)


def test_rng_streams_reproducible_and_independent():
    a = make_rng_streams(7, 3)
    b = make_rng_streams(7, 3)
    xa = [g.standard_normal(4) for g in a]
    xb = [g.standard_normal(4) for g in b]
    np.testing.assert_array_equal(xa, xb)
    assert not np.allclose(xa[0], xa[1])
    np.testing.assert_array_equal(rng_stream(7, 2).standard_normal(4), xa[2])


def test_manifest_roundtrip(tmp_path):
    m = RunManifest.start(3, {"hurst": 0.7, "grid": np.arange(3)}).finish("ok")
    path = m.write(tmp_path / "m.json")
    back = RunManifest.from_json(path.read_text())
    assert back.seed == 3 and back.params["grid"] == [0, 1, 2]
    assert json.loads(path.read_text())["conventions"]["variance"] == "Var Z_1 = 1"


def test_read_config(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("hurst = 0.8  # comment\n\nseed=5\nthreads = 2\n")
    assert read_config(f) == {"hurst": "0.8", "seed": "5", "threads": "2"}
    f.write_text("no equals sign\n")
    with pytest.raises(DomainError):
        read_config(f)
