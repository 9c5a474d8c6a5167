"""Rosenblatt marginals and sample paths.

Marginals come from the chi-square expansion Z_1 = sum lambda_k (X_k^2 - 1).
Paths are Hermite-rank-2 partial sums of fractional Gaussian noise with
Hurst index H' = (H+1)/2, which converge to the Rosenblatt process; the
noise is generated exactly by circulant embedding.
"""
from __future__ import annotations

import functools
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from .core import (BudgetExceeded, DomainError, Hurst, PathSample, RosenlabError, Spectrum,
                   rng_stream)
from .oracles import fgn_autocovariance
from .spectrum import unit_spectrum

__all__ = [
    "EmbeddingError", "InsufficientTailEvents", "FgnGenerator", "MarginalSampler",
    "sample_marginal", "hermite_normalization", "sample_path", "sample_paths",
    "write_paths", "read_paths", "SupTailReport", "verify_sup_tail",
    "ExpMomentReport", "verify_exp_moment", "ks_two_sample", "DEFAULT_STEP_BUDGET",
]

DEFAULT_STEP_BUDGET = 2 ** 22
PATH_MAGIC = b"RLPATH01"
_HEADER = struct.Struct("<8sddQQ")


class EmbeddingError(RosenlabError):
    code = "embedding"


class InsufficientTailEvents(RosenlabError):
    code = "tail-events"


# ------------------------------------------------------------------ noise

@dataclass(frozen=True)
class FgnGenerator:
    """Exact fGn of length ``n`` by circulant embedding (Davies-Harte).

    The autocovariance is embedded in a circulant of size 2n whose
    eigenvalues are computed once; each draw costs one complex FFT.  For
    H' > 1/2 the embedding is nonnegative definite, and tiny negative
    eigenvalues from rounding are clipped.
    """

    hurst_prime: float
    n: int
    eigenvalues: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.5 < self.hurst_prime < 1.0:
            raise DomainError("H' must lie in (1/2, 1)")
        if self.n < 1:
            raise DomainError("n must be positive")
        g = fgn_autocovariance(np.arange(self.n + 1), self.hurst_prime)
        row = np.concatenate([g, g[-2:0:-1]])
        ev = np.fft.rfft(row).real
        lo, hi = ev.min(), ev.max()
        if lo < -1e-10 * hi:
            raise EmbeddingError(f"negative circulant eigenvalue {lo:.3e}")
        ev = np.clip(ev, 0.0, None)
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        amp = np.sqrt(np.concatenate([ev, ev[-2:0:-1]]) / (2 * self.n))
        amp.setflags(write=False)
        object.__setattr__(self, "_amp", amp)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        m = 2 * self.n
        w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        # real part of the FFT of sqrt(lam/m) * w has covariance exactly the embedded one
        return np.fft.fft(self._amp * w)[: self.n].real


# -------------------------------------------------------------- marginals

@dataclass(frozen=True)
class MarginalSampler:
    """Sampler of Z_1 truncated at K weights with a Gaussian remainder."""

    spectrum: Spectrum
    K: int = 100

    def __post_init__(self):
        K = min(int(self.K), len(self.spectrum))
        object.__setattr__(self, "K", K)

    @classmethod
    def for_hurst(cls, hurst, K: int = 100, n_nodes: int = 800) -> "MarginalSampler":
        return cls(unit_spectrum(hurst, n_nodes), K)

    @property
    def weights(self) -> np.ndarray:
        return self.spectrum.eigenvalues[: self.K]

    @property
    def tail_variance(self) -> float:
        """sum_{k > K} lambda_k^2 from the exact Hilbert-Schmidt remainder."""
        dropped = self.spectrum.eigenvalues[self.K:]
        return float(self.spectrum.tail_sq + np.sum(dropped ** 2))

    def variance(self) -> float:
        return 2.0 * (float(np.sum(self.weights ** 2)) + self.tail_variance)


def sample_marginal(ms: MarginalSampler, rng: np.random.Generator, count: int,
                    chunk: int = 1 << 16) -> np.ndarray:
    """sum_{k<=K} lambda_k (X_k^2 - 1) + sqrt(2 v_tail) N, ``count`` draws."""
    if count < 1:
        raise DomainError("count must be >= 1")
    lam = ms.weights
    sd_tail = math.sqrt(2.0 * ms.tail_variance)
    out = np.empty(count)
    for a in range(0, count, chunk):
        b = min(a + chunk, count)
        X = rng.standard_normal((b - a, lam.size))
        out[a:b] = (X * X - 1.0) @ lam + sd_tail * rng.standard_normal(b - a)
    return out


# ------------------------------------------------------------------ paths

@functools.lru_cache(maxsize=64)
def hermite_normalization(hurst_prime: float, N: int) -> float:
    """1 / sd of sum_{j<=N} (X_j^2 - 1) for unit-variance fGn X.

    Var = 2 sum_{i,j} gamma(i-j)^2 = 2 [N gamma_0^2 + 2 sum_{k<N} (N-k) gamma_k^2],
    evaluated exactly, so Var Z_T = T^{2H} holds at every finite N.
    """
    k = np.arange(1, N)
    g = fgn_autocovariance(k, hurst_prime)
    var = 2.0 * (N + 2.0 * float(np.sum((N - k) * g * g)))
    return 1.0 / math.sqrt(var)


def _path_from_noise(x: np.ndarray, n_steps: int, m: int, scale: float) -> np.ndarray:
    s = np.cumsum(x * x - 1.0)[m - 1 :: m]
    out = np.empty(n_steps + 1)
    out[0] = 0.0
    out[1:] = scale * s
    return out


def sample_path(hurst, n_steps: int, horizon: float = 1.0, rng=None, m: int = 16,
                budget: int = DEFAULT_STEP_BUDGET, seed: int = 0,
                generator: FgnGenerator | None = None) -> PathSample:
    """One Rosenblatt path on t_i = i T / n_steps from n_steps * m fine noise steps.

    ``rng`` defaults to stream 0 of ``seed``; ``generator`` lets callers
    share the circulant table across paths.
    """
    hurst = Hurst.of(hurst)
    if n_steps < 1 or m < 1 or not horizon > 0:
        raise DomainError("n_steps, m and horizon must be positive")
    N = n_steps * m
    if N > budget:
        raise BudgetExceeded(f"{N} fine steps exceed budget {budget}")
    gen = generator or FgnGenerator(hurst.hurst_prime(), N)
    if gen.n != N:
        raise DomainError("generator size does not match n_steps * m")
    rng = rng if rng is not None else rng_stream(seed, 0)
    scale = horizon ** hurst.h * hermite_normalization(gen.hurst_prime, N)
    vals = _path_from_noise(gen.sample(rng), n_steps, m, scale)
    return PathSample(dt=horizon / n_steps, values=vals, hurst=hurst, seed=int(seed))


def sample_paths(hurst, n_steps: int, n_paths: int, seed: int, horizon: float = 1.0,
                 m: int = 16, threads: int = 1, budget: int = DEFAULT_STEP_BUDGET) -> list:
    """``n_paths`` independent paths; path i uses RNG stream i of ``seed``.

    Output is identical for any thread count.
    """
    hurst = Hurst.of(hurst)
    N = n_steps * m
    if N > budget:
        raise BudgetExceeded(f"{N} fine steps exceed budget {budget}")
    gen = FgnGenerator(hurst.hurst_prime(), N)

    def one(i):
        return sample_path(hurst, n_steps, horizon, rng_stream(seed, i), m, budget, seed, gen)

    if threads <= 1:
        return [one(i) for i in range(n_paths)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, range(n_paths)))


def write_paths(paths: Sequence[PathSample], target) -> Path:
    """Binary file: header (magic, H, dt, n_steps, seed) then one float64 array per path."""
    if not paths:
        raise DomainError("no paths to write")
    p0 = paths[0]
    for p in paths:
        if p.n_steps != p0.n_steps or p.dt != p0.dt:
            raise DomainError("paths must share the grid")
    target = Path(target)
    with open(target, "wb") as fh:
        fh.write(_HEADER.pack(PATH_MAGIC, p0.hurst.h, p0.dt, p0.n_steps, p0.seed))
        for p in paths:
            fh.write(np.asarray(p.values, "<f8").tobytes())
    return target


def read_paths(source) -> list:
    raw = Path(source).read_bytes()
    if len(raw) < _HEADER.size:
        raise DomainError("truncated path file")
    magic, H, dt, n_steps, seed = _HEADER.unpack_from(raw)
    if magic != PATH_MAGIC:
        raise DomainError("not a path file")
    data = np.frombuffer(raw, "<f8", offset=_HEADER.size)
    if data.size % (n_steps + 1):
        raise DomainError("path file size does not match header")
    rows = data.reshape(-1, n_steps + 1)
    return [PathSample(dt=dt, values=r.copy(), hurst=Hurst(H), seed=seed) for r in rows]


# ---------------------------------------------------------- tail checks

def _window_maxima(values: np.ndarray, w: int) -> np.ndarray:
    """sup over disjoint windows [s, s+h] of |Z_t - Z_s|, h = w grid steps."""
    n = (values.size - 1) // w
    out = np.empty(n)
    for i in range(n):
        seg = values[i * w : (i + 1) * w + 1]
        out[i] = np.max(np.abs(seg - seg[0]))
    return out


@dataclass
class SupTailReport:
    h: np.ndarray
    u: list                 # per-h level grids
    prob: list              # per-h exceedance probabilities
    slopes: np.ndarray      # d log P / d u per h
    r2: np.ndarray
    slope_ratio: float      # slope(h/2) / slope(h); 2^H for the exponential shape
    expected_ratio: float
    n_windows: np.ndarray


def _tail_fit(m: np.ndarray, p_lo: float, p_hi: float = 0.3):
    """Fit log P(M >= u) linearly for u between the (1-p_hi) and (1-p_lo) quantiles."""
    u = np.quantile(m, np.linspace(1 - p_hi, 1 - p_lo, 12))
    p = np.array([(m >= v).mean() for v in u])
    y = np.log(p)
    A = np.vstack([u, np.ones_like(u)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r2 = 1.0 - np.sum((y - A @ coef) ** 2) / np.sum((y - y.mean()) ** 2)
    return u, p, float(coef[0]), float(r2)


def verify_sup_tail(paths: Sequence[PathSample], h: Sequence[float] = (0.5, 0.25),
                    min_events: int = 50) -> SupTailReport:
    """Exceedance probabilities of sup_{t in [s, s+h]} |Z_t - Z_s| over disjoint windows.

    By stationarity of increments every window gives a draw of the same
    law; self-similarity predicts the slope in u to scale like h^{-H}.
    log P is fitted on the same probability range for every h, set by the
    smallest sample and ``min_events`` exceedances.
    """
    H = paths[0].hurst.h
    dt = paths[0].dt
    hs = np.asarray(h, float)
    if np.any(hs < 10 * dt):
        raise DomainError("h must be at least 10 dt")
    maxima = [np.concatenate([_window_maxima(p.values, int(round(hh / dt))) for p in paths])
              for hh in hs]
    counts = [m.size for m in maxima]
    # a common probability range keeps the fits comparable across h
    p_hi = 0.3
    p_lo = min_events / min(counts)
    if p_lo >= p_hi / 2:
        raise InsufficientTailEvents(f"{min(counts)} windows leave fewer than {min_events} tail events")
    us, ps, slopes, r2s = [], [], [], []
    for m in maxima:
        u, p, sl, r2 = _tail_fit(m, p_lo, p_hi)
        us.append(u); ps.append(p); slopes.append(sl); r2s.append(r2)
    slopes = np.array(slopes)
    ratio = float(slopes[1] / slopes[0]) if slopes.size > 1 else math.nan
    hr = hs[0] / hs[1] if hs.size > 1 else math.nan
    return SupTailReport(hs, us, ps, slopes, np.array(r2s), ratio, float(hr ** H),
                         np.array(counts))


@dataclass
class ExpMomentReport:
    etas: np.ndarray
    radius: float                   # 1 / (2 lambda_1)
    sizes: np.ndarray               # sample sizes of the doubling sequence
    estimates: np.ndarray           # shape (len(etas), len(sizes))
    growth: np.ndarray              # log-log slope of estimate against sample size
    last_change: np.ndarray         # relative change over the last doubling
    divergent: np.ndarray


def verify_exp_moment(hurst, etas: Sequence[float], n_samples: int = 1 << 20, seed: int = 0,
                      n_doublings: int = 6, n_reps: int = 4, growth_tol: float = 0.015,
                      sampler: MarginalSampler | None = None) -> ExpMomentReport:
    """Prefix means of exp(eta |Z_1|) over a doubling sequence of sample sizes.

    The mgf of lambda_1 X^2 ends at eta = 1/(2 lambda_1).  Below that radius
    prefix means settle; beyond it the sample mean is dominated by the
    largest draws and keeps growing with the sample size.  The growth rate
    is the log-log slope of the prefix means against the sample size,
    taken as the median over ``n_reps`` independent streams, and flagged as
    divergence above ``growth_tol``.  Reported estimates are from stream 0.
    """
    ms = sampler or MarginalSampler.for_hurst(hurst)
    lam1 = float(np.max(np.abs(ms.weights)))
    sizes = n_samples >> np.arange(n_doublings)[::-1]
    etas = np.asarray(etas, float)
    est = np.empty((n_reps, etas.size, sizes.size))
    for r in range(n_reps):
        z = np.abs(sample_marginal(ms, rng_stream(seed, r), n_samples))
        for i, eta in enumerate(etas):
            c = np.cumsum(np.exp(eta * z))
            est[r, i] = c[sizes - 1] / sizes
    ls = np.log(sizes)
    growth = np.median([[np.polyfit(ls, np.log(e), 1)[0] for e in rep] for rep in est], axis=0)
    last = np.abs(est[0, :, -1] / est[0, :, -2] - 1)
    return ExpMomentReport(etas, 1.0 / (2 * lam1), sizes, est[0], growth, last,
                           growth > growth_tol)


def ks_two_sample(a: np.ndarray, b: np.ndarray):
    """Two-sample Kolmogorov-Smirnov statistic and its 1% critical value."""
    res = stats.ks_2samp(a, b)
    n, m = a.size, b.size
    crit = 1.628 * math.sqrt((n + m) / (n * m))
    return float(res.statistic), crit
