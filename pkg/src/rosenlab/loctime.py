"""Occupation densities of sampled paths and scaling diagnostics for them.

Two estimators share one grid convention: bin i is centred at x_i = i w
and covers [x_i - w/2, x_i + w/2).  Time is discretized by the left-point
rule, grid point t_k standing for [t_k, t_k + dt), so the mass over an
interval [a, b] with grid endpoints is exactly b - a and the estimate is
additive in the interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import signal, special

from .core import DomainError, Hurst, LocalTimeEstimate, PathSample, RosenlabError

__all__ = [
    "EmptyInterval", "CutoffTooLow", "InsufficientOccupation", "ResolutionError",
    "local_time_histogram", "local_time_fourier", "l2_relative_difference",
    "MomentScalingReport", "verify_moment_scaling", "SpaceHolderReport", "verify_space_holder",
    "LimsupReport", "limsup_diagnostic", "IrregularityReport", "irregularity_diagnostic",
]


class EmptyInterval(RosenlabError):
    code = "empty-interval"


class CutoffTooLow(RosenlabError):
    code = "cutoff"


class InsufficientOccupation(RosenlabError):
    code = "occupation"


class ResolutionError(RosenlabError):
    code = "resolution"


def _index_range(path: PathSample, interval):
    a, b = map(float, interval)
    if not (0.0 <= a < b <= path.horizon + 1e-12 * path.horizon):
        raise DomainError("interval must lie inside the path horizon")
    i0 = int(math.ceil(a / path.dt - 1e-9))
    i1 = int(math.ceil(b / path.dt - 1e-9))
    if i1 - i0 < 2:
        raise EmptyInterval("fewer than 2 grid points in the interval")
    return i0, i1


def _bins(z: np.ndarray, w: float) -> np.ndarray:
    return np.floor(z / w + 0.5).astype(np.int64)


def local_time_histogram(path: PathSample, interval, bin_width: float,
                         x_range=None) -> LocalTimeEstimate:
    """Binned occupation density of ``path`` over ``interval``.

    density[i] = dt * #{t_k in [a, b): Z_{t_k} in bin i} / w.  ``x_range``
    fixes the grid (as bin-centre bounds) so that estimates over different
    intervals can be compared cell by cell.
    """
    if not bin_width > 0:
        raise DomainError("bin width must be positive")
    i0, i1 = _index_range(path, interval)
    z = path.values[i0:i1]
    idx = _bins(z, bin_width)
    lo, hi = (int(idx.min()), int(idx.max())) if x_range is None else (
        int(math.floor(x_range[0] / bin_width + 0.5)), int(math.floor(x_range[1] / bin_width + 0.5)))
    inside = (idx >= lo) & (idx <= hi)
    counts = np.bincount(idx[inside] - lo, minlength=hi - lo + 1)
    dens = counts * (path.dt / bin_width)
    return LocalTimeEstimate(interval=(i0 * path.dt, i1 * path.dt), bin_width=bin_width,
                             x_grid=np.arange(lo, hi + 1) * bin_width, density=dens,
                             method="histogram",
                             clipped_mass=float((~inside).sum() * path.dt))


def local_time_fourier(path: PathSample, interval, bin_width: float, cutoff: float | None = None,
                       x_range=None, oversample: int = 16,
                       max_clipped: float = 0.05) -> LocalTimeEstimate:
    """Inverse Fourier transform of the occupation measure, truncated at |xi| <= cutoff.

    L(x) = (1/2 pi) int_{|xi| <= Xi} e^{i xi x} sum_k dt e^{-i xi Z_k} dxi
         = sum_k dt sin(Xi (x - Z_k)) / (pi (x - Z_k)).
    The occupation measure is first deposited on a grid ``oversample``
    times finer than the bins and convolved by FFT with the Dirichlet
    kernel averaged over one bin, so the result is directly comparable to
    the histogram.  The default cutoff 2 pi / w is the first zero of the
    bin average, the highest frequency a bin of width w can represent.
    Negative values are clipped; their mass is reported and must stay
    below ``max_clipped`` times the interval length.
    """
    if not bin_width > 0:
        raise DomainError("bin width must be positive")
    if cutoff is None:
        cutoff = 2 * math.pi / bin_width
    if not cutoff > 0:
        raise DomainError("cutoff must be positive")
    i0, i1 = _index_range(path, interval)
    z = path.values[i0:i1]
    d = bin_width / oversample
    j = np.floor(z / d + 0.5).astype(np.int64)
    jl, jh = int(j.min()), int(j.max())
    fine = np.bincount(j - jl) * path.dt
    if x_range is None:
        lo, hi = int(_bins(np.array([z.min()]), bin_width)[0]), int(_bins(np.array([z.max()]), bin_width)[0])
    else:
        lo = int(math.floor(x_range[0] / bin_width + 0.5))
        hi = int(math.floor(x_range[1] / bin_width + 0.5))
    x = np.arange(lo, hi + 1) * bin_width
    m = np.rint(x / d).astype(np.int64)
    reach = int(max(abs(m[0] - jh), abs(m[-1] - jl), abs(m[0] - jl), abs(m[-1] - jh))) + 1
    u = np.arange(-reach, reach + 1) * d
    kern = (special.sici(cutoff * (u + bin_width / 2))[0]
            - special.sici(cutoff * (u - bin_width / 2))[0]) / (math.pi * bin_width)
    conv = signal.fftconvolve(fine, kern)
    raw = conv[m - jl + reach]
    neg = raw < 0
    clipped = max(float(-raw[neg].sum() * bin_width), 0.0)
    length = (i1 - i0) * path.dt
    if clipped > max_clipped * length:
        raise CutoffTooLow(f"clipped mass {clipped:.3g} exceeds {max_clipped:.0%} of |I|")
    return LocalTimeEstimate(interval=(i0 * path.dt, i1 * path.dt), bin_width=bin_width,
                             x_grid=x, density=np.where(neg, 0.0, raw), method="fourier",
                             clipped_mass=clipped)


def l2_relative_difference(a: LocalTimeEstimate, b: LocalTimeEstimate) -> float:
    """||a - b|| / ||b|| on the union of both grids (missing cells count as 0)."""
    if not math.isclose(a.bin_width, b.bin_width):
        raise DomainError("estimates use different bin widths")
    w = a.bin_width
    ia, ib = np.rint(a.x_grid / w).astype(int), np.rint(b.x_grid / w).astype(int)
    lo, hi = min(ia[0], ib[0]), max(ia[-1], ib[-1])
    A = np.zeros(hi - lo + 1); B = np.zeros(hi - lo + 1)
    A[ia - lo] = a.density; B[ib - lo] = b.density
    return float(np.linalg.norm(A - B) / np.linalg.norm(B))


# ------------------------------------------------------------ scaling fits

def _loglog(x, y):
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    dof = max(lx.size - 2, 1)
    se = math.sqrt(float(resid @ resid) / dof * np.linalg.inv(A.T @ A)[0, 0])
    return float(coef[0]), se


def _level_occupation(values: np.ndarray, start: int, w_steps: int, level: float,
                      half: float, dt: float) -> float:
    """Occupation density at ``level`` over [t_start, t_start + h], trapezoidal in time.

    A point Z_t counts if |Z_t - level| < half; the two endpoints carry
    weight 1/2 so that the fixed contribution of Z_s itself does not bias
    small windows.
    """
    seg = values[start : start + w_steps + 1]
    hit = (np.abs(seg - level) < half).astype(float)
    hit[0] *= 0.5
    hit[-1] *= 0.5
    return float(hit.sum() * dt / (2 * half))


@dataclass
class MomentScalingReport:
    hurst: float
    n_moment: int
    h: np.ndarray
    moments: np.ndarray
    slope: float
    stderr: float
    expected: float
    visit_fraction: np.ndarray


def verify_moment_scaling(paths: Sequence[PathSample], n_moment: int = 1,
                          h: Sequence[float] = (2 ** -3, 2 ** -4, 2 ** -5, 2 ** -6, 2 ** -7),
                          shift: str = "atLevelZ_a", bin_scale: float = 0.1,
                          level: float = 0.0) -> MomentScalingReport:
    """E L(x*, [s, s+h])^n against h over disjoint windows of every path.

    x* = Z_s (``shift='atLevelZ_a'``) or the fixed ``level`` (``'none'``).
    The level bin has width ``bin_scale * h^H`` so that the estimator keeps
    the same relative resolution at every scale; self-similarity then
    predicts the exponent (1 - H) n exactly.
    """
    if not 1 <= n_moment <= 4:
        raise DomainError("moment order must lie in [1, 4]")
    if shift not in ("none", "atLevelZ_a"):
        raise DomainError("shift must be 'none' or 'atLevelZ_a'")
    H = paths[0].hurst.h
    dt = paths[0].dt
    hs = np.asarray(h, float)
    if hs.max() / hs.min() < 10 - 1e-9:
        raise DomainError("h grid must span at least one decade")
    moments, visits = [], []
    for hh in hs:
        w = int(round(hh / dt))
        if w < 16:
            raise ResolutionError(f"h={hh} resolves only {w} steps")
        half = 0.5 * bin_scale * hh ** H
        vals = []
        for p in paths:
            z = p.values
            for s in range(0, z.size - w, w):
                x = z[s] if shift == "atLevelZ_a" else level
                vals.append(_level_occupation(z, s, w, x, half, dt))
        vals = np.array(vals)
        visits.append(float(np.mean(vals > 0)))
        moments.append(float(np.mean(vals ** n_moment)))
    visits = np.array(visits)
    if shift == "none" and visits.min() < 0.1:
        raise InsufficientOccupation(f"level visited in {visits.min():.1%} of windows")
    slope, se = _loglog(hs, moments)
    return MomentScalingReport(H, n_moment, hs, np.array(moments), slope, se,
                               (1 - H) * n_moment, visits)


@dataclass
class SpaceHolderReport:
    hurst: float
    gamma: float
    y: np.ndarray
    mean_abs_diff: np.ndarray
    slope: float
    stderr: float
    passed: bool


def verify_space_holder(paths: Sequence[PathSample], gamma: float,
                        y: Sequence[float] = (0.01, 0.02, 0.04, 0.08, 0.16),
                        bin_width: float | None = None, tol: float = 0.1) -> SpaceHolderReport:
    """E|L(y, [0,1]) - L(0, [0,1])| against |y|; the slope must reach gamma - tol."""
    H = paths[0].hurst.h
    if not 0 < gamma < Hurst(H).holder_space_limit():
        raise DomainError("gamma must lie in (0, (1-H)/(2H))")
    ys = np.asarray(y, float)
    w = bin_width or ys.min() / 4
    diffs = []
    for yy in ys:
        acc = []
        for p in paths:
            i1 = int(round(1.0 / p.dt))
            z = p.values[:i1]
            l0 = np.count_nonzero(np.abs(z) < w / 2) * p.dt / w
            l1 = np.count_nonzero(np.abs(z - yy) < w / 2) * p.dt / w
            acc.append(abs(l1 - l0))
        diffs.append(float(np.mean(acc)))
    slope, se = _loglog(ys, diffs)
    return SpaceHolderReport(H, gamma, ys, np.array(diffs), slope, se, slope >= gamma - tol)


# ------------------------------------------------------------ diagnostics

@dataclass
class LimsupReport:
    r: np.ndarray
    ratios: np.ndarray          # per path (rows) and r (columns)
    running_max: np.ndarray     # max over paths of the running max in decreasing r
    kappa: float
    bounded: bool


def _max_local_time(z: np.ndarray, dt: float, w: float) -> float:
    idx = _bins(z, w)
    return float(np.bincount(idx - idx.min()).max() * dt / w)


def limsup_diagnostic(paths: Sequence[PathSample], s: float = 0.5,
                      r: Sequence[float] = tuple(2.0 ** -np.arange(4, 11)),
                      kappa: float | None = None, bin_factor: float = 1 / 5,
                      growth_tol: float = 0.1) -> LimsupReport:
    """L*([s-r, s+r]) / (r^{1-H} (log log 1/r)^kappa) along decreasing r.

    L* is the largest histogram bin with width ``bin_factor * r^H``.
    Boundedness is judged on the path-averaged ratio: its log-log slope
    against r over the last decade must not fall below ``-growth_tol``
    (growth as r decreases would appear as a negative slope).
    """
    H = paths[0].hurst.h
    kappa = 2 * H if kappa is None else float(kappa)
    rs = np.sort(np.asarray(r, float))[::-1]
    if np.any(rs >= math.exp(-1)):
        raise DomainError("r must be below 1/e for log log 1/r > 0")
    dt = paths[0].dt
    if rs.min() < 20 * dt:
        raise ResolutionError("smallest r must be at least 20 dt")
    if not (rs.max() <= s <= paths[0].horizon - rs.max()):
        raise DomainError("s too close to the ends of the path")
    R = np.empty((len(paths), rs.size))
    for i, p in enumerate(paths):
        for k, rr in enumerate(rs):
            i0, i1 = int(round((s - rr) / dt)), int(round((s + rr) / dt))
            lstar = _max_local_time(p.values[i0:i1], dt, bin_factor * rr ** H)
            R[i, k] = lstar / (rr ** (1 - H) * math.log(math.log(1 / rr)) ** kappa)
    run = np.maximum.accumulate(R, axis=1).max(axis=0)
    mean = R.mean(axis=0)
    last = rs <= 10 * rs.min() * (1 + 1e-9)
    slope = _loglog(rs[last], mean[last])[0] if last.sum() >= 2 else 0.0
    return LimsupReport(rs, R, run, kappa, bool(np.all(np.isfinite(R)) and slope >= -growth_tol))


@dataclass
class IrregularityReport:
    r: np.ndarray
    floor: np.ndarray           # min over s of osc(s, r) / r^H, median over paths
    trend: float                # log-log slope of floor against r
    passed: bool


def irregularity_diagnostic(paths: Sequence[PathSample], s: Sequence[float] | None = None,
                            r: Sequence[float] = tuple(2.0 ** -np.arange(5, 11)),
                            trend_tol: float | None = None) -> IrregularityReport:
    """min_s sup_{|t-s|<r} |Z_t - Z_s| / r^H across r.

    A differentiable path has osc(s, r) ~ r and the ratio decays like
    r^{1-H}; a self-similar rough path keeps it scale free.  The check
    passes when every floor is positive and the trend in r stays below
    ``trend_tol`` (default (1-H)/2, halfway between the two behaviours).
    """
    H = paths[0].hurst.h
    dt = paths[0].dt
    rs = np.sort(np.asarray(r, float))[::-1]
    if rs.min() < 4 * dt:
        raise ResolutionError("smallest r must span a few grid steps")
    T = paths[0].horizon
    ss = np.asarray(s if s is not None else np.linspace(0.1, 0.9, 17) * T, float)
    if ss.min() - rs.max() < 0 or ss.max() + rs.max() > T:
        raise DomainError("windows leave the path")
    F = np.empty((len(paths), rs.size))
    for i, p in enumerate(paths):
        for k, rr in enumerate(rs):
            w = max(int(rr / dt), 1)
            osc = []
            for sv in ss:
                c = int(round(sv / dt))
                seg = p.values[c - w : c + w + 1]
                osc.append(np.max(np.abs(seg - p.values[c])))
            F[i, k] = min(osc) / rr ** H
    floor = np.median(F, axis=0)
    tol = (1 - H) / 2 if trend_tol is None else trend_tol
    trend = _loglog(rs, floor)[0] if np.all(floor > 0) else math.inf
    return IrregularityReport(rs, floor, trend, bool(np.all(floor > 0) and trend < tol))
