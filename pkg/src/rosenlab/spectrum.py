"""Discretized Riesz-type operators and their spectra.

Two independent discretizations of the covariance operator of the
Rosenblatt process are provided.

* Time domain: the nonzero spectrum of K_a M_g K_a equals that of M_g K_{2a},
  an integral operator with kernel d_{2a} |x-y|^{2a-1} weighted by the step
  function g.  It is discretized by piecewise-constant Galerkin with the
  cell double integrals in closed form, then Richardson-extrapolated over
  three nested meshes.
* Spectral domain: the Hermitian kernel |x|^{-H/2} sum_j xi_j k_{t_j}(x-y)
  |y|^{-H/2} with k_t(u) = (e^{itu}-1)/(iu), discretized by Nystrom on a
  Gauss-Jacobi/Gauss-Legendre rule for |x|^{-H} dx and extrapolated in the
  truncation radius.

Both are scaled so that the unit profile (t=1, xi=1) has 2 sum lambda_k^2 = 1,
i.e. the returned eigenvalues are the chi-square weights of Z.
"""
from __future__ import annotations

import fcntl
import functools
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import linalg, special

from .core import (TOOLKIT_VERSION, DomainError, Hurst, RosenlabError,
                   Spectrum, StepProfile)

__all__ = [
    "ResidualImagError", "NonHermitian", "TruncationError", "InsufficientSpectrum",
    "riesz_constant", "fourier_weight_constant", "RieszKernelOperator",
    "eig_riesz", "riesz_spectrum", "eig_time_domain", "hs_norm_sq",
    "rosenblatt_normalization", "rosenblatt_spectrum", "unit_spectrum",
    "SpectralDomainOperator", "eig_spectral_domain", "fit_decay_exponent",
    "verify_lower_bound", "verify_localization", "cache_dir",
]

RESIDUAL_IMAG_TOL = 1e-6


class ResidualImagError(RosenlabError):
    code = "residual-imag"


class NonHermitian(RosenlabError):
    code = "non-hermitian"


class TruncationError(RosenlabError):
    code = "truncation"


class InsufficientSpectrum(RosenlabError):
    code = "insufficient-spectrum"


def riesz_constant(alpha: float) -> float:
    """d_a such that d_a |x|^{a-1} has Fourier symbol |xi|^{-a}."""
    return math.gamma((1 - alpha) / 2) / (2 ** alpha * math.sqrt(math.pi) * math.gamma(alpha / 2))


def fourier_weight_constant(hurst: float) -> float:
    """c with int |x|^{-H} e^{iux} dx = c |u|^{H-1}."""
    return 2.0 * math.gamma(1.0 - hurst) * math.sin(math.pi * hurst / 2.0)


# ---------------------------------------------------------------- time domain

def _F(u, p):
    return np.abs(u) ** (p + 2) / ((p + 1) * (p + 2))


def _cell_integrals(ea, eb, fa, fb, p):
    """int_{[ea,eb]} int_{[fa,fb]} |x-y|^p dy dx for all cell pairs."""
    A, B = ea[:, None], eb[:, None]
    C, D = fa[None, :], fb[None, :]
    return -(_F(B - D, p) - _F(B - C, p) - _F(A - D, p) + _F(A - C, p))


def _normalized_segments(segments, drop_zero=True):
    out = []
    for a, b, v in segments:
        if b <= a:
            raise DomainError("empty segment")
        if drop_zero and v == 0.0:
            continue
        out.append((float(a), float(b), float(v)))
    return out


def _cell_counts(segments, n_nodes, multiple=4, min_cells=8):
    """Cells per segment, proportional to length, each a multiple of ``multiple``."""
    total = sum(b - a for a, b, _ in segments)
    counts = []
    for a, b, _ in segments:
        c = max(min_cells, int(round(n_nodes * (b - a) / total / multiple)) * multiple)
        counts.append(c)
    return counts


def _galerkin_eigs(segments, alpha, counts):
    """Signed eigenvalues of M_g K for kernel d_alpha |x-y|^{alpha-1}."""
    edges_a, edges_b, lev = [], [], []
    for (a, b, v), c in zip(segments, counts):
        e = np.linspace(a, b, c + 1)
        edges_a.append(e[:-1])
        edges_b.append(e[1:])
        lev.append(np.full(c, v))
    ea, eb, g = (np.concatenate(x) for x in (edges_a, edges_b, lev))
    h = eb - ea
    S = riesz_constant(alpha) * _cell_integrals(ea, eb, ea, eb, alpha - 1.0)
    S /= np.sqrt(h[:, None] * h[None, :])
    if np.all(g == g[0]):
        return g[0] * linalg.eigh(S, eigvals_only=True), 0.0
    try:
        L = linalg.cholesky(S, lower=True)
    except linalg.LinAlgError:
        ev = linalg.eigvals(g[:, None] * S)
        scale = max(np.max(np.abs(ev)), np.finfo(float).tiny)
        return ev.real, float(np.max(np.abs(ev.imag)) / scale)
    T = L.T @ (g[:, None] * L)
    return linalg.eigh(0.5 * (T + T.T), eigvals_only=True), 0.0


def _split_signs(ev):
    pos = np.sort(ev[ev > 0])[::-1]
    neg = np.sort(ev[ev < 0])
    return pos, neg


def _richardson(levels, p1, p2):
    """Two-step Richardson on index-matched sequences from meshes h, h/2, h/4.

    ``levels`` is (coarse, mid, fine); errors are assumed to expand as
    c1 h^p1 + c2 h^p2.
    """
    c, m, f = levels
    k = min(c.size, m.size, f.size)
    c, m, f = c[:k], m[:k], f[:k]
    r1 = 2.0 ** p1
    R_mid = (r1 * m - c) / (r1 - 1)
    R_fine = (r1 * f - m) / (r1 - 1)
    r2 = 2.0 ** p2
    return (r2 * R_fine - R_mid) / (r2 - 1)


def _extrapolated_eigs(segments, alpha, n_nodes, extrapolate=True):
    counts = _cell_counts(segments, n_nodes)
    fine, resid = _galerkin_eigs(segments, alpha, counts)
    if not extrapolate:
        return fine, resid, sum(counts)
    mid, r2 = _galerkin_eigs(segments, alpha, [c // 2 for c in counts])
    coarse, r3 = _galerkin_eigs(segments, alpha, [c // 4 for c in counts])
    parts = []
    for fam in zip(_split_signs(coarse), _split_signs(mid), _split_signs(fine)):
        parts.append(_richardson(fam, 2.0, 2.0 + alpha))
    return np.concatenate(parts), max(resid, r2, r3), sum(counts)


def _keep(ev, keep):
    ev = ev[np.argsort(-np.abs(ev), kind="stable")]
    return ev[:keep]


@dataclass(frozen=True)
class RieszKernelOperator:
    """M_g K_alpha restricted to the support of a step function g.

    Parameters
    ----------
    alpha : float
        Riesz order, kernel d_alpha |x-y|^{alpha-1}.
    segments : tuple of (a, b, level)
        Disjoint intervals and the value of g on each.
    n_nodes : int
        Number of Galerkin cells on the finest mesh.
    """

    alpha: float
    segments: tuple
    n_nodes: int = 800

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0,1)")
        if self.n_nodes < 16:
            raise DomainError("need at least 16 nodes")
        object.__setattr__(self, "segments", tuple(_normalized_segments(self.segments, False)))

    @property
    def kernel_constant(self) -> float:
        return riesz_constant(self.alpha)

    @classmethod
    def on_interval(cls, alpha, a=-1.0, b=1.0, n_nodes=800):
        return cls(alpha, ((a, b, 1.0),), n_nodes)

    @classmethod
    def for_profile(cls, profile: StepProfile, alpha, n_nodes=800):
        return cls(alpha, tuple(profile.segments()), n_nodes)

    def matrix(self) -> np.ndarray:
        """Symmetrized Galerkin matrix of K on the cells (g not applied)."""
        segs = _normalized_segments(self.segments, False)
        counts = _cell_counts(segs, self.n_nodes)
        ea = np.concatenate([np.linspace(a, b, c + 1)[:-1] for (a, b, _), c in zip(segs, counts)])
        eb = np.concatenate([np.linspace(a, b, c + 1)[1:] for (a, b, _), c in zip(segs, counts)])
        h = eb - ea
        S = self.kernel_constant * _cell_integrals(ea, eb, ea, eb, self.alpha - 1.0)
        return S / np.sqrt(h[:, None] * h[None, :])

    def hs_norm_sq(self) -> float:
        return hs_norm_sq(self.segments, self.alpha, self.kernel_constant)


def hs_norm_sq(segments, alpha, const=None) -> float:
    """Exact int int g(x) g(y) (c |x-y|^{alpha-1})^2 dx dy for step g.

    Infinite when alpha <= 1/2 (the operator is then not Hilbert-Schmidt).
    """
    if alpha <= 0.5:
        return math.inf
    const = riesz_constant(alpha) if const is None else const
    segs = _normalized_segments(segments)
    if not segs:
        return 0.0
    a = np.array([s[0] for s in segs])
    b = np.array([s[1] for s in segs])
    v = np.array([s[2] for s in segs])
    J = _cell_integrals(a, b, a, b, 2.0 * alpha - 2.0)
    return float(const ** 2 * v @ J @ v)


def eig_riesz(op: RieszKernelOperator, extrapolate=True, keep=None) -> Spectrum:
    """Spectrum of M_g K_alpha from :class:`RieszKernelOperator`.

    With ``extrapolate`` the values are Richardson-extrapolated over meshes
    n/4, n/2, n and only the leading n/8 are kept (the rest are not
    resolved by the coarse mesh).  Without it all n Galerkin values are
    returned.
    """
    segs = _normalized_segments(op.segments)
    if not segs:
        return Spectrum(np.zeros(0), discretization_size=op.n_nodes)
    ev, resid, size = _extrapolated_eigs(segs, op.alpha, op.n_nodes, extrapolate)
    if resid > RESIDUAL_IMAG_TOL:
        raise ResidualImagError(f"relative imaginary residual {resid:.2e}")
    if keep is None:
        keep = size // 8 if extrapolate else size
    ev = _keep(ev, keep)
    hs = op.hs_norm_sq()
    tail = hs - float(np.sum(ev ** 2)) if math.isfinite(hs) else math.inf
    return Spectrum(ev, discretization_size=size, residual_imag=resid, tail_sq=tail,
                    meta={"alpha": op.alpha, "extrapolated": bool(extrapolate)})


def riesz_spectrum(alpha, interval=(-1.0, 1.0), n_nodes=800, extrapolate=True, keep=None):
    """Eigenvalues of the Riesz operator K_alpha compressed to an interval."""
    op = RieszKernelOperator.on_interval(alpha, interval[0], interval[1], n_nodes)
    return eig_riesz(op, extrapolate=extrapolate, keep=keep)


def eig_time_domain(profile: StepProfile, alpha: float, n_nodes: int = 800,
                    extrapolate=True, keep=None) -> Spectrum:
    """Nonzero spectrum of K_alpha M_g K_alpha via M_g K_{2 alpha}.

    The result is in the Riesz normalization (no Rosenblatt scaling);
    ``tail_sq`` is exact.
    """
    if not 0.0 < alpha < 0.5:
        raise DomainError("alpha must lie in (0,1/2)")
    op = RieszKernelOperator.for_profile(profile, 2.0 * alpha, n_nodes)
    return eig_riesz(op, extrapolate=extrapolate, keep=keep)


def rosenblatt_normalization(hurst) -> float:
    """Factor turning Riesz-normalized eigenvalues (kernel d_H) into chi-square weights."""
    H = Hurst.of(hurst).h
    hs_unit = riesz_constant(H) ** 2 / (H * (2 * H - 1))
    return 1.0 / math.sqrt(2.0 * hs_unit)


def rosenblatt_spectrum(profile: StepProfile, hurst, n_nodes=800, extrapolate=True,
                        keep=None) -> Spectrum:
    """Weights lambda_k with sum_j xi_j Z_{t_j} = sum_k lambda_k (X_k^2 - 1)."""
    hurst = Hurst.of(hurst)
    raw = eig_time_domain(profile, hurst.alpha(), n_nodes, extrapolate, keep)
    return raw.scaled(rosenblatt_normalization(hurst))


# ------------------------------------------------------------------ caching

def cache_dir() -> Path:
    d = os.environ.get("ROSENLAB_CACHE_DIR")
    if d:
        return Path(d)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "rosenlab"


_MAGIC = b"RLSPEC01"


def _fingerprint(params: dict) -> bytes:
    blob = json.dumps({**params, "version": TOOLKIT_VERSION}, sort_keys=True).encode()
    return hashlib.sha256(blob).digest()[:24]


def _cache_load(params: dict):
    fp = _fingerprint(params)
    path = cache_dir() / f"{fp.hex()}.rlspec"
    try:
        with open(path, "rb") as fh:
            fcntl.flock(fh, fcntl.LOCK_SH)
            try:
                blob = fh.read()
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)
    except OSError:
        return None
    if len(blob) < 32 or blob[:8] != _MAGIC or blob[8:32] != fp or (len(blob) - 32) % 8:
        return None
    return np.frombuffer(blob[32:], dtype="<f8").copy()


def _cache_store(params: dict, values: np.ndarray) -> None:
    fp = _fingerprint(params)
    d = cache_dir()
    try:
        d.mkdir(parents=True, exist_ok=True)
        path = d / f"{fp.hex()}.rlspec"
        with open(path, "ab+") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                fh.seek(0)
                fh.truncate()
                fh.write(_MAGIC + fp + np.asarray(values, dtype="<f8").tobytes())
                fh.flush()
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)
    except OSError:
        pass


@functools.lru_cache(maxsize=32)
def _unit_spectrum(h: float, n_nodes: int, use_disk: bool) -> Spectrum:
    params = {"kind": "unit-time-domain", "hurst": h, "n_nodes": n_nodes}
    ev = _cache_load(params) if use_disk else None
    if ev is None:
        spec = rosenblatt_spectrum(StepProfile((1.0,), (1.0,)), h, n_nodes)
        if use_disk:
            _cache_store(params, spec.eigenvalues)
        return spec
    tail = 0.5 - float(np.sum(ev ** 2))
    return Spectrum(ev, discretization_size=n_nodes, tail_sq=tail,
                    meta={"alpha": h, "extrapolated": True, "cached": True})


def unit_spectrum(hurst, n_nodes: int = 800, use_disk: bool = True) -> Spectrum:
    """Chi-square weights of Z_1 (Var Z_1 = 1), memoized in memory and on disk."""
    return _unit_spectrum(Hurst.of(hurst).h, int(n_nodes), bool(use_disk))


# -------------------------------------------------------------- spectral domain

def _weighted_nodes(hurst, X, panel=3.0, order=8, inner=1.0, jorder=16):
    """Nodes on (0, X] and weights for the measure x^{-H} dx."""
    gx, gw = np.polynomial.legendre.leggauss(order)
    jx, jw = special.roots_jacobi(jorder, 0.0, -hurst)
    xs = [inner * (1 + jx) / 2]
    ws = [jw * (inner / 2) ** (1.0 - hurst)]
    n_panels = max(1, int(math.ceil((X - inner) / panel)))
    edges = np.linspace(inner, X, n_panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        xx = (a + b) / 2 + (b - a) / 2 * gx
        xs.append(xx)
        ws.append((b - a) / 2 * gw * xx ** (-hurst))
    return np.concatenate(xs), np.concatenate(ws)


def _kernel_parts(u, t):
    """Real and imaginary parts of (e^{itu}-1)/(iu): sin(tu)/u and (1-cos tu)/u."""
    small = np.abs(u) < 1e-12
    us = np.where(small, 1.0, u)
    c = np.where(small, t, np.sin(t * us) / us)
    d = np.where(small, 0.0, (1.0 - np.cos(t * us)) / us)
    return c, d


@dataclass(frozen=True)
class SpectralDomainOperator:
    """Nystrom discretization of V f(x) = |x|^{-H/2} int sum_j xi_j k_{t_j}(x-y) |y|^{-H/2} f(y) dy.

    The frequency axis is rescaled by the largest time so that the kernel
    oscillates at unit rate; this makes the t-scaling exact.  Nodes are
    symmetric about 0 and carry weights for |x|^{-H} dx; the origin is
    handled by a Gauss-Jacobi panel instead of a puncture.
    """

    hurst: Hurst
    profile: StepProfile
    truncation_radius: float = 400.0
    panel: float = 3.0
    order: int = 8

    def __post_init__(self):
        object.__setattr__(self, "hurst", Hurst.of(self.hurst))
        if self.truncation_radius <= 4 * self.panel:
            raise DomainError("truncation radius too small")

    @classmethod
    def with_nodes(cls, hurst, profile, n_nodes: int, order: int = 8):
        """Pick the radius so that roughly ``n_nodes`` nodes cover [-X, X]."""
        panels = max(4, int(round((n_nodes / 2 - 16) / order)))
        return cls(hurst, profile, 1.0 + 3.0 * panels, order=order)

    def nodes(self, X=None):
        X = self.truncation_radius if X is None else X
        x, w = _weighted_nodes(self.hurst.h, X, self.panel, self.order)
        return np.concatenate([-x[::-1], x]), np.concatenate([w[::-1], w])

    def matrix(self, X=None) -> np.ndarray:
        """Real symmetric form of the Hermitian Nystrom matrix.

        With even/odd combinations f(x) +- f(-x) on x > 0 the complex
        Hermitian matrix is unitarily equivalent to this real one, of the
        same size.  Frequencies are in units of 1/t_n.
        """
        X = self.truncation_radius if X is None else X
        H = self.hurst.h
        x, w = _weighted_nodes(H, X, self.panel, self.order)
        s = self.profile.horizon
        a = np.sqrt(w)
        diff = x[:, None] - x[None, :]
        summ = x[:, None] + x[None, :]
        Cp = np.zeros_like(diff)
        Cm = np.zeros_like(diff)
        Dp = np.zeros_like(diff)
        Dm = np.zeros_like(diff)
        for t, v in zip(self.profile.times, self.profile.xi):
            if v == 0.0:
                continue
            c1, d1 = _kernel_parts(diff, t / s)
            c2, d2 = _kernel_parts(summ, t / s)
            Cp += v * c1
            Cm += v * c2
            Dp += v * d1
            Dm += v * d2
        A = a[:, None] * a[None, :]
        E = (Dp - Dm) * A
        S = np.block([[(Cp + Cm) * A, -E], [-E.T, (Cp - Cm) * A]])
        return S * s ** H

    def hs_norm_sq(self) -> float:
        c = fourier_weight_constant(self.hurst.h)
        return hs_norm_sq(self.profile.segments(), self.hurst.h, c)

    def normalization(self) -> float:
        H = self.hurst.h
        hs_unit = fourier_weight_constant(H) ** 2 / (H * (2 * H - 1))
        return 1.0 / math.sqrt(2.0 * hs_unit)


def _sym_eigs(S):
    scale = max(float(np.max(np.abs(S))), np.finfo(float).tiny)
    asym = float(np.max(np.abs(S - S.T))) / scale
    if asym > 1e-10:
        raise NonHermitian(f"relative asymmetry {asym:.2e}")
    return linalg.eigh(S, eigvals_only=True)


def eig_spectral_domain(op: SpectralDomainOperator, tol: float = 1e-3, keep: int = 100,
                        extrapolate=True, max_radius: float = 800.0) -> Spectrum:
    """Spectrum of the spectral-domain operator, scaled to Var Z_1 = 1.

    Eigenvalues at radii X/4, X/2, X are extrapolated assuming an X^{-2}
    truncation error.  The error estimate is the change between the two
    extrapolants over the top 20 values of each sign, relative to the
    largest magnitude.  While it exceeds ``tol`` the radius is doubled, up
    to ``max_radius``; after that a :class:`TruncationError` is raised.
    ``tail_sq`` is the exact Hilbert-Schmidt mass not carried by the kept
    values.
    """
    X = op.truncation_radius
    if all(v == 0.0 for v in op.profile.xi):
        return Spectrum(np.zeros(0), truncation_radius=X)
    kappa = op.normalization()
    levels = {}

    def at(r):
        if r not in levels:
            levels[r] = _sym_eigs(op.matrix(r))
        return levels[r]

    while True:
        ev_f = at(X)
        err = 0.0
        if not extrapolate:
            ev = ev_f
            break
        fams, errs = [], []
        for c, m, f in zip(_split_signs(at(X / 4)), _split_signs(at(X / 2)), _split_signs(ev_f)):
            k = min(c.size, m.size, f.size)
            r_hi = (4 * f[:k] - m[:k]) / 3
            r_lo = (4 * m[:k] - c[:k]) / 3
            fams.append(r_hi)
            errs.append(np.abs(r_hi - r_lo)[:20])
        ev = np.concatenate(fams)
        top = max(float(np.max(np.abs(ev))), np.finfo(float).tiny)
        err = max(float(np.max(e)) if e.size else 0.0 for e in errs) / top
        if err <= tol or 2 * X > max_radius:
            break
        X = 2 * X
    if err > tol:
        raise TruncationError(f"estimated relative error {err:.2e} exceeds tol {tol:.1e} at X={X:g}")
    ev = kappa * _keep(ev, keep)
    tail = kappa ** 2 * op.hs_norm_sq() - float(np.sum(ev ** 2))
    return Spectrum(ev, discretization_size=ev_f.size, truncation_radius=X, tail_sq=tail,
                    meta={"error_estimate": err, "extrapolated": bool(extrapolate)})


# ------------------------------------------------------------------ analysis

def fit_decay_exponent(spec, k_min: int, k_max: int):
    """Least-squares slope of log mu_k against log k on [k_min, k_max].

    Returns
    -------
    slope, stderr : float
    """
    mu = spec.singular_values if isinstance(spec, Spectrum) else np.abs(np.asarray(spec, float))
    if k_min < 2 or k_max > mu.size or k_max < k_min:
        raise InsufficientSpectrum(f"need 2 <= k_min <= k_max <= {mu.size}")
    k = np.arange(k_min, k_max + 1)
    y = mu[k - 1]
    ok = y > 0
    if ok.sum() < 10:
        raise InsufficientSpectrum("fewer than 10 usable values")
    lx, ly = np.log(k[ok]), np.log(y[ok])
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    dof = max(lx.size - 2, 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    return float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0)))


@dataclass
class LowerBoundReport:
    ratios: np.ndarray
    level_ratios: np.ndarray
    min_ratio: float
    min_level_ratio: float
    prefactor: float
    n_nodes: int
    meta: dict = field(default_factory=dict)


@functools.lru_cache(maxsize=16)
def _reference_tilde(hurst: Hurst, n_nodes: int) -> np.ndarray:
    return riesz_spectrum(hurst.alpha(), (0.0, 1.0), n_nodes).singular_values


def verify_lower_bound(profile: StepProfile, hurst, n_max: int = 30,
                       n_nodes: int = 800) -> LowerBoundReport:
    """Ratios r_n = mu_n(B) / [max_j |xi_j - xi_{j-1}| |I_j|^H mu~_n^2].

    B = K_{H/2} M_g K_{H/2} in the Riesz normalization and mu~ is the
    spectrum of K_{H/2} compressed to [0,1].  The bound is stated with
    coefficient differences (xi_0 = 0); ``level_ratios`` uses the levels
    max_j |xi'_j| |I_j|^H instead.
    """
    hurst = Hurst.of(hurst)
    if profile.horizon > 1.0:
        raise DomainError("profile times must lie in (0,1]")
    mu = eig_time_domain(profile, hurst.alpha(), n_nodes).singular_values
    tilde = _reference_tilde(hurst, n_nodes)
    if n_max > min(mu.size, tilde.size):
        raise InsufficientSpectrum(f"n_max={n_max} beyond resolved spectrum")
    lengths = np.diff((0.0,) + profile.times)
    xi = np.array((0.0,) + profile.xi)
    pref = float(np.max(np.abs(np.diff(xi)) * lengths ** hurst.h))
    lev_pref = float(np.max(np.abs(profile.levels()) * lengths ** hurst.h))
    denom = tilde[:n_max] ** 2
    r = mu[:n_max] / (pref * denom)
    rl = mu[:n_max] / (lev_pref * denom)
    return LowerBoundReport(r, rl, float(r.min()), float(rl.min()), pref, n_nodes)


@dataclass
class LocalizationReport:
    ratios: np.ndarray       # shape (n_intervals, k_max)
    sup_ratio: float
    k_max: int


def verify_localization(profile: StepProfile, hurst, k_max: int = 20,
                        n_nodes: int = 800) -> LocalizationReport:
    """sup over j, k of mu_k(B restricted to I_j with level xi'_j) / mu_k(B)."""
    hurst = Hurst.of(hurst)
    full = eig_time_domain(profile, hurst.alpha(), n_nodes).singular_values
    unit = eig_time_domain(StepProfile((1.0,), (1.0,)), hurst.alpha(), n_nodes).singular_values
    if k_max > min(full.size, unit.size):
        raise InsufficientSpectrum(f"k_max={k_max} beyond resolved spectrum")
    rows = []
    for (a, b), lev in zip(profile.intervals(), profile.levels()):
        loc = abs(lev) * (b - a) ** hurst.h * unit[:k_max]
        rows.append(loc / full[:k_max])
    R = np.array(rows)
    return LocalizationReport(R, float(R.max()), k_max)
