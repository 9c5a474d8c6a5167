"""The acceptance suite: one function per criterion, shared by the CLI and the tests.

Each criterion returns a :class:`CriterionResult` with the measured
quantities; nothing here raises on a failed check.  Two budgets exist:
``desk`` (minutes in total on one core) and ``thorough`` (larger samples
and finer quadrature).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import charfn, loctime, oracles, simulate, spectrum
from .core import PathSample, RosenlabError, StepProfile, rng_stream

__all__ = ["Budget", "BUDGETS", "CriterionResult", "CRITERIA", "run_criterion", "run_all"]


@dataclass(frozen=True)
class Budget:
    name: str
    marginal_samples: int = 10 ** 6
    paths: int = 500
    path_steps: int = 2 ** 14
    tail_paths: int = 2000
    tail_steps: int = 2 ** 12
    irregular_paths: int = 100
    lower_bound_profiles: int = 50
    qmc_points: int = 2 ** 12
    two_time_grid: tuple = (10, 24, 400)
    fine_nodes: int = 800


BUDGETS = {
    "desk": Budget("desk"),
    "thorough": Budget("thorough", marginal_samples=4 * 10 ** 6, paths=2000, tail_paths=8000,
                       lower_bound_profiles=200, qmc_points=2 ** 14,
                       two_time_grid=(14, 32, 800), fine_nodes=1600),
}


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0
    error: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.id:2d} {self.name} ({self.seconds:.1f}s)"


def _sub_seed(seed: int, key: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(key)]).generate_state(1)[0])


class _PathPool:
    """Paths shared by several criteria, generated on first use."""

    def __init__(self, seed: int, budget: Budget, threads: int):
        self.seed, self.budget, self.threads = seed, budget, threads
        self._store = {}

    def get(self, hurst: float, n_paths: int, n_steps: int, key: int) -> list:
        k = (hurst, n_paths, n_steps, key)
        if k not in self._store:
            self._store[k] = simulate.sample_paths(hurst, n_steps, n_paths, _sub_seed(self.seed, key),
                                                   threads=self.threads)
        return self._store[k]


# ---------------------------------------------------------------- criteria

def c01_decay(ctx):
    rows = {}
    for a in (0.3, 0.35, 0.45):
        spec = spectrum.riesz_spectrum(a, (-1.0, 1.0), 800)
        slope, se = spectrum.fit_decay_exponent(spec, 10, 100)
        rows[a] = (slope, se)
    ok = all(abs(s + a) <= 0.05 for a, (s, _) in rows.items())
    return ok, {"slopes": rows}


def c02_scaling(ctx):
    alpha = 0.35
    ref = spectrum.eig_time_domain(StepProfile((1.0,), (1.0,)), alpha, 800).singular_values[:20]
    worst = {}
    for b in (0.25, 0.5, 2.0):
        mu = spectrum.eig_time_domain(StepProfile((b,), (1.0,)), alpha, 800).singular_values[:20]
        worst[b] = float(np.max(np.abs(mu / (b ** (2 * alpha) * ref) - 1)))
    return all(v < 0.01 for v in worst.values()), {"max_rel_dev": worst}


def _simplex_sphere_matrix():
    out = []
    for H in (0.55, 0.6, 0.7, 0.85):
        gm = 1 / H - 1
        out.append((1, H, (0.0,)))
        out.append((2, H, (0.0, 0.0)))
        out.append((2, H, (0.3 * gm, 0.6 * gm)))
        out.append((3, H, (0.0, 0.0, 0.0)))
        out.append((3, H, (0.0, 0.25 * gm, 0.5 * gm)))
    return out


def c03_simplex_sphere(ctx):
    rows, ok = [], True
    for n, H, g in _simplex_sphere_matrix():
        p = oracles.SimplexSphereParams(n, H, g)
        cf = oracles.simplex_sphere_closed_form(p)
        bf = oracles.simplex_sphere_brute_force(p, budget=ctx.budget.qmc_points)
        rel = abs(bf.value / cf - 1)
        if n == 1:
            good = rel < 1e-10 and abs(cf - 2 / (1 - H)) < 1e-10 * cf
        elif n == 2:
            good = rel < 1e-3
        else:
            good = rel < 0.01 and abs(bf.value - cf) <= 3 * bf.error + 1e-3 * cf
        ok &= bool(good)
        rows.append({"n": n, "H": H, "gammas": g, "closed": cf, "brute": bf.value,
                     "err": bf.error, "rel": rel, "ok": bool(good)})
    return ok, {"rows": rows}


def c04_product(ctx):
    rows, ok = [], True
    N = ctx.budget.marginal_samples
    for i, H in enumerate((0.6, 0.7, 0.85)):
        ms = simulate.MarginalSampler.for_hurst(H)
        z = simulate.sample_marginal(ms, rng_stream(_sub_seed(ctx.seed, 4), i), N)
        for xi in (0.5, 1.0, 2.0):
            phi = np.exp(1j * xi * z)
            m = phi.mean()
            theta = np.angle(m)
            # delta method: the modulus estimate fluctuates along the mean's direction
            se = float(np.std(np.cos(xi * z - theta)) / math.sqrt(N))
            pred = charfn.char_modulus(ms.spectrum, xi)
            dev = abs(abs(m) - pred)
            good = dev <= 3 * se
            ok &= bool(good)
            rows.append({"H": H, "xi": xi, "empirical": float(abs(m)), "predicted": pred,
                         "se": se, "z": dev / se, "ok": bool(good)})
    return ok, {"rows": rows}


def c05_fourier(ctx):
    rows, ok = [], True
    for H, eta in ((0.7, 0.0), (0.7, 0.1), (0.85, 0.0)):
        r = charfn.verify_fourier_bound(H, 1, eta)
        good = r.finite and abs(r.slope - r.expected_slope) <= 0.05
        ok &= good
        rows.append({"n": 1, "H": H, "eta": eta, "values": r.values.tolist(), "slope": r.slope,
                     "expected": r.expected_slope, "ok": good})
    nr, nt, nn = ctx.budget.two_time_grid
    r = charfn.verify_fourier_bound(0.7, 2, 0.0, n_rho=nr, n_theta=nt, n_nodes=nn)
    good = r.finite and abs(r.slope - r.expected_slope) <= 0.1
    ok &= good
    rows.append({"n": 2, "H": 0.7, "eta": 0.0, "values": r.values.tolist(), "slope": r.slope,
                 "expected": r.expected_slope, "ok": good})
    return ok, {"rows": rows}


def random_profile(rng: np.random.Generator, max_intervals: int = 3, min_gap: float = 0.05):
    """Random step profile on (0, 1] with 1..max_intervals intervals."""
    n = int(rng.integers(1, max_intervals + 1))
    while True:
        t = np.sort(rng.uniform(0.0, 1.0, n))
        if np.all(np.diff(np.concatenate([[0.0], t])) > min_gap):
            break
    xi = rng.uniform(-1.0, 1.0, n)
    xi[np.abs(xi) < 0.05] = 0.5
    return StepProfile(tuple(t), tuple(xi))


def c06_lower_bound(ctx):
    rng = rng_stream(_sub_seed(ctx.seed, 6), 0)
    H = 0.7
    fine = ctx.budget.fine_nodes
    mins = []
    for _ in range(ctx.budget.lower_bound_profiles):
        prof = random_profile(rng)
        a = spectrum.verify_lower_bound(prof, H, 30, fine // 2).min_ratio
        b = spectrum.verify_lower_bound(prof, H, 30, fine).min_ratio
        mins.append((a, b))
    mins = np.array(mins)
    suite_coarse, suite_fine = float(mins[:, 0].min()), float(mins[:, 1].min())
    stable = abs(suite_fine / suite_coarse - 1) <= 0.2
    ok = suite_fine > 0 and stable
    return ok, {"min_ratio": suite_fine, "min_ratio_half_nodes": suite_coarse,
                "per_profile_max_change": float(np.max(np.abs(mins[:, 1] / mins[:, 0] - 1)))}


def c07_gamma(ctx):
    g = charfn.GFunction(0.7)
    r = charfn.verify_gamma_bound(g, (1, 2, 4, 8))
    ok = bool(np.all(np.isfinite(r.integrals)) and r.spread < 2.0)
    return ok, {"integrals": r.integrals.tolist(), "ratios": r.ratios.tolist(), "c3": r.c3,
                "spread": r.spread, "envelope": r.envelope}


def c08_moments(ctx):
    rows, ok = [], True
    for H, n in ((0.7, 1), (0.7, 2), (0.85, 1)):
        paths = ctx.pool.get(H, ctx.budget.paths, ctx.budget.path_steps, 8)
        r = loctime.verify_moment_scaling(paths, n)
        e = r.expected
        good = e - 0.1 <= r.slope <= e + 0.15
        ok &= good
        rows.append({"H": H, "n": n, "slope": r.slope, "stderr": r.stderr, "expected": e,
                     "ok": good})
    return ok, {"rows": rows}


def c09_space(ctx):
    paths = ctx.pool.get(0.7, ctx.budget.paths, ctx.budget.path_steps, 8)
    r = loctime.verify_space_holder(paths, 0.15)
    return r.passed, {"slope": r.slope, "stderr": r.stderr, "gamma": 0.15,
                      "mean_abs_diff": r.mean_abs_diff.tolist()}


def c10_sup_tail(ctx):
    paths = ctx.pool.get(0.7, ctx.budget.tail_paths, ctx.budget.tail_steps, 10)
    r = simulate.verify_sup_tail(paths, (0.5, 0.25))
    dev = abs(r.slope_ratio / r.expected_ratio - 1)
    ok = bool(np.all(r.r2 > 0.95) and np.all(r.slopes < 0) and dev <= 0.15)
    return ok, {"slopes": r.slopes.tolist(), "r2": r.r2.tolist(), "ratio": r.slope_ratio,
                "expected_ratio": r.expected_ratio, "rel_dev": dev}


def c11_estimators(ctx):
    paths = ctx.pool.get(0.7, ctx.budget.paths, ctx.budget.path_steps, 8)[:20]
    diffs, mass_err = [], 0.0
    for p in paths:
        h = loctime.local_time_histogram(p, (0.0, 1.0), 0.01)
        f = loctime.local_time_fourier(p, (0.0, 1.0), 0.01)
        diffs.append(loctime.l2_relative_difference(f, h))
        mass_err = max(mass_err, abs(h.mass() - 1.0))
    ok = max(diffs) < 0.05 and mass_err < 1e-12
    return ok, {"max_l2": float(max(diffs)), "median_l2": float(np.median(diffs)),
                "mass_error": mass_err}


def c12_irregularity(ctx):
    paths = ctx.pool.get(0.7, ctx.budget.paths, ctx.budget.path_steps, 8)[: ctx.budget.irregular_paths]
    rs = tuple(2.0 ** -np.arange(5, 11))
    rough = loctime.irregularity_diagnostic(paths, r=rs)
    n = paths[0].n_steps
    line = PathSample.injected(np.arange(n + 1) / n, 1.0 / n, 0.7)
    smooth = loctime.irregularity_diagnostic([line], r=rs)
    ok = rough.passed and not smooth.passed
    return ok, {"rosenblatt_floor": rough.floor.tolist(), "rosenblatt_trend": rough.trend,
                "linear_floor": smooth.floor.tolist(), "linear_trend": smooth.trend}


CRITERIA: dict[int, tuple[str, Callable]] = {
    1: ("Riesz spectrum decay slope", c01_decay),
    2: ("interval scaling of singular values", c02_scaling),
    3: ("simplex x sphere Gamma identity", c03_simplex_sphere),
    4: ("characteristic modulus vs Monte Carlo", c04_product),
    5: ("Fourier integrability and U-scaling", c05_fourier),
    6: ("singular value lower bound", c06_lower_bound),
    7: ("Gamma-type moment bound for G", c07_gamma),
    8: ("local time moment scaling", c08_moments),
    9: ("space Holder regularity of local time", c09_space),
    10: ("sup-increment exponential tail", c10_sup_tail),
    11: ("histogram vs Fourier local time", c11_estimators),
    12: ("irregularity floor and negative control", c12_irregularity),
}


@dataclass
class _Context:
    seed: int
    budget: Budget
    pool: _PathPool


def make_context(seed: int = 42, budget: str = "desk", threads: int = 1) -> _Context:
    b = BUDGETS[budget]
    return _Context(seed, b, _PathPool(seed, b, threads))


def run_criterion(cid: int, ctx: _Context) -> CriterionResult:
    name, fn = CRITERIA[cid]
    t0 = time.perf_counter()
    try:
        ok, detail = fn(ctx)
        err = ""
    except RosenlabError as exc:
        ok, detail, err = False, {}, f"{exc.code}: {exc}"
    return CriterionResult(cid, name, bool(ok), detail, time.perf_counter() - t0, err)


def run_all(seed: int = 42, budget: str = "desk", threads: int = 1, only=None,
            report: Callable[[CriterionResult], None] | None = None) -> list:
    ctx = make_context(seed, budget, threads)
    out = []
    for cid in sorted(only or CRITERIA):
        res = run_criterion(cid, ctx)
        if report:
            report(res)
        out.append(res)
    return out
