"""Domain types, validation, RNG streams and run manifests.

Everything here is immutable after construction so it can be shared
between worker threads without copying.
"""
from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

__all__ = [
    "RosenlabError", "DomainError", "BudgetExceeded", "QuadratureError",
    "Hurst", "StepProfile", "Spectrum", "PathSample", "LocalTimeEstimate",
    "RunManifest", "make_rng_streams", "read_config", "TOOLKIT_VERSION",
]

TOOLKIT_VERSION = "0.1.0"


class RosenlabError(Exception):
    """Base class; ``code`` ends up in manifests and CLI output."""

    code = "error"


class DomainError(RosenlabError, ValueError):
    code = "domain"


class BudgetExceeded(RosenlabError):
    code = "budget"


class QuadratureError(RosenlabError):
    code = "quadrature"


@dataclass(frozen=True)
class Hurst:
    """Hurst index of the Rosenblatt process, strictly inside (1/2, 1)."""

    h: float

    def __post_init__(self):
        h = float(self.h)
        if not (math.isfinite(h) and 0.5 < h < 1.0):
            raise DomainError(f"H out of (0.5,1): {self.h!r}")
        object.__setattr__(self, "h", h)

    @classmethod
    def of(cls, h: "Hurst | float") -> "Hurst":
        return h if isinstance(h, Hurst) else cls(h)

    def alpha(self) -> float:
        """Riesz order of the square-root kernel, H/2."""
        return self.h / 2.0

    def holder_space_limit(self) -> float:
        """Supremum (1-H)/(2H) of admissible space-Holder orders."""
        return (1.0 - self.h) / (2.0 * self.h)

    def hurst_prime(self) -> float:
        """Hurst index (H+1)/2 of the underlying fractional Gaussian noise."""
        return (self.h + 1.0) / 2.0


@dataclass(frozen=True)
class StepProfile:
    """Multiplier g = sum_j xi_j 1_[0, t_j].

    Parameters
    ----------
    times : sequence of float
        Strictly increasing positive breakpoints t_1 < ... < t_n.
    xi : sequence of float
        Coefficients xi_j of the indicator sum.
    """

    times: tuple
    xi: tuple

    def __post_init__(self):
        t = tuple(float(v) for v in np.atleast_1d(self.times))
        x = tuple(float(v) for v in np.atleast_1d(self.xi))
        if len(t) < 1:
            raise DomainError("profile needs at least one breakpoint")
        if len(t) != len(x):
            raise DomainError("times and xi differ in length")
        if not all(math.isfinite(v) for v in t + x):
            raise DomainError("profile entries must be finite")
        if t[0] <= 0 or any(b <= a for a, b in zip(t, t[1:])):
            raise DomainError("times must be positive and strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "xi", x)

    @classmethod
    def from_levels(cls, times: Sequence[float], levels: Sequence[float]) -> "StepProfile":
        """Build from the levels xi'_j taken on I_j = [t_{j-1}, t_j]."""
        lv = [float(v) for v in levels] + [0.0]
        return cls(tuple(times), tuple(lv[j] - lv[j + 1] for j in range(len(lv) - 1)))

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def horizon(self) -> float:
        return self.times[-1]

    def levels(self) -> tuple:
        """xi'_j = sum_{l >= j} xi_l, the value of g on I_j."""
        out, acc = [], 0.0
        for v in reversed(self.xi):
            acc += v
            out.append(acc)
        return tuple(reversed(out))

    def intervals(self) -> list:
        """List of (a, b) for I_j."""
        edges = (0.0,) + self.times
        return list(zip(edges[:-1], edges[1:]))

    def segments(self) -> list:
        """(a, b, level) for every I_j."""
        return [(a, b, v) for (a, b), v in zip(self.intervals(), self.levels())]

    def scaled(self, c: float) -> "StepProfile":
        return StepProfile(self.times, tuple(c * v for v in self.xi))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for t, v in zip(self.times, self.xi):
            out += v * ((x >= 0) & (x <= t))
        return out


@dataclass(frozen=True)
class Spectrum:
    """Signed eigenvalues of a discretized self-adjoint operator.

    ``eigenvalues`` are sorted by decreasing magnitude and
    ``singular_values`` is their absolute value.  ``tail_sq`` is the
    Hilbert-Schmidt mass sum_{k>K} lambda_k^2 not represented by the stored
    values, computed from an exact norm when available.
    """

    eigenvalues: np.ndarray
    discretization_size: int = 0
    truncation_radius: float = math.inf
    residual_imag: float = 0.0
    tail_sq: float = 0.0
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float).ravel()
        if ev.size and not np.all(np.isfinite(ev)):
            raise DomainError("non-finite eigenvalue")
        order = np.argsort(-np.abs(ev), kind="stable")
        ev = ev[order]
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "tail_sq", max(float(self.tail_sq), 0.0))

    @property
    def singular_values(self) -> np.ndarray:
        return np.abs(self.eigenvalues)

    def __len__(self):
        return self.eigenvalues.size

    def hs_norm_sq(self) -> float:
        return float(np.sum(self.eigenvalues ** 2) + self.tail_sq)

    def scaled(self, c: float) -> "Spectrum":
        return dataclasses.replace(self, eigenvalues=c * self.eigenvalues,
                                   tail_sq=c * c * self.tail_sq)


@dataclass(frozen=True)
class PathSample:
    """A trajectory on the uniform grid t_i = i*dt with Z_0 = 0."""

    dt: float
    values: np.ndarray
    hurst: Hurst
    seed: int = 0
    generator: str = "hermite2-fgn"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 2:
            raise DomainError("path needs at least two points")
        if v[0] != 0.0:
            raise DomainError("path must start at 0")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if self.generator not in ("hermite2-fgn", "injected"):
            raise DomainError(f"unknown generator {self.generator!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "hurst", Hurst.of(self.hurst))

    @property
    def n_steps(self) -> int:
        return self.values.size - 1

    @property
    def horizon(self) -> float:
        return self.dt * self.n_steps

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.values.size)

    @classmethod
    def injected(cls, values, dt: float, hurst: float = 0.7) -> "PathSample":
        return cls(dt=dt, values=np.asarray(values, float), hurst=Hurst.of(hurst),
                   seed=0, generator="injected")


@dataclass(frozen=True)
class LocalTimeEstimate:
    """Occupation density of a path over ``interval`` on a uniform grid."""

    interval: tuple
    bin_width: float
    x_grid: np.ndarray
    density: np.ndarray
    method: str
    clipped_mass: float = 0.0

    def mass(self) -> float:
        return float(np.sum(self.density) * self.bin_width)

    def at(self, x: float) -> float:
        """Density of the grid cell containing ``x`` (0 outside the grid)."""
        i = int(np.floor((x - self.x_grid[0]) / self.bin_width + 0.5))
        if 0 <= i < self.density.size:
            return float(self.density[i])
        return 0.0


def _jsonable(v):
    if isinstance(v, Hurst):
        return v.h
    if isinstance(v, StepProfile):
        return {"times": list(v.times), "xi": list(v.xi)}
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (tuple, list)):
        return [_jsonable(u) for u in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(u) for k, u in v.items()}
    if isinstance(v, Path):
        return str(v)
    return v


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to rerun a stochastic computation bit-for-bit."""

    seed: int
    params: Mapping[str, Any]
    version: str = TOOLKIT_VERSION
    started: str = ""
    finished: str = ""
    status: str = "ok"
    conventions: Mapping[str, Any] = field(
        default_factory=lambda: {"variance": "Var Z_1 = 1", "rng": "Philox/SeedSequence"})

    @classmethod
    def start(cls, seed: int, params: Mapping[str, Any]) -> "RunManifest":
        now = _dt.datetime.now(_dt.timezone.utc).isoformat()
        return cls(seed=int(seed), params=_jsonable(dict(params)), started=now)

    def finish(self, status: str = "ok") -> "RunManifest":
        now = _dt.datetime.now(_dt.timezone.utc).isoformat()
        return dataclasses.replace(self, finished=now, status=status)

    def to_json(self) -> str:
        return json.dumps(_jsonable(dataclasses.asdict(self)), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path


def make_rng_streams(master_seed: int, count: int) -> list:
    """Independent counter-based generators split from one master seed.

    Stream i depends only on (master_seed, i), so adding workers or paths
    never changes earlier streams.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    children = np.random.SeedSequence(int(master_seed)).spawn(int(count))
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def rng_stream(master_seed: int, index: int) -> np.random.Generator:
    """Stream ``index`` of :func:`make_rng_streams` without building the rest."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected 'key = value'")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out
