"""Scalar Hölder drivers, their level-2 lifts and grid seminorms."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import linalg

CHOLESKY_MAX_STEPS = 4096


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k T / N`` on ``[0, T]``."""

    T: float
    N: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("horizon must be positive")
        if int(self.N) < 1:
            raise ValueError("need at least one step")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "T", float(self.T))

    @property
    def h(self) -> float:
        return self.T / self.N

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.h

    def coarsen(self, factor: int) -> "TimeGrid":
        if self.N % factor:
            raise ValueError(f"{factor} does not divide N={self.N}")
        return TimeGrid(self.T, self.N // factor)

    def index(self, t) -> np.ndarray:
        """Grid indices of the times ``t``; raises if a time is off-grid."""
        k = np.rint(np.asarray(t, dtype=float) / self.h).astype(int)
        if np.any(np.abs(k * self.h - t) > 1e-9 * self.h) or np.any((k < 0) | (k > self.N)):
            raise ValueError("time not on grid")
        return k


@dataclass(frozen=True)
class ScalarPath:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.N + 1,):
            raise ValueError("path values must have N + 1 entries")
        if not np.all(np.isfinite(v)):
            raise ValueError("path values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def subsample(self, factor: int) -> "ScalarPath":
        return ScalarPath(self.grid.coarsen(factor), self.values[::factor])

    @classmethod
    def from_function(cls, grid: TimeGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "ScalarPath":
        return cls(grid, fn(grid.points))


@dataclass(frozen=True)
class ShiftFunction:
    """Grid values of a ``C^{2 eta}`` function ``h``; ``derivative`` is set when ``h`` is analytic."""

    grid: TimeGrid
    values: np.ndarray
    derivative: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.N + 1,) or not np.all(np.isfinite(v)):
            raise ValueError("shift values must be N + 1 finite numbers")
        object.__setattr__(self, "values", v)

    @property
    def exact_derivative(self) -> bool:
        return self.derivative is not None

    @classmethod
    def linear(cls, grid: TimeGrid, slope: float = 0.5, offset: float = 0.0) -> "ShiftFunction":
        return cls(grid, offset + slope * grid.points, lambda t: np.full_like(np.asarray(t, float), slope))

    def scaled(self, a: float) -> "ShiftFunction":
        d = self.derivative
        return ShiftFunction(self.grid, a * self.values, None if d is None else (lambda t: a * d(t)))

    def subsample(self, factor: int) -> "ShiftFunction":
        return ShiftFunction(self.grid.coarsen(factor), self.values[::factor], self.derivative)


def ito_shift(grid: TimeGrid) -> ShiftFunction:
    """``h(t) = t / 2``: turns the geometric lift of Brownian motion into the Itô lift."""
    return ShiftFunction.linear(grid, 0.5)


# fractional Brownian motion -------------------------------------------------


def _fgn_autocov(H: float, n: int) -> np.ndarray:
    k = np.arange(n, dtype=float)
    return 0.5 * (np.abs(k + 1) ** (2 * H) + np.abs(k - 1) ** (2 * H) - 2 * k ** (2 * H))


@lru_cache(maxsize=8)
def _fgn_cholesky(H: float, N: int) -> np.ndarray:
    cov = linalg.toeplitz(_fgn_autocov(H, N))
    try:
        return linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as exc:
        raise ValueError(
            f"increment covariance not numerically positive definite (H={H}, N={N}): {exc}"
        ) from exc


def _fgn_circulant(H: float, N: int, rng: np.random.Generator) -> np.ndarray:
    # Davies-Harte embedding of the N x N Toeplitz covariance into a 2N circulant
    r = _fgn_autocov(H, N + 1)
    row = np.concatenate([r[: N + 1], r[N - 1 : 0 : -1]])
    lam = np.fft.fft(row).real
    if lam.min() < -1e-10 * lam.max():
        raise ValueError(f"circulant embedding not nonnegative (min eigenvalue {lam.min():.3e})")
    lam = np.clip(lam, 0.0, None)
    m = row.size
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w = np.fft.fft(np.sqrt(lam / m) * z)
    return w.real[:N]


def sample_fbm(H: float, grid: TimeGrid, seed: int, method: str = "cholesky") -> ScalarPath:
    """Exact fBm sample on ``grid`` with ``x(0) = 0``.

    ``method="cholesky"`` factors the covariance of the increments and is
    limited to ``N <= 4096``; ``method="circulant"`` uses circulant embedding
    and has no size limit.
    """
    if not (1.0 / 3.0 < H <= 1.0):
        raise ValueError(f"Hurst index {H} outside (1/3, 1]")
    N = grid.N
    if N < 2:
        raise ValueError("need N >= 2")
    rng = np.random.default_rng(seed)
    if method == "cholesky":
        if N > CHOLESKY_MAX_STEPS:
            raise ValueError(
                f"N={N} exceeds the Cholesky budget ({CHOLESKY_MAX_STEPS}); use method='circulant'"
            )
        incr = _fgn_cholesky(float(H), N) @ rng.standard_normal(N)
    elif method == "circulant":
        incr = _fgn_circulant(float(H), N, rng)
    else:
        raise ValueError(f"unknown fBm method {method!r}")
    incr *= grid.h**H
    return ScalarPath(grid, np.concatenate([[0.0], np.cumsum(incr)]))


def sample_fbm_many(H: float, grid: TimeGrid, seeds) -> np.ndarray:
    """Stack of Cholesky samples, one row per seed (Monte-Carlo helper)."""
    L = _fgn_cholesky(float(H), grid.N)
    z = np.stack([np.random.default_rng(s).standard_normal(grid.N) for s in seeds])
    incr = z @ L.T * grid.h**H
    return np.hstack([np.zeros((len(z), 1)), np.cumsum(incr, axis=1)])


# lifts ----------------------------------------------------------------------


@dataclass(frozen=True)
class Lift:
    """Level-2 object over a scalar path, stored as one area per grid step.

    Pairs of grid points are reconstructed from the steps with the Chen
    recursion, so storage is O(N).
    """

    path: ScalarPath
    step_areas: np.ndarray
    kind: str = "geometric"
    shift: ShiftFunction | None = None
    _cum: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.step_areas, dtype=float)
        if a.shape != (self.path.grid.N,):
            raise ValueError("need one step area per grid step")
        if self.kind not in ("geometric", "shifted", "custom"):
            raise ValueError(f"unknown lift kind {self.kind!r}")
        object.__setattr__(self, "step_areas", a)
        dx = self.path.increments
        cum = (
            np.concatenate([[0.0], np.cumsum(a)]),
            np.concatenate([[0.0], np.cumsum(dx * dx)]),
        )
        object.__setattr__(self, "_cum", cum)

    @property
    def grid(self) -> TimeGrid:
        return self.path.grid

    @property
    def increments(self) -> np.ndarray:
        return self.path.increments

    def closed_form(self, i, j) -> np.ndarray | None:
        """Defining formula of geometric and shifted lifts; ``None`` for custom ones."""
        x = self.path.values
        i, j = np.asarray(i), np.asarray(j)
        base = 0.5 * (x[j] - x[i]) ** 2
        if self.kind == "geometric":
            return base
        if self.kind == "shifted":
            return base + self.shift.values[j] - self.shift.values[i]
        return None

    def subsample(self, factor: int) -> "Lift":
        """Lift of the coarsened path, keeping the same two-parameter object."""
        n = self.grid.N // factor
        i = np.arange(n) * factor
        areas = xx_eval(self, i, i + factor)
        shift = None if self.shift is None else self.shift.subsample(factor)
        return Lift(self.path.subsample(factor), areas, self.kind, shift)

    def with_step_areas(self, areas) -> "Lift":
        return replace(self, step_areas=np.asarray(areas, dtype=float))

    def window(self, a: int, b: int) -> "Lift":
        """Restriction to grid indices ``a..b``, re-based to start at time 0."""
        if not 0 <= a < b <= self.grid.N:
            raise IndexError("need 0 <= a < b <= N")
        g = TimeGrid((b - a) * self.grid.h, b - a)
        shift = None
        if self.shift is not None:
            shift = ShiftFunction(g, self.shift.values[a : b + 1], self.shift.derivative)
        return Lift(ScalarPath(g, self.path.values[a : b + 1]), self.step_areas[a:b], self.kind, shift)


def lift(x: ScalarPath, kind: str = "geometric", h: ShiftFunction | None = None) -> Lift:
    """Geometric lift ``X(s, t) = (x(t) - x(s))**2 / 2``, optionally shifted by ``h(t) - h(s)``."""
    dx = x.increments
    areas = 0.5 * dx * dx
    if kind == "geometric":
        return Lift(x, areas, "geometric")
    if kind == "shifted":
        if h is None:
            raise ValueError("shifted lift needs a shift function")
        if h.grid != x.grid:
            raise ValueError("shift function lives on a different grid")
        return Lift(x, areas + np.diff(h.values), "shifted", h)
    if kind == "ito":
        return lift(x, "shifted", ito_shift(x.grid))
    raise ValueError(f"unknown lift kind {kind!r}")


def xx_eval(L: Lift, i, j) -> np.ndarray:
    """``X(t_i, t_j)`` from the step areas; vectorized over index arrays.

    Unrolling ``X(s, u) = X(s, t) + X(t, u) + dx(s, t) dx(t, u)`` over the
    steps between ``i`` and ``j`` gives the sum of the step areas plus the
    cross terms ``((sum dx)**2 - sum dx**2) / 2``.
    """
    i, j = np.asarray(i), np.asarray(j)
    N = L.grid.N
    if np.any(i > j) or np.any(i < 0) or np.any(j > N):
        raise IndexError("need 0 <= i <= j <= N")
    ca, cq = L._cum
    x = L.path.values
    dx = x[j] - x[i]
    return (ca[j] - ca[i]) + 0.5 * (dx * dx - (cq[j] - cq[i]))


def chen_defect(L: Lift, triples) -> float:
    """Max of ``|X(r,t) - X(r,s) - X(s,t) - dx(r,s) dx(s,t)|`` over index triples.

    The outer pair ``(r, t)`` uses the lift's defining formula when it has
    one, so step areas that disagree with the declared kind show up here.
    """
    tr = np.atleast_2d(np.asarray(triples, dtype=int))
    if tr.size == 0:
        return 0.0
    r, s, t = tr.T
    if np.any(r > s) or np.any(s > t):
        raise ValueError("triples must satisfy r <= s <= t")
    x = L.path.values
    outer = L.closed_form(r, t)
    if outer is None:
        outer = xx_eval(L, r, t)
    d = outer - xx_eval(L, r, s) - xx_eval(L, s, t) - (x[s] - x[r]) * (x[t] - x[s])
    return float(np.max(np.abs(d)))


def random_triples(N: int, count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.sort(rng.integers(0, N + 1, size=(count, 3)), axis=1)


# seminorms ------------------------------------------------------------------


def holder_seminorm(Z, exponent: float, times=None) -> float:
    """Grid Hölder seminorm, exact over all pairs.

    ``Z`` is either a 1-D array of values (one-parameter: sup of
    ``|Z(t) - Z(s)| / |t - s|**exponent``), a square array ``Z[i, j]`` of
    nonnegative sizes of a two-parameter function, or a callable ``Z(i)``
    returning ``|Z(t_i, t_j)|`` for ``j = i + 1, ..., N`` (streamed rows).
    ``times`` defaults to ``0, 1, ..., N`` scaled to ``[0, 1]``.
    """
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    if callable(Z):
        if times is None:
            raise ValueError("streamed rows need explicit times")
        t = np.asarray(times, dtype=float)
        rows = (Z(i) for i in range(t.size - 1))
    else:
        Z = np.asarray(Z, dtype=float)
        n = Z.shape[0]
        t = np.linspace(0.0, 1.0, n) if times is None else np.asarray(times, dtype=float)
        if Z.ndim == 1:
            rows = (np.abs(Z[i + 1 :] - Z[i]) for i in range(n - 1))
        elif Z.ndim == 2:
            rows = (np.abs(Z[i, i + 1 :]) for i in range(n - 1))
        else:
            raise ValueError("Z must be 1-D, 2-D or callable")
    best = 0.0
    for i, row in enumerate(rows):
        if row.size:
            best = max(best, float(np.max(row / (t[i + 1 :] - t[i]) ** exponent)))
    return best


def mollify(x: ScalarPath, width: float) -> ScalarPath:
    """Centered moving average of the piecewise-linear interpolant.

    The path is extended by constants outside ``[0, T]`` and the average over
    ``[t - width/2, t + width/2]`` is computed exactly from the antiderivative.
    """
    h = x.grid.h
    if width < 2 * h * (1 - 1e-12):
        raise ValueError(f"width {width} below two grid steps ({2 * h})")
    v = x.values
    T = x.grid.T
    cell = 0.5 * h * (v[:-1] + v[1:])
    prim = np.concatenate([[0.0], np.cumsum(cell)])

    def antiderivative(tau):
        tau = np.asarray(tau, dtype=float)
        out = np.empty_like(tau)
        lo, hi = tau <= 0, tau >= T
        mid = ~(lo | hi)
        out[lo] = v[0] * tau[lo]
        out[hi] = prim[-1] + v[-1] * (tau[hi] - T)
        tm = tau[mid]
        k = np.minimum((tm / h).astype(int), x.grid.N - 1)
        th = tm / h - k
        out[mid] = prim[k] + h * (th * v[k] + 0.5 * th * th * (v[k + 1] - v[k]))
        return out

    t = x.grid.points
    w2 = 0.5 * width
    return ScalarPath(x.grid, (antiderivative(t + w2) - antiderivative(t - w2)) / width)
