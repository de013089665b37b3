"""Increment operators, the sewing map and rough (convolution) integrals.

Two-parameter objects are evaluated lazily: a germ is a vectorized callable
``germ(s, t) -> array`` over arrays of left and right times.  Integrals along
a grid are stored as ``I(0, t_k)`` only; pairwise values follow from the
Chasles identity ``I(s, t) = I(0, t) - S(t - s) I(0, s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import signal

from .rough_path import Lift, TimeGrid, holder_seminorm, xx_eval
from .scale_model import ScaleModel, scale_norm


class SewingError(RuntimeError):
    """Dyadic compensated sums failed to form a Cauchy sequence."""

    def __init__(self, message: str, trace: list[dict]):
        super().__init__(message)
        self.trace = trace


def _S(model: ScaleModel | None, tau, v):
    """``S(tau) v`` with broadcasting over leading axes; identity when ``model`` is None."""
    if model is None:
        return v
    return model.semigroup_diag(tau) * v


def _check_order(*times):
    for a, b in zip(times, times[1:]):
        if np.any(np.asarray(a) > np.asarray(b)):
            raise ValueError("time arguments must be ordered")


# increments -----------------------------------------------------------------


def increment(kind: str, *args, model: ScaleModel | None = None):
    """Evaluate one of the increment operators.

    ``d1hat(y, s, t) = y(t) - S(t-s) y(s)``;
    ``d2hat(z, s, t, u) = z(s,u) - z(t,u) - S(u-t) z(s,t)``;
    ``dS2(z, s, t, u) = S(t-s) z(s,u) - z(t,u) - S(t-s) z(s,t)``;
    ``d1`` and ``d2`` are the same with ``S = I``.  ``y`` and ``z`` are
    callables of one and two times.
    """
    if kind in ("d1hat", "d1"):
        y, s, t = args
        _check_order(s, t)
        m = model if kind == "d1hat" else None
        if kind == "d1hat" and model is None:
            raise ValueError("d1hat needs a model")
        return y(t) - _S(m, np.asarray(t) - s, y(s))
    if kind in ("d2hat", "dS2", "d2"):
        z, s, t, u = args
        _check_order(s, t, u)
        if kind == "d2":
            return z(s, u) - z(t, u) - z(s, t)
        if model is None:
            raise ValueError(f"{kind} needs a model")
        if kind == "d2hat":
            return z(s, u) - z(t, u) - _S(model, np.asarray(u) - t, z(s, t))
        tau = np.asarray(t) - s
        return _S(model, tau, z(s, u)) - z(t, u) - _S(model, tau, z(s, t))
    raise ValueError(f"unknown increment {kind!r}")


# controlled functions and germs ----------------------------------------------


@dataclass(frozen=True)
class ControlledFunction:
    """Grid function with its (SG- or Gubinelli) derivative.

    ``flag="sg"`` means the remainder is ``d1hat f(s,t) - S(t-s) f'(s) dx(s,t)``;
    ``flag="plain"`` uses ``S = I``.  Values have shape ``(N + 1, d)``.
    """

    grid: TimeGrid
    values: np.ndarray
    derivative: np.ndarray
    flag: str = "sg"

    def __post_init__(self):
        f = np.asarray(self.values, dtype=float)
        fd = np.asarray(self.derivative, dtype=float)
        if f.ndim == 1:
            f = f[:, None]
        if fd.ndim == 1:
            fd = fd[:, None]
        if f.shape[0] != self.grid.N + 1 or fd.shape != f.shape:
            raise ValueError("values and derivative must both have shape (N + 1, d)")
        if self.flag not in ("sg", "plain"):
            raise ValueError(f"unknown flag {self.flag!r}")
        object.__setattr__(self, "values", f)
        object.__setattr__(self, "derivative", fd)

    def __add__(self, other: "ControlledFunction") -> "ControlledFunction":
        if other.grid != self.grid or other.flag != self.flag:
            raise ValueError("incompatible controlled functions")
        return ControlledFunction(
            self.grid, self.values + other.values, self.derivative + other.derivative, self.flag
        )

    def subsample(self, factor: int) -> "ControlledFunction":
        return ControlledFunction(
            self.grid.coarsen(factor), self.values[::factor], self.derivative[::factor], self.flag
        )

    def remainder(self, lift: Lift, i, j, model: ScaleModel | None = None) -> np.ndarray:
        """Remainder ``R(t_i, t_j)`` for index arrays ``i <= j``."""
        i, j = np.asarray(i), np.asarray(j)
        dx = lift.path.values[j] - lift.path.values[i]
        m = model if self.flag == "sg" else None
        if self.flag == "sg" and model is None:
            raise ValueError("SG remainder needs a model")
        tau = self.grid.points[j] - self.grid.points[i]
        return self.values[j] - _S(m, tau, self.values[i] + self.derivative[i] * dx[..., None])


class Germ:
    """Two-parameter function ``(s, t) -> E`` evaluated on arrays of times."""

    #: smallest admissible partition step (``0`` for germs defined everywhere)
    resolution: float = 0.0

    def __init__(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None, resolution: float = 0.0):
        self._fn = fn
        self.resolution = resolution

    def __call__(self, s, t) -> np.ndarray:
        return self._fn(np.asarray(s, float), np.asarray(t, float))

    def __add__(self, other: "Germ") -> "Germ":
        return Germ(lambda s, t: self(s, t) + other(s, t), max(self.resolution, other.resolution))


class ControlledGerm(Germ):
    """``g(s, t) = dx(s,t) f(s) + X(s,t) f'(s)`` on grid times."""

    def __init__(self, f: ControlledFunction, L: Lift, with_area: bool = True):
        if f.grid != L.grid:
            raise ValueError("controlled function and lift live on different grids")
        self.f, self.lift, self.with_area = f, L, with_area
        self.resolution = L.grid.h

    def at(self, i, j) -> np.ndarray:
        i, j = np.asarray(i), np.asarray(j)
        x = self.lift.path.values
        out = (x[j] - x[i])[..., None] * self.f.values[i]
        if self.with_area:
            out = out + xx_eval(self.lift, i, j)[..., None] * self.f.derivative[i]
        return out

    def __call__(self, s, t) -> np.ndarray:
        g = self.lift.grid
        return self.at(g.index(s), g.index(t))


# sewing ---------------------------------------------------------------------


@dataclass
class SewResult:
    """Limit of the compensated sums over ``[s, t]`` and the refinement trace."""

    integral: np.ndarray
    remainder_map: np.ndarray
    trace: list[dict] = field(default_factory=list)
    converged: bool = False


def compensated_sum(germ: Germ, s: float, t: float, n: int, model: ScaleModel | None = None) -> np.ndarray:
    """``sum_i S(t - t_{i-1}) germ(t_{i-1}, t_i)`` over the uniform ``n``-piece partition."""
    pts = s + (t - s) * np.arange(n + 1) / n
    pts[-1] = t
    g = germ(pts[:-1], pts[1:])
    return np.sum(_S(model, t - pts[:-1], g), axis=0)


def _richardson(sums: list[np.ndarray], order: int) -> np.ndarray:
    # error expansion in powers of the dyadic mesh
    table = list(sums[-(order + 1):])
    for j in range(1, order + 1):
        table = [(2**j * table[k + 1] - table[k]) / (2**j - 1) for k in range(len(table) - 1)]
    return table[-1]


def sew(
    germ: Germ,
    s: float,
    t: float,
    model: ScaleModel | None = None,
    tol: float = 1e-10,
    max_depth: int = 14,
    extrapolate: int = 0,
) -> SewResult:
    """Sewing map through dyadic compensated sums.

    Refines ``[s, t]`` dyadically until successive sums differ by less than
    ``tol`` in ``E_0`` (or ``max_depth``, or the germ's grid resolution, is
    reached).  With ``extrapolate = p > 0`` the returned value is the
    ``p``-fold Richardson extrapolation of the last ``p + 1`` levels, which
    assumes an error expansion in integer powers of the mesh (smooth germs).

    Returns the integral ``I(s, t)`` and ``M(s, t) = S(t - s) germ(s, t) - I(s, t)``.
    Raises :class:`SewingError` if the level gap grows on two consecutive
    levels, counting only levels with ``mesh * mu_K <= 1``; coarser levels are
    pre-asymptotic for the stiff modes.
    """
    if not s < t:
        raise ValueError("need s < t")
    sums: list[np.ndarray] = []
    trace: list[dict] = []
    norm = (lambda v: float(np.linalg.norm(v))) if model is None else (lambda v: float(scale_norm(model, 0.0, v)))
    converged = False
    for level in range(max_depth + 1):
        n = 2**level
        if germ.resolution and (t - s) / n < germ.resolution * (1 - 1e-9):
            break
        sums.append(compensated_sum(germ, s, t, n, model))
        if level == 0:
            trace.append({"level": 0, "gap": None})
            continue
        gap = norm(sums[-1] - sums[-2])
        trace.append({"level": level, "gap": gap})
        if gap < tol:
            converged = True
            break
        # the alarm only watches levels whose mesh resolves the fastest mode
        resolved = model is None or (t - s) / n * model.eigenvalues[-1] <= 1.0
        trace[-1]["resolved"] = bool(resolved)
        gaps = [r["gap"] for r in trace if r.get("resolved")]
        if len(gaps) >= 3 and gaps[-1] > gaps[-2] > gaps[-3]:
            raise SewingError(f"compensated sums diverge on [{s}, {t}] at level {level}", trace)
    if extrapolate and len(sums) > extrapolate:
        value = _richardson(sums, extrapolate)
    else:
        value = sums[-1]
    g_st = germ(np.array([s]), np.array([t]))[0]
    M = _S(model, t - s, g_st) - value
    return SewResult(value, M, trace, converged)


# grid integrals ---------------------------------------------------------------


@dataclass
class GridIntegral:
    """Values ``I(0, t_k)``; ``model=None`` means a plain (additive) integral."""

    grid: TimeGrid
    values: np.ndarray
    model: ScaleModel | None = None
    refinement_gap: float | None = None

    def pair(self, i, j) -> np.ndarray:
        """``I(t_i, t_j)`` through the Chasles identity."""
        i, j = np.asarray(i), np.asarray(j)
        if np.any(i > j):
            raise ValueError("need i <= j")
        tau = self.grid.points[j] - self.grid.points[i]
        return self.values[j] - _S(self.model, tau, self.values[i])


def _propagate(decay: np.ndarray | None, germs: np.ndarray) -> np.ndarray:
    """``I_0 = 0``, ``I_{k+1} = decay * (I_k + germs_k)``, column by column."""
    n, d = germs.shape
    out = np.zeros((n + 1, d))
    if decay is None:
        out[1:] = np.cumsum(germs, axis=0)
        return out
    for c in range(d):
        a = decay[c]
        out[1:, c] = signal.lfilter([a], [1.0, -a], germs[:, c])
    return out


def _check_finite(values: np.ndarray, what: str):
    if not np.all(np.isfinite(values)):
        k = int(np.argmax(~np.all(np.isfinite(values.reshape(values.shape[0], -1)), axis=1)))
        raise FloatingPointError(f"{what}: non-finite value at grid index {k}")


def _step_germs(f: ControlledFunction, L: Lift, with_area: bool = True) -> np.ndarray:
    dx = L.increments[:, None]
    g = dx * f.values[:-1]
    if with_area:
        g = g + L.step_areas[:, None] * f.derivative[:-1]
    return g


def conv_integral(
    f: ControlledFunction, L: Lift, model: ScaleModel, assess: bool = False, with_area: bool = True
) -> GridIntegral:
    """Rough convolution integral ``int_0^t S(t - r) f(r) dx(r)`` on the grid.

    Telescoping form of the left-anchored compensated sum:
    ``I(0, t_{k+1}) = S(h) (I(0, t_k) + g(t_k, t_{k+1}))``.  With
    ``with_area=False`` the level-2 term is dropped (Young sum).  With
    ``assess=True`` the computation is repeated on the half grid and the sup
    gap at shared points is stored in ``refinement_gap``.
    """
    if f.grid != L.grid:
        raise ValueError("controlled function and lift live on different grids")
    if f.flag != "sg":
        raise ValueError("convolution integral needs an SG-controlled function")
    if f.values.shape[1] != model.K:
        raise ValueError("controlled function dimension does not match the model")
    germs = _step_germs(f, L, with_area)
    vals = _propagate(model.semigroup_diag(L.grid.h), germs)
    _check_finite(vals, "conv_integral")
    gap = None
    if assess and L.grid.N % 2 == 0:
        coarse = conv_integral(f.subsample(2), L.subsample(2), model, with_area=with_area)
        gap = float(np.max(scale_norm(model, 0.0, coarse.values - vals[::2])))
    return GridIntegral(L.grid, vals, model, gap)


def rough_integral(
    f: ControlledFunction, L: Lift, assess: bool = False, with_area: bool = True
) -> GridIntegral:
    """Rough integral ``int f dx`` (``S = I``): ``I_{k+1} = I_k + f_k dx_k + f'_k X_k``."""
    if f.grid != L.grid:
        raise ValueError("controlled function and lift live on different grids")
    if f.flag != "plain":
        raise ValueError("rough integral needs a plain controlled function")
    vals = _propagate(None, _step_germs(f, L, with_area))
    _check_finite(vals, "rough_integral")
    gap = None
    if assess and L.grid.N % 2 == 0:
        coarse = rough_integral(f.subsample(2), L.subsample(2), with_area=with_area)
        gap = float(np.max(np.linalg.norm(coarse.values - vals[::2], axis=-1)))
    return GridIntegral(L.grid, vals, None, gap)


def direct_pair_sum(f: ControlledFunction, L: Lift, i: int, j: int, model: ScaleModel | None) -> np.ndarray:
    """Compensated sum over the grid points between ``t_i`` and ``t_j``, computed directly."""
    if i == j:
        return np.zeros(f.values.shape[1])
    k = np.arange(i, j)
    g = ControlledGerm(f, L).at(k, k + 1)
    tau = L.grid.points[j] - L.grid.points[k]
    return np.sum(_S(model, tau[:, None] if model is None else tau, g), axis=0)


@dataclass
class Remainder:
    """Accessor for ``R(t_i, t_j)`` plus its grid seminorm."""

    f: ControlledFunction
    lift: Lift
    model: ScaleModel | None
    rho: float
    lam: float
    seminorm: float

    def __call__(self, i, j) -> np.ndarray:
        return self.f.remainder(self.lift, i, j, self.model)


def _pair_norm(model: ScaleModel | None, lam: float, v: np.ndarray) -> np.ndarray:
    if model is None:
        return np.max(np.abs(v), axis=-1)
    return scale_norm(model, lam, v)


def remainder_rows(f: ControlledFunction, L: Lift, model: ScaleModel | None, lam: float = 0.0):
    """Callable ``row(i)`` giving ``|R(t_i, t_j)|_lam`` for ``j > i``."""
    N = L.grid.N
    x = L.path.values
    t = L.grid.points
    sg = f.flag == "sg"
    decay = model.semigroup_diag(np.arange(N + 1) * L.grid.h) if sg else None

    def row(i):
        j = np.arange(i + 1, N + 1)
        base = f.values[i] + f.derivative[i] * (x[j] - x[i])[:, None]
        r = f.values[j] - (decay[j - i] * base if sg else base)
        return _pair_norm(model, lam, r)

    return row, t


def sg_remainder(
    f: ControlledFunction, L: Lift, rho: float, model: ScaleModel | None = None, lam: float = 0.0
) -> Remainder:
    """Remainder of ``f`` against ``f'`` and its ``C^rho`` seminorm in ``E_lam``.

    Plain functions without a model are measured in the sup norm over components.
    """
    if f.flag == "sg" and model is None:
        raise ValueError("SG remainder needs a model")
    row, t = remainder_rows(f, L, model, lam)
    return Remainder(f, L, model, rho, lam, holder_seminorm(row, rho, times=t))


def delta1_hat_rows(values: np.ndarray, grid: TimeGrid, model: ScaleModel, lam: float):
    """Callable ``row(i)`` giving ``|y(t_j) - S(t_j - t_i) y(t_i)|_lam``."""
    decay = model.semigroup_diag(np.arange(grid.N + 1) * grid.h)

    def row(i):
        j = np.arange(i + 1, grid.N + 1)
        return scale_norm(model, lam, values[j] - decay[j - i] * values[i])

    return row, grid.points
