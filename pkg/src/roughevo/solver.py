"""Mild solutions of ``dy = A y dt + G y dx`` on the spectral testbed."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rough_path import Lift, TimeGrid, holder_seminorm
from .scale_model import MultOperator, ScaleModel, scale_norm
from .sewing import ControlledFunction, conv_integral, delta1_hat_rows, remainder_rows


class SolverError(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class SolverConfig:
    """Exponents, driver and operators of one solve.

    ``eta`` is the Hölder exponent the driver is assumed to have and ``alpha``
    the extra spatial regularity; they must satisfy
    ``1/3 < eta <= 1/2`` and ``1 - 2 eta < alpha < eta``.
    """

    eta: float
    alpha: float
    lift: Lift
    model: ScaleModel
    G: MultOperator
    picard_tol: float = 1e-10
    picard_max_iter: int = 60
    window_floor: int = 8
    contraction: float = 0.9
    seed: int | None = None

    def __post_init__(self):
        if not (1.0 / 3.0 < self.eta <= 0.5):
            raise ValueError(f"eta={self.eta} outside (1/3, 1/2]")
        if not (1.0 - 2.0 * self.eta < self.alpha < self.eta):
            raise ValueError(
                f"alpha={self.alpha} outside (1 - 2 eta, eta) = ({1 - 2 * self.eta:g}, {self.eta:g})"
            )
        if self.G.model != self.model:
            raise ValueError("G belongs to a different model")
        if not self.picard_tol > 0 or self.picard_max_iter < 1:
            raise ValueError("invalid Picard settings")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction threshold must lie in (0, 1)")

    @property
    def grid(self) -> TimeGrid:
        return self.lift.grid

    def with_lift(self, L: Lift) -> "SolverConfig":
        return SolverConfig(
            self.eta, self.alpha, L, self.model, self.G, self.picard_tol,
            self.picard_max_iter, self.window_floor, self.contraction, self.seed,
        )


@dataclass
class MildSolution:
    grid: TimeGrid
    values: np.ndarray
    derivative: np.ndarray
    provenance: str
    psi: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def controlled(self) -> ControlledFunction:
        return ControlledFunction(self.grid, self.values, self.derivative, "sg")

    def subsample(self, factor: int) -> "MildSolution":
        return MildSolution(
            self.grid.coarsen(factor), self.values[::factor], self.derivative[::factor],
            self.provenance, self.psi, dict(self.diagnostics),
        )


def default_psi(model: ScaleModel) -> np.ndarray:
    """Sine coefficients of ``xi (pi - xi)``: ``8 / (pi k**3)`` for odd ``k``."""
    k = np.arange(1, model.K + 1)
    return np.where(k % 2 == 1, 8.0 / (np.pi * k**3.0), 0.0)


def _G(G: MultOperator, v: np.ndarray) -> np.ndarray:
    return v @ G.matrix.T


def gamma_apply(y: ControlledFunction, psi, cfg: SolverConfig, lift: Lift | None = None) -> ControlledFunction:
    """``Gamma(y) = S(.) psi + I_{S G y}(0, .)``; the result has derivative ``G y``.

    The integrand ``G y`` carries the SG-derivative ``G y'`` of the composition.
    """
    L = cfg.lift if lift is None else lift
    psi = cfg.model._check_vector(psi)
    orbit = cfg.model.semigroup_diag(L.grid.points) * psi
    f = ControlledFunction(L.grid, _G(cfg.G, y.values), _G(cfg.G, y.derivative), "sg")
    I = conv_integral(f, L, cfg.model)
    return ControlledFunction(L.grid, orbit + I.values, f.values, "sg")


def _sup0(v: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(v, axis=-1)))


def _picard_window(psi: np.ndarray, L: Lift, cfg: SolverConfig):
    orbit = cfg.model.semigroup_diag(L.grid.points) * psi
    y = ControlledFunction(L.grid, orbit, _G(cfg.G, orbit), "sg")
    incs: list[float] = []
    scale = max(_sup0(orbit), np.finfo(float).tiny)
    for _ in range(cfg.picard_max_iter):
        z = gamma_apply(y, psi, cfg, L)
        inc = _sup0(z.values - y.values)
        incs.append(inc)
        y = z
        scale = max(scale, _sup0(z.values))
        if inc <= cfg.picard_tol * scale:
            ratios = [b / a for a, b in zip(incs, incs[1:]) if a > 0]
            return y, incs, ratios, True
    ratios = [b / a for a, b in zip(incs, incs[1:]) if a > 0]
    return y, incs, ratios, False


def fixed_point_residual(sol: MildSolution, cfg: SolverConfig) -> np.ndarray:
    """``|y(t_k) - S(t_k) psi - I_{S G y}(0, t_k)|_0`` at every grid point."""
    f = ControlledFunction(sol.grid, _G(cfg.G, sol.values), _G(cfg.G, sol.derivative), "sg")
    I = conv_integral(f, cfg.lift, cfg.model)
    orbit = cfg.model.semigroup_diag(sol.grid.points) * sol.psi
    return np.linalg.norm(sol.values - orbit - I.values, axis=-1)


def picard_solve(psi, cfg: SolverConfig) -> MildSolution:
    """Picard iteration ``y <- Gamma(y)`` from ``S(.) psi`` with windowed continuation.

    A window is accepted when the iteration converges to ``picard_tol``
    (relative to the sup norm of the iterate) with every successive-increment
    ratio below ``cfg.contraction``; otherwise it is halved, down to
    ``cfg.window_floor`` steps.  The next window restarts from the terminal value.
    """
    psi = cfg.model._check_vector(psi).copy()
    grid = cfg.grid
    N, K = grid.N, cfg.model.K
    if not np.any(psi):
        zero = np.zeros((N + 1, K))
        return MildSolution(grid, zero, zero.copy(), "picard", psi, {"windows": [], "trivial": True})
    values = np.zeros((N + 1, K))
    deriv = np.zeros((N + 1, K))
    values[0] = psi
    windows = []
    a, width = 0, N
    start = psi
    while a < N:
        w = min(width, N - a)
        while True:
            L = cfg.lift.window(a, a + w)
            y, incs, ratios, ok = _picard_window(start, L, cfg)
            accepted = ok and all(r < cfg.contraction for r in ratios)
            if accepted:
                break
            if w <= cfg.window_floor:
                raise SolverError(
                    f"Picard iteration failed on window [{a}, {a + w}] at the floor size",
                    {"windows": windows, "increments": incs, "ratios": ratios},
                )
            w = max(cfg.window_floor, w // 2)
        values[a : a + w + 1] = y.values
        deriv[a : a + w + 1] = _G(cfg.G, y.values)
        windows.append({"start": a, "end": a + w, "iterations": len(incs), "increments": incs, "ratios": ratios})
        start = y.values[-1]
        a += w
        width = w
    sol = MildSolution(grid, values, deriv, "picard", psi, {"windows": windows})
    res = fixed_point_residual(sol, cfg)
    sol.diagnostics["residual"] = float(np.max(res))
    sol.diagnostics["residual_rel"] = float(np.max(res) / max(_sup0(values), np.finfo(float).tiny))
    return sol


def euler_solve(psi, cfg: SolverConfig) -> MildSolution:
    """Rough exponential Euler ``y_{k+1} = S(h) (y_k + G y_k dx_k + G^2 y_k X_k)``."""
    psi = cfg.model._check_vector(psi).copy()
    grid = cfg.grid
    M = cfg.G.matrix
    M2 = cfg.G.squared
    d = cfg.model.semigroup_diag(grid.h)
    dx = cfg.lift.increments
    xx = cfg.lift.step_areas
    y = np.empty((grid.N + 1, cfg.model.K))
    y[0] = psi
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(grid.N):
            y[k + 1] = d * (y[k] + dx[k] * (M @ y[k]) + xx[k] * (M2 @ y[k]))
            if not np.all(np.isfinite(y[k + 1])):
                raise FloatingPointError(f"euler_solve overflow at step {k + 1}")
    return MildSolution(grid, y, _G(cfg.G, y), "euler", psi, {})


@dataclass(frozen=True)
class YNorm:
    """Components of the solution-space norm plus the byproduct seminorm of ``d1hat y``."""

    sup_y: float
    sup_derivative: float
    remainder: float
    d1hat_derivative: float
    d1hat_y: float

    @property
    def total(self) -> float:
        return self.sup_y + self.sup_derivative + self.remainder + self.d1hat_derivative

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.sup_y, self.sup_derivative, self.remainder, self.d1hat_derivative)


def y_space_norm(sol: MildSolution, cfg: SolverConfig) -> YNorm:
    """Exact grid values of the four norm components, all pairs scanned."""
    m, eta, alpha = cfg.model, cfg.eta, cfg.alpha
    L = cfg.lift
    if L.grid != sol.grid:
        raise ValueError("solution and lift live on different grids")
    sup_y = float(np.max(scale_norm(m, eta + alpha, sol.values)))
    sup_d = float(np.max(scale_norm(m, alpha, sol.derivative)))
    row, t = remainder_rows(sol.controlled(), L, m, alpha)
    rem = holder_seminorm(row, eta + alpha, times=t)
    row, t = delta1_hat_rows(sol.derivative, sol.grid, m, alpha)
    dd = holder_seminorm(row, alpha, times=t)
    row, t = delta1_hat_rows(sol.values, sol.grid, m, alpha)
    dy = holder_seminorm(row, eta, times=t)
    return YNorm(sup_y, sup_d, rem, dd, dy)


@dataclass(frozen=True)
class SmoothingProfile:
    times: np.ndarray
    profile: np.ndarray
    mu: float

    @property
    def max(self) -> float:
        return float(np.max(self.profile))

    def window_max(self, t_lo: float) -> float:
        """Max of the profile over ``t >= t_lo``."""
        sel = self.times >= t_lo * (1 - 1e-12)
        if not np.any(sel):
            raise ValueError("no grid points in the window")
        return float(np.max(self.profile[sel]))


def smoothing_profile(sol: MildSolution, mu: float, cfg: SolverConfig) -> SmoothingProfile:
    """``t ** (1 + mu - eta - alpha) |y(t)|_{1 + mu}`` at the grid points ``t > 0``."""
    upper = 2 * cfg.eta + cfg.alpha - 1
    if not 0 <= mu < upper:
        raise ValueError(f"mu={mu} outside [0, {upper:g})")
    t = sol.grid.points[1:]
    w = t ** (1 + mu - cfg.eta - cfg.alpha) * scale_norm(cfg.model, 1 + mu, sol.values[1:])
    return SmoothingProfile(t, w, mu)
