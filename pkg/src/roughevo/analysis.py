"""Smooth-path approximation, integral representation, lift sensitivity and the Itô formula."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .rough_path import Lift, ScalarPath, ShiftFunction, lift, mollify
from .scale_model import MultOperator, ScaleModel, default_node_count, scale_norm
from .sewing import ControlledFunction, conv_integral, rough_integral
from .solver import MildSolution, SolverConfig, euler_solve

GRADING_LEVELS = 8


# observables ----------------------------------------------------------------


@dataclass(frozen=True)
class ObservableF:
    """Time-independent ``F`` acting on nodal values, with its first two derivatives.

    ``F(v)``, ``F_x(v)[w]`` and ``F_xx(v)[w1, w2]`` all act pointwise on
    arrays whose last axis runs over the collocation nodes.
    """

    kind: str
    F: Callable[[np.ndarray], np.ndarray]
    F_x: Callable[[np.ndarray, np.ndarray], np.ndarray]
    F_xx: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

    @classmethod
    def linear(cls) -> "ObservableF":
        return cls("linear", lambda v: v, lambda v, w: w, lambda v, w1, w2: np.zeros_like(w1))

    @classmethod
    def quadratic_pointwise(cls) -> "ObservableF":
        return cls("quadratic_pointwise", lambda v: v * v, lambda v, w: 2 * v * w, lambda v, w1, w2: 2 * w1 * w2)

    @classmethod
    def from_registry(cls, name: str) -> "ObservableF":
        try:
            return OBSERVABLES[name]()
        except KeyError:
            raise ValueError(f"unknown observable {name!r}") from None

    def derivative_defects(self, v, w, eps: float = 1e-4) -> tuple[float, float]:
        """Relative mismatch of ``F_x`` and ``F_xx`` against central differences."""
        v, w = np.asarray(v, float), np.asarray(w, float)
        fd1 = (self.F(v + eps * w) - self.F(v - eps * w)) / (2 * eps)
        fd2 = (self.F(v + eps * w) - 2 * self.F(v) + self.F(v - eps * w)) / eps**2
        d1, d2 = self.F_x(v, w), self.F_xx(v, w, w)
        rel = lambda a, b: float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
        return rel(fd1, d1), (rel(fd2, d2) if np.any(d2) else float(np.max(np.abs(fd2))))


OBSERVABLES: dict[str, Callable[[], ObservableF]] = {
    "linear": ObservableF.linear,
    "quadratic_pointwise": ObservableF.quadratic_pointwise,
}


# rate tables ----------------------------------------------------------------


@dataclass
class RateTable:
    """Rows of ``(parameter, error)`` with an optional fitted log-log slope."""

    parameter: str
    resolutions: np.ndarray
    errors: np.ndarray
    extra: dict = field(default_factory=dict)
    slope: float | None = None
    fit_residual: float | None = None
    flags: list = field(default_factory=list)

    def __post_init__(self):
        self.resolutions = np.asarray(self.resolutions, dtype=float)
        self.errors = np.asarray(self.errors, dtype=float)
        if self.resolutions.shape != self.errors.shape:
            raise ValueError("need one error per resolution")

    def rows(self) -> list[tuple]:
        keys = list(self.extra)
        return [
            (r, e, *(self.extra[k][i] for k in keys))
            for i, (r, e) in enumerate(zip(self.resolutions, self.errors))
        ]


@dataclass(frozen=True)
class RateFit:
    slope: float
    residual: float


def rate_fit(table: RateTable) -> RateFit:
    """Least-squares slope of ``log(error)`` against ``log(resolution)``."""
    r, e = table.resolutions, table.errors
    if r.size < 3:
        raise ValueError("need at least three rows")
    if np.any(e <= 0) or np.any(r <= 0):
        raise ValueError("errors and resolutions must be positive")
    X, Y = np.log(r), np.log(e)
    coef, res, *_ = np.polyfit(X, Y, 1, full=True)
    resid = float(np.sqrt(res[0] / r.size)) if res.size else 0.0
    table.slope, table.fit_residual = float(coef[0]), resid
    return RateFit(float(coef[0]), resid)


# classical solves ----------------------------------------------------------------


def _expm_sym(G: MultOperator):
    """Returns ``a -> expm(a G)`` via the eigendecomposition of the symmetric matrix."""
    M = G.matrix
    if G.kind == "diagonal":
        return lambda a: np.diag(np.exp(a * G.data))
    if not np.allclose(M, M.T, atol=1e-12):
        raise ValueError("classical_solve needs a symmetric G")
    lam, Q = np.linalg.eigh(0.5 * (M + M.T))
    return lambda a: (Q * np.exp(a * lam)) @ Q.T


def classical_solve(psi, x_smooth: ScalarPath, cfg: SolverConfig, refine: int = 4) -> MildSolution:
    """Classical mild solution driven by a smooth path, returned on the coarse grid.

    Each grid step is split into ``refine`` sub-steps on which the path is
    linear, so ``x'`` is the centered difference at the sub-step midpoint and
    the sub-step propagator is ``S(d/2) exp(G dx) S(d/2)`` (Strang splitting
    of the semigroup and the driven part).
    """
    if refine < 4:
        raise ValueError("refine must be at least 4")
    grid = x_smooth.grid
    model = cfg.model
    psi = model._check_vector(psi).copy()
    d = grid.h / refine
    half = model.semigroup_diag(0.5 * d)
    E = _expm_sym(cfg.G)
    fine = np.interp(np.arange(grid.N * refine + 1) * d, grid.points, x_smooth.values)
    dx = np.diff(fine)
    y = np.empty((grid.N + 1, model.K))
    y[0] = psi
    cur = psi
    diagonal = cfg.G.kind == "diagonal"
    for k in range(grid.N):
        for j in range(k * refine, (k + 1) * refine):
            if diagonal:
                cur = half * np.exp(dx[j] * cfg.G.data) * (half * cur)
            else:
                cur = half * (E(dx[j]) @ (half * cur))
        y[k + 1] = cur
    return MildSolution(grid, y, y @ cfg.G.matrix.T, "classical", psi, {"refine": refine})


def wong_zakai(psi, x: ScalarPath, widths, cfg: SolverConfig, refine: int = 4) -> RateTable:
    """Errors of mollified classical solutions against the rough solution (geometric lift).

    Columns: sup-in-time ``E_0`` error (main) and ``E_alpha`` error (extra).
    Increases beyond 10% between consecutive widths are flagged, not raised.
    """
    widths = np.asarray(widths, dtype=float)
    if np.any(np.diff(widths) >= 0):
        raise ValueError("widths must be decreasing")
    rough = euler_solve(psi, cfg.with_lift(lift(x, "geometric")))
    e0, ea = [], []
    for w in widths:
        yn = classical_solve(psi, mollify(x, w), cfg, refine)
        diff = yn.values - rough.values
        e0.append(float(np.max(scale_norm(cfg.model, 0.0, diff))))
        ea.append(float(np.max(scale_norm(cfg.model, cfg.alpha, diff))))
    table = RateTable("width", widths, np.array(e0), {"error_alpha": np.array(ea)})
    for i in range(1, len(e0)):
        if e0[i] > 1.1 * e0[i - 1]:
            table.flags.append(f"error increased at width {widths[i]:g}")
    return table


# integral representation and Itô formula ------------------------------------------


def _graded_first_cell(sol: MildSolution, model: ScaleModel, levels: int = GRADING_LEVELS):
    """Nodes ``0, h 2**-levels, ..., h/2, h`` and approximate coefficients of ``y`` there.

    On the first cell ``y(r) ~ S(r) psi + (r / h) (y(h) - S(h) psi)``: the
    semigroup orbit carries the singular part, the correction is linear.
    """
    h = sol.grid.h
    r = np.concatenate([[0.0], h * 2.0 ** -np.arange(levels, -1, -1)])
    orbit = model.semigroup_diag(r) * sol.psi
    corr = sol.values[1] - model.semigroup_diag(h) * sol.psi
    return r, orbit + (r / h)[:, None] * corr


def _trapezoid_cumulative(values: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * h * (values[1:] + values[:-1]), axis=0)
    return out


def _drift(sol: MildSolution, model: ScaleModel, integrand: Callable[[np.ndarray], np.ndarray], start: int):
    """Cumulative ``int_{t_start}^{t_k} integrand(y(r)) dr`` for ``k >= start``."""
    g = integrand(sol.values[start:])
    out = _trapezoid_cumulative(g, sol.grid.h)
    if start == 0:
        r, ysub = _graded_first_cell(sol, model)
        gs = integrand(ysub)
        first = np.sum(0.5 * np.diff(r)[:, None] * (gs[1:] + gs[:-1]), axis=0)
        out[1:] += first - 0.5 * sol.grid.h * (g[1] + g[0])
    return out


@dataclass(frozen=True)
class Residual:
    """Residual profile over ``t_k`` for ``k >= start`` and its maximum."""

    times: np.ndarray
    profile: np.ndarray
    scale: float

    @property
    def max(self) -> float:
        return float(np.max(self.profile))

    @property
    def relative(self) -> float:
        return self.max / self.scale if self.scale > 0 else self.max


def _norm_fn(model: ScaleModel, norm: str, nodes: int):
    if norm == "l2":
        return lambda v: scale_norm(model, 0.0, v)
    if norm == "sup":
        return lambda v: np.max(np.abs(model.nodal_values(v, nodes)), axis=-1)
    raise ValueError(f"unknown norm {norm!r}")


def integral_representation_residual(
    sol: MildSolution, L: Lift, cfg: SolverConfig, start: int = 0, norm: str = "l2"
) -> Residual:
    """``|y(t) - y(s) - int_s^t A y - I_{G y}(s, t)|`` for ``t = t_k >= s = t_start``.

    The drift uses the trapezoid rule, graded on the first cell when
    ``s = 0``; the rough term is the plain rough integral of ``G y`` with
    Gubinelli derivative ``G^2 y``.  ``norm`` is ``"l2"`` (``E_0``) or
    ``"sup"`` (max over collocation nodes).
    """
    if L.kind != "geometric":
        raise ValueError("integral representation needs a geometric lift")
    if L.grid != sol.grid:
        raise ValueError("solution and lift live on different grids")
    model = cfg.model
    mu = model.eigenvalues
    drift = _drift(sol, model, lambda v: -mu * v, start)
    M = cfg.G.matrix
    gy = sol.values @ M.T
    f = ControlledFunction(sol.grid, gy, gy @ M.T, "plain")
    I = rough_integral(f, L).values
    I = I[start:] - I[start]
    r = sol.values[start:] - sol.values[start] - drift - I
    nf = _norm_fn(model, norm, default_node_count(model))
    scale = float(np.max(nf(sol.values)))
    return Residual(sol.grid.points[start:], nf(r), scale)


def ito_residual(
    F: ObservableF, sol: MildSolution, L: Lift, s: float, t: float, cfg: SolverConfig
) -> float:
    """Sup over nodes of the Itô-formula residual between ``s`` and ``t`` (grid times).

    RHS: trapezoid ``int F_x(y)[A y]`` plus the rough integral of
    ``F_x(y)[G y]`` with Gubinelli derivative ``F_x(y)[G^2 y] + F_xx(y)[G y, G y]``.
    """
    if L.kind != "geometric":
        raise ValueError("Itô residual needs a geometric lift")
    if not isinstance(F, ObservableF):
        raise TypeError("F must be an ObservableF with registered derivatives")
    if not 0 <= s < t:
        raise ValueError("need 0 <= s < t")
    grid = sol.grid
    i, j = int(grid.index(s)), int(grid.index(t))
    model = cfg.model
    n = default_node_count(model)
    nod = lambda v: model.nodal_values(v, n)
    M = cfg.G.matrix
    mu = model.eigenvalues
    Y = nod(sol.values)
    GY = nod(sol.values @ M.T)
    G2Y = nod(sol.values @ (M @ M).T)
    lhs = F.F(Y[j]) - F.F(Y[i])
    drift = _drift(sol, model, lambda v: F.F_x(nod(v), nod(-mu * v)), i)[j - i]
    hv = F.F_x(Y, GY)
    hd = F.F_x(Y, G2Y) + F.F_xx(Y, GY, GY)
    I = rough_integral(ControlledFunction(grid, hv, hd, "plain"), L).values
    return float(np.max(np.abs(lhs - drift - (I[j] - I[i]))))


# lift sensitivity ------------------------------------------------------------------


@dataclass(frozen=True)
class LiftSensitivity:
    gap: np.ndarray
    oracle: np.ndarray

    @property
    def rel_err(self) -> float:
        den = float(np.max(np.linalg.norm(self.oracle, axis=-1)))
        num = float(np.max(np.linalg.norm(self.gap - self.oracle, axis=-1)))
        return num / den if den > 0 else num


_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)


def lift_sensitivity(psi, x: ScalarPath, h: ShiftFunction, cfg: SolverConfig) -> LiftSensitivity:
    """Shifted minus geometric convolution integral of ``G y`` against Gauss quadrature.

    ``y`` is the solution with the geometric lift; the oracle is
    ``int_0^t S(t - r) G^2 y(r) h'(r) dr`` with ``G^2 y`` linear on each cell.
    """
    if not h.exact_derivative:
        raise ValueError("lift_sensitivity needs h with a known derivative")
    L_geo = lift(x, "geometric")
    L_sh = lift(x, "shifted", h)
    model = cfg.model
    sol = euler_solve(psi, cfg.with_lift(L_geo))
    M = cfg.G.matrix
    gy = sol.values @ M.T
    f = ControlledFunction(x.grid, gy, gy @ M.T, "sg")
    gap = conv_integral(f, L_sh, model).values - conv_integral(f, L_geo, model).values
    # oracle, cell by cell: J_{k+1} = S(h) J_k + int_cell S(t_{k+1} - r) p(r) h'(r) dr
    grid = x.grid
    p = f.derivative
    u = 0.5 * (_GL_X + 1.0)  # nodes in [0, 1]
    r = grid.points[:-1, None] + grid.h * u[None, :]
    hp = h.derivative(r)  # (N, q)
    ker = model.semigroup_diag(grid.h * (1.0 - u))  # (q, K)
    pr = p[:-1, None, :] * (1 - u)[None, :, None] + p[1:, None, :] * u[None, :, None]
    cell = 0.5 * grid.h * np.einsum("q,nq,qk,nqk->nk", _GL_W, hp, ker, pr)
    oracle = np.zeros_like(gap)
    d = model.semigroup_diag(grid.h)
    for k in range(grid.N):
        oracle[k + 1] = d * oracle[k] + cell[k]
    return LiftSensitivity(gap, oracle)
