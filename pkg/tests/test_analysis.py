import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughevo.analysis import (
    ObservableF,
    RateTable,
    classical_solve,
    integral_representation_residual,
    ito_residual,
    lift_sensitivity,
    rate_fit,
    wong_zakai,
)
from roughevo.rough_path import ScalarPath, ShiftFunction, TimeGrid, lift, mollify
from roughevo.scale_model import ScaleModel, make_operator, scale_norm
from roughevo.solver import SolverConfig, euler_solve

ETA, ALPHA = 0.38, 0.25


@pytest.mark.parametrize("name", ["linear", "quadratic_pointwise"])
def test_observable_derivatives(name, rng):
    F = ObservableF.from_registry(name)
    v, w = rng.normal(size=67), rng.normal(size=67)
    d1, d2 = F.derivative_defects(v, w)
    assert d1 <= 1e-7 and d2 <= 1e-5


def test_observable_registry_rejects_unknown():
    with pytest.raises(ValueError):
        ObservableF.from_registry("cubic")


def test_rate_fit_examples():
    t = RateTable("N", [64, 128, 256, 512], 3.0 * np.array([64, 128, 256, 512.0]) ** -0.5)
    f = rate_fit(t)
    assert f.slope == pytest.approx(-0.5, abs=1e-12) and f.residual <= 1e-12
    assert t.slope == f.slope
    with pytest.raises(ValueError):
        rate_fit(RateTable("N", [1, 2], [1.0, 0.5]))
    with pytest.raises(ValueError):
        rate_fit(RateTable("N", [1, 2, 4], [1.0, 0.0, 0.5]))
    with pytest.raises(ValueError):
        RateTable("N", [1, 2], [1.0])


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 10))
def test_rate_fit_recovers_power_law(p, c):
    r = 2.0 ** np.arange(3, 9)
    assert rate_fit(RateTable("N", r, c * r**p)).slope == pytest.approx(p, abs=1e-9)


def test_classical_linear_path_diagonal_oracle(model, G_diag, psi):
    # x(t) = t: y_k(t) = exp((g_k - mu_k) t) psi_k
    g = TimeGrid(1.0, 256)
    x = ScalarPath.from_function(g, lambda t: t)
    cfg = SolverConfig(ETA, ALPHA, lift(x), model, G_diag)
    y = classical_solve(psi, x, cfg).values
    exact = np.exp(np.multiply.outer(g.points, G_diag.data - model.eigenvalues)) * psi
    assert np.max(scale_norm(model, 0.0, y - exact)) <= 1e-4


def test_classical_refinement_converges(cfg_small, psi):
    x = mollify(cfg_small.lift.path, 2**-5)
    a = classical_solve(psi, x, cfg_small, refine=4).values
    b = classical_solve(psi, x, cfg_small, refine=8).values
    assert np.max(scale_norm(cfg_small.model, 0.0, a - b)) <= 1e-5


def test_wong_zakai_errors_shrink(cfg, psi):
    t = wong_zakai(psi, cfg.lift.path, 2.0 ** -np.arange(4, 8), cfg)
    assert t.errors[-1] < t.errors[0]
    assert "error_alpha" in t.extra and np.all(t.extra["error_alpha"] >= t.errors)
    with pytest.raises(ValueError):
        wong_zakai(psi, cfg.lift.path, [0.1, 0.2], cfg)


def test_representation_without_coupling(model, fbm, psi):
    cfg = SolverConfig(ETA, ALPHA, lift(fbm), model, make_operator(model, "zero", "zero"))
    sol = euler_solve(psi, cfg)
    r = integral_representation_residual(sol, cfg.lift, cfg)
    assert r.max <= 1e-4


def test_representation_residual_shrinks(solution, cfg):
    fine = integral_representation_residual(solution, cfg.lift, cfg, start=1024)
    c = cfg.with_lift(cfg.lift.subsample(4))
    coarse = integral_representation_residual(solution.subsample(4), c.lift, c, start=256)
    assert fine.max < coarse.max and fine.relative <= 1e-2


def test_representation_requires_geometric(solution, cfg, fbm):
    with pytest.raises(ValueError):
        integral_representation_residual(solution, lift(fbm, "ito"), cfg)


def test_ito_linear_matches_representation(solution, cfg):
    r = ito_residual(ObservableF.linear(), solution, cfg.lift, 0.25, 1.0, cfg)
    rep = integral_representation_residual(solution, cfg.lift, cfg, start=1024, norm="sup")
    assert r == pytest.approx(rep.profile[-1], abs=1e-12)


def test_ito_quadratic_is_small(solution, cfg):
    r = ito_residual(ObservableF.quadratic_pointwise(), solution, cfg.lift, 0.25, 1.0, cfg)
    scale = np.max(np.abs(cfg.model.nodal_values(solution.values, 67))) ** 2
    assert r <= 1e-2 * scale


def test_ito_argument_checks(solution, cfg, fbm):
    F = ObservableF.linear()
    with pytest.raises(ValueError):
        ito_residual(F, solution, cfg.lift, 0.5, 0.5, cfg)
    with pytest.raises(ValueError):
        ito_residual(F, solution, lift(fbm, "ito"), 0.0, 1.0, cfg)
    with pytest.raises(TypeError):
        ito_residual(lambda v: v, solution, cfg.lift, 0.0, 1.0, cfg)


def _one_mode():
    m = ScaleModel(1)
    return m, make_operator(m, "diagonal", "one")


def test_lift_sensitivity_constant_shift(fbm_small):
    m, G = _one_mode()
    cfg = SolverConfig(ETA, ALPHA, lift(fbm_small), m, G)
    h = ShiftFunction.linear(fbm_small.grid, 1.0)
    s = lift_sensitivity(np.ones(1), fbm_small, h, cfg)
    assert s.rel_err <= 1e-2


def test_lift_sensitivity_linear_in_shift(fbm_small):
    m, G = _one_mode()
    cfg = SolverConfig(ETA, ALPHA, lift(fbm_small), m, G)
    a = lift_sensitivity(np.ones(1), fbm_small, ShiftFunction.linear(fbm_small.grid, 1.0), cfg)
    b = lift_sensitivity(np.ones(1), fbm_small, ShiftFunction.linear(fbm_small.grid, 2.0), cfg)
    assert np.allclose(b.gap, 2 * a.gap, atol=1e-13) and np.allclose(b.oracle, 2 * a.oracle, atol=1e-13)


def test_lift_sensitivity_needs_derivative(fbm_small):
    m, G = _one_mode()
    cfg = SolverConfig(ETA, ALPHA, lift(fbm_small), m, G)
    h = ShiftFunction(fbm_small.grid, np.sin(fbm_small.grid.points))
    with pytest.raises(ValueError):
        lift_sensitivity(np.ones(1), fbm_small, h, cfg)
