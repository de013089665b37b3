import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughevo.rough_path import ScalarPath, TimeGrid, lift
from roughevo.scale_model import ScaleModel, scale_norm
from roughevo.sewing import (
    ControlledFunction,
    ControlledGerm,
    Germ,
    SewingError,
    compensated_sum,
    conv_integral,
    direct_pair_sum,
    increment,
    rough_integral,
    sew,
    sg_remainder,
)


def _y(model):
    v = 1.0 / np.arange(1, model.K + 1)
    return lambda t: np.cos(np.asarray(t, float))[..., None] * v


def test_increment_d1_and_d1hat(model):
    y = _y(model)
    assert np.allclose(increment("d1", y, 0.2, 0.7), y(0.7) - y(0.2))
    expect = y(0.7) - model.semigroup_diag(0.5) * y(0.2)
    assert np.allclose(increment("d1hat", y, 0.2, 0.7, model=model), expect)
    with pytest.raises(ValueError):
        increment("d1hat", y, 0.7, 0.2, model=model)
    with pytest.raises(ValueError):
        increment("d1hat", y, 0.2, 0.7)
    with pytest.raises(ValueError):
        increment("d3", y, 0.2, 0.7)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_d2hat_kills_d1hat(ts):
    model = ScaleModel(8)
    s, t, u = sorted(ts)
    y = _y(model)
    z = lambda a, b: increment("d1hat", y, a, b, model=model)
    assert np.max(np.abs(increment("d2hat", z, s, t, u, model=model))) <= 1e-13
    w = lambda a, b: increment("d1", y, a, b)
    assert np.max(np.abs(increment("d2", w, s, t, u))) <= 1e-13


def test_dS2_relation(model):
    # dS2 z = S(t - s) d2hat z when z is anchored consistently: check on z = d1hat y
    y = _y(model)
    z = lambda a, b: increment("d1hat", y, a, b, model=model)
    s, t, u = 0.1, 0.4, 0.9
    lhs = increment("dS2", z, s, t, u, model=model)
    direct = model.semigroup_diag(t - s) * z(s, u) - z(t, u) - model.semigroup_diag(t - s) * z(s, t)
    assert np.allclose(lhs, direct, atol=1e-15)


def test_sew_exact_additive_germ():
    F = lambda t: np.stack([np.sin(t), t**2], axis=-1)
    g = Germ(lambda s, t: F(t) - F(s))
    r = sew(g, 0.1, 0.9)
    assert r.converged and np.allclose(r.integral, F(0.9) - F(0.1), atol=1e-14)
    assert np.max(np.abs(r.remainder_map)) <= 1e-14


def test_sew_stiff_modes_are_not_flagged(model):
    # coarse levels under-resolve mu_K = 256, so early gaps grow before they decay
    y = _y(model)
    g = Germ(lambda s, t: increment("d1hat", y, s, t, model=model))
    r = sew(g, 0.0, 1.0, model=model, max_depth=12)
    gaps = [e["gap"] for e in r.trace[1:]]
    assert gaps[2] > gaps[1] > gaps[0]
    assert all(e["resolved"] is False for e in r.trace[1:8])


def test_sew_smooth_germ_closed_form(model):
    v = 1.0 / np.arange(1, model.K + 1) ** 2
    g = Germ(lambda s, t: np.asarray(t - s)[..., None] * v)
    exact = (1 - np.exp(-model.eigenvalues)) / model.eigenvalues * v
    r = sew(g, 0.0, 1.0, model=model, max_depth=12, extrapolate=3)
    assert scale_norm(model, 0.0, r.integral - exact) <= 1e-9
    plain = sew(g, 0.0, 1.0, model=model, max_depth=12)
    # without extrapolation the left-anchored sum is first order
    assert scale_norm(model, 0.0, plain.integral - exact) > 1e-6
    gaps = [e["gap"] for e in plain.trace[1:]]
    assert np.all(np.diff(gaps) < 0)


def test_sew_divergence_alarm():
    g = Germ(lambda s, t: np.sqrt(np.asarray(t - s))[..., None])
    with pytest.raises(SewingError) as e:
        sew(g, 0.0, 1.0)
    assert len(e.value.trace) >= 3


def test_sew_bad_interval():
    with pytest.raises(ValueError):
        sew(Germ(lambda s, t: t - s), 1.0, 1.0)


def test_sew_stops_at_grid_resolution(fbm_small):
    x = fbm_small
    f = ControlledFunction(x.grid, x.values, np.ones(x.grid.N + 1), "plain")
    # the geometric germ of f = x is exactly additive
    r = sew(ControlledGerm(f, lift(x)), 0.0, 1.0)
    assert r.converged and len(r.trace) == 2
    assert r.integral[0] == pytest.approx(0.5 * x.values[-1] ** 2, abs=1e-12)
    z = ScalarPath.from_function(x.grid, lambda t: np.sin(3 * t))
    f2 = ControlledFunction(x.grid, z.values**2, 2 * z.values, "plain")
    r2 = sew(ControlledGerm(f2, lift(z)), 0.0, 1.0)
    assert len(r2.trace) == 10  # levels 0..9 for N = 512
    assert r2.integral[0] == pytest.approx(rough_integral(f2, lift(z)).values[-1, 0], abs=1e-12)
    assert r2.integral[0] == pytest.approx(np.sin(3.0) ** 3 / 3, abs=1e-5)


def test_rough_integral_of_path_geometric_and_ito(fbm):
    f = ControlledFunction(fbm.grid, fbm.values, np.ones(fbm.grid.N + 1), "plain")
    geo = rough_integral(f, lift(fbm)).values[:, 0]
    assert np.max(np.abs(geo - 0.5 * fbm.values**2)) <= 1e-12
    ito = rough_integral(f, lift(fbm, "ito")).values[:, 0]
    assert np.max(np.abs(ito - geo - fbm.grid.points / 2)) <= 1e-12


def test_lift_shift_changes_integral_by_derivative_integral(fbm):
    # difference of the two integrals is the sum of f' dh; trapezoid oracle for smooth f'
    t = fbm.grid.points
    fd = np.cos(t)
    f = ControlledFunction(fbm.grid, np.sin(t) * fbm.values, fd, "plain")
    a = rough_integral(f, lift(fbm, "ito")).values[-1, 0]
    b = rough_integral(f, lift(fbm)).values[-1, 0]
    assert a - b == pytest.approx(0.5 * np.sin(1.0), abs=1e-4)


def test_constant_integrand_is_path_increment(fbm_small):
    N = fbm_small.grid.N
    f = ControlledFunction(fbm_small.grid, np.full(N + 1, 2.5), np.zeros(N + 1), "plain")
    out = rough_integral(f, lift(fbm_small, "ito")).values[:, 0]
    assert np.allclose(out, 2.5 * fbm_small.values, atol=1e-13)


def test_conv_integral_matches_direct_sums(fbm_small, model, rng):
    N = fbm_small.grid.N
    f = ControlledFunction(fbm_small.grid, rng.normal(size=(N + 1, model.K)), rng.normal(size=(N + 1, model.K)))
    L = lift(fbm_small)
    I = conv_integral(f, L, model)
    for i, j in [(0, N), (17, 300), (100, 101), (250, 250)]:
        d = direct_pair_sum(f, L, i, j, model)
        assert scale_norm(model, 0.0, I.pair(i, j) - d) <= 1e-12


def test_conv_integral_linear_path_closed_form(model):
    g = TimeGrid(1.0, 2048)
    x = ScalarPath.from_function(g, lambda t: t)
    v = 1.0 / np.arange(1, model.K + 1) ** 2
    f = ControlledFunction(g, np.tile(v, (g.N + 1, 1)), np.zeros((g.N + 1, model.K)))
    I = conv_integral(f, lift(x), model)
    exact = (1 - np.exp(-model.eigenvalues * g.T)) / model.eigenvalues * v
    assert scale_norm(model, 0.0, I.values[-1] - exact) <= 2e-3
    half = conv_integral(f.subsample(2), lift(x).subsample(2), model)
    assert scale_norm(model, 0.0, half.values[-1] - exact) > scale_norm(model, 0.0, I.values[-1] - exact)


def test_conv_integral_linear_in_integrand(fbm_small, model, rng):
    N = fbm_small.grid.N
    mk = lambda: ControlledFunction(fbm_small.grid, rng.normal(size=(N + 1, model.K)), rng.normal(size=(N + 1, model.K)))
    f, g = mk(), mk()
    L = lift(fbm_small)
    lhs = conv_integral(f + g, L, model).values
    rhs = conv_integral(f, L, model).values + conv_integral(g, L, model).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_conv_integral_errors(fbm_small, model):
    N = fbm_small.grid.N
    plain = ControlledFunction(fbm_small.grid, np.zeros((N + 1, model.K)), np.zeros((N + 1, model.K)), "plain")
    with pytest.raises(ValueError):
        conv_integral(plain, lift(fbm_small), model)
    small = ControlledFunction(fbm_small.grid, np.zeros((N + 1, 3)), np.zeros((N + 1, 3)))
    with pytest.raises(ValueError):
        conv_integral(small, lift(fbm_small), model)
    bad = ControlledFunction(fbm_small.grid, np.full((N + 1, model.K), np.inf), np.zeros((N + 1, model.K)))
    with pytest.raises(FloatingPointError):
        conv_integral(bad, lift(fbm_small), model)


def test_assess_reports_refinement_gap(fbm, model):
    N = fbm.grid.N
    f = ControlledFunction(fbm.grid, np.tile(1.0 / np.arange(1, 17), (N + 1, 1)), np.zeros((N + 1, 16)))
    I = conv_integral(f, lift(fbm), model, assess=True)
    assert I.refinement_gap is not None and 0 < I.refinement_gap < 0.1


def test_young_sum_differs_from_rough_sum(fbm):
    f = ControlledFunction(fbm.grid, fbm.values, np.ones(fbm.grid.N + 1), "plain")
    young = rough_integral(f, lift(fbm), with_area=False).values[-1, 0]
    rough = rough_integral(f, lift(fbm)).values[-1, 0]
    assert rough - young == pytest.approx(0.5 * np.sum(np.diff(fbm.values) ** 2), abs=1e-12)


def test_young_rough_gap_shrinks_for_smoother_path():
    from roughevo.checks import young_rough_gaps
    from roughevo.config import RunConfig

    t = young_rough_gaps(RunConfig(N=1024))
    assert np.all(np.diff(t.errors) < 0)


def test_sg_remainder_vanishes_on_orbit(model, fbm_small):
    g = fbm_small.grid
    v = 1.0 / np.arange(1, model.K + 1)
    f = ControlledFunction(g, model.semigroup_diag(g.points) * v, np.zeros((g.N + 1, model.K)))
    r = sg_remainder(f, lift(fbm_small), 0.76, model)
    assert r.seminorm <= 1e-13


def test_sg_remainder_plain_linear_in_path(fbm_small):
    g = fbm_small.grid
    f = ControlledFunction(g, 3.0 * fbm_small.values, np.full(g.N + 1, 3.0), "plain")
    assert sg_remainder(f, lift(fbm_small), 0.8).seminorm <= 1e-12
    f2 = ControlledFunction(g, fbm_small.values**2, 2 * fbm_small.values, "plain")
    r = sg_remainder(f2, lift(fbm_small), 0.76)
    # R = dx^2, so the 2H seminorm is the squared 1H seminorm order of magnitude
    i, j = 10, 200
    assert r(i, j)[0] == pytest.approx((fbm_small.values[j] - fbm_small.values[i]) ** 2, abs=1e-12)
    assert np.isfinite(r.seminorm) and r.seminorm > 0


def test_sg_remainder_needs_model(fbm_small, model):
    g = fbm_small.grid
    f = ControlledFunction(g, np.zeros((g.N + 1, model.K)), np.zeros((g.N + 1, model.K)))
    with pytest.raises(ValueError):
        sg_remainder(f, lift(fbm_small), 0.7)


def test_compensated_sum_single_piece(model):
    v = np.ones(model.K)
    g = Germ(lambda s, t: np.asarray(t - s)[..., None] * v)
    assert np.allclose(compensated_sum(g, 0.0, 0.5, 1, model), model.semigroup_diag(0.5) * 0.5 * v)


def test_controlled_function_shape_checks(fbm_small):
    g = fbm_small.grid
    with pytest.raises(ValueError):
        ControlledFunction(g, np.zeros(5), np.zeros(5))
    with pytest.raises(ValueError):
        ControlledFunction(g, np.zeros(g.N + 1), np.zeros(g.N + 1), "other")
