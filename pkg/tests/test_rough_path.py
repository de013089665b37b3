import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughevo.rough_path import (
    ScalarPath,
    ShiftFunction,
    TimeGrid,
    chen_defect,
    holder_seminorm,
    ito_shift,
    lift,
    mollify,
    random_triples,
    sample_fbm,
    sample_fbm_many,
    xx_eval,
)


def test_grid_basics():
    g = TimeGrid(2.0, 8)
    assert g.h == 0.25 and np.all(np.diff(g.points) > 0) and g.points[-1] == 2.0
    assert g.coarsen(4).N == 2
    with pytest.raises(ValueError):
        g.coarsen(3)
    with pytest.raises(ValueError):
        TimeGrid(1.0, 0)


def test_fbm_starts_at_zero_and_is_deterministic():
    g = TimeGrid(1.0, 256)
    for H in (0.4, 0.5, 0.75):
        a, b = sample_fbm(H, g, 11), sample_fbm(H, g, 11)
        assert a.values[0] == 0.0 and np.array_equal(a.values, b.values)
    assert not np.array_equal(sample_fbm(0.4, g, 1).values, sample_fbm(0.4, g, 2).values)


def test_fbm_brownian_terminal_variance():
    g = TimeGrid(1.0, 64)
    X = sample_fbm_many(0.5, g, range(2000))
    assert abs(X[:, -1].var() / g.T - 1) <= 0.05


def test_fbm_variance_curve():
    g = TimeGrid(1.0, 512)
    X = sample_fbm_many(0.4, g, range(2000))
    t = g.points[1:]
    assert np.max(np.abs(X[:, 1:].var(axis=0) / t**0.8 - 1)) <= 0.10


def test_fbm_covariance_oracle():
    # covariance R(s, t) = (s^2H + t^2H - |t - s|^2H) / 2 at a few pairs
    H, g = 0.4, TimeGrid(1.0, 128)
    X = sample_fbm_many(H, g, range(4000))
    for i, j in [(32, 64), (64, 128), (16, 120)]:
        s, t = g.points[i], g.points[j]
        R = 0.5 * (s ** (2 * H) + t ** (2 * H) - abs(t - s) ** (2 * H))
        assert abs(np.mean(X[:, i] * X[:, j]) - R) <= 0.06


def test_fbm_circulant_matches_covariance():
    g = TimeGrid(1.0, 256)
    X = np.array([sample_fbm(0.4, g, s, "circulant").values for s in range(2000)])
    assert np.max(np.abs(X[:, 1:].var(axis=0) / g.points[1:] ** 0.8 - 1)) <= 0.10


def test_fbm_errors():
    g = TimeGrid(1.0, 64)
    with pytest.raises(ValueError):
        sample_fbm(0.3, g, 0)
    with pytest.raises(ValueError):
        sample_fbm(0.4, TimeGrid(1.0, 1), 0)
    with pytest.raises(ValueError, match="circulant"):
        sample_fbm(0.4, TimeGrid(1.0, 8192), 0)
    with pytest.raises(ValueError):
        sample_fbm(0.4, g, 0, method="nope")


def test_lift_examples():
    g = TimeGrid(1.0, 16)
    x = ScalarPath.from_function(g, lambda t: t)
    assert xx_eval(lift(x), 0, 16) == pytest.approx(0.5)
    zero = ScalarPath(g, np.zeros(17))
    L = lift(zero, "shifted", ito_shift(g))
    i, j = np.array([0, 3, 5]), np.array([16, 9, 5])
    assert np.allclose(xx_eval(L, i, j), (g.points[j] - g.points[i]) / 2, atol=1e-15)


def test_ito_lift_pairs(fbm):
    L = lift(fbm, "ito")
    i, j = np.sort(np.random.default_rng(0).integers(0, 4097, size=(2, 100)), axis=0)
    t, x = fbm.grid.points, fbm.values
    assert np.max(np.abs(xx_eval(L, i, j) - (0.5 * (x[j] - x[i]) ** 2 + (t[j] - t[i]) / 2))) <= 1e-12


def test_lift_grid_mismatch(fbm):
    with pytest.raises(ValueError):
        lift(fbm, "shifted", ito_shift(TimeGrid(1.0, 8)))
    with pytest.raises(ValueError):
        lift(fbm, "shifted")


def test_xx_eval_geometric_closed_form(fbm):
    L = lift(fbm)
    i, j = np.sort(np.random.default_rng(1).integers(0, 4097, size=(2, 100)), axis=0)
    x = fbm.values
    assert np.max(np.abs(xx_eval(L, i, j) - 0.5 * (x[j] - x[i]) ** 2)) <= 1e-12
    assert xx_eval(L, 7, 7) == 0.0
    with pytest.raises(IndexError):
        xx_eval(L, 5, 4)
    with pytest.raises(IndexError):
        xx_eval(L, 0, 5000)


def test_xx_eval_shifted_telescopes(fbm):
    h = ShiftFunction(fbm.grid, np.cos(3 * fbm.grid.points))
    L = lift(fbm, "shifted", h)
    i, j = np.sort(np.random.default_rng(2).integers(0, 4097, size=(2, 100)), axis=0)
    geo = 0.5 * (fbm.values[j] - fbm.values[i]) ** 2
    assert np.max(np.abs(xx_eval(L, i, j) - geo - (h.values[j] - h.values[i]))) <= 1e-12


def test_chen_defect(fbm):
    tr = random_triples(4096, 1000, 0)
    assert chen_defect(lift(fbm), tr) <= 1e-12
    assert chen_defect(lift(fbm, "ito"), tr) <= 1e-12


def test_chen_fault_injection(fbm):
    L = lift(fbm)
    a = L.step_areas.copy()
    a[1000] += 1e-3
    bad = L.with_step_areas(a)
    assert chen_defect(bad, [[0, 500, 2000], [10, 20, 30]]) >= 0.9e-3


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.34, 0.9))
def test_chen_property(seed, H):
    x = sample_fbm(H, TimeGrid(1.0, 64), seed)
    tr = random_triples(64, 50, seed)
    assert chen_defect(lift(x), tr) <= 1e-12
    assert chen_defect(lift(x, "ito"), tr) <= 1e-12
    assert np.all(xx_eval(lift(x), tr[:, 0], tr[:, 2]) >= 0)


def test_subsampled_lift_keeps_values(fbm):
    L = lift(fbm, "ito")
    c = L.subsample(8)
    i, j = np.array([0, 3, 10]), np.array([100, 50, 512])
    assert np.allclose(xx_eval(c, i, j), xx_eval(L, 8 * i, 8 * j), atol=1e-12)


def test_holder_trivial_cases():
    t = np.linspace(0, 1, 65)
    assert holder_seminorm(t, 1.0, times=t) == pytest.approx(1.0)
    Z = np.subtract.outer(t, t).T ** 2  # Z[i, j] = (t_j - t_i)^2
    assert holder_seminorm(Z, 2.0, times=t) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        holder_seminorm(t, 0.0)


def test_holder_streamed_rows_match_table(fbm_small):
    x, t = fbm_small.values, fbm_small.grid.points
    row = lambda i: np.abs(x[i + 1 :] - x[i])
    assert holder_seminorm(row, 0.35, times=t) == holder_seminorm(x, 0.35, times=t)


def test_holder_refinement_scan(fbm):
    below, above = [], []
    for N in (256, 512, 1024, 2048, 4096):
        p = fbm.subsample(4096 // N)
        below.append(holder_seminorm(p.values, 0.35, times=p.grid.points))
        above.append(holder_seminorm(p.values, 0.45, times=p.grid.points))
    assert np.all(np.isfinite(below)) and max(below) < 10
    # above the Hurst index the grid seminorm keeps growing under refinement
    assert np.all(np.diff(above) >= 0) and above[-1] > above[0]


def test_holder_monotone_under_coarsening(fbm_small):
    full = holder_seminorm(fbm_small.values, 0.4, times=fbm_small.grid.points)
    for f in (2, 4, 8):
        p = fbm_small.subsample(f)
        assert holder_seminorm(p.values, 0.4, times=p.grid.points) <= full


def test_mollify_constant_and_linear():
    g = TimeGrid(1.0, 256)
    c = ScalarPath(g, np.full(257, 3.0))
    assert np.allclose(mollify(c, 0.05).values, 3.0, atol=1e-14)
    w = 0.1
    lin = ScalarPath.from_function(g, lambda t: t)
    m = mollify(lin, w)
    inner = (g.points > w) & (g.points < 1 - w)
    assert np.max(np.abs(m.values - lin.values)[inner]) <= 1e-12


def test_mollify_width_guard(fbm_small):
    with pytest.raises(ValueError):
        mollify(fbm_small, fbm_small.grid.h)


def test_mollify_distance_shrinks(fbm):
    d = [np.max(np.abs(mollify(fbm, w).values - fbm.values)) for w in (2**-3, 2**-4, 2**-5)]
    assert d[0] > d[1] > d[2]


def test_mollify_regularity(fbm):
    m = mollify(fbm, 2**-5)
    t = fbm.grid.points
    assert holder_seminorm(m.values, 0.38, times=t) <= holder_seminorm(fbm.values, 0.38, times=t) + 1e-10
    assert np.all(np.isfinite(np.diff(m.values, 2)))
