"""Numbered acceptance checks and the verification suites built from them.

Every check takes a :class:`RunConfig` (for the defaults it does not
override) and returns a list of :class:`Record`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, signal

from .analysis import (
    ObservableF,
    integral_representation_residual,
    ito_residual,
    lift_sensitivity,
    rate_fit,
    RateTable,
    wong_zakai,
)
from .config import RunConfig, build_model, build_path
from .rough_path import ScalarPath, TimeGrid, chen_defect, ito_shift, lift, random_triples, sample_fbm, xx_eval
from .scale_model import (
    MultOperator,
    ScaleModel,
    commutator_apply,
    generator_integral_identity,
    make_operator,
    probe_set,
    semigroup_apply,
    verify_semigroup_bounds,
)
from .sewing import ControlledFunction, Germ, conv_integral, rough_integral, sew, sg_remainder
from .solver import SolverConfig, default_psi, euler_solve, picard_solve, smoothing_profile


@dataclass(frozen=True)
class Record:
    name: str
    value: float
    threshold: float
    passed: bool
    anchor: str
    relation: str = "<="

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": float(self.value),
            "threshold": float(self.threshold),
            "relation": self.relation,
            "passed": bool(self.passed),
            "anchor": self.anchor,
        }


def le(name: str, value: float, threshold: float, anchor: str) -> Record:
    value = float(value)
    return Record(name, value, threshold, bool(np.isfinite(value) and value <= threshold), anchor, "<=")


def ge(name: str, value: float, threshold: float, anchor: str) -> Record:
    value = float(value)
    return Record(name, value, threshold, bool(np.isfinite(value) and value >= threshold), anchor, ">=")


def _cfg(rc: RunConfig, L, model=None, G=None) -> SolverConfig:
    if model is None:
        model, G = build_model(rc)
    return SolverConfig(rc.eta, rc.alpha, L, model, G, rc.picard_tol, rc.picard_max_iter, seed=rc.seed)


def _ladder(N: int, levels: int = 4) -> list[int]:
    return [N >> (levels - 1 - i) for i in range(levels)]


def _rel_sup(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(a - b, axis=-1)) / np.max(np.linalg.norm(b, axis=-1)))


# criteria ------------------------------------------------------------------------


def c01_chen(rc: RunConfig) -> list[Record]:
    x = build_path(rc)
    tr = random_triples(rc.N, 1000, rc.seed)
    return [
        le("chen_defect geometric", chen_defect(lift(x, "geometric"), tr), 1e-12, "chen-relation"),
        le("chen_defect shifted", chen_defect(lift(x, "shifted", ito_shift(x.grid)), tr), 1e-12, "chen-relation"),
    ]


def c02_sewing_oracle(rc: RunConfig) -> list[Record]:
    model = ScaleModel(rc.K)
    v = np.random.default_rng(rc.seed).standard_normal(rc.K)
    germ = Germ(lambda s, t: ((t - s) ** 2)[..., None] * v)
    out = []
    for s, t in [(0.25 * rc.T, 0.5 * rc.T), (0.0, rc.T)]:
        res = sew(germ, s, t, model, tol=rc.picard_tol, max_depth=14, extrapolate=3)
        ref = model.semigroup_diag(t - s) * (t - s) ** 2 * v
        err = np.linalg.norm(res.remainder_map - ref) / np.linalg.norm(ref)
        out.append(le(f"sewing M vs S(t-s)h on [{s:g},{t:g}]", err, 1e-8, "sewing-map"))
    return out


def _smooth_integrand(model: ScaleModel, grid: TimeGrid):
    k = np.arange(1, model.K + 1)
    v = 1.0 / k**3.0
    psi = (-1.0) ** k / k**2.0
    vals = np.sin(2 * grid.points)[:, None] * v + model.semigroup_diag(grid.points) * psi
    return ControlledFunction(grid, vals, np.broadcast_to(v, vals.shape)), v, psi


def smooth_quadrature_oracle(model: ScaleModel, T: float) -> np.ndarray:
    """Adaptive quadrature of ``int_0^T S(T - r) f(r) x'(r) dr`` for the smooth test integrand."""
    k = np.arange(1, model.K + 1)
    v, psi = 1.0 / k**3.0, (-1.0) ** k / k**2.0
    out = np.empty(model.K)
    for i, mu in enumerate(model.eigenvalues):
        fn = lambda r: np.exp(-mu * (T - r)) * (np.sin(2 * r) * v[i] + np.exp(-mu * r) * psi[i]) * 2 * np.cos(2 * r)
        out[i] = integrate.quad(fn, 0.0, T, epsabs=1e-14, epsrel=1e-13, limit=400)[0]
    return out


def c03_smooth_oracle(rc: RunConfig) -> list[Record]:
    model = ScaleModel(rc.K)
    ref = smooth_quadrature_oracle(model, rc.T)
    errs = []
    for N in (2048, 4096):
        grid = TimeGrid(rc.T, N)
        L = lift(ScalarPath.from_function(grid, lambda t: np.sin(2 * t)))
        f, *_ = _smooth_integrand(model, grid)
        I = conv_integral(f, L, model)
        errs.append(np.linalg.norm(I.values[-1] - ref) / np.linalg.norm(ref))
    return [
        le("smooth-path conv_integral rel err N=4096", errs[1], 1e-3, "smooth-convolution-integral"),
        le("smooth-path error ratio N=4096/N=2048", errs[1] / errs[0], 1.0 - 1e-12, "smooth-convolution-integral"),
    ]


def chasles_defect_all_pairs(f: ControlledFunction, L, model: ScaleModel, block: int = 512) -> float:
    """Max over all grid pairs of ``|I(0,t) - S(t-s) I(0,s) - I(s,t)|``.

    ``I(s, .)`` is recomputed directly from every start index with the
    one-step recursion, independently of the stored ``I(0, .)``.
    """
    I = conv_integral(f, L, model)
    N, h = L.grid.N, L.grid.h
    g = L.increments[:, None] * f.values[:-1] + L.step_areas[:, None] * f.derivative[:-1]
    k = np.arange(N)
    j = np.arange(N + 1)
    worst = 0.0
    for b0 in range(0, N, block):
        s = np.arange(b0, min(b0 + block, N))
        mask = k[None, :] >= s[:, None]
        lag = np.clip(j[None, :] - s[:, None], 0, None) * h
        upper = j[None, :] >= s[:, None]
        for c, mu in enumerate(model.eigenvalues):
            a = np.exp(-mu * h)
            direct = np.zeros((s.size, N + 1))
            direct[:, 1:] = signal.lfilter([a], [1.0, -a], np.where(mask, g[None, :, c], 0.0), axis=1)
            col = I.values[:, c]
            chasles = col[None, :] - np.exp(-mu * lag) * col[s, None]
            worst = max(worst, float(np.max(np.abs(chasles - direct)[upper])))
    return worst


def c04_chasles_linearity(rc: RunConfig) -> list[Record]:
    model, G = build_model(rc)
    x = build_path(rc)
    L = lift(x)
    sol = euler_solve(default_psi(model), _cfg(rc, L, model, G))
    f1 = ControlledFunction(x.grid, sol.values @ G.matrix.T, sol.values @ G.squared.T)
    f2, *_ = _smooth_integrand(model, x.grid)
    lin = np.max(np.abs(conv_integral(f1 + f2, L, model).values - conv_integral(f1, L, model).values
                        - conv_integral(f2, L, model).values))
    return [
        le("Chasles defect over all grid pairs", chasles_defect_all_pairs(f1, L, model), 1e-13, "chasles-identity"),
        le("conv_integral linearity defect", lin, 1e-13, "integral-linearity"),
    ]


def commuting_oracle(model: ScaleModel, G: MultOperator, psi, L) -> np.ndarray:
    """Mode-wise ``psi_k exp(-mu_k t + g_k (x(t) - x(0)))`` for diagonal ``G`` and the geometric lift."""
    t, x = L.grid.points, L.path.values
    return psi * np.exp(-np.multiply.outer(t, model.eigenvalues) + np.multiply.outer(x - x[0], G.data))


def commuting_study(rc: RunConfig, N_fine: int = 2**14, levels: int = 7):
    model = ScaleModel(rc.K)
    G = make_operator(model, "diagonal", "decay")
    psi = default_psi(model)
    x = sample_fbm(rc.H, TimeGrid(rc.T, N_fine), rc.seed, "circulant")
    Lf = lift(x)
    Ns, e_eu, e_pc = [], [], []
    for p in range(levels):
        fac = 2 ** (levels - 1 - p)
        L = Lf.subsample(fac)
        cfg = _cfg(rc, L, model, G)
        exact = commuting_oracle(model, G, psi, L)
        Ns.append(L.grid.N)
        e_eu.append(_rel_sup(euler_solve(psi, cfg).values, exact))
        e_pc.append(_rel_sup(picard_solve(psi, cfg).values, exact))
    return (
        RateTable("N", Ns, e_eu, {"picard_error": np.array(e_pc)}),
        RateTable("N", Ns, e_pc),
    )


def c05_commuting(rc: RunConfig) -> list[Record]:
    te, tp = commuting_study(rc)
    se, sp = rate_fit(te).slope, rate_fit(tp).slope
    return [
        le("euler vs analytic rel sup error N=2^14", te.errors[-1], 1e-2, "commuting-solution"),
        le("picard vs analytic rel sup error N=2^14", tp.errors[-1], 1e-2, "commuting-solution"),
        le("euler convergence slope", se, -0.1, "commuting-solution"),
        le("picard convergence slope", sp, -0.1, "commuting-solution"),
    ]


def c06_lift_shift(rc: RunConfig, c: float = 1.0) -> list[Record]:
    model = ScaleModel(1)
    G = MultOperator.diagonal(model, [c])
    x = build_path(rc)
    out = []
    for kind, shift in (("geometric", 0.0), ("ito", 0.5 * c * c * rc.T)):
        L = lift(x, "geometric") if kind == "geometric" else lift(x, "shifted", ito_shift(x.grid))
        y = euler_solve(np.ones(1), _cfg(rc, L, model, G)).values[-1, 0]
        exact = np.exp(c * (x.values[-1] - x.values[0]) - model.eigenvalues[0] * rc.T + shift)
        out.append(le(f"product limit vs exponential, {kind} lift", abs(y / exact - 1), 1e-2, "ito-lift-shift"))
    ls = lift_sensitivity(np.ones(1), x, ito_shift(x.grid), _cfg(rc, lift(x), model, G))
    out.append(le("lift_sensitivity vs quadrature rel err", ls.rel_err, 1e-3, "lift-sensitivity"))
    return out


def young_rough_gaps(rc: RunConfig, H: float = 0.75) -> RateTable:
    """``|int x dx|`` with and without the level-2 term, on dyadic sub-grids of one path."""
    x = build_path(rc, H=H)
    L = lift(x)
    Ns, gaps = [], []
    for N in _ladder(rc.N):
        Lc = L.subsample(rc.N // N)
        f = ControlledFunction(Lc.grid, Lc.path.values, np.ones(N + 1), "plain")
        r = rough_integral(f, Lc).values[-1]
        y = rough_integral(f, Lc, with_area=False).values[-1]
        Ns.append(N)
        gaps.append(float(np.max(np.abs(r - y))))
    return RateTable("N", Ns, gaps)


def c07_young_rough(rc: RunConfig) -> list[Record]:
    t = young_rough_gaps(rc)
    ratio = max(b / a for a, b in zip(t.errors, t.errors[1:]))
    return [
        le(f"Young/rough gap at N={int(t.resolutions[-1])}, H=0.75", t.errors[-1], 1e-4, "young-rough-agreement"),
        le("Young/rough gap max ratio per doubling", ratio, 1.0 - 1e-12, "young-rough-agreement"),
    ]


def c08_fixed_point(rc: RunConfig) -> list[Record]:
    model, G = build_model(rc)
    L = lift(build_path(rc))
    sol = picard_solve(default_psi(model), _cfg(rc, L, model, G))
    wins = sol.diagnostics["windows"]
    max_ratio = max((max(w["ratios"]) for w in wins if w["ratios"]), default=0.0)
    # a window that converged in fewer than three sweeps has nothing left to decay
    decay = all(
        len(w["increments"]) < 3 or w["increments"][-3] > w["increments"][-2] > w["increments"][-1]
        for w in wins
    )
    return [
        le("picard relative fixed-point residual", sol.diagnostics.get("residual_rel", 0.0), 1e-6, "fixed-point"),
        le("max successive-increment ratio over windows", max_ratio, 1.0 - 1e-12, "fixed-point"),
        ge("last three increments decreasing on every window", float(decay), 1.0, "fixed-point"),
    ]


def c09_smoothing(rc: RunConfig) -> list[Record]:
    model, G = build_model(rc)
    L = lift(build_path(rc))
    cfg = _cfg(rc, L, model, G)
    sol = euler_solve(default_psi(model), cfg)
    mu = (2 * rc.eta + rc.alpha - 1) / 2
    p = smoothing_profile(sol, mu, cfg)
    ratio = p.window_max(rc.T * 2.0**-10) / p.window_max(rc.T * 2.0**-5)
    return [le("smoothing profile max ratio [T/2^10,T] vs [T/2^5,T]", ratio, 3.0, "smoothing-estimate")]


def representation_ladder(rc: RunConfig, s_frac: float = 0.25):
    """Representation (E_0 and nodal sup) and Itô residuals on dyadic sub-grids."""
    model, G = build_model(rc)
    Lf = lift(build_path(rc))
    rows = []
    for N in _ladder(rc.N):
        L = Lf.subsample(rc.N // N)
        cfg = _cfg(rc, L, model, G)
        sol = euler_solve(default_psi(model), cfg)
        rep = integral_representation_residual(sol, L, cfg)
        s = s_frac * rc.T
        i = int(L.grid.index(s))
        rep_sup = integral_representation_residual(sol, L, cfg, start=i, norm="sup").profile[-1]
        lin = ito_residual(ObservableF.linear(), sol, L, s, rc.T, cfg)
        quad = ito_residual(ObservableF.quadratic_pointwise(), sol, L, s, rc.T, cfg)
        rows.append({"N": N, "repr": rep.max, "repr_rel": rep.relative, "repr_sup": rep_sup, "ito_linear": lin, "ito_quadratic": quad})
    return rows


def c10_representation(rc: RunConfig, rows=None) -> list[Record]:
    rows = representation_ladder(rc) if rows is None else rows
    r = [row["repr"] for row in rows]
    worst = min(a / b if b > 0 else np.inf for a, b in zip(r, r[1:]))
    return [
        ge("representation residual min decrease factor per doubling", worst, 1.5, "integral-representation"),
        le("representation relative residual at finest N", rows[-1]["repr_rel"], 1e-2, "integral-representation"),
    ]


def c11_ito(rc: RunConfig, rows=None) -> list[Record]:
    rows = representation_ladder(rc) if rows is None else rows
    excess = max(row["ito_linear"] - row["repr_sup"] for row in rows)
    q = [row["ito_quadratic"] for row in rows]
    worst = max(b / a for a, b in zip(q, q[1:]))
    return [
        le("linear-F Itô residual minus representation residual", excess, 1e-12, "ito-formula"),
        le("quadratic-F Itô residual max ratio per doubling", worst, 1.0 - 1e-12, "ito-formula"),
    ]


def c12_wong_zakai(rc: RunConfig) -> list[Record]:
    model, G = build_model(rc)
    x = build_path(rc)
    cfg = _cfg(rc, lift(x), model, G)
    t = wong_zakai(default_psi(model), x, rc.T * 2.0 ** -np.arange(4, 9), cfg)
    worst = max(b / a if a > 0 else (0.0 if b == 0 else np.inf) for a, b in zip(t.errors, t.errors[1:]))
    return [le("Wong-Zakai error max ratio across widths", worst, 1.1, "wong-zakai")]


def fault_injection_study(rc: RunConfig, eps: float = 1.0):
    model, G = build_model(rc)
    Lf = lift(build_path(rc))
    cfg = _cfg(rc, Lf, model, G)
    sol = euler_solve(default_psi(model), cfg)
    wrong = eps * np.ones(model.K) / np.sqrt(model.K)
    rho = rc.eta + rc.alpha
    good, bad = [], []
    for N in _ladder(rc.N):
        s = sol.subsample(rc.N // N)
        L = Lf.subsample(rc.N // N)
        f = s.controlled()
        fb = ControlledFunction(s.grid, s.values, s.derivative + wrong)
        good.append(sg_remainder(f, L, rho, model, rc.alpha).seminorm)
        bad.append(sg_remainder(fb, L, rho, model, rc.alpha).seminorm)
    return np.array(good), np.array(bad)


def c13_fault_injection(rc: RunConfig) -> list[Record]:
    good, bad = fault_injection_study(rc)
    g_ratio = max(b / a if a > 0 else (1.0 if b == 0 else np.inf) for a, b in zip(good, good[1:]))
    b_ratio = min(b / a for a, b in zip(bad, bad[1:]))
    return [
        le("correct derivative: remainder seminorm max ratio per doubling", g_ratio, 1.5, "sg-derivative-uniqueness"),
        ge("perturbed derivative: remainder seminorm min ratio per doubling", b_ratio, 1.0 + 1e-12, "sg-derivative-uniqueness"),
        ge("perturbed over correct seminorm growth, finest vs coarsest",
           (bad[-1] / bad[0]) / max(good[-1] / good[0], 1e-300) if good[0] > 0 else np.inf, 1.2,
           "sg-derivative-uniqueness"),
    ]


def semigroup_drift(model: ScaleModel, which: str, lo: float, hi: float, T: float, seed: int):
    """Base value and max relative drift under probe doubling and t-grid doubling."""
    def measure(n, nt):
        tg = np.geomspace(T * 1e-4, T, nt)
        b = verify_semigroup_bounds(model, lo, hi, tg, probe_set(model, n, seed, lo if which == "L" else hi))
        return b.L if which == "L" else b.C
    base = measure(100, 256)
    drift = max(abs(measure(200, 256) / base - 1), abs(measure(100, 512) / base - 1))
    return base, drift


def c14_semigroup(rc: RunConfig) -> list[Record]:
    model = ScaleModel(rc.K)
    ea = rc.eta + rc.alpha
    out = []
    for which, lo, hi in (("L", 0.0, 0.5), ("L", rc.alpha, ea), ("C", 0.0, 1.0), ("C", rc.alpha, ea)):
        base, drift = semigroup_drift(model, which, lo, hi, rc.T, rc.seed)
        label = f"(zeta,lambda)=({lo:g},{hi:g})" if which == "L" else f"(mu,nu)=({hi:g},{lo:g})"
        out.append(le(f"{which} constant {label} finite", base if np.isfinite(base) else np.inf, 1e300, "semigroup-smoothing"))
        out.append(le(f"{which} constant {label} drift under doubling", drift, 0.05, "semigroup-smoothing"))
    return out


CRITERIA: dict[int, Callable[[RunConfig], list[Record]]] = {
    1: c01_chen,
    2: c02_sewing_oracle,
    3: c03_smooth_oracle,
    4: c04_chasles_linearity,
    5: c05_commuting,
    6: c06_lift_shift,
    7: c07_young_rough,
    8: c08_fixed_point,
    9: c09_smoothing,
    10: c10_representation,
    11: c11_ito,
    12: c12_wong_zakai,
    13: c13_fault_injection,
    14: c14_semigroup,
}


# extra invariants used by the suites ------------------------------------------------


def inv_semigroup(rc: RunConfig) -> list[Record]:
    model = ScaleModel(rc.K)
    probes = probe_set(model, 100, rc.seed)
    law = 0.0
    for s in (0.1, 0.3):
        for t in (0.1, 0.3):
            lhs = semigroup_apply(model, s, semigroup_apply(model, t, probes))
            law = max(law, float(np.max(np.abs(lhs - semigroup_apply(model, s + t, probes)))))
    gen = max(generator_integral_identity(model, 1.0, v) for v in probes)
    G = make_operator(model, "diagonal", "decay")
    comm = max(float(np.max(np.abs(commutator_apply(G, 0.1, 0.4, v)))) for v in probes)
    diag_min = float(np.min(model.semigroup_diag(np.linspace(0, rc.T, 65))))
    return [
        le("semigroup law defect", law, 1e-13, "semigroup-law"),
        le("generator integral identity residual", gen, 1e-13, "generator-identity"),
        le("commutator with diagonal G", comm, 1e-14, "commutator"),
        ge("smallest semigroup diagonal entry", diag_min, np.finfo(float).tiny, "semigroup-injectivity"),
    ]


def inv_chen(rc: RunConfig) -> list[Record]:
    x = build_path(rc)
    L = lift(x)
    rng = np.random.default_rng(rc.seed)
    i, j = np.sort(rng.integers(0, rc.N + 1, size=(2, 100)), axis=0)
    closed = np.max(np.abs(xx_eval(L, i, j) - 0.5 * (x.values[j] - x.values[i]) ** 2))
    same = np.array_equal(build_path(rc).values, x.values)
    return [
        le("geometric xx_eval vs closed form", closed, 1e-12, "chen-relation"),
        ge("seed determinism (bit-identical path)", float(same), 1.0, "plumbing"),
    ]


def inv_solver(rc: RunConfig) -> list[Record]:
    model, G = build_model(rc)
    L = lift(build_path(rc))
    cfg = _cfg(rc, L, model, G)
    psi = default_psi(model)
    eu, pc = euler_solve(psi, cfg), picard_solve(psi, cfg)
    scale = float(np.max(np.linalg.norm(pc.values, axis=-1)))
    psi2 = np.random.default_rng(rc.seed).standard_normal(model.K) / np.arange(1, model.K + 1) ** 2
    lin = np.max(np.abs(euler_solve(2 * psi - 3 * psi2, cfg).values - 2 * eu.values + 3 * euler_solve(psi2, cfg).values))
    return [
        le("euler vs picard sup gap / (tol * sup|y|)", np.max(np.abs(eu.values - pc.values)) / (rc.picard_tol * scale), 10.0, "fixed-point"),
        le("solution map linearity defect", lin, 1e-12, "linearity"),
    ]


def inv_sewing(rc: RunConfig) -> list[Record]:
    model = ScaleModel(rc.K)
    rng = np.random.default_rng(rc.seed)
    v1, v2 = rng.standard_normal((2, rc.K))
    g1 = Germ(lambda s, t: ((t - s) ** 2)[..., None] * v1)
    g2 = Germ(lambda s, t: ((t - s) ** 1.5)[..., None] * v2)
    M = lambda g: sew(g, 0.2, 0.7, model, max_depth=10).remainder_map
    return [le("sewing map linearity defect", np.max(np.abs(M(g1 + g2) - M(g1) - M(g2))), 1e-12, "sewing-linearity")]


SUITES: dict[str, list[Callable[[RunConfig], list[Record]]]] = {
    "chen": [c01_chen, inv_chen],
    "semigroup": [c14_semigroup, inv_semigroup],
    "sewing": [c02_sewing_oracle, c03_smooth_oracle, c04_chasles_linearity, inv_sewing, c07_young_rough, c13_fault_injection],
    "solver": [c05_commuting, c08_fixed_point, c09_smoothing, inv_solver],
    "analysis": [c06_lift_shift, c10_representation, c11_ito, c12_wong_zakai],
}
SUITES["all"] = [fn for name in ("chen", "semigroup", "sewing", "solver", "analysis") for fn in SUITES[name]]


def run_checks(fns, rc: RunConfig) -> list[Record]:
    out: list[Record] = []
    cache: dict = {}
    for fn in fns:
        if fn in (c10_representation, c11_ito):
            if "rows" not in cache:
                cache["rows"] = representation_ladder(rc)
            out.extend(fn(rc, cache["rows"]))
        else:
            out.extend(fn(rc))
    return out


def run_suite(name: str, rc: RunConfig | None = None) -> list[Record]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return run_checks(SUITES[name], RunConfig() if rc is None else rc)


# anchors per suite, listed without running anything
SUITE_ANCHORS = {
    "chen": ["chen-relation", "plumbing"],
    "semigroup": ["semigroup-smoothing", "semigroup-law", "generator-identity", "commutator", "semigroup-injectivity"],
    "sewing": ["sewing-map", "smooth-convolution-integral", "chasles-identity", "integral-linearity",
               "sewing-linearity", "young-rough-agreement", "sg-derivative-uniqueness"],
    "solver": ["commuting-solution", "fixed-point", "smoothing-estimate", "linearity"],
    "analysis": ["ito-lift-shift", "lift-sensitivity", "integral-representation", "ito-formula", "wong-zakai"],
}
SUITE_ANCHORS["all"] = sorted({a for k, v in SUITE_ANCHORS.items() if k != "all" for a in v})
