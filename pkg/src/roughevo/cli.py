"""Command line: ``run --config``, ``verify <suite>``, ``manifest --config``."""

from __future__ import annotations

import argparse
import os
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import RateTable, rate_fit, wong_zakai
from .checks import (
    SUITE_ANCHORS,
    SUITES,
    Record,
    c05_commuting,
    c08_fixed_point,
    c09_smoothing,
    c10_representation,
    c11_ito,
    c12_wong_zakai,
    commuting_study,
    le,
    representation_ladder,
    run_checks,
)
from .config import ConfigError, RunConfig, build_lift, build_path, build_solver_config, load_config
from .export import coefficient_rows, lift_rows, path_rows, write_csv, write_json
from .scale_model import scale_norm
from .solver import default_psi, euler_solve, smoothing_profile

OUT_DIR_ENV = "ROUGHEVO_OUT_DIR"

STUDY_ANCHORS = {
    "oracle": ["commuting-solution"],
    "wz": ["wong-zakai"],
    "repr": ["integral-representation"],
    "ito": ["ito-formula", "integral-representation"],
    "smoothing": ["smoothing-estimate"],
    "rates": ["fixed-point", "plumbing"],
    "verify_all": SUITE_ANCHORS["all"],
}


def _rate_csv(path: Path, table: RateTable):
    keys = list(table.extra)
    rows = table.rows()
    if table.slope is not None:
        rows.append(("slope", table.slope, *([""] * len(keys))))
    write_csv(path, [table.parameter, "error", *keys], rows)


def _solution_csv(path: Path, sol, cfg, mu: float):
    m = cfg.model
    rows = zip(
        sol.grid.points,
        scale_norm(m, 0.0, sol.values),
        scale_norm(m, cfg.eta + cfg.alpha, sol.values),
        scale_norm(m, 1.0 + mu, sol.values),
    )
    write_csv(path, ["t", "norm_0", "norm_eta_alpha", "norm_1_mu"], rows)


def study_oracle(rc: RunConfig, out: Path) -> list[Record]:
    if rc.G_kind != "diagonal":
        raise ConfigError("study=oracle needs G.kind=diagonal (commuting case)")
    te, tp = commuting_study(rc.replace(G_kind="diagonal"))
    rate_fit(te)
    _rate_csv(out / "oracle_rates.csv", te)
    return c05_commuting(rc)


def study_wz(rc: RunConfig, out: Path) -> list[Record]:
    cfg = build_solver_config(rc)
    x = cfg.lift.path
    t = wong_zakai(default_psi(cfg.model), x, rc.T * 2.0 ** -np.arange(4, 9), cfg)
    rate_fit(t)
    _rate_csv(out / "wong_zakai.csv", t)
    return c12_wong_zakai(rc)


def _ladder_csv(out: Path, rows):
    keys = list(rows[0])
    write_csv(out, keys, [[r[k] for k in keys] for r in rows])


def study_repr(rc: RunConfig, out: Path) -> list[Record]:
    rows = representation_ladder(rc)
    _ladder_csv(out / "representation.csv", rows)
    return c10_representation(rc, rows)


def study_ito(rc: RunConfig, out: Path) -> list[Record]:
    rows = representation_ladder(rc)
    _ladder_csv(out / "ito.csv", rows)
    return c11_ito(rc, rows)


def study_smoothing(rc: RunConfig, out: Path) -> list[Record]:
    cfg = build_solver_config(rc)
    sol = euler_solve(default_psi(cfg.model), cfg)
    mu = (2 * rc.eta + rc.alpha - 1) / 2
    p = smoothing_profile(sol, mu, cfg)
    write_csv(out / "smoothing_profile.csv", ["t", "profile"], zip(p.times, p.profile))
    _solution_csv(out / "solution_norms.csv", sol, cfg, mu)
    return c09_smoothing(rc)


def study_rates(rc: RunConfig, out: Path) -> list[Record]:
    """Self-convergence of the Euler scheme against the finest grid, plus the Picard checks."""
    x = build_path(rc)
    Lf = build_lift(rc, x)
    cfg = build_solver_config(rc, Lf)
    psi = default_psi(cfg.model)
    ref = euler_solve(psi, cfg)
    Ns, errs = [], []
    for fac in (32, 16, 8, 4):
        L = Lf.subsample(fac)
        y = euler_solve(psi, cfg.with_lift(L)).values
        Ns.append(L.grid.N)
        errs.append(float(np.max(scale_norm(cfg.model, 0.0, y - ref.values[::fac]))))
    t = RateTable("N", Ns, errs)
    fit = rate_fit(t)
    _rate_csv(out / "self_convergence.csv", t)
    write_csv(out / "path.csv", ["t", "x"], path_rows(x))
    write_csv(out / "lift.csv", ["t_k", "dx_k", "XX_k"], lift_rows(Lf))
    write_csv(out / "solution_coefficients.csv", ["t", *[f"c{k}" for k in range(1, rc.K + 1)]],
              coefficient_rows(ref.grid, ref.values))
    return [le("Euler self-convergence slope", fit.slope, 0.0, "plumbing"), *c08_fixed_point(rc)]


def study_verify_all(rc: RunConfig, out: Path) -> list[Record]:
    return run_checks(SUITES["all"], rc)


STUDIES = {
    "oracle": study_oracle,
    "wz": study_wz,
    "repr": study_repr,
    "ito": study_ito,
    "smoothing": study_smoothing,
    "rates": study_rates,
    "verify_all": study_verify_all,
}


def _out_dir(rc: RunConfig) -> Path:
    return Path(os.environ.get(OUT_DIR_ENV) or rc.out_dir)


def make_report(rc: RunConfig | None, records: list[Record], wall: float, label: str) -> dict:
    return {
        "label": label,
        "config": None if rc is None else rc.as_dict(),
        "config_hash": None if rc is None else rc.digest(),
        "records": [r.as_dict() for r in records],
        "passed": all(r.passed for r in records),
        "wall_clock_s": round(wall, 3),
        "version": __version__,
    }


def print_table(records: list[Record], stream=None):
    stream = sys.stdout if stream is None else stream
    w = max([len(r.name) for r in records] + [4])
    for r in records:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark}  {r.name:<{w}}  {r.value:.6g} {r.relation} {r.threshold:g}  [{r.anchor}]", file=stream)
    n = sum(r.passed for r in records)
    print(f"{n}/{len(records)} checks passed", file=stream)


def manifest(rc: RunConfig) -> dict:
    return {
        "config_hash": rc.digest(),
        "seed": rc.seed,
        "study": rc.study,
        "version": __version__,
        "anchors": sorted(set(STUDY_ANCHORS[rc.study])),
    }


def cmd_run(args) -> int:
    rc = load_config(args.config)
    out = _out_dir(rc)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    records = STUDIES[rc.study](rc, out)
    report = make_report(rc, records, time.perf_counter() - t0, f"study={rc.study}")
    write_json(out / "report.json", report)
    write_json(out / "manifest.json", manifest(rc))
    print_table(records)
    return 0 if report["passed"] else 1


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    rc = RunConfig()
    records = run_checks(SUITES[args.suite], rc)
    report = make_report(rc, records, time.perf_counter() - t0, f"verify {args.suite}")
    if args.out:
        write_json(Path(args.out), report)
    print_table(records)
    return 0 if report["passed"] else 1


def cmd_manifest(args) -> int:
    rc = load_config(args.config)
    out = _out_dir(rc)
    path = write_json(out / "manifest.json", manifest(rc))
    print(path.read_text(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roughevo", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the study named in a config file")
    r.add_argument("--config", required=True)
    r.set_defaults(fn=cmd_run)
    v = sub.add_parser("verify", help="run a verification suite with the default config")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--out", help="optional JSON report path")
    v.set_defaults(fn=cmd_verify)
    m = sub.add_parser("manifest", help="write the JSON manifest of a config")
    m.add_argument("--config", required=True)
    m.set_defaults(fn=cmd_manifest)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError,) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        tb = traceback.extract_tb(exc.__traceback__)
        where = tb[-1] if tb else None
        loc = f"{Path(where.filename).stem}.{where.name}" if where else "?"
        print(f"numerical failure in {loc}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

