"""Flat ``key = value`` run configuration with strict parsing."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .rough_path import CHOLESKY_MAX_STEPS, Lift, ShiftFunction, TimeGrid, ito_shift, lift, sample_fbm
from .scale_model import MultOperator, ScaleModel, make_operator
from .solver import SolverConfig

STUDIES = ("oracle", "wz", "repr", "ito", "smoothing", "rates", "verify_all")
LIFT_KINDS = ("geometric", "shifted", "ito")
G_KINDS = ("diagonal", "collocation", "zero")

# config key -> dataclass field
KEYS = {
    "H": "H",
    "eta": "eta",
    "alpha": "alpha",
    "T": "T",
    "N": "N",
    "K": "K",
    "seed": "seed",
    "G.kind": "G_kind",
    "G.symbol": "G_symbol",
    "lift.kind": "lift_kind",
    "lift.h": "lift_h",
    "picard.tol": "picard_tol",
    "picard.max_iter": "picard_max_iter",
    "study": "study",
    "out_dir": "out_dir",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    H: float = 0.4
    eta: float = 0.38
    alpha: float = 0.25
    T: float = 1.0
    N: int = 4096
    K: int = 16
    seed: int = 42
    G_kind: str = "collocation"
    G_symbol: str = "sin"
    lift_kind: str = "geometric"
    lift_h: str = "none"
    picard_tol: float = 1e-10
    picard_max_iter: int = 60
    study: str = "verify_all"
    out_dir: str = "out"

    def __post_init__(self):
        if not (1.0 / 3.0 < self.H <= 1.0):
            raise ConfigError(f"H={self.H} outside (1/3, 1]")
        if not (1.0 / 3.0 < self.eta <= 0.5):
            raise ConfigError(f"eta={self.eta} outside (1/3, 1/2]")
        if not (1.0 - 2.0 * self.eta < self.alpha < self.eta):
            raise ConfigError(
                f"alpha={self.alpha} violates 1 - 2 eta < alpha < eta with eta={self.eta}"
            )
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if self.N < 2 or self.K < 1:
            raise ConfigError("need N >= 2 and K >= 1")
        if self.G_kind not in G_KINDS:
            raise ConfigError(f"G.kind must be one of {G_KINDS}")
        if self.lift_kind not in LIFT_KINDS:
            raise ConfigError(f"lift.kind must be one of {LIFT_KINDS}")
        if self.lift_kind == "shifted" and self.lift_h == "none":
            raise ConfigError("lift.kind=shifted needs lift.h")
        _parse_shift(self.lift_h)
        if not self.picard_tol > 0 or self.picard_max_iter < 1:
            raise ConfigError("invalid picard settings")
        if self.study not in STUDIES:
            raise ConfigError(f"study must be one of {STUDIES}")

    def to_text(self) -> str:
        """Canonical form: one ``key = value`` line per key, in key order."""
        return "".join(f"{k} = {getattr(self, f)!r}\n".replace("'", "") for k, f in KEYS.items())

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def as_dict(self) -> dict:
        return {k: getattr(self, f) for k, f in KEYS.items()}

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def _parse_shift(text: str) -> float | None:
    """``none`` | ``half_t`` | ``linear:<slope>``; returns the slope."""
    if text == "none":
        return None
    if text == "half_t":
        return 0.5
    if text.startswith("linear:"):
        try:
            return float(text.split(":", 1)[1])
        except ValueError:
            pass
    raise ConfigError(f"lift.h must be none, half_t or linear:<slope>, got {text!r}")


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Unknown or repeated keys fail."""
    types = {f.name: f.type for f in fields(RunConfig)}
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name = KEYS[key]
        if name in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        kind = types[name]
        try:
            values[name] = int(val) if kind == "int" else float(val) if kind == "float" else val
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {val!r}") from None
    try:
        return RunConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text())


def build_model(rc: RunConfig) -> tuple[ScaleModel, MultOperator]:
    model = ScaleModel(rc.K)
    G = make_operator(model, rc.G_kind, rc.G_symbol)
    return model, G


def build_path(rc: RunConfig, N: int | None = None, H: float | None = None):
    n = rc.N if N is None else N
    method = "cholesky" if n <= CHOLESKY_MAX_STEPS else "circulant"
    return sample_fbm(rc.H if H is None else H, TimeGrid(rc.T, n), rc.seed, method)


def build_lift(rc: RunConfig, x) -> Lift:
    if rc.lift_kind == "geometric":
        return lift(x, "geometric")
    if rc.lift_kind == "ito":
        return lift(x, "shifted", ito_shift(x.grid))
    return lift(x, "shifted", ShiftFunction.linear(x.grid, _parse_shift(rc.lift_h)))


def build_solver_config(rc: RunConfig, L: Lift | None = None) -> SolverConfig:
    model, G = build_model(rc)
    if L is None:
        L = build_lift(rc, build_path(rc))
    return SolverConfig(rc.eta, rc.alpha, L, model, G, rc.picard_tol, rc.picard_max_iter, seed=rc.seed)
