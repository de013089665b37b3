"""Spectral testbed for the semigroup and the scale of spaces.

The generator is the Dirichlet Laplacian on (0, pi) truncated to ``K`` sine
modes, so ``A = -diag(k**2)`` and ``S(t) = diag(exp(-k**2 t))`` are exact.
Elements of the state space are coefficient vectors in the sine basis and the
space ``E_lam`` carries the weighted norm ``(sum (1 + k**2)**(2 lam) c_k**2)**0.5``.

Vectors are plain ``numpy`` arrays whose last axis has length ``K``; leading
axes are treated as batch dimensions everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import fft

MAX_SCALE_INDEX = 3.0


def _check_index(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam < MAX_SCALE_INDEX:
        raise ValueError(f"scale index {lam} outside [0, {MAX_SCALE_INDEX})")
    return lam


@dataclass(frozen=True)
class ScaleModel:
    """Truncated eigenmode realization of the generator and its semigroup."""

    modes: int
    eigenvalues: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.modes) < 1:
            raise ValueError("need at least one mode")
        k = np.arange(1, int(self.modes) + 1, dtype=float)
        object.__setattr__(self, "eigenvalues", k**2)

    @property
    def K(self) -> int:
        return int(self.modes)

    def collocation_points(self, count: int | None = None) -> np.ndarray:
        """Interior nodes ``m pi / (count + 1)``; ``count`` defaults to ``K``."""
        n = self.K if count is None else int(count)
        return np.arange(1, n + 1) * np.pi / (n + 1)

    def semigroup_diag(self, t) -> np.ndarray:
        """Diagonal of ``S(t)``; ``t`` may be an array, giving shape ``t.shape + (K,)``."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("semigroup time must be nonnegative")
        return np.exp(-np.multiply.outer(t, self.eigenvalues))

    def weights(self, lam: float) -> np.ndarray:
        return (1.0 + self.eigenvalues) ** _check_index(lam)

    def _check_vector(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.K:
            raise ValueError(f"vector has {v.shape[-1]} coefficients, model has {self.K}")
        return v

    def nodal_values(self, v, count: int | None = None) -> np.ndarray:
        """Point values of the sine series on ``count`` interior nodes (DST-I)."""
        v = self._check_vector(v)
        n = self.K if count is None else int(count)
        if n < self.K:
            raise ValueError("need at least K nodes")
        pad = [(0, 0)] * (v.ndim - 1) + [(0, n - self.K)]
        return fft.dst(np.pad(v, pad), type=1, axis=-1) / 2.0

    def from_nodal(self, values, count: int | None = None) -> np.ndarray:
        """Inverse of :meth:`nodal_values`, truncated to the first ``K`` modes."""
        values = np.asarray(values, dtype=float)
        n = values.shape[-1]
        if count is not None and n != int(count):
            raise ValueError("node count mismatch")
        return (fft.dst(values, type=1, axis=-1) / (n + 1))[..., : self.K]


def semigroup_apply(model: ScaleModel, t: float, v) -> np.ndarray:
    """Apply ``S(t)`` component-wise: ``exp(-mu_k t) v_k``."""
    if t < 0:
        raise ValueError("semigroup time must be nonnegative")
    v = model._check_vector(v)
    if t == 0:
        return v.copy()
    return model.semigroup_diag(t) * v


def scale_norm(model: ScaleModel, lam: float, v) -> np.ndarray | float:
    """Norm of ``v`` in ``E_lam``; reduces over the last axis."""
    v = model._check_vector(v)
    return np.linalg.norm(model.weights(lam) * v, axis=-1)


@dataclass(frozen=True)
class MultOperator:
    """Bounded multiplication-type operator ``G``.

    ``kind="diagonal"`` multiplies coefficient ``k`` by ``data[k]`` and so
    commutes with the semigroup.  ``kind="collocation"`` multiplies point values
    by the symbol ``data`` sampled on ``len(data)`` interior nodes and projects
    back onto the ``K`` retained modes.
    """

    model: ScaleModel
    kind: str
    data: np.ndarray
    symbol: str = "custom"
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("diagonal", "collocation"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        data = np.asarray(self.data, dtype=float)
        if self.kind == "diagonal" and data.shape != (self.model.K,):
            raise ValueError("diagonal data must have K entries")
        if self.kind == "collocation" and (data.ndim != 1 or data.size < self.model.K):
            raise ValueError("collocation symbol needs at least K node values")
        object.__setattr__(self, "data", data)
        eye = np.eye(self.model.K)
        object.__setattr__(self, "matrix", mult_apply(self, eye).T.copy())

    @classmethod
    def diagonal(cls, model: ScaleModel, coeffs, symbol: str = "custom") -> "MultOperator":
        return cls(model, "diagonal", np.broadcast_to(np.asarray(coeffs, float), (model.K,)), symbol)

    @classmethod
    def collocation(
        cls,
        model: ScaleModel,
        g: Callable[[np.ndarray], np.ndarray],
        nodes: int | None = None,
        symbol: str = "custom",
    ) -> "MultOperator":
        """Sample ``g`` on ``nodes`` interior points (default ``4 (K + 1) - 1``)."""
        n = default_node_count(model) if nodes is None else int(nodes)
        xi = model.collocation_points(n)
        return cls(model, "collocation", np.asarray(g(xi), dtype=float), symbol)

    @property
    def squared(self) -> np.ndarray:
        return self.matrix @ self.matrix

    def norm(self, lam: float) -> float:
        """Exact operator norm on ``E_lam`` (weighted spectral norm)."""
        w = self.model.weights(lam)
        return float(np.linalg.norm((w[:, None] * self.matrix) / w[None, :], ord=2))


def default_node_count(model: ScaleModel) -> int:
    return 4 * (model.K + 1) - 1


def mult_apply(G: MultOperator, v) -> np.ndarray:
    v = G.model._check_vector(v)
    if G.kind == "diagonal":
        return G.data * v
    n = G.data.size
    vals = G.model.nodal_values(v, n)
    return G.model.from_nodal(G.data * vals, n)


def commutator_apply(G: MultOperator, s: float, t: float, v) -> np.ndarray:
    """``[G, S(t - s) - I] v``."""
    if s > t:
        raise ValueError("commutator needs s <= t")
    if G.kind == "diagonal" or s == t:
        return np.zeros_like(G.model._check_vector(v))
    m = G.model
    a = lambda w: semigroup_apply(m, t - s, w) - w
    return mult_apply(G, a(v)) - a(mult_apply(G, v))


def probe_set(model: ScaleModel, n: int, seed: int = 0, lam: float = 0.0) -> np.ndarray:
    """Unit basis vectors followed by ``n`` Gaussian vectors, all of unit ``E_lam`` norm.

    The basis vectors make empirical norms of diagonal operators exact, so sup
    statistics do not drift as ``n`` grows.
    """
    if n < 0:
        raise ValueError("probe count must be nonnegative")
    rng = np.random.default_rng(seed)
    v = np.vstack([np.eye(model.K), rng.standard_normal((n, model.K))])
    return v / scale_norm(model, lam, v)[:, None]


def empirical_norm(G: MultOperator, lam: float, probes) -> float:
    probes = np.asarray(probes, dtype=float)
    if probes.size == 0:
        raise ValueError("empty probe set")
    num = scale_norm(G.model, lam, mult_apply(G, probes))
    return float(np.max(num / scale_norm(G.model, lam, probes)))


@dataclass(frozen=True)
class SemigroupBounds:
    L: float
    C: float | None


def verify_semigroup_bounds(
    model: ScaleModel, zeta: float, lam: float, t_grid, probes
) -> SemigroupBounds:
    """Measured constants for the smoothing and the ``S(t) - I`` estimates.

    ``L = sup t**(lam - zeta) |S(t) v|_lam / |v|_zeta`` and, with ``mu = lam``
    and ``nu = zeta``, ``C = sup t**(nu - mu) |(S(t) - I) v|_nu / |v|_mu``.
    ``C`` is ``None`` when ``zeta == lam``.
    """
    zeta, lam = _check_index(zeta), _check_index(lam)
    if zeta > lam:
        raise ValueError("need zeta <= lam")
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    if probes.size == 0:
        raise ValueError("empty probe set")
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t_grid must be positive")
    d = model.semigroup_diag(t)[:, None, :]  # (nt, 1, K)
    src = scale_norm(model, zeta, probes)
    img = np.linalg.norm(model.weights(lam) * d * probes[None], axis=-1)
    L = float(np.max(t[:, None] ** (lam - zeta) * img / src))
    C = None
    if lam > zeta:
        src = scale_norm(model, lam, probes)
        img = np.linalg.norm(model.weights(zeta) * (d - 1.0) * probes[None], axis=-1)
        C = float(np.max(t[:, None] ** (zeta - lam) * img / src))
    return SemigroupBounds(L, C)


def generator_integral_identity(model: ScaleModel, t: float, v) -> float:
    """Residual of ``A int_0^t S(r) v dr = S(t) v - v`` in ``E_0``."""
    if t <= 0:
        raise ValueError("need t > 0")
    v = model._check_vector(v)
    mu = model.eigenvalues
    integral = -np.expm1(-mu * t) / mu * v
    lhs = -mu * integral
    rhs = semigroup_apply(model, t, v) - v
    return float(scale_norm(model, 0.0, lhs - rhs))


# symbol registries used by the config layer
COLLOCATION_SYMBOLS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin": np.sin,
    "cos": np.cos,
    "one": np.ones_like,
    "bump": lambda xi: 0.5 + 0.5 * np.cos(2.0 * xi),
}

DIAGONAL_SYMBOLS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "one": lambda k: np.ones_like(k),
    "decay": lambda k: 0.5 + 1.0 / k,
    "zero": lambda k: np.zeros_like(k),
}


def make_operator(model: ScaleModel, kind: str, symbol: str, nodes: int | None = None) -> MultOperator:
    if kind == "zero" or symbol == "zero":
        return MultOperator.diagonal(model, 0.0, symbol="zero")
    if kind == "diagonal":
        try:
            fn = DIAGONAL_SYMBOLS[symbol]
        except KeyError:
            raise ValueError(f"unknown diagonal symbol {symbol!r}") from None
        k = np.arange(1, model.K + 1, dtype=float)
        return MultOperator.diagonal(model, fn(k), symbol=symbol)
    if kind == "collocation":
        try:
            fn = COLLOCATION_SYMBOLS[symbol]
        except KeyError:
            raise ValueError(f"unknown collocation symbol {symbol!r}") from None
        return MultOperator.collocation(model, fn, nodes=nodes, symbol=symbol)
    raise ValueError(f"unknown operator kind {kind!r}")
