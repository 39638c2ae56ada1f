"""Radial grids on the truncated interval [r0, R_max] and sampled profiles.

Derivatives on (possibly graded) grids use Fornberg finite-difference weights:
centered stencils in the interior, one-sided stencils of matching order at the
ends.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

MIN_NODES = 16
MAX_GRADING = 1.05


def fornberg_weights(x0: float, x: np.ndarray, m: int) -> np.ndarray:
    """Weights for the ``m``-th derivative at ``x0`` from samples at ``x``.

    Fornberg (1988), "Generation of finite difference formulas on arbitrarily
    spaced grids".
    """
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    spacing: str = "uniform"
    ratio: float = 1.0
    _stencils: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < MIN_NODES:
            raise ParameterError(f"a radial grid needs at least {MIN_NODES} nodes")
        if not np.all(np.isfinite(nodes)) or np.any(np.diff(nodes) <= 0):
            raise ParameterError("grid nodes must be finite and strictly increasing")
        if self.spacing not in ("uniform", "graded"):
            raise ParameterError(f"unknown spacing policy {self.spacing!r}")
        if self.spacing == "graded" and not (1.0 <= self.ratio <= MAX_GRADING):
            raise ParameterError(f"grading ratio must lie in [1, {MAX_GRADING}], got {self.ratio}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, r0: float, R_max: float, num: int) -> "RadialGrid":
        if not R_max > r0:
            raise ParameterError(f"R_max={R_max} must exceed r0={r0}")
        nodes = np.linspace(r0, R_max, int(num))
        nodes[0], nodes[-1] = r0, R_max
        return cls(nodes, "uniform", 1.0)

    @classmethod
    def graded(cls, r0: float, R_max: float, num: int, ratio: float) -> "RadialGrid":
        """Geometric grid whose consecutive spacings grow by ``ratio``."""
        if not R_max > r0:
            raise ParameterError(f"R_max={R_max} must exceed r0={r0}")
        num = int(num)
        if num < MIN_NODES:
            raise ParameterError(f"a radial grid needs at least {MIN_NODES} nodes")
        if not (1.0 <= ratio <= MAX_GRADING):
            raise ParameterError(f"grading ratio must lie in [1, {MAX_GRADING}], got {ratio}")
        if ratio == 1.0:
            return cls.uniform(r0, R_max, num)
        steps = ratio ** np.arange(num - 1)
        nodes = np.concatenate(([0.0], np.cumsum(steps)))
        nodes = r0 + (R_max - r0) * nodes / nodes[-1]
        nodes[0], nodes[-1] = r0, R_max
        return cls(nodes, "graded", float(ratio))

    @property
    def r0(self) -> float:
        return float(self.nodes[0])

    @property
    def R_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def h_min(self) -> float:
        return float(np.min(np.diff(self.nodes)))

    def describe(self) -> dict:
        return {"r0": self.r0, "R_max": self.R_max, "num": self.size,
                "spacing": self.spacing, "ratio": self.ratio}

    def stencil(self, deriv: int, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Index and weight arrays, each of shape (num, width)."""
        key = (deriv, order)
        if key not in self._stencils:
            self._stencils[key] = _build_stencil(self.nodes, deriv, order)
        return self._stencils[key]

    def derivative(self, values, deriv: int = 1, order: int = 4) -> np.ndarray:
        idx, w = self.stencil(deriv, order)
        return np.einsum("ij,ij->i", w, np.asarray(values, dtype=float)[idx])

    def integrate(self, values) -> float:
        return float(np.trapezoid(values, self.nodes))


def _build_stencil(x: np.ndarray, deriv: int, order: int):
    n = len(x)
    half = (order + deriv - 1) // 2
    centered = 2 * half + 1
    one_sided = order + deriv
    width = max(centered, one_sided)
    if n < width:
        raise ParameterError("grid too small for the requested stencil")
    idx = np.zeros((n, width), dtype=np.intp)
    w = np.zeros((n, width))
    for i in range(n):
        if half <= i < n - half:
            cols = np.arange(i - half, i + half + 1)
        elif i < half:
            cols = np.arange(0, one_sided)
        else:
            cols = np.arange(n - one_sided, n)
        k = len(cols)
        idx[i, :k] = cols
        idx[i, k:] = cols[0]
        w[i, :k] = fornberg_weights(x[i], x[cols], deriv)
    return idx, w


def default_R_max(r0: float, mu: float, v_plus: float) -> float:
    return r0 + max(50.0, 20.0 * mu / abs(v_plus))


def default_grid(params, num: int = 2000, R_max: float | None = None,
                 ratio: float | None = None, stretch: float = 400.0) -> RadialGrid:
    """Grid used when a run config does not pin one.

    Graded towards r0 for n >= 4, where the stationary wave has a boundary
    layer of width ~ mu/|V_minus|; the last spacing is ``stretch`` times the
    first unless ``ratio`` is given.
    """
    if R_max is None:
        R_max = default_R_max(params.r0, params.mu, params.v_plus)
    if ratio is None:
        if params.n < 4:
            return RadialGrid.uniform(params.r0, R_max, num)
        ratio = min(MAX_GRADING, stretch ** (1.0 / max(num - 2, 1)))
    return RadialGrid.graded(params.r0, R_max, num, ratio)


@dataclass(frozen=True, eq=False)
class Profile:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise ParameterError("profile length does not match the grid")
        if not np.all(np.isfinite(values)):
            raise ParameterError("profile values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def derivative(self, deriv: int = 1, order: int = 4) -> np.ndarray:
        return self.grid.derivative(self.values, deriv, order)

    def __sub__(self, other: "Profile") -> "Profile":
        return Profile(self.grid, self.values - other.values)
