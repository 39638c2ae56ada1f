"""Time evolution of the radial IBVP around its stationary wave.

Each step treats the Burgers flux explicitly (conservative face fluxes with a
linear reconstruction, upwind or local Lax-Friedrichs) and the viscous term

    mu (v_rr + (n-1) (v/r)_r)

implicitly through a theta-scheme on a tridiagonal system. Dirichlet data are
``v_minus`` at r0 and ``phi(R_max)`` at the truncation radius.

By default the scheme is well balanced: the discrete residual of the
stationary wave is subtracted as a source, so ``v = phi`` is an exact fixed
point and perturbation decay can be followed down to round-off. The source
is O(dr^2), so consistency is unaffected.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import lapack

from .errors import CflCollapse, InadmissibleError, NonFinite, ParameterError
from .grid import Profile, RadialGrid
from .problem import ProblemParams, validate_admissible
from .stationary import StationaryWave


class Family(str, enum.Enum):
    EXACT_STATIONARY = "ExactStationary"
    COMPACT_BUMP = "CompactBump"
    ALGEBRAIC_TAIL = "AlgebraicTail"
    EXPONENTIAL_TAIL = "ExponentialTail"


class Flux(str, enum.Enum):
    UPWIND = "Upwind"
    LLF = "LocalLaxFriedrichs"


@dataclass(frozen=True)
class InitialDataSpec:
    family: Family = Family.COMPACT_BUMP
    amplitude: float = 1e-2
    center: float = 3.0
    width: float = 1.0
    p: float = 3.0
    q: float = 1.0
    alpha: float | None = None
    # length of the smooth ramp that pins the tail families to zero at r0
    ramp: float = 1.0
    # fraction of [r0, R_max] over which tail families are tapered to zero
    taper: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not math.isfinite(self.amplitude):
            raise ParameterError("amplitude must be finite")
        if self.family is Family.COMPACT_BUMP and not self.width > 0:
            raise ParameterError("bump width must be positive")
        if self.family is Family.EXPONENTIAL_TAIL and not self.q > 0:
            raise ParameterError("exponential tail rate q must be positive")
        if not (0 < self.taper < 1) or not self.ramp > 0:
            raise ParameterError("ramp must be positive and taper in (0, 1)")
        if self.family is Family.ALGEBRAIC_TAIL and self.alpha is not None:
            if self.p <= 1.5 or self.alpha >= 2 * self.p - 3:
                raise ParameterError(
                    f"w0 is not in L^2_alpha for alpha={self.alpha} when p={self.p}; "
                    f"need alpha < 2p - 3 = {2 * self.p - 3:g}")

    @property
    def max_admissible_alpha(self) -> float:
        """Supremum (exclusive) of alpha with w0 in the algebraic weighted space."""
        if self.family is Family.ALGEBRAIC_TAIL:
            return 2 * self.p - 3
        return math.inf

    @property
    def max_admissible_beta(self) -> float:
        """Supremum (exclusive) of beta with w0 in the exponential weighted space."""
        if self.family is Family.EXPONENTIAL_TAIL:
            return 2 * self.q
        if self.family is Family.ALGEBRAIC_TAIL:
            return 0.0
        return math.inf

    def to_dict(self) -> dict:
        return {"family": self.family.value, "amplitude": self.amplitude,
                "center": self.center, "width": self.width, "p": self.p, "q": self.q,
                "alpha": self.alpha, "ramp": self.ramp, "taper": self.taper}

    @classmethod
    def from_dict(cls, data: dict) -> "InitialDataSpec":
        return cls(**data)


def bump(r, center: float, width: float, power: int = 4) -> np.ndarray:
    """``(1 - x^2)^power`` bump, x = (r - center)/width: peak 1, support ``center +- width``.

    A polynomial bump rather than ``exp(-1/(1-x^2))``: its derivatives stay
    moderate, so refinement studies reach their asymptotic regime on desk-scale
    grids. With power 4 it is C^3, which puts w0 in H^4.
    """
    x = (np.asarray(r, float) - center) / width
    return np.where(np.abs(x) < 1, (1.0 - np.minimum(x * x, 1.0)) ** power, 0.0)


def _smoothstep(x):
    """C-infinity transition from 0 (x <= 0) to 1 (x >= 1)."""
    x = np.asarray(x, float)

    def g(y):
        out = np.zeros_like(y)
        pos = y > 0
        out[pos] = np.exp(-1.0 / y[pos])
        return out
    return g(x) / (g(x) + g(1.0 - x))


def taper_start(grid: RadialGrid, spec: InitialDataSpec) -> float:
    return grid.R_max - spec.taper * (grid.R_max - grid.r0)


def perturbation(grid: RadialGrid, spec: InitialDataSpec) -> np.ndarray:
    r = grid.nodes
    r0, R = grid.r0, grid.R_max
    fam = spec.family
    if fam is Family.EXACT_STATIONARY:
        return np.zeros_like(r)
    if fam is Family.COMPACT_BUMP:
        if spec.center - spec.width <= r0 or spec.center + spec.width >= R:
            raise ParameterError("bump support must lie strictly inside (r0, R_max)")
        return spec.amplitude * bump(r, spec.center, spec.width)
    ramp = 1.0 - np.exp(-(r - r0) / spec.ramp)
    Rc = taper_start(grid, spec)
    cut = 1.0 - _smoothstep((r - Rc) / (R - Rc))
    if fam is Family.ALGEBRAIC_TAIL:
        shape = (math.sqrt(1 + r0 * r0) / np.sqrt(1 + r * r)) ** spec.p
    else:
        shape = np.exp(-spec.q * (r - r0))
    return spec.amplitude * ramp * shape * cut


def make_initial_data(sw: StationaryWave, spec: InitialDataSpec) -> Profile:
    """``v0 = phi + perturbation``; exact at r0 and at R_max."""
    pert = perturbation(sw.grid, spec)
    v0 = sw.phi.values + pert
    v0[0] = sw.params.v_minus
    v0[-1] = sw.phi.values[-1]
    return Profile(sw.grid, v0)


def support_edge(grid: RadialGrid, spec: InitialDataSpec) -> float:
    if spec.family is Family.COMPACT_BUMP:
        return spec.center + spec.width
    if spec.family is Family.EXACT_STATIONARY:
        return grid.r0
    return grid.R_max


def contamination_time(params: ProblemParams, grid: RadialGrid, spec: InitialDataSpec) -> float:
    """Time before the truncation at R_max can influence decay measurements.

    Compact data: time for a signal to travel from the support edge to
    R_max. Tail data are cut off at the taper start, and the missing tail is
    carried inward at speed ~|v_plus|, so the bound is the travel time from
    the taper start to r0.
    """
    speed = max(abs(params.v_minus), abs(params.v_plus))
    if spec.family in (Family.ALGEBRAIC_TAIL, Family.EXPONENTIAL_TAIL):
        return (taper_start(grid, spec) - grid.r0) / speed
    return (grid.R_max - support_edge(grid, spec)) / speed


@dataclass(frozen=True)
class SchemeConfig:
    dt: float | None = None
    cfl_target: float = 0.5
    flux: Flux = Flux.UPWIND
    theta: float = 1.0
    snapshot_times: tuple = ()
    reconstruction: int = 2
    well_balanced: bool = True

    def __post_init__(self):
        object.__setattr__(self, "flux", Flux(self.flux))
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))
        if self.dt is not None and not self.dt > 0:
            raise ParameterError("dt must be positive")
        if not (0 < self.cfl_target <= 0.5):
            raise ParameterError("cfl_target must lie in (0, 0.5]")
        if not (0.5 <= self.theta <= 1.0):
            raise ParameterError("theta must lie in [0.5, 1]")
        if self.reconstruction not in (1, 2):
            raise ParameterError("reconstruction order must be 1 or 2")
        ts = self.snapshot_times
        if any(t < 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ParameterError("snapshot times must be non-negative and strictly increasing")

    def to_dict(self) -> dict:
        return {"dt": self.dt, "cfl_target": self.cfl_target, "flux": self.flux.value,
                "theta": self.theta, "snapshot_times": list(self.snapshot_times),
                "reconstruction": self.reconstruction, "well_balanced": self.well_balanced}

    @classmethod
    def from_dict(cls, data: dict) -> "SchemeConfig":
        return cls(**data)


def uniform_snapshots(T_end: float, count: int = 200) -> tuple:
    return tuple(np.linspace(0.0, T_end, count + 1))


@dataclass
class Trajectory:
    times: list
    snapshots: list
    sw: StationaryWave
    scheme: SchemeConfig
    sup_diff: list = field(default_factory=list)
    boundary_w: list = field(default_factory=list)
    steps: int = 0
    dt_min: float = math.inf
    complete: bool = True

    @property
    def grid(self) -> RadialGrid:
        return self.sw.grid

    def profile(self, k: int) -> Profile:
        return Profile(self.grid, self.snapshots[k])

    def series(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.times), np.asarray(self.sup_diff)


class _Operators:
    """Flux and diffusion stencils for a fixed grid."""

    def __init__(self, params: ProblemParams, grid: RadialGrid, scheme: SchemeConfig):
        r = grid.nodes
        self.r = r
        self.mu = params.mu
        hm = r[1:-1] - r[:-2]
        hp = r[2:] - r[1:-1]
        den = hm * hp * (hm + hp)
        nm1 = params.n - 1
        ri = r[1:-1]
        # v_rr and v_r three-point weights on the nonuniform grid
        rr_l, rr_c, rr_u = 2 * hp / den, -2 * (hm + hp) / den, 2 * hm / den
        r_l, r_c, r_u = -hp * hp / den, (hp * hp - hm * hm) / den, hm * hm / den
        self.lower = self.mu * (rr_l + nm1 * r_l / ri)
        self.diag = self.mu * (rr_c + nm1 * (r_c / ri - 1.0 / ri ** 2))
        self.upper = self.mu * (rr_u + nm1 * r_u / ri)
        self.h = np.diff(r)
        self.vol = 0.5 * (r[2:] - r[:-2])
        self.slope_l, self.slope_c, self.slope_u = r_l, r_c, r_u
        self.scheme = scheme
        self._factor_cache: dict = {}

    def diffusion(self, v):
        return self.lower * v[:-2] + self.diag * v[1:-1] + self.upper * v[2:]

    def flux_divergence(self, v):
        h = self.h
        if self.scheme.reconstruction == 2:
            s = np.empty_like(v)
            s[1:-1] = self.slope_l * v[:-2] + self.slope_c * v[1:-1] + self.slope_u * v[2:]
            s[0] = (v[1] - v[0]) / h[0]
            s[-1] = (v[-1] - v[-2]) / h[-1]
            vl = v[:-1] + 0.5 * h * s[:-1]
            vr = v[1:] - 0.5 * h * s[1:]
        else:
            vl, vr = v[:-1], v[1:]
        fl, fr = 0.5 * vl * vl, 0.5 * vr * vr
        if self.scheme.flux is Flux.UPWIND:
            F = np.where(vl + vr >= 0, fl, fr)
        else:
            a = np.maximum(np.abs(vl), np.abs(vr))
            F = 0.5 * (fl + fr) - 0.5 * a * (vr - vl)
        return (F[1:] - F[:-1]) / self.vol

    def factor(self, dt: float):
        key = dt
        if key not in self._factor_cache:
            if len(self._factor_cache) > 8:
                self._factor_cache.clear()
            th = self.scheme.theta
            dl = -th * dt * self.lower[1:]
            d = 1.0 - th * dt * self.diag
            du = -th * dt * self.upper[:-1]
            dl, d, du, du2, ipiv, info = lapack.dgttrf(dl, d, du)
            if info != 0:
                raise ParameterError("implicit diffusion matrix is singular")
            self._factor_cache[key] = (dl, d, du, du2, ipiv)
        return self._factor_cache[key]

    def solve(self, dt: float, rhs):
        dl, d, du, du2, ipiv = self.factor(dt)
        x, info = lapack.dgttrs(dl, d, du, du2, ipiv, rhs)
        return x


def _sup_diff(v, phi) -> float:
    return float(np.max(np.abs(v - phi)))


def iter_evolve(params: ProblemParams, sw: StationaryWave, v0: Profile, T_end: float,
                scheme: SchemeConfig, after_step: Callable | None = None,
                ) -> Iterator[tuple[float, np.ndarray, int, float]]:
    """Yield ``(t, v, steps, dt_min)`` at every snapshot time.

    The generator only advances when the consumer asks for the next
    snapshot, so a slow writer throttles the stepping instead of buffering.
    ``after_step(t, v)`` may modify v in place (used for fault injection).
    """
    if not validate_admissible(params):
        raise InadmissibleError("evolution is only defined for admissible data")
    grid = sw.grid
    if v0.grid is not grid and not np.array_equal(v0.grid.nodes, grid.nodes):
        raise ParameterError("initial data and stationary wave live on different grids")
    if not T_end > 0:
        raise ParameterError("T_end must be positive")
    ops = _Operators(params, grid, scheme)
    phi = sw.phi.values.copy()
    phi[0] = params.v_minus
    v = v0.values.copy()
    v[0], v[-1] = params.v_minus, phi[-1]

    bc_lo, bc_hi = v[0], v[-1]
    source = np.zeros(grid.size - 2)
    if scheme.well_balanced:
        source = ops.flux_divergence(phi) - ops.diffusion(phi)

    snaps = [t for t in scheme.snapshot_times if t <= T_end]
    if not snaps or snaps[-1] < T_end:
        snaps.append(T_end)
    h_min = grid.h_min
    vmax0 = max(float(np.max(np.abs(v))), 1e-12)
    dt0 = scheme.dt if scheme.dt is not None else scheme.cfl_target * h_min / vmax0
    dt = dt0
    th = scheme.theta
    t = 0.0
    steps = 0
    dt_min = math.inf
    si = 0
    if snaps[0] == 0.0:
        yield 0.0, v.copy(), 0, dt_min
        si = 1

    while si < len(snaps):
        target = snaps[si]
        while t < target:
            vmax = float(np.max(np.abs(v)))
            while dt * vmax / h_min > scheme.cfl_target:
                dt *= 0.5
                if dt < 1e-12 * dt0:
                    raise CflCollapse(f"time step collapsed to {dt:.3e} at t={t:.6g}")
            if dt < dt0 and 2 * dt * vmax / h_min <= 0.5 * scheme.cfl_target:
                dt = min(2 * dt, dt0)
            step = min(dt, target - t)
            if target - t - step < 1e-12 * dt0:
                step = target - t
            rhs = v[1:-1] + step * (source - ops.flux_divergence(v))
            if th < 1.0:
                rhs += (1.0 - th) * step * ops.diffusion(v)
            rhs[0] += th * step * ops.lower[0] * bc_lo
            rhs[-1] += th * step * ops.upper[-1] * bc_hi
            v[1:-1] = ops.solve(step, rhs)
            t = target if step == target - t else t + step
            steps += 1
            dt_min = min(dt_min, step)
            if after_step is not None:
                after_step(t, v)
            if not np.all(np.isfinite(v)):
                raise NonFinite(f"non-finite value at t={t:.6g}")
        yield t, v.copy(), steps, dt_min
        si += 1


def evolve(params: ProblemParams, sw: StationaryWave, v0: Profile, T_end: float,
           scheme: SchemeConfig, sink: Callable | None = None,
           after_step: Callable | None = None) -> Trajectory:
    """Run :func:`iter_evolve` to completion and collect a :class:`Trajectory`.

    ``sink(t, v)`` is called for every snapshot as it is produced. On
    ``NonFinite`` or ``CflCollapse`` the exception carries the partial
    trajectory in its ``trajectory`` attribute.
    """
    traj = Trajectory([], [], sw, scheme)
    phi = sw.phi.values
    try:
        for t, v, steps, dt_min in iter_evolve(params, sw, v0, T_end, scheme, after_step):
            if sink is not None:
                sink(t, v)
            traj.times.append(t)
            traj.snapshots.append(v)
            traj.sup_diff.append(_sup_diff(v, phi))
            traj.boundary_w.append(float(compute_w_values(v, phi, sw.grid.nodes)[0]))
            traj.steps, traj.dt_min = steps, dt_min
    except (NonFinite, CflCollapse) as exc:
        traj.complete = False
        exc.trajectory = traj
        raise
    return traj


def compute_w_values(v, phi, r) -> np.ndarray:
    u = np.asarray(v) - np.asarray(phi)
    # w(r) = -int_r^R u, accumulated from R_max downward
    tail = cumulative_trapezoid(u[::-1], r[::-1], initial=0.0)[::-1]
    return tail


def compute_w(v: Profile, sw: StationaryWave) -> Profile:
    """Anti-derivative variable ``w = -int_r^inf (v - phi)``, zero beyond R_max."""
    if not np.array_equal(v.grid.nodes, sw.grid.nodes):
        raise ParameterError("v and phi must share a grid")
    return Profile(v.grid, compute_w_values(v.values, sw.phi.values, v.grid.nodes))


@dataclass(frozen=True)
class WResidual:
    residual: float
    boundary_wr_max: float


def w_equation_residual(traj: Trajectory, sw: StationaryWave) -> WResidual:
    """Discrete residual of ``w_t + psi w_r - mu w_rr + w_r^2 / 2``.

    Time derivatives are centered differences between snapshots, which must
    be uniformly spaced; space derivatives are second-order differences of w.
    """
    times = np.asarray(traj.times)
    if len(times) < 3:
        raise ParameterError("need at least three snapshots")
    dts = np.diff(times)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * max(1.0, dts[0]):
        raise ParameterError("snapshots must be uniformly spaced in time")
    grid = sw.grid
    r = grid.nodes
    mu = sw.params.mu
    phi = sw.phi.values
    W = np.array([compute_w_values(v, phi, r) for v in traj.snapshots])
    psi = sw.psi.values
    worst = 0.0
    for k in range(1, len(times) - 1):
        wt = (W[k + 1] - W[k - 1]) / (2 * dts[0])
        wr = grid.derivative(W[k], 1, 2)
        wrr = grid.derivative(W[k], 2, 2)
        res = wt + psi * wr - mu * wrr + 0.5 * wr * wr
        worst = max(worst, float(np.max(np.abs(res[1:-1]))))
    # w_r(t, r0) = v(t, r0) - phi(r0)
    boundary = max(abs(float(v[0] - sw.params.v_minus)) for v in traj.snapshots)
    return WResidual(worst, boundary)
