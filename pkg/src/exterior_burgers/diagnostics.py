"""Weighted norms, energy budgets, coefficient bounds and decay-rate fits."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import (CurvatureRejected, InsufficientWindow, OverflowGuard,
                     ParameterError)
from .evolution import Trajectory, compute_w_values
from .grid import Profile
from .problem import ProblemParams
from .weight import WeightFunction

MIN_FIT_SAMPLES = 8
# |quadratic| / |linear| coefficient of a log-log quadratic fit on the
# window rescaled to [-1, 1]; exact power laws give 0, e^{-t} on any window
# spanning a factor >= 4 in 1+t gives > 0.27 (see tests)
CURVATURE_THRESHOLD = 0.25
C2_INFLATION = 1.01
EXP_WEIGHT_LIMIT = 600.0


class NormKind(str, enum.Enum):
    PLAIN = "Plain"
    CHI = "ChiWeighted"
    ALGEBRAIC = "Algebraic"
    EXPONENTIAL = "Exponential"


@dataclass(frozen=True)
class NormSpec:
    kind: NormKind = NormKind.PLAIN
    derivative_order: int = 0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", NormKind(self.kind))
        if self.derivative_order not in (0, 1, 2):
            raise ParameterError("derivative_order must be 0, 1 or 2")
        if self.kind is NormKind.ALGEBRAIC and not self.alpha >= 0:
            raise ParameterError("alpha must be >= 0")
        if self.kind is NormKind.EXPONENTIAL and not self.beta > 0:
            raise ParameterError("beta must be > 0")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "derivative_order": self.derivative_order,
                "alpha": self.alpha, "beta": self.beta}


def _sqrt_weight(r: np.ndarray, spec: NormSpec, chi: np.ndarray | None) -> np.ndarray | None:
    if spec.kind is NormKind.PLAIN:
        return None
    if spec.kind is NormKind.ALGEBRAIC:
        if spec.alpha == 0:
            return None
        return (1.0 + r * r) ** (spec.alpha / 4)
    if spec.kind is NormKind.EXPONENTIAL:
        if spec.beta * r[-1] > EXP_WEIGHT_LIMIT:
            raise OverflowGuard(
                f"beta * R_max = {spec.beta * r[-1]:.4g} > {EXP_WEIGHT_LIMIT:g}; domain is mis-sized")
        return np.exp(0.5 * spec.beta * r)
    if chi is None:
        raise ParameterError("ChiWeighted norm needs the weight chi")
    return np.sqrt(chi)


def weighted_norm(p: Profile, spec: NormSpec, chi: np.ndarray | None = None) -> float:
    """``|| s f ||_{H^k}`` with ``s^2`` the weight, by trapezoid on the grid.

    The weight sits inside the derivatives. Derivatives use second-order
    differences with one-sided closures.
    """
    grid = p.grid
    s = _sqrt_weight(grid.nodes, spec, chi)
    g = p.values if s is None else s * p.values
    total = grid.integrate(g * g)
    for k in range(1, spec.derivative_order + 1):
        dg = grid.derivative(g, k, 2)
        total += grid.integrate(dg * dg)
    return math.sqrt(max(total, 0.0))


def w_series(traj: Trajectory) -> np.ndarray:
    r = traj.grid.nodes
    phi = traj.sw.phi.values
    return np.array([compute_w_values(v, phi, r) for v in traj.snapshots])


@dataclass(frozen=True)
class EnergyBudget:
    times: np.ndarray
    energy: np.ndarray
    dissipation: np.ndarray
    cubic: np.ndarray


def energy_budget(traj: Trajectory, wf: WeightFunction) -> EnergyBudget:
    """Per-snapshot terms of the integrated weighted energy identity.

    ``energy = (1/2) int chi w^2``, ``dissipation = mu int (w^2/(2 r^2) + chi w_r^2)
    + mu w(r0)^2 / (2 r0)`` and ``cubic = (1/2) int chi w w_r^2``; the identity
    is ``d(energy)/dt + dissipation + cubic = 0``.
    """
    grid = traj.grid
    r = grid.nodes
    mu = traj.sw.params.mu
    chi = wf.chi.values
    phi = traj.sw.phi.values
    E, D, N = [], [], []
    for v in traj.snapshots:
        u = v - phi
        w = compute_w_values(v, phi, r)
        E.append(0.5 * grid.integrate(chi * w * w))
        D.append(mu * grid.integrate(0.5 * w * w / (r * r) + chi * u * u)
                 + mu * w[0] ** 2 / (2 * r[0]))
        N.append(0.5 * grid.integrate(chi * w * u * u))
    return EnergyBudget(np.asarray(traj.times), np.array(E), np.array(D), np.array(N))


def interval_integrals(f: np.ndarray, times: np.ndarray) -> np.ndarray:
    """``int_{t_k}^{t_k+1} f`` on a uniform time grid, fourth order when possible."""
    f = np.asarray(f, float)
    d = times[1] - times[0]
    if len(f) < 4:
        return 0.5 * d * (f[1:] + f[:-1])
    out = np.empty(len(f) - 1)
    out[1:-1] = d / 24 * (-f[:-3] + 13 * f[1:-2] + 13 * f[2:-1] - f[3:])
    out[0] = d / 24 * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3])
    out[-1] = d / 24 * (9 * f[-1] + 19 * f[-2] - 5 * f[-3] + f[-4])
    return out


@dataclass(frozen=True)
class IdentityResidual:
    residual: float
    absolute: float
    scale: float
    energy_increments: np.ndarray

    @property
    def energy_nonincreasing(self) -> bool:
        return bool(np.all(self.energy_increments <= 0))


def _check_uniform(times: np.ndarray):
    if len(times) < 2:
        raise ParameterError("need at least two snapshots")
    dts = np.diff(times)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * max(1.0, dts[0]):
        raise ParameterError("snapshots must be uniformly spaced in time")


def energy_identity_residual(traj: Trajectory, wf: WeightFunction) -> IdentityResidual:
    """Max over snapshot intervals of the integrated-identity imbalance.

    Each interval contributes ``|dE + int (dissipation + cubic) dt|``. The time
    integral uses cubic interpolation through the neighbouring snapshots
    (trapezoid when there are fewer than four), so the quadrature error stays
    well below the scheme error even across the fast initial layer. The
    result is divided by the largest ``|dE|`` or ``int dissipation dt`` over
    all intervals; zero data give 0.
    """
    times = np.asarray(traj.times)
    _check_uniform(times)
    b = energy_budget(traj, wf)
    dE = np.diff(b.energy)
    Q = interval_integrals(b.dissipation, times)
    C = interval_integrals(b.cubic, times)
    imbalance = np.abs(dE + Q + C)
    scale = float(max(np.max(np.abs(dE)), np.max(np.abs(Q))))
    absolute = float(np.max(imbalance))
    residual = absolute / scale if scale > 0 else 0.0
    return IdentityResidual(residual, absolute, scale, dE)


@dataclass(frozen=True)
class EnergyReport:
    identity_residual: float | None
    zeroth_bound_ratio: float
    apriori_ratio: float
    boundary_series: list
    degenerate: bool

    def to_dict(self) -> dict:
        return asdict(self)


def zeroth_order_lhs(traj: Trajectory) -> tuple[np.ndarray, float]:
    """Running ``||w||^2 + mu int_0^t (||w/r||^2 + ||w_r||^2 + w(r0)^2/r0)`` and ``||w0||^2``."""
    grid = traj.grid
    r = grid.nodes
    mu = traj.sw.params.mu
    phi = traj.sw.phi.values
    times = np.asarray(traj.times)
    norm2, rate = [], []
    for v in traj.snapshots:
        u = v - phi
        w = compute_w_values(v, phi, r)
        norm2.append(grid.integrate(w * w))
        rate.append(grid.integrate(w * w / (r * r) + u * u) + w[0] ** 2 / r[0])
    norm2, rate = np.array(norm2), np.array(rate)
    integral = np.concatenate(([0.0], np.cumsum(0.5 * np.diff(times) * (rate[1:] + rate[:-1]))))
    return norm2 + mu * integral, float(norm2[0])


def check_zeroth_order_bound(traj: Trajectory, wf: WeightFunction | None = None) -> EnergyReport:
    """Measured constant of the zeroth-order energy bound.

    ``zeroth_bound_ratio = max_t LHS(t) / ||w0||^2``. ``apriori_ratio`` uses
    the H^2 version: ``sup_t ||w(t)||_{H^2}^2 / ||w0||_{H^2}^2``. Zero data
    return 0 with ``degenerate=True``.
    """
    lhs, w0sq = zeroth_order_lhs(traj)
    boundary = [float(w ** 2) for w in traj.boundary_w]
    identity = None
    if wf is not None and len(traj.times) >= 2:
        identity = energy_identity_residual(traj, wf).residual
    grid = traj.grid
    h2 = NormSpec(NormKind.PLAIN, 2)
    phi = traj.sw.phi.values
    h2_norms = [weighted_norm(Profile(grid, compute_w_values(v, phi, grid.nodes)), h2) ** 2
                for v in traj.snapshots]
    if w0sq == 0 or h2_norms[0] == 0:
        return EnergyReport(identity, 0.0, 0.0, boundary, True)
    return EnergyReport(identity, float(np.max(lhs)) / w0sq,
                        float(max(h2_norms)) / h2_norms[0], boundary, False)


@dataclass(frozen=True)
class CoefficientReport:
    admissible: bool
    A_beta_min_ok: bool
    B_beta_ok: bool
    beta_max: float
    gamma_max: float
    A_min: float
    B_margin: float

    def to_dict(self) -> dict:
        return asdict(self)


def admissible_rates(c2: float, params: ProblemParams) -> tuple[float, float]:
    """Largest ``(beta, gamma)`` allowed with ``||chi||_inf`` taken as ``1.01 c2``."""
    c2 = C2_INFLATION * c2
    r0 = params.r0
    beta = min(2.0 / r0, 8.0 / ((8.0 * c2 + 1.0) * r0))
    gamma = 3.0 * params.mu * beta / (8.0 * r0 * c2)
    return beta, gamma


def A_beta(r, beta: float, r0: float):
    r = np.asarray(r, float)
    br = np.sqrt(1.0 + r * r)
    return br / (2 * r * r) + beta * (r / br) * (1.0 / r0 - 1.0 / (2 * r))


def B_beta(r, beta: float, r0: float):
    r = np.asarray(r, float)
    return 1.0 / (2 * r * r) + beta * (1.0 / r0 - 1.0 / (2 * r))


def B_beta_minimum(beta: float, r0: float) -> tuple[float, float]:
    """Critical point ``r = 2/beta`` and value ``beta (8 - beta r0) / (8 r0)``."""
    return 2.0 / beta, beta * (8.0 - beta * r0) / (8.0 * r0)


def coefficient_bounds(wf: WeightFunction, params: ProblemParams, beta: float,
                       gamma: float, tol: float = 1e-12) -> CoefficientReport:
    r0 = params.r0
    beta_max, gamma_c = admissible_rates(wf.c2, params)
    c2 = C2_INFLATION * wf.c2
    admissible = (0 < beta <= beta_max
                  and 0 < gamma <= 3.0 * params.mu * beta / (8.0 * r0 * c2))
    r = wf.grid.nodes
    A = A_beta(r, beta, r0)
    B = B_beta(r, beta, r0)
    floor_B = np.maximum(3 * beta / (4 * r0), beta * beta * wf.chi.values)
    a_floor = beta / (2 * math.sqrt(1 + r0 * r0))
    return CoefficientReport(
        admissible=bool(admissible),
        A_beta_min_ok=bool(np.all(A >= a_floor - tol)),
        B_beta_ok=bool(np.all(B >= floor_B - tol)),
        beta_max=beta_max,
        gamma_max=gamma_c,
        A_min=float(np.min(A)),
        B_margin=float(np.min(B - floor_B)),
    )


class FitKind(str, enum.Enum):
    ALGEBRAIC = "Algebraic"
    EXPONENTIAL = "Exponential"


@dataclass(frozen=True)
class RateFit:
    exponent: float
    window: tuple
    r_squared: float
    kind: FitKind
    samples: int
    curvature: float = 0.0
    decaying: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["window"] = list(self.window)
        return d


def _window(times, values, window):
    t = np.asarray(times, float)
    y = np.asarray(values, float)
    lo, hi = window
    if not lo < hi:
        raise ParameterError("window needs t_lo < t_hi")
    mask = (t >= lo) & (t <= hi)
    if mask.sum() < MIN_FIT_SAMPLES:
        raise InsufficientWindow(
            f"{int(mask.sum())} samples in [{lo:g}, {hi:g}]; need {MIN_FIT_SAMPLES}")
    if np.any(y[mask] <= 0):
        raise ParameterError("series must be positive on the fit window")
    return t[mask], y[mask]


def _linear_fit(x, y):
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    resid = y - ym - slope * (x - xm)
    ss_tot = float(np.sum((y - ym) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 * max(1.0, float(np.sum(y * y))) else max(0.0, 1.0 - ss_res / ss_tot)
    return slope, min(r2, 1.0)


def curvature_statistic(x, y) -> float:
    """Quadratic-to-linear coefficient ratio of ``y(x)`` on ``x`` rescaled to [-1, 1]."""
    mid, half = 0.5 * (x[0] + x[-1]), 0.5 * (x[-1] - x[0])
    c2, c1, _ = np.polyfit((x - mid) / half, y, 2)
    if abs(c1) < 1e-300:
        return 0.0 if abs(c2) < 1e-300 else math.inf
    return float(abs(c2) / abs(c1))


def fit_algebraic_rate(times, values, window, curvature_threshold: float = CURVATURE_THRESHOLD) -> RateFit:
    """Slope of ``log values`` against ``log(1 + t)`` on the window.

    Raises ``CurvatureRejected`` when the log-log data are visibly curved,
    which is the signature of exponential rather than algebraic decay.
    """
    t, y = _window(times, values, window)
    x = np.log1p(t)
    ly = np.log(y)
    kappa = curvature_statistic(x, ly)
    if kappa > curvature_threshold:
        raise CurvatureRejected(
            f"log-log curvature {kappa:.3g} exceeds {curvature_threshold:g}; "
            "use the exponential fit", kappa)
    slope, r2 = _linear_fit(x, ly)
    return RateFit(slope, (float(window[0]), float(window[1])), r2, FitKind.ALGEBRAIC,
                   len(t), kappa, slope < 0)


def fit_exponential_rate(times, values, window) -> RateFit:
    """``gamma = -slope`` of ``log values`` against t on the window."""
    t, y = _window(times, values, window)
    slope, r2 = _linear_fit(t, np.log(y))
    gamma = -slope
    if abs(gamma) < 1e-14:
        gamma = 0.0
    return RateFit(gamma, (float(window[0]), float(window[1])), r2, FitKind.EXPONENTIAL,
                   len(t), 0.0, gamma > 0)


def interpolation_constant(p: Profile) -> float:
    """Smallest C with ``sup|g| <= C ||g||^(1/2) ||g'||^(1/2)`` for ``g = p`` (g vanishing at an end)."""
    g = p.values
    grid = p.grid
    num = float(np.max(np.abs(g)))
    n0 = math.sqrt(grid.integrate(g * g))
    n1 = math.sqrt(grid.integrate(grid.derivative(g, 1, 2) ** 2))
    if num == 0:
        return 0.0
    return num / math.sqrt(n0 * n1)
