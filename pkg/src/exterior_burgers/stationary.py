"""Stationary wave of the exterior radial Burgers problem.

With ``psi = phi - mu (n-1)/r`` the stationary problem becomes the Riccati
equation

    psi' = (psi^2 - v_plus^2) / (2 mu) - c0 / r^2,   psi(r0) = V_minus,

with ``psi -> v_plus`` at infinity. Because ``v_plus < 0`` is the stable
equilibrium of the far-field flow, the boundary-value problem is solved by
integrating forward from r0; admissible data always lands in the basin of
``v_plus``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (DegenerateTail, DivergenceError, FarFieldError,
                     InadmissibleError, ParameterError, PreconditionError)
from .grid import Profile, RadialGrid
from .problem import ProblemParams, hashimoto_subcase, validate_admissible

MAX_TAIL_TERMS = 40


def riccati_rhs(r, psi, params: ProblemParams):
    return (psi * psi - params.v_plus ** 2) / (2 * params.mu) - params.c0 / (r * r)


def tail_coefficients(params: ProblemParams, terms: int = MAX_TAIL_TERMS) -> np.ndarray:
    """Coefficients ``a[m]`` of the far-field expansion ``psi ~ v_plus + sum a[m] r^-m``.

    Matching powers of 1/r in the Riccati equation gives a2 = mu c0 / v_plus and

        a[m] = (mu/v_plus) * (-(m-1) a[m-1] - (1/(2 mu)) sum_{i+j=m} a[i] a[j]).

    The series is asymptotic, not convergent; see :func:`far_field_tail`.
    """
    mu, vp = params.mu, params.v_plus
    a = np.zeros(terms + 2)
    for m in range(2, terms + 2):
        quad = sum(a[i] * a[m - i] for i in range(2, m - 1))
        forcing = params.c0 if m == 2 else 0.0
        a[m] = (mu / vp) * (-(m - 1) * a[m - 1] - quad / (2 * mu) + forcing)
    return a


def far_field_tail(r, params: ProblemParams, coeffs: np.ndarray | None = None):
    """Optimally truncated far-field expansion of psi evaluated at ``r``."""
    if coeffs is None:
        coeffs = tail_coefficients(params)
    r = np.asarray(r, dtype=float)
    out = np.full(r.shape, params.v_plus)
    for idx in np.ndindex(r.shape):
        x = r[idx]
        total, last = 0.0, math.inf
        for m in range(2, len(coeffs)):
            term = coeffs[m] / x ** m
            if abs(term) > last:
                break
            total += term
            last = abs(term)
        out[idx] += total
    return out if out.ndim else float(out)


@dataclass
class StationaryWave:
    params: ProblemParams
    psi: Profile
    phi: Profile
    farfield_gap: float
    tail_gap: float
    nu0: float
    tol: float
    residual_max: float = math.nan
    psi_at: Callable = field(default=None, repr=False)

    @property
    def grid(self) -> RadialGrid:
        return self.psi.grid

    def psi_prime(self, r=None):
        """Exact ``psi'`` from the ODE right-hand side."""
        if r is None:
            return riccati_rhs(self.grid.nodes, self.psi.values, self.params)
        return riccati_rhs(np.asarray(r, float), self.psi_at(r), self.params)


def divergence_bound(params: ProblemParams) -> float:
    return 10.0 * (abs(params.V_minus) + abs(params.v_plus)) + 10.0


def solve_stationary(params: ProblemParams, grid: RadialGrid, tol: float = 1e-6) -> StationaryWave:
    """Integrate the Riccati problem forward and sample it on ``grid``.

    Uses the 8(5,3) Dormand-Prince pair with its 7th-order dense output; the
    local error tolerance is ``tol * 1e-6`` (floored near machine precision)
    and the step is capped at a tenth of the boundary-layer width.
    Raises ``FarFieldError`` when psi at ``R_max`` is further than ``tol`` from
    the far-field expansion, which means the truncation radius is too small
    for the transient from ``V_minus`` to have died out.
    """
    if not validate_admissible(params):
        raise InadmissibleError(
            f"v_plus={params.v_plus}, V_minus={params.V_minus:.6g}: need v_plus < 0 "
            "and V_minus <= |v_plus| for a stationary wave")
    if not (0 < tol <= 1e-4):
        raise ParameterError(f"tol must lie in (0, 1e-4], got {tol}")
    if not math.isclose(grid.r0, params.r0, rel_tol=0, abs_tol=1e-14 * max(1.0, params.r0)):
        raise ParameterError("grid does not start at r0")

    bound = divergence_bound(params)

    def escape(r, y):
        return bound - abs(y[0])
    escape.terminal = True

    ode_tol = max(tol * 1e-6, 1e-13)
    # cap the step so the dense interpolant resolves the boundary layer
    speed = max(abs(params.V_minus), abs(params.v_plus), 1e-12)
    max_step = min(0.05 * (grid.R_max - grid.r0), 0.1 * params.mu / speed)
    half_inv_mu, vp2, c0 = 0.5 / params.mu, params.v_plus ** 2, params.c0

    def rhs(r, y):
        # scalar arithmetic: numpy dispatch on length-1 arrays dominates otherwise
        p = y[0]
        return [(p * p - vp2) * half_inv_mu - c0 / (r * r)]

    sol = solve_ivp(rhs, (grid.r0, grid.R_max),
                    [params.V_minus], method="DOP853", rtol=ode_tol, atol=ode_tol,
                    dense_output=True, events=escape, max_step=max_step)
    if sol.status == 1:
        r_esc = float(sol.t_events[0][0])
        raise DivergenceError(f"|psi| exceeded {bound:.6g} at r={r_esc:.6g}")
    if sol.status != 0:
        raise DivergenceError(f"stationary integration failed: {sol.message}")

    dense = sol.sol
    r = grid.nodes
    psi = dense(r)[0]
    psi[0] = params.V_minus
    phi = psi + params.mu * (params.n - 1) / r
    phi[0] = params.v_minus

    def psi_at(x):
        x_arr = np.asarray(x, dtype=float)
        out = dense(np.clip(x_arr, grid.r0, grid.R_max).ravel())[0].reshape(x_arr.shape)
        return out if out.ndim else float(out)

    psi_end = float(psi[-1])
    tail_gap = abs(psi_end - far_field_tail(grid.R_max, params))
    sw = StationaryWave(
        params=params,
        psi=Profile(grid, psi),
        phi=Profile(grid, phi),
        farfield_gap=abs(psi_end - params.v_plus),
        tail_gap=tail_gap,
        nu0=float(np.max(phi)),
        tol=tol,
        psi_at=psi_at,
    )
    stationary_residual(sw, params)
    if tail_gap > tol:
        raise FarFieldError(
            f"psi(R_max={grid.R_max:g}) is {tail_gap:.3e} away from its far-field "
            f"expansion (tol {tol:g}); increase R_max", wave=sw)
    return sw


def stationary_residual(sw: StationaryWave, params: ProblemParams) -> float:
    """Max Riccati residual over interior nodes, psi' by 4th-order differences."""
    r = sw.grid.nodes
    dpsi = sw.psi.derivative(1, 4)
    res = np.abs(dpsi - riccati_rhs(r, sw.psi.values, params))[1:-1]
    sw.residual_max = float(np.max(res))
    return sw.residual_max


def check_far_field_decay(sw: StationaryWave) -> float:
    """Log-log slope of ``|psi - v_plus|`` over ``[R_max/4, 3 R_max/4]``."""
    r = sw.grid.nodes
    R = sw.grid.R_max
    mask = (r >= R / 4) & (r <= 3 * R / 4)
    dev = np.abs(sw.psi.values[mask] - sw.params.v_plus)
    if mask.sum() < 2 or np.min(dev) < 1e-13:
        raise DegenerateTail("far-field deviation below 1e-13 on the fitting window")
    slope, _ = np.polyfit(np.log(r[mask]), np.log(dev), 1)
    return float(slope)


@dataclass(frozen=True)
class BoundReport:
    phi_max: float
    min_monotone_expr: float
    grid: dict


def check_negative_bound_and_monotone(sw: StationaryWave, params: ProblemParams) -> BoundReport:
    """Measure ``max phi`` and ``min (phi' + mu (n-1)^2 / (2 r^2))``.

    Only meaningful when both end states are negative and V_minus <= v_plus.
    """
    if not hashimoto_subcase(params):
        raise PreconditionError(
            "negative-bound/monotonicity checks need v_minus < 0, v_plus < 0, V_minus <= v_plus")
    r = sw.grid.nodes
    dphi = sw.phi.derivative(1, 4)
    expr = dphi + params.mu * (params.n - 1) ** 2 / (2 * r * r)
    return BoundReport(float(np.max(sw.phi.values)), float(np.min(expr[1:-1])),
                       sw.grid.describe())
