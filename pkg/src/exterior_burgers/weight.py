"""Weight function for the weighted energy method.

For a generator ``f`` with ``f' < 0``, ``f(r0) < 0`` and ``f'`` integrable,

    chi(r) = -exp(-I(r)) * int_r^inf f(s) exp(I(s)) ds,   I(r) = (1/mu) int_r0^r psi,

is the unique bounded solution of ``chi' + (psi/mu) chi = f``. It tends to
``mu |f(inf)| / |v_plus|``. The default generator is ``f = 1/r - 2/r0``.

Forward integration of the linear ODE amplifies errors at rate ~|v_plus|/mu,
so chi is built backward from R_max. The terminal value is the exact tail
integral, evaluated with psi replaced by its far-field expansion beyond R_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad

from .errors import ParameterError, PositivityError, PreconditionError
from .grid import Profile, RadialGrid
from .stationary import StationaryWave, tail_coefficients


@dataclass(frozen=True)
class WeightGenerator:
    f: Callable
    f_prime: Callable
    f_at_r0: float
    l1_norm_fprime: float
    limit_abs_f: float
    r0: float
    name: str = "default"
    eps: float | None = None

    def check_hypotheses(self, r: np.ndarray | None = None) -> dict:
        """Sampled check of f' < 0, f(r0) < 0 and a finite ||f'||_L1."""
        if r is None:
            r = self.r0 * np.geomspace(1.0, 1e6, 4001)
        fp = self.f_prime(r)
        l1, _ = quad(lambda s: abs(float(self.f_prime(s))), self.r0, math.inf, limit=200)
        return {
            "f_prime_negative": bool(np.all(fp < 0)),
            "f_r0_negative": self.f_at_r0 < 0,
            "l1_norm_fprime": l1,
            "l1_finite": math.isfinite(l1),
        }

    def describe(self) -> dict:
        return {"name": self.name, "eps": self.eps}


def default_generator(params) -> WeightGenerator:
    r0 = params.r0
    return WeightGenerator(
        f=lambda r: 1.0 / np.asarray(r, float) - 2.0 / r0,
        f_prime=lambda r: -1.0 / np.asarray(r, float) ** 2,
        f_at_r0=-1.0 / r0,
        l1_norm_fprime=1.0 / r0,
        limit_abs_f=2.0 / r0,
        r0=r0,
    )


def epsilon_generator(params, eps: float) -> WeightGenerator:
    """Generator ``f = (r^-2eps - r0^-2eps) / (2 eps) - 1``; eps = 0 is excluded."""
    eps = float(eps)
    if not eps > 0 or not math.isfinite(eps):
        raise ParameterError(f"epsilon must be a positive number, got {eps}")
    r0 = params.r0
    base = r0 ** (-2 * eps)
    return WeightGenerator(
        f=lambda r: (np.asarray(r, float) ** (-2 * eps) - base) / (2 * eps) - 1.0,
        f_prime=lambda r: -np.asarray(r, float) ** (-2 * eps - 1),
        f_at_r0=-1.0,
        l1_norm_fprime=base / (2 * eps),
        limit_abs_f=1.0 + base / (2 * eps),
        r0=r0,
        name="epsilon",
        eps=eps,
    )


@dataclass(frozen=True)
class WeightFunction:
    chi: Profile
    c1: float
    c2: float
    ode_residual_max: float
    farfield_value: float
    farfield_extrapolated: float
    terminal_value: float
    generator: WeightGenerator

    @property
    def grid(self) -> RadialGrid:
        return self.chi.grid


def tail_terminal_value(sw: StationaryWave, gen: WeightGenerator) -> float:
    """``chi(R_max)`` from the tail integral with psi taken from its expansion."""
    params = sw.params
    R, mu, vp = sw.grid.R_max, params.mu, params.v_plus
    a = tail_coefficients(params)
    # keep the terms that are still decreasing at R; they decrease further for s > R
    terms = [2]
    for m in range(3, len(a)):
        if abs(a[m] / R ** m) > abs(a[m - 1] / R ** (m - 1)):
            break
        terms.append(m)

    def excess(s):
        return sum(a[m] * (R ** (1 - m) - s ** (1 - m)) / (m - 1) for m in terms)

    def integrand(x):
        s = R + x
        return -float(gen.f(s)) * math.exp((vp * x + excess(s)) / mu)

    scale = mu / abs(vp)
    head, _ = quad(integrand, 0.0, 40 * scale, epsabs=1e-15, epsrel=1e-13, limit=200)
    tail, _ = quad(integrand, 40 * scale, math.inf, epsabs=1e-15, epsrel=1e-13, limit=200)
    return head + tail


def _tail_exponents(gen: WeightGenerator) -> list[float]:
    powers = {float(k) for k in range(1, 6)}
    if gen.eps is not None:
        powers |= {2 * gen.eps + k for k in range(4)}
    out = []
    for p in sorted(powers):
        if p <= 6 and all(abs(p - q) > 1e-6 for q in out):
            out.append(p)
    return out


def _extrapolate_limit(r: np.ndarray, chi: np.ndarray, gen: WeightGenerator) -> float:
    """Least-squares fit of ``chi ~ L + sum_p c_p r^-p`` on ``[R_max/3, R_max]``.

    The powers are the ones present in the far-field expansion of chi for
    the generator: integers, plus ``2 eps + k`` for the epsilon family.
    """
    mask = r >= r[-1] / 3
    x = r[mask]
    design = np.column_stack([np.ones_like(x)] + [x ** -p for p in _tail_exponents(gen)])
    coef, *_ = np.linalg.lstsq(design, chi[mask], rcond=None)
    return float(coef[0])


def build_weight(sw: StationaryWave, gen: WeightGenerator, grid: RadialGrid | None = None,
                 substeps: int = 4) -> WeightFunction:
    """Integrate ``chi' = f - (psi/mu) chi`` backward with classical RK4.

    Each grid interval is split into ``substeps`` RK4 steps; psi at every
    stage point comes from the stationary solver's dense output.
    """
    if grid is None:
        grid = sw.grid
    if grid.R_max > sw.grid.R_max * (1 + 1e-14) or grid.r0 < sw.grid.r0 * (1 - 1e-14):
        raise ParameterError("weight grid must lie inside the stationary-wave grid")
    hyp = gen.check_hypotheses()
    if not (hyp["f_prime_negative"] and hyp["f_r0_negative"] and hyp["l1_finite"]):
        raise PreconditionError(f"generator violates its hypotheses: {hyp}")

    params = sw.params
    mu = params.mu
    r = grid.nodes
    k = int(substeps)
    # substep points from R_max down to r0, plus the midpoints RK4 needs
    frac = np.linspace(1.0, 0.0, k + 1)[:-1]
    seg_lo, seg_hi = r[:-1], r[1:]
    pts = (seg_lo[:, None] + frac[None, :] * (seg_hi - seg_lo)[:, None])[::-1].ravel()
    pts = np.append(pts, r[0])
    mids = 0.5 * (pts[:-1] + pts[1:])
    psi_pts = sw.psi_at(pts) / mu
    psi_mid = sw.psi_at(mids) / mu
    f_pts = gen.f(pts)
    f_mid = gen.f(mids)
    h = pts[1:] - pts[:-1]  # negative steps

    chi_R = tail_terminal_value(sw, gen)
    chi_pts = np.empty_like(pts)
    chi_pts[0] = y = chi_R
    for i in range(len(h)):
        hi = h[i]
        p0, pm, p1 = psi_pts[i], psi_mid[i], psi_pts[i + 1]
        k1 = f_pts[i] - p0 * y
        k2 = f_mid[i] - pm * (y + 0.5 * hi * k1)
        k3 = f_mid[i] - pm * (y + 0.5 * hi * k2)
        k4 = f_pts[i + 1] - p1 * (y + hi * k3)
        y = y + hi * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        chi_pts[i + 1] = y
    chi = chi_pts[::-1][::k]
    if np.any(~np.isfinite(chi)) or np.min(chi) <= 0:
        raise PositivityError(f"weight is not strictly positive (min {np.nanmin(chi):.3e})")

    profile = Profile(grid, chi)
    psi_grid = sw.psi_at(r)
    residual = np.abs(profile.derivative(1, 4) + psi_grid * chi / mu - gen.f(r))[1:-1]
    return WeightFunction(
        chi=profile,
        c1=float(np.min(chi)),
        c2=float(np.max(chi)),
        ode_residual_max=float(np.max(residual)),
        farfield_value=mu / abs(params.v_plus) * gen.limit_abs_f,
        farfield_extrapolated=_extrapolate_limit(r, chi, gen),
        terminal_value=chi_R,
        generator=gen,
    )


@dataclass(frozen=True)
class WeightReport:
    positivity: bool
    ode_residual: float
    boundary_value_error: float
    second_identity_residual: float

    def to_dict(self) -> dict:
        return {"positivity": self.positivity, "ode_residual": self.ode_residual,
                "boundary_value_error": self.boundary_value_error,
                "second_identity_residual": self.second_identity_residual}


def verify_weight_properties(wf: WeightFunction, sw: StationaryWave) -> WeightReport:
    mu = sw.params.mu
    r = wf.grid.nodes
    chi = wf.chi.values
    gen = wf.generator
    lhs = wf.chi.derivative(1, 4) + sw.psi_at(r) * chi / mu
    dlhs = wf.grid.derivative(lhs, 1, 4)
    return WeightReport(
        positivity=wf.c1 > 0,
        ode_residual=float(np.max(np.abs(lhs - gen.f(r))[1:-1])),
        boundary_value_error=float(abs(lhs[0] - gen.f_at_r0)),
        second_identity_residual=float(np.max(np.abs(dlhs - gen.f_prime(r))[1:-1])),
    )


def psi_l1_excess(sw: StationaryWave) -> float:
    """``||psi - v_plus||_L1`` by trapezoid plus the analytic ``C/R`` tail."""
    r = sw.grid.nodes
    dev = np.abs(sw.psi.values - sw.params.v_plus)
    tail = r[-1] ** 2 * dev[-1] / r[-1]
    return sw.grid.integrate(dev) + tail


@dataclass(frozen=True)
class ABBoundReport:
    l1_excess: float
    A_max: float
    A_bound: float
    B_ratio_max: float

    @property
    def ok(self) -> bool:
        return self.A_max <= self.A_bound and self.B_ratio_max <= 1.0


def ab_bounds(wf: WeightFunction, sw: StationaryWave) -> ABBoundReport:
    """Compare ``A = exp(I)`` and ``B = chi A`` with their a-priori envelopes."""
    params = sw.params
    mu, vp = params.mu, params.v_plus
    r = wf.grid.nodes
    gen = wf.generator
    l1 = psi_l1_excess(sw)
    A = np.exp(cumulative_trapezoid(sw.psi_at(r), r, initial=0.0) / mu)
    B = wf.chi.values * A
    envelope = (mu * (abs(gen.f_at_r0) + gen.l1_norm_fprime) / abs(vp)
                * np.exp(l1 / mu - abs(vp) * (r - r[0]) / mu))
    return ABBoundReport(l1, float(np.max(A)), math.exp(l1 / mu), float(np.max(B / envelope)))
