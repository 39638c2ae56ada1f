"""Property suite behind ``verify``: every module invariant as a measured check.

The stationary-wave checks use a fixed 9-case parameter suite. Evolution and
diagnostics checks run at the configured parameters and grid size, so a
deliberately coarse grid shows up as failed convergence-order checks.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from . import diagnostics as dg
from .config import RunConfig
from .evolution import (Family, InitialDataSpec, SchemeConfig, compute_w_values,
                        contamination_time, evolve, make_initial_data,
                        uniform_snapshots, w_equation_residual)
from .grid import Profile, RadialGrid, default_grid
from .problem import ProblemParams, hashimoto_subcase
from .stationary import (check_far_field_decay, check_negative_bound_and_monotone,
                         solve_stationary)
from .weight import build_weight, default_generator, verify_weight_properties

SUITE_PAIRS = ((0.0, -1.0), (-0.5, -1.0), (2.0, -1.0))
SUITE_DIMS = (4, 5, 6)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    note: str = ""


class Suite:
    def __init__(self):
        self.checks: list[Check] = []
        self.tables: dict[str, tuple[list, list]] = {}

    def add(self, name, passed, value, threshold, note=""):
        self.checks.append(Check(name, bool(passed), float(value), float(threshold), note))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def order(coarse: float, fine: float) -> float:
    if fine <= 0 or coarse <= 0:
        return math.inf if fine == 0 else -math.inf
    return math.log2(coarse / fine)


def stationary_suite(s: Suite, R_max: float = 60.0, num: int = 2000):
    rows = []
    worst = {"residual": 0.0, "tail": 0.0, "phi": -math.inf, "mono": math.inf}
    slopes = []
    for n in SUITE_DIMS:
        for vm, vp in SUITE_PAIRS:
            p = ProblemParams(n, 1.0, 1.0, vm, vp)
            sw = solve_stationary(p, default_grid(p, num=num, R_max=R_max))
            slope = check_far_field_decay(sw)
            slopes.append(slope)
            worst["residual"] = max(worst["residual"], sw.residual_max)
            worst["tail"] = max(worst["tail"], sw.tail_gap)
            phi_max = mono = math.nan
            if hashimoto_subcase(p):
                b = check_negative_bound_and_monotone(sw, p)
                phi_max, mono = b.phi_max, b.min_monotone_expr
                worst["phi"] = max(worst["phi"], phi_max)
                worst["mono"] = min(worst["mono"], mono)
            rows.append([n, vm, vp, p.V_minus, sw.residual_max, sw.farfield_gap, sw.tail_gap,
                         slope, phi_max, mono])
    s.tables["stationary_suite"] = (
        ["n", "v_minus", "v_plus", "V_minus", "residual", "farfield_gap", "tail_gap",
         "slope", "phi_max", "min_monotone_expr"], rows)
    s.add("stationary_residual", worst["residual"] <= 1e-8, worst["residual"], 1e-8)
    s.add("stationary_far_field_expansion", worst["tail"] <= 1e-6, worst["tail"], 1e-6)
    lo, hi = min(slopes), max(slopes)
    s.add("far_field_slope_min", lo >= -2.2, lo, -2.2)
    s.add("far_field_slope_max", hi <= -1.8, hi, -1.8)
    s.add("negative_bound", worst["phi"] <= 1e-10, worst["phi"], 1e-10)
    s.add("monotone_shift", worst["mono"] >= -1e-8, worst["mono"], -1e-8)


def weight_checks(s: Suite, params: ProblemParams, num: int):
    sw = solve_stationary(params, default_grid(params, num=max(num, 2000)))
    wf = build_weight(sw, default_generator(params))
    rep = verify_weight_properties(wf, sw)
    s.add("weight_min", wf.c1 >= 1e-3, wf.c1, 1e-3)
    s.add("weight_ode_residual", rep.ode_residual <= 1e-8, rep.ode_residual, 1e-8)
    s.add("weight_boundary_identity", rep.boundary_value_error <= 1e-6,
          rep.boundary_value_error, 1e-6)
    err = abs(wf.farfield_extrapolated - wf.farfield_value)
    s.add("weight_farfield", err <= 1e-4, err, 1e-4)

    # norm equivalence c1 ||w||^2 <= ||w||_chi^2 <= c2 ||w||^2 on a test profile
    r = sw.grid.nodes
    g = Profile(sw.grid, np.exp(-(r - 3.0) ** 2) * np.sin(r))
    plain = dg.weighted_norm(g, dg.NormSpec())
    chi_n = dg.weighted_norm(g, dg.NormSpec("ChiWeighted"), wf.chi.values)
    lo = math.sqrt(wf.c1) * plain
    hi = math.sqrt(wf.c2) * plain
    margin = min(chi_n - lo, hi - chi_n)
    s.add("norm_equivalence", margin >= -1e-14, margin, 0.0)

    # constant-psi oracle: n = 3 and V_minus = v_plus give psi == v_plus
    p3 = ProblemParams(3, 1.0, 1.0, 1.0, -1.0)
    sw3 = solve_stationary(p3, default_grid(p3, num=2000))
    wf3 = build_weight(sw3, default_generator(p3))
    f = default_generator(p3).f
    r3 = sw3.grid.nodes
    idx = np.linspace(0, len(r3) - 1, 25).astype(int)
    errs = []
    for i in idx:
        x = r3[i]
        val, _ = quad(lambda y: -float(f(x + y)) * math.exp(p3.v_plus * y / p3.mu),
                      0, math.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
        errs.append(abs(val - wf3.chi.values[i]))
    e = max(errs)
    s.add("constant_psi_oracle", e <= 1e-8, e, 1e-8)
    return sw, wf


def _bump_run(params, num, T, spec=None, **scheme):
    g = default_grid(params, num=num, stretch=30.0)
    sw = solve_stationary(params, g)
    spec = spec or InitialDataSpec()
    v0 = make_initial_data(sw, spec)
    ns = scheme.pop("snapshots", 200)
    sc = SchemeConfig(snapshot_times=uniform_snapshots(T, ns), **scheme)
    return sw, spec, evolve(params, sw, v0, T, sc)


def evolution_checks(s: Suite, params: ProblemParams, num: int, T: float = 50.0):
    # exact stationary data stay put
    sw, _, tr = _bump_run(params, num, 5.0, InitialDataSpec(Family.EXACT_STATIONARY))
    drift = max(tr.sup_diff)
    s.add("fixed_point", drift <= 1e-12, drift, 1e-12)

    spec = InitialDataSpec()
    sw, spec, tr = _bump_run(params, num, T, spec)
    t, sd = tr.series()
    ratio = sd[-1] / sd[0]
    s.add("stability_decay", ratio <= 0.1, ratio, 0.1)
    s.tables["decay_series"] = (["t", "sup_diff"], [[a, b] for a, b in zip(t, sd)])
    phi = sw.phi.values
    pinned = all(v[0] == params.v_minus and v[-1] == phi[-1] for v in tr.snapshots)
    s.add("boundary_pinning", pinned, float(pinned), 1.0)
    v0 = tr.snapshots[0]
    lo = np.minimum(v0, phi) - 2 * abs(spec.amplitude)
    hi = np.maximum(v0, phi) + 2 * abs(spec.amplitude)
    excess = max(float(np.max(np.maximum(lo - v, v - hi))) for v in tr.snapshots)
    s.add("max_principle", excess <= 0, excess, 0.0)

    # w from v, then differentiated, gives back v - phi
    r = sw.grid.nodes
    g = sw.grid
    err = 0.0
    for v in tr.snapshots[::20]:
        w = compute_w_values(v, phi, r)
        err = max(err, float(np.max(np.abs(g.derivative(w, 1, 2) - (v - phi)))))
    rel = err / sd[0]
    s.add("compute_w_derivative", rel <= 1e-2, rel, 1e-2)

    # interpolation inequality sup|g| <= C ||g||^1/2 ||g'||^1/2 with g = w_r
    C = max(dg.interpolation_constant(Profile(g, v - phi)) for v in tr.snapshots[1::20])
    s.add("interpolation_constant", C <= 2.0, C, 2.0)

    # exponential rate against the admissible one
    wf = build_weight(sw, default_generator(params))
    beta_a, gamma_a = dg.admissible_rates(wf.c2, params)
    Tc = min(contamination_time(params, sw.grid, spec), T)
    fit = dg.fit_exponential_rate(t, sd, (0.1 * Tc, Tc))
    s.add("exponential_rate", fit.exponent >= 0.9 * gamma_a, fit.exponent, 0.9 * gamma_a)
    return sw, wf, tr


def case_d_check(s: Suite, num: int):
    for vm in (2.0, 3.5):
        p = ProblemParams(4, 1.0, 1.0, vm, -1.0)
        _, _, tr = _bump_run(p, num, 50.0)
        ratio = tr.sup_diff[-1] / tr.sup_diff[0]
        s.add(f"stability_decay_v_minus_{vm:g}", ratio <= 0.1, ratio, 0.1)


def algebraic_check(s: Suite, params: ProblemParams, num: int):
    spec = InitialDataSpec(Family.ALGEBRAIC_TAIL, p=3.0, alpha=2.0)
    g = default_grid(params, num=num, stretch=30.0)
    Tc = contamination_time(params, g, spec)
    sw, _, tr = _bump_run(params, num, Tc, spec)
    t, sd = tr.series()
    fit = dg.fit_algebraic_rate(t, sd, (0.1 * Tc, Tc))
    s.add("algebraic_exponent", fit.exponent <= -0.85, fit.exponent, -0.85)
    s.add("algebraic_r_squared", fit.r_squared >= 0.95, fit.r_squared, 0.95)


def refinement_checks(s: Suite, params: ProblemParams, num: int):
    """Energy identity and w-equation residuals on a 3-level space-time ladder."""
    ident, wres, signs = [], [], True
    for k in range(3):
        N = num * 2 ** k
        dt = 0.01 * 600 / N
        sw, _, tr = _bump_run(params, N, 10.0, dt=dt, theta=0.5, snapshots=400 * 2 ** k)
        wf = build_weight(sw, default_generator(params))
        res = dg.energy_identity_residual(tr, wf)
        ident.append(res.residual)
        signs = signs and res.energy_nonincreasing
        wres.append(w_equation_residual(tr, sw).residual)
    o1 = min(order(ident[0], ident[1]), order(ident[1], ident[2]))
    o2 = min(order(wres[0], wres[1]), order(wres[1], wres[2]))
    s.add("energy_identity_order", o1 >= 1.0, o1, 1.0)
    s.add("energy_identity_finest", ident[-1] <= 1e-3, ident[-1], 1e-3)
    s.add("energy_nonincreasing", signs, float(signs), 1.0)
    s.add("w_equation_order", o2 >= 1.0, o2, 1.0)


def self_convergence_checks(s: Suite, params: ProblemParams, num: int):
    """Space order (theta = 1/2, fixed small dt) and time order (theta = 1)."""
    R = params.r0 + 20.0
    spec = InitialDataSpec()
    prof = {}
    for k in range(3):
        N = (num - 1) * 2 ** k + 1
        g = RadialGrid.uniform(params.r0, R, N)
        sw = solve_stationary(params, g)
        tr = evolve(params, sw, make_initial_data(sw, spec), 2.0, SchemeConfig(dt=1e-3, theta=0.5))
        prof[k] = tr.snapshots[-1]
    e1 = np.max(np.abs(prof[1][::2] - prof[0]))
    e2 = np.max(np.abs(prof[2][::2] - prof[1]))
    o = order(e1, e2)
    s.add("space_order_theta_half", o >= 1.9, o, 1.9)

    g = RadialGrid.uniform(params.r0, R, num)
    sw = solve_stationary(params, g)
    v0 = make_initial_data(sw, spec)
    ends = [evolve(params, sw, v0, 2.0, SchemeConfig(dt=0.01 / 2 ** k, theta=1.0)).snapshots[-1]
            for k in range(3)]
    e1 = np.max(np.abs(ends[1] - ends[0]))
    e2 = np.max(np.abs(ends[2] - ends[1]))
    o = order(e1, e2)
    s.add("time_order_theta_one", o >= 0.9, o, 0.9)


def zeroth_order_checks(s: Suite, params: ProblemParams, num: int, T: float = 10.0):
    ratios = {}
    for label, N, amp in (("base", num, 1e-2), ("fine", 2 * num, 1e-2), ("half", num, 5e-3)):
        _, _, tr = _bump_run(params, N, T, InitialDataSpec(amplitude=amp))
        ratios[label] = dg.check_zeroth_order_bound(tr).zeroth_bound_ratio
    d_ref = abs(ratios["fine"] - ratios["base"]) / ratios["base"]
    d_amp = abs(ratios["half"] - ratios["base"]) / ratios["base"]
    s.add("zeroth_ratio_refinement", d_ref <= 0.10, d_ref, 0.10)
    s.add("zeroth_ratio_amplitude", d_amp <= 0.25, d_amp, 0.25)


def coefficient_checks(s: Suite, wf, params: ProblemParams):
    beta_max, _ = dg.admissible_rates(wf.c2, params)
    ok_A = ok_B = True
    for frac in (0.25, 0.5, 0.75, 1.0):
        beta = frac * beta_max
        gamma = 3 * params.mu * beta / (8 * params.r0 * dg.C2_INFLATION * wf.c2)
        rep = dg.coefficient_bounds(wf, params, beta, gamma)
        ok_A = ok_A and rep.A_beta_min_ok and rep.admissible
        ok_B = ok_B and rep.B_beta_ok
    s.add("A_beta_lower_bound", ok_A, float(ok_A), 1.0)
    s.add("B_beta_lower_bound", ok_B, float(ok_B), 1.0)
    # analytic minimum of B_beta, for beta = 1/r0 and the largest admissible beta
    worst = 0.0
    for beta in (1.0 / params.r0, beta_max):
        r_star, value = dg.B_beta_minimum(beta, params.r0)
        at = float(dg.B_beta(r_star, beta, params.r0))
        found = minimize_scalar(lambda x: float(dg.B_beta(x, beta, params.r0)),
                                bounds=(params.r0, 10 * r_star), method="bounded",
                                options={"xatol": 1e-10})
        worst = max(worst, abs(at - value), abs(found.fun - value))
    s.add("B_beta_analytic_minimum", worst <= 1e-12, worst, 1e-12)
    over = dg.coefficient_bounds(wf, params, 2.0 / params.r0 * 1.01, 1e-3)
    s.add("beta_above_limit_rejected", not over.admissible, float(over.admissible), 0.0)


def norm_checks(s: Suite, sw, tr):
    g = sw.grid
    phi = sw.phi.values
    w = Profile(g, compute_w_values(tr.snapshots[0], phi, g.nodes))
    alg = [dg.weighted_norm(w, dg.NormSpec("Algebraic", 2, alpha=a)) for a in (0, 1, 2, 3)]
    exp_ = [dg.weighted_norm(w, dg.NormSpec("Exponential", 2, beta=b)) for b in (0.1, 0.2, 0.4)]
    mono = all(np.diff(alg) >= 0) and all(np.diff(exp_) >= 0)
    s.add("norm_monotone", mono, float(mono), 1.0)
    same = dg.weighted_norm(w, dg.NormSpec("Algebraic", 2, alpha=0)) == \
        dg.weighted_norm(w, dg.NormSpec("Plain", 2))
    s.add("algebraic_zero_equals_plain", same, float(same), 1.0)


def run_suite(cfg: RunConfig) -> Suite:
    params = cfg.params
    num = cfg.evolution_grid.num
    s = Suite()
    stationary_suite(s)
    weight_checks(s, params, num)
    sw, wf, tr = evolution_checks(s, params, num)
    case_d_check(s, num)
    algebraic_check(s, params, num)
    coefficient_checks(s, wf, params)
    norm_checks(s, sw, tr)
    zeroth_order_checks(s, params, num)
    refinement_checks(s, params, num)
    self_convergence_checks(s, params, num)
    return s


def summary(s: Suite) -> dict:
    return {"passed": s.passed,
            "checks": {c.name: dataclasses.asdict(c) for c in s.checks}}
