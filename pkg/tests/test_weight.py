import math

import numpy as np
import pytest

from exterior_burgers import (ProblemParams, RadialGrid, build_weight, default_generator,
                              default_grid, epsilon_generator, solve_stationary,
                              verify_weight_properties)
from exterior_burgers.errors import ParameterError, PreconditionError
from exterior_burgers.weight import WeightGenerator, ab_bounds, tail_terminal_value
from oracles import chi_by_quadrature, chi_constant_psi, riccati_rk4


@pytest.fixture(scope="module")
def constant_case():
    p = ProblemParams(3, 1.0, 1.0, 1.0, -1.0)
    sw = solve_stationary(p, default_grid(p, num=2000))
    return p, sw, build_weight(sw, default_generator(p))


def test_constant_psi_matches_quadrature(constant_case):
    p, sw, wf = constant_case
    f = default_generator(p).f
    r = sw.grid.nodes
    idx = np.linspace(0, len(r) - 1, 40).astype(int)
    oracle = np.array([chi_constant_psi(r[i], f, p.mu, p.v_plus) for i in idx])
    assert np.max(np.abs(wf.chi.values[idx] - oracle)) <= 1e-8


def test_terminal_value_for_constant_psi(constant_case):
    p, sw, wf = constant_case
    gen = default_generator(p)
    expected = chi_constant_psi(sw.grid.R_max, gen.f, p.mu, p.v_plus)
    assert tail_terminal_value(sw, gen) == pytest.approx(expected, abs=1e-13)
    assert wf.terminal_value == wf.chi.values[-1]


@pytest.mark.parametrize("n, v_minus", [(4, 0.0), (5, -0.5), (4, 3.5)])
def test_default_generator_matches_quadrature(n, v_minus):
    p = ProblemParams(n, 1.0, 1.0, v_minus, -1.0)
    sw = solve_stationary(p, default_grid(p, num=2000))
    wf = build_weight(sw, default_generator(p))
    oracle_psi = riccati_rk4(n, 1.0, 1.0, v_minus, -1.0, 51.0, h=1e-3)
    r = sw.grid.nodes
    idx = np.searchsorted(r, [1.0, 1.05, 1.3, 2.0, 4.0, 8.0, 12.0])
    oracle = chi_by_quadrature(r[idx], oracle_psi, default_generator(p).f, 1.0, 1.0, 51.0)
    assert np.max(np.abs(wf.chi.values[idx] - oracle)) <= 1e-8


@pytest.mark.parametrize("mu, r0, v_plus", [(1.0, 1.0, -1.0), (0.5, 1.0, -1.0),
                                            (1.0, 2.0, -1.5), (2.0, 1.0, -2.0)])
def test_weight_properties_and_far_field(mu, r0, v_plus):
    p = ProblemParams(4, mu, r0, 0.0, v_plus)
    sw = solve_stationary(p, default_grid(p, num=2000))
    wf = build_weight(sw, default_generator(p))
    rep = verify_weight_properties(wf, sw)
    assert wf.c1 >= 1e-3 and rep.positivity
    assert rep.ode_residual <= 1e-8
    assert rep.boundary_value_error <= 1e-6
    assert wf.farfield_value == pytest.approx(2 * mu / (r0 * abs(v_plus)), rel=1e-15)
    assert abs(wf.farfield_extrapolated - wf.farfield_value) <= 1e-4
    assert wf.c1 == np.min(wf.chi.values) and wf.c2 == np.max(wf.chi.values)


def test_default_far_field_is_two(weight):
    assert weight.farfield_value == 2.0
    assert abs(weight.farfield_extrapolated - 2.0) <= 1e-4


def test_ab_envelopes(weight, wave):
    assert ab_bounds(weight, wave).ok


@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0])
def test_epsilon_generator(eps, wave, params):
    gen = epsilon_generator(params, eps)
    hyp = gen.check_hypotheses()
    assert hyp["f_prime_negative"] and hyp["f_r0_negative"]
    assert hyp["l1_norm_fprime"] == pytest.approx(gen.l1_norm_fprime, rel=1e-8)
    wf = build_weight(wave, gen)
    rep = verify_weight_properties(wf, wave)
    assert wf.c1 > 0 and rep.ode_residual <= 1e-8
    assert wf.farfield_value == pytest.approx(1 + 1 / (2 * eps))
    assert abs(wf.farfield_extrapolated - wf.farfield_value) <= 1e-3


@pytest.mark.parametrize("eps", [0.0, -0.5, math.nan, math.inf])
def test_epsilon_must_be_positive(eps, params):
    with pytest.raises(ParameterError):
        epsilon_generator(params, eps)


def test_default_generator_hypotheses(params):
    hyp = default_generator(params).check_hypotheses()
    assert hyp["l1_norm_fprime"] == pytest.approx(1.0, rel=1e-8)


def test_generator_violating_hypotheses_rejected(wave):
    increasing = WeightGenerator(f=lambda r: -1.0 / np.asarray(r, float),
                                 f_prime=lambda r: 1.0 / np.asarray(r, float) ** 2,
                                 f_at_r0=-1.0, l1_norm_fprime=1.0, limit_abs_f=0.0, r0=1.0)
    with pytest.raises(PreconditionError):
        build_weight(wave, increasing)


def test_weight_grid_must_fit(wave, params):
    with pytest.raises(ParameterError):
        build_weight(wave, default_generator(params), grid=RadialGrid.uniform(1.0, 80.0, 100))
    sub = RadialGrid.uniform(1.0, 30.0, 800)
    wf = build_weight(wave, default_generator(params), grid=sub)
    assert wf.grid is sub and wf.c1 > 0
