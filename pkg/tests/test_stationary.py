import math

import numpy as np
import pytest

from exterior_burgers import ProblemParams, RadialGrid, default_grid, solve_stationary
from exterior_burgers.errors import (DegenerateTail, FarFieldError, InadmissibleError,
                                     ParameterError, PreconditionError)
from exterior_burgers.stationary import (check_far_field_decay,
                                         check_negative_bound_and_monotone,
                                         far_field_tail, stationary_residual,
                                         tail_coefficients)
from oracles import riccati_n3_exact, riccati_rk4

CASES = [(n, vm, vp) for n in (4, 5, 6) for vm, vp in ((0.0, -1.0), (-0.5, -1.0), (2.0, -1.0))]


@pytest.mark.parametrize("n, v_minus, v_plus", CASES + [(4, 3.5, -1.0), (5, 0.0, -2.0)])
def test_matches_fixed_step_rk4(n, v_minus, v_plus):
    p = ProblemParams(n, 1.0, 1.0, v_minus, v_plus)
    sw = solve_stationary(p, default_grid(p, num=2000))
    oracle = riccati_rk4(n, 1.0, 1.0, v_minus, v_plus, 20.0, h=1e-3)
    r = sw.grid.nodes
    mask = r <= 20.0
    assert np.max(np.abs(sw.psi.values[mask] - oracle(r[mask]))) <= 1e-8


@pytest.mark.parametrize("v_minus", [0.0, 1.5, 2.5, 2.9])
def test_three_dimensions_closed_form(v_minus):
    p = ProblemParams(3, 1.0, 1.0, v_minus, -1.0)
    sw = solve_stationary(p, RadialGrid.uniform(1.0, 51.0, 2001))
    exact = riccati_n3_exact(sw.grid.nodes, 1.0, 1.0, p.V_minus, -1.0)
    assert np.max(np.abs(sw.psi.values - exact)) <= 1e-9


def test_constant_wave_when_shifted_value_equals_v_plus():
    p = ProblemParams(3, 1.0, 1.0, 1.0, -1.0)
    sw = solve_stationary(p, RadialGrid.uniform(1.0, 30.0, 500))
    assert np.max(np.abs(sw.psi.values + 1.0)) <= 1e-14
    with pytest.raises(DegenerateTail):
        check_far_field_decay(sw)


def test_unstable_equilibrium_never_reaches_v_plus():
    # n = 3 and V_minus = |v_plus|: psi stays at the repelling state
    p = ProblemParams(3, 1.0, 1.0, 3.0, -1.0)
    with pytest.raises(FarFieldError):
        solve_stationary(p, RadialGrid.uniform(1.0, 51.0, 500))


def test_boundary_values_and_phi_shift(wave, params):
    r = wave.grid.nodes
    assert wave.phi.values[0] == params.v_minus
    assert wave.psi.values[0] == params.V_minus
    np.testing.assert_allclose(wave.phi.values[1:], wave.psi.values[1:] + 3.0 / r[1:], rtol=0,
                               atol=1e-15)


def test_tail_coefficients_recursion():
    p = ProblemParams(5, 0.7, 1.0, 0.0, -1.3)
    a = tail_coefficients(p, 10)
    mu, vp, c0 = p.mu, p.v_plus, p.c0
    assert a[0] == a[1] == 0
    assert a[2] == pytest.approx(mu * c0 / vp, rel=1e-15)
    assert a[3] == pytest.approx(-2 * mu * a[2] / vp, rel=1e-15)
    assert a[4] == pytest.approx((mu / vp) * (-3 * a[3] - a[2] ** 2 / (2 * mu)), rel=1e-14)
    # truncated expansion satisfies the Riccati equation to O(r^-(K+2))
    for r, tol in ((20.0, 1e-14), (40.0, 1e-15)):
        psi = far_field_tail(r, p, a)
        dpsi = sum(-m * a[m] / r ** (m + 1) for m in range(2, len(a)))
        res = dpsi - ((psi ** 2 - vp ** 2) / (2 * mu) - c0 / r ** 2)
        assert abs(res) < tol


@pytest.mark.parametrize("n, v_minus, v_plus", CASES)
def test_suite_residual_and_tail(n, v_minus, v_plus):
    p = ProblemParams(n, 1.0, 1.0, v_minus, v_plus)
    sw = solve_stationary(p, default_grid(p, num=2000, R_max=60.0))
    assert sw.residual_max <= 1e-8
    assert stationary_residual(sw, p) == sw.residual_max
    assert sw.tail_gap <= 1e-6
    # the literal gap to v_plus is set by the algebraic tail mu c0 / (|v+| R^2)
    expected = p.mu * p.c0 / (abs(v_plus) * 60.0 ** 2)
    assert sw.farfield_gap == pytest.approx(expected, rel=0.1)
    assert -2.2 <= check_far_field_decay(sw) <= -1.8


@pytest.mark.parametrize("n, v_minus", [(4, -0.5), (5, -0.5), (6, -0.5), (4, -3.0)])
def test_negative_bound_and_monotone(n, v_minus):
    p = ProblemParams(n, 1.0, 1.0, v_minus, -1.0)
    sw = solve_stationary(p, default_grid(p, num=2000))
    b = check_negative_bound_and_monotone(sw, p)
    assert b.phi_max <= 1e-10
    assert b.min_monotone_expr >= -1e-8


def test_bound_check_precondition(wave, params):
    with pytest.raises(PreconditionError):
        check_negative_bound_and_monotone(wave, params)


def test_rejections():
    bad = ProblemParams(4, 1.0, 1.0, 5.0, -1.0)
    with pytest.raises(InadmissibleError):
        solve_stationary(bad, default_grid(bad, num=200))
    p = ProblemParams(4, 1.0, 1.0, 0.0, -1.0)
    with pytest.raises(ParameterError):
        solve_stationary(p, default_grid(p, num=200), tol=1e-2)
    with pytest.raises(ParameterError):
        solve_stationary(p, RadialGrid.uniform(1.5, 40.0, 200))


def test_short_domain_raises_far_field_error_with_wave():
    p = ProblemParams(4, 1.0, 1.0, 0.0, -1.0)
    with pytest.raises(FarFieldError) as info:
        solve_stationary(p, default_grid(p, num=400, R_max=6.0))
    sw = info.value.wave
    assert sw is not None and sw.tail_gap > 1e-6
    assert math.isfinite(sw.residual_max)


def test_dense_output_matches_samples(wave):
    r = wave.grid.nodes[::97]
    np.testing.assert_allclose(wave.psi_at(r), wave.psi.values[::97], atol=1e-14)
    assert isinstance(wave.psi_at(2.0), float)
