import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exterior_burgers import Profile, ProblemParams, RadialGrid, default_grid
from exterior_burgers.errors import ParameterError
from exterior_burgers.grid import MAX_GRADING, default_R_max, fornberg_weights


def test_fornberg_reproduces_textbook_stencils():
    x = np.array([-1.0, 0.0, 1.0])
    np.testing.assert_allclose(fornberg_weights(0.0, x, 1), [-0.5, 0.0, 0.5], atol=1e-15)
    np.testing.assert_allclose(fornberg_weights(0.0, x, 2), [1.0, -2.0, 1.0], atol=1e-15)
    x5 = np.arange(-2.0, 3.0)
    np.testing.assert_allclose(fornberg_weights(0.0, x5, 1),
                               [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12], atol=1e-15)


def test_uniform_and_graded_construction():
    g = RadialGrid.uniform(1.0, 11.0, 101)
    assert g.r0 == 1.0 and g.R_max == 11.0 and g.size == 101
    np.testing.assert_allclose(np.diff(g.nodes), 0.1, atol=1e-13)
    gg = RadialGrid.graded(1.0, 11.0, 101, 1.02)
    d = np.diff(gg.nodes)
    np.testing.assert_allclose(d[1:] / d[:-1], 1.02, rtol=1e-10)
    assert gg.r0 == 1.0 and gg.R_max == 11.0
    assert RadialGrid.graded(1.0, 11.0, 101, 1.0).spacing == "uniform"


@pytest.mark.parametrize("build", [
    lambda: RadialGrid.uniform(2.0, 1.0, 100),
    lambda: RadialGrid.uniform(1.0, 2.0, 5),
    lambda: RadialGrid.graded(1.0, 2.0, 100, MAX_GRADING + 0.01),
    lambda: RadialGrid(np.array([1.0, 3.0, 2.0] + list(range(4, 20)))),
    lambda: RadialGrid(np.linspace(1, 2, 50), spacing="chebyshev"),
])
def test_invalid_grids(build):
    with pytest.raises(ParameterError):
        build()


def test_nodes_are_read_only():
    g = RadialGrid.uniform(1.0, 2.0, 20)
    with pytest.raises(ValueError):
        g.nodes[0] = 0.0


@settings(max_examples=30, deadline=None)
@given(coeffs=st.lists(st.floats(-3, 3), min_size=5, max_size=5),
       ratio=st.floats(1.0, 1.04))
def test_fourth_order_derivative_exact_on_quartics(coeffs, ratio):
    g = RadialGrid.graded(1.0, 4.0, 60, ratio)
    poly = np.polynomial.Polynomial(coeffs)
    r = g.nodes
    scale = 1.0 + np.max(np.abs(poly(r)))
    np.testing.assert_allclose(g.derivative(poly(r), 1, 4), poly.deriv(1)(r), atol=1e-8 * scale)
    np.testing.assert_allclose(g.derivative(poly(r), 2, 4), poly.deriv(2)(r), atol=1e-6 * scale)


@pytest.mark.parametrize("order, expected", [(2, 2.0), (4, 4.0)])
def test_derivative_convergence_order(order, expected):
    errs = []
    for num in (101, 201):
        g = RadialGrid.uniform(1.0, 3.0, num)
        errs.append(np.max(np.abs(g.derivative(np.sin(g.nodes), 1, order) - np.cos(g.nodes))))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(expected, abs=0.3)


def test_trapezoid_integral_exact_on_linear():
    g = RadialGrid.graded(1.0, 5.0, 50, 1.03)
    assert g.integrate(2 * g.nodes + 1) == pytest.approx(5 * 5 + 5 - 2, rel=1e-14)


def test_default_grid_policy():
    p4 = ProblemParams(4, 1.0, 1.0, 0.0, -1.0)
    p3 = ProblemParams(3, 1.0, 1.0, 0.0, -1.0)
    g4 = default_grid(p4, num=2000)
    assert g4.spacing == "graded" and g4.R_max == pytest.approx(51.0)
    d = np.diff(g4.nodes)
    assert d[-1] / d[0] == pytest.approx(400.0, rel=1e-8)
    assert default_grid(p3, num=500).spacing == "uniform"
    assert default_R_max(1.0, 5.0, -1.0) == 101.0
    assert default_grid(p4, num=100, R_max=20.0).R_max == 20.0


def test_profile_validation():
    g = RadialGrid.uniform(1.0, 2.0, 20)
    with pytest.raises(ParameterError):
        Profile(g, np.zeros(19))
    bad = np.zeros(20)
    bad[3] = np.nan
    with pytest.raises(ParameterError):
        Profile(g, bad)
    p = Profile(g, g.nodes ** 2)
    q = p - Profile(g, g.nodes ** 2)
    assert np.all(q.values == 0)
    assert not p.values.flags.writeable
