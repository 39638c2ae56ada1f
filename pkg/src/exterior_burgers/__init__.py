"""Stationary waves and their stability for the exterior radial viscous Burgers problem."""

from .diagnostics import (NormSpec, RateFit, coefficient_bounds, energy_identity_residual,
                          check_zeroth_order_bound, fit_algebraic_rate,
                          fit_exponential_rate, weighted_norm)
from .evolution import (InitialDataSpec, SchemeConfig, Trajectory, compute_w, evolve,
                        make_initial_data, w_equation_residual)
from .grid import Profile, RadialGrid, default_grid
from .problem import ProblemParams, RegimeTag, classify_regime, validate_admissible
from .stationary import StationaryWave, solve_stationary
from .weight import (WeightFunction, build_weight, default_generator, epsilon_generator,
                     verify_weight_properties)

__version__ = "0.1.0"

__all__ = [
    "InitialDataSpec", "NormSpec", "Profile", "ProblemParams", "RadialGrid", "RateFit",
    "RegimeTag", "SchemeConfig", "StationaryWave", "Trajectory", "WeightFunction",
    "build_weight", "check_zeroth_order_bound", "classify_regime", "coefficient_bounds",
    "compute_w", "default_generator", "default_grid", "energy_identity_residual",
    "epsilon_generator", "evolve", "fit_algebraic_rate", "fit_exponential_rate",
    "make_initial_data", "solve_stationary", "validate_admissible",
    "verify_weight_properties", "w_equation_residual", "weighted_norm",
]
