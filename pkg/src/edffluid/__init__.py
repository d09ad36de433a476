"""Simulation and fluid-limit analysis of the M/M/1+GI queue under hard
earliest-deadline-first scheduling, with a pure-delay infinite-server mode."""

from .calculus import (
    Distribution,
    PiecewiseLinear,
    QuadratureSpec,
    RcllFunction,
    TestFunction,
    indicator_nonpositive,
    indicator_positive,
    integrate,
    standard_test_suite,
)
from .fluid import (
    FluidModel,
    det_edf_model,
    mginf_congestion,
    mginf_served,
    mginf_workload,
    nu_fluid_general,
    omega_star,
    p_fluid_det,
    q_fluid_det,
    r_bar_det,
)
from .measure import PointMeasure
from .simulator import (
    SimConfig,
    Trajectory,
    bracket_path,
    generator_apply,
    martingale_path,
    observables,
    profile_at,
    run,
    run_scripted,
)

__version__ = "0.1.0"

__all__ = [
    "Distribution",
    "FluidModel",
    "PiecewiseLinear",
    "PointMeasure",
    "QuadratureSpec",
    "RcllFunction",
    "SimConfig",
    "TestFunction",
    "Trajectory",
    "bracket_path",
    "det_edf_model",
    "generator_apply",
    "indicator_nonpositive",
    "indicator_positive",
    "integrate",
    "martingale_path",
    "mginf_congestion",
    "mginf_served",
    "mginf_workload",
    "nu_fluid_general",
    "observables",
    "omega_star",
    "p_fluid_det",
    "profile_at",
    "q_fluid_det",
    "r_bar_det",
    "run",
    "run_scripted",
    "standard_test_suite",
    "__version__",
]
