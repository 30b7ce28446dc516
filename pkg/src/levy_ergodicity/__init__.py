"""Numerical ergodicity certificates, rate calculus and simulation for Levy-type processes."""
from .certificates import (
    Certificate,
    check_theorem1,
    check_theorem2,
    classify_case,
    constant_C,
    corollary_rate,
    drift_growth,
    optimal_zeta,
    scaling_phi,
)
from .diagnostics import TVCurve, convergence_curve, empirical_tv, rate_comparison
from .errors import *  # noqa: F403
from .generator import LyapunovSpec, apply_generator, apply_L0
from .levy_kernel import Drift, KernelSpec, LevyTypeModel, TailConstants, tail_constants
from .rates import RateFunction, RatePlan, big_F, inverse_F, psi
from .simulator import (
    ChainSample,
    SimConfig,
    char_exponent,
    empirical_skeleton_drift,
    monte_carlo_functional,
    sample_increment,
    sample_increments,
    simulate_chain,
)

__version__ = "0.1.0"
