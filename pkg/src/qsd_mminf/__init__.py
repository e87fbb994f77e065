"""Exponential survival rate and quasi-stationary distributions of the absorbed M/M/inf queue."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DomainError,
    InvalidThetaError,
    NearSingularityError,
    ParameterError,
    QsdError,
    RunawayError,
    SolverError,
    StatisticsError,
)
from .laplace import MgfPoint, mean_absorption_time, mgf_absorption
from .model import GeneratorEntry, ModelParams, generator_entry, normalize, rate_out_of, validate
from .qsd import (
    GeneratingFunctionPoint,
    QsdVector,
    balance_residual,
    generating_function,
    qsd_from_gf,
    qsd_recurrence,
    yaglom_reference,
)
from .sim import (
    ConditionalHistogram,
    SimConfig,
    SurvivalFit,
    TrajectoryStats,
    conditional_histogram,
    fit_survival_rate,
    run,
)
from .solver import (
    Method,
    MonotoneMapValue,
    SurvivalRate,
    certify_equivalence,
    integral_characteristic,
    series_characteristic,
    solve_theta_star_integral,
    solve_theta_star_series,
    theta_star,
)
from .special import EvalResult, bargamma_series, big_f, gamma_lower_scaled, identity_residual
