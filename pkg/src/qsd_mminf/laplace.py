"""Moment generating function E_1[exp(theta T)] of the absorption time from state 1."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NearSingularityError
from .model import ModelParams
from .solver import DEFAULT_TOL, solve_theta_star_series
from .special import bargamma_series

SINGULARITY_GUARD = 1e-4


@dataclass(frozen=True)
class MgfPoint:
    theta: float
    value: float
    abs_error_estimate: float = 0.0


def mgf_absorption(
    params: ModelParams,
    theta: float,
    tol: float = DEFAULT_TOL,
    *,
    theta_star: float | None = None,
    guard: float = SINGULARITY_GUARD,
) -> MgfPoint:
    """``(a - theta)/a - 1 / ((a/q) e^(-a/q) bargamma(-theta/q, -a/q))``.

    Finite only below theta*, where the series has a simple zero. Points
    within ``guard * q`` of theta* are refused because the reciprocal loses
    all precision there. Negative theta is allowed; theta = 0 is a pole of the
    series and is rejected.
    """
    if theta_star is None:
        theta_star = solve_theta_star_series(params).theta
    if theta >= theta_star:
        raise DomainError(f"theta={theta!r} >= theta*={theta_star!r}: E_1[exp(theta T)] is infinite")
    if theta > theta_star - guard * params.q:
        raise NearSingularityError(f"theta={theta!r} within {guard:g} q of theta*={theta_star!r}")
    a, b = params.a, params.ratio
    series = bargamma_series(-theta / params.q, -b, tol)
    denom = b * math.exp(-b) * series.value
    value = (a - theta) / a - 1.0 / denom
    # d(1/(c g)) = dg / (c g^2)
    err = series.abs_error_estimate / (abs(denom) * abs(series.value)) + 2.0**-52 * abs(value)
    return MgfPoint(theta, value, err)


def mean_absorption_time(params: ModelParams) -> float:
    """E_1[T] = (e^(a/q) - 1) / a, the derivative of the transform at 0."""
    return math.expm1(params.ratio) / params.a
