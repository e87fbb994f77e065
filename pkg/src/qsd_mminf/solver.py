"""theta* as the root of the series and as the fixed point of the integral equation.

Both solvers work on the normalized chain (q = 1) and rescale on output, so
``theta*(c a, c q) == c theta*(a, q)`` holds up to the bracket width.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

from scipy import integrate

from .errors import ConvergenceError, DomainError, SolverError
from .model import ModelParams
from .special import bargamma_series

DEFAULT_TOL = 1e-12
BRACKET_GUARD = 1e-6
MAX_ITER = 400


class Method(str, enum.Enum):
    SERIES_ROOT = "series_root"
    INTEGRAL_ROOT = "integral_root"
    SIMULATION_FIT = "simulation_fit"


@dataclass(frozen=True)
class SurvivalRate:
    theta: float
    method: Method
    residual: float
    bracket_width: float


@dataclass(frozen=True)
class MonotoneMapValue:
    theta: float
    value: float
    abs_error_estimate: float = 0.0


@dataclass(frozen=True)
class EquivalenceReport:
    series: SurvivalRate
    integral: SurvivalRate
    difference: float
    tol: float
    passed: bool


def _check_theta(params, theta, allow_zero=False):
    lower_ok = theta >= 0 if allow_zero else theta > 0
    if not (lower_ok and theta < params.q):
        bound = "[0, q)" if allow_zero else "(0, q)"
        raise DomainError(f"theta={theta!r} outside {bound} for q={params.q!r}")


def series_characteristic(params: ModelParams, theta: float, tol: float = DEFAULT_TOL) -> float:
    """``bargamma(-theta/q, -a/q)``: negative below theta*, positive above it."""
    _check_theta(params, theta)
    return bargamma_series(-theta / params.q, -params.ratio, tol).value


def integral_characteristic(params: ModelParams, theta: float, tol: float = DEFAULT_TOL) -> MonotoneMapValue:
    """``(a/q) int_0^1 (1-y)^(-theta/q) e^(-a y/q) dy`` by direct quadrature.

    ``tol`` is absolute for values up to one and relative beyond, since the
    map grows like ``1/(q - theta)`` near ``theta = q``.

    With ``1 - y = u^(1/(1 - theta/q))`` the endpoint singularity at y = 1
    disappears and the map equals
    ``(a/q) / (1 - theta/q) * int_0^1 exp(-(a/q) (1 - u^(1/(1 - theta/q)))) du``.
    """
    _check_theta(params, theta, allow_zero=True)
    b = params.ratio
    alpha = theta / params.q
    p = 1.0 / (1.0 - alpha)
    pref = b * p
    # u^p has a boundary layer of width ~1/p at u = 1 when theta is close to q.
    points = [1.0 - 30.0 / p, 1.0 - 1.0 / p] if p > 60.0 else None
    value, err, info, *rest = integrate.quad(
        lambda u: math.exp(-b * (1.0 - u**p)),
        0.0,
        1.0,
        epsabs=tol / pref,
        epsrel=tol,
        limit=500,
        points=points,
        full_output=1,
    )
    if err > tol / pref * max(1.0, pref * value):
        raise ConvergenceError(f"integral map at theta={theta!r}: error {err * pref:.3g} > {tol:.3g}", partial=value * pref)
    return MonotoneMapValue(theta, pref * value, pref * err)


def _expand_bracket(f, q):
    """Bracket [lo, hi] of theta with f(lo) < 0 < f(hi).

    Starts at (guard q, (1 - guard) q); the lower end is pulled toward 0 when
    theta* is smaller than guard q, which happens for a/q around 20 and above.
    """
    lo, hi = BRACKET_GUARD * q, (1.0 - BRACKET_GUARD) * q
    flo, fhi = f(lo), f(hi)
    while flo >= 0 and lo > 1e-280 * q:
        lo *= 0.1
        try:
            flo = f(lo)
        except DomainError as exc:
            raise SolverError(f"lower bracket reached {lo!r} without a sign change: {exc}") from exc
    gap = BRACKET_GUARD
    while fhi <= 0 and gap > 1e-7:
        gap *= 0.1
        hi = (1.0 - gap) * q
        fhi = f(hi)
    if not (flo < 0 < fhi):
        raise SolverError(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")
    return lo, flo, hi, fhi


def _refine(f, lo, flo, hi, fhi, width, ftol, secant):
    """Bisection, alternating with a regula falsi step that must land inside the bracket.

    Stops once the bracket is narrower than ``width`` and the best residual is
    at most ``ftol``, or when the bracket cannot shrink further in floating point.
    """
    best, fbest = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    for it in range(MAX_ITER):
        done = hi - lo <= width and abs(fbest) <= ftol
        if done or fbest == 0.0 or hi - lo <= 4 * math.ulp(hi):
            return best, abs(fbest), hi - lo
        mid = 0.5 * (lo + hi)
        if secant and it % 2 == 0:
            cand = hi - fhi * (hi - lo) / (fhi - flo)
            if lo < cand < hi:
                mid = cand
        fmid = f(mid)
        if abs(fmid) < abs(fbest):
            best, fbest = mid, fmid
        if fmid < 0:
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    raise SolverError(f"bracket did not shrink below {width!r} in {MAX_ITER} iterations")


@functools.lru_cache(maxsize=256)
def solve_theta_star_series(params: ModelParams, tol: float = DEFAULT_TOL) -> SurvivalRate:
    """Unique root in (0, q) of ``theta -> bargamma(-theta/q, -a/q)``.

    ``residual`` is ``|(theta/q) bargamma(-theta/q, -a/q)|`` at the returned root.
    """
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol!r}")
    b = params.ratio
    # Truncating the tail at delta shifts the root by about delta / f'; terms are cheap.
    series_tol = tol * 1e-4

    # Scaled by alpha so the k = 0 term is -1: same root and sign, but the
    # residual stays meaningful when theta*/q is tiny and q/theta dominates.
    def f(alpha):
        return alpha * bargamma_series(-alpha, -b, series_tol).value

    lo, flo, hi, fhi = _expand_bracket(f, 1.0)
    alpha, resid, width = _refine(f, lo, flo, hi, fhi, tol, tol, secant=True)
    return SurvivalRate(alpha * params.q, Method.SERIES_ROOT, resid, width * params.q)


@functools.lru_cache(maxsize=256)
def solve_theta_star_integral(params: ModelParams, tol: float = DEFAULT_TOL) -> SurvivalRate:
    """Unique theta in (0, q) where the increasing integral map crosses one."""
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol!r}")
    unit = ModelParams(params.ratio, 1.0)
    # Quadrature error moves the root by err / map'(theta), and map' is about
    # q/a for large a/q, so integrate well below the bracket tolerance.
    quad_tol = max(tol * 1e-2, 5e-14)

    def f(alpha):
        return integral_characteristic(unit, alpha, quad_tol).value - 1.0

    lo, flo, hi, fhi = _expand_bracket(f, 1.0)
    alpha, resid, width = _refine(f, lo, flo, hi, fhi, tol, tol, secant=False)
    return SurvivalRate(alpha * params.q, Method.INTEGRAL_ROOT, resid, width * params.q)


def theta_star(params: ModelParams, tol: float = DEFAULT_TOL) -> float:
    return solve_theta_star_series(params, tol).theta


def certify_equivalence(params: ModelParams, tol: float = DEFAULT_TOL) -> EquivalenceReport:
    """Solve both ways; pass iff the two rates differ by at most ``4 tol q``."""
    series = solve_theta_star_series(params, tol)
    integral = solve_theta_star_integral(params, tol)
    diff = abs(series.theta - integral.theta)
    return EquivalenceReport(series, integral, diff, tol, diff <= 4 * tol * params.q)
