"""Special functions behind the two characterizations of theta*.

Three quantities are evaluated here, each by its own numerical route so that
comparing them is a real check rather than a tautology:

* ``bargamma_series``: the meromorphic series
  ``sum_k (-x)^k / ((k + s) k!)``, summed term by term with a rigorous tail bound.
* ``gamma_lower_scaled``: ``x^-s * int_0^x t^(s-1) e^-t dt`` by quadrature, only
  for ``s, x > 0``.
* ``big_f``: ``-x * int_0^1 (1 - y)^s e^(x y) dy`` by quadrature for ``s > -1``.

Every routine runs in double precision by default. Passing ``dps`` switches to
mpmath at that many significant digits, which is what ``identity_residual``
does: at ``x = 10`` both sides of the identity are of order 1e5, so an absolute
residual of 1e-10 is below what double precision can resolve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from scipy import integrate

from .errors import ConvergenceError, DomainError

POLE_GUARD = 1e-8
MAX_TERMS = 10_000
MAX_ABS_X = 700.0
EXTENDED_DPS = 20
DEFAULT_TOL = 1e-12

_EPS = 2.0**-53


@dataclass(frozen=True)
class EvalResult:
    value: float
    abs_error_estimate: float
    terms_or_nodes_used: int


def nearest_pole(s: float) -> float:
    """Closest element of {0, -1, -2, ...} to ``s``."""
    return float(min(0, round(s)))


def _check_series_args(s, x, tol):
    if not (math.isfinite(s) and math.isfinite(x)):
        raise DomainError(f"non-finite argument s={s!r}, x={x!r}")
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol!r}")
    pole = nearest_pole(s)
    if abs(s - pole) < POLE_GUARD:
        raise DomainError(f"s={s!r} lies within {POLE_GUARD:g} of the pole at {pole:g}")
    if abs(x) > MAX_ABS_X:
        raise DomainError(f"|x|={abs(x)!r} exceeds {MAX_ABS_X:g}")


def _sum_series(s, x, tol):
    """Sum the series in whatever arithmetic ``s`` and ``x`` carry (float or mpf).

    Returns ``(value, tail_bound, sum_of_abs_terms, n_terms)``.
    """
    total = 1 / s
    abs_sum = abs(total)
    ax = abs(x)
    power = 1  # (-x)^k / k!
    for k in range(1, MAX_TERMS + 1):
        power = power * (-x) / k
        term = power / (k + s)
        total += term
        abs_sum += abs(term)
        # Tail k+1, k+2, ...: |x|^j / j! is dominated by a geometric series with
        # ratio |x| / (k + 2) once k + 1 > |x|, and |j + s| >= k + 1 + s on the tail.
        nxt = k + 1
        if nxt > ax and nxt + s > 0:
            rho = ax / (nxt + 1)
            tail = abs(power) * ax / nxt / (1 - rho) / (nxt + s)
            if tail <= tol:
                return total, tail, abs_sum, k + 1
    raise ConvergenceError(
        f"series for s={s}, x={x} did not reach tol={tol} in {MAX_TERMS} terms",
        partial=total,
    )


def _bargamma_mp(s, x, tol, dps):
    """Series in mpmath. Returns ``(value, error_bound, n_terms)`` as mpf."""
    # Alternating terms for x > 0 grow to about e^x / sqrt(x) before decaying.
    guard = 8 + (int(x / math.log(10)) if x > 0 else 0)
    with mpmath.workdps(dps + guard):
        sm, xm = mpmath.mpf(s), mpmath.mpf(x)
        value, tail, abs_sum, n = _sum_series(sm, xm, mpmath.mpf(tol))
        rounding = abs_sum * n * mpmath.mpf(10) ** (-(dps + guard))
        return +value, tail + rounding, n


def bargamma_series(s: float, x: float, tol: float = 1e-15, *, dps: int | None = None) -> EvalResult:
    """Evaluate ``sum_{k>=0} (-x)^k / ((k + s) k!)``.

    Summation stops once the tail bound falls below ``tol``. The reported
    error adds a worst-case rounding bound to the tail bound. For ``x > 0`` the
    terms alternate and cancel, so that case is summed in mpmath with enough
    guard digits even when ``dps`` is None.
    """
    s, x = float(s), float(x)
    _check_series_args(s, x, tol)
    if dps is None and x <= 0:
        value, tail, abs_sum, n = _sum_series(s, x, tol)
        rounding = 2 * (n + 2) * _EPS * abs_sum
        return EvalResult(value, tail + rounding, n)
    value, err, n = _bargamma_mp(s, x, tol, dps or 17)
    value = float(value)
    return EvalResult(value, float(err) + _EPS * abs(value), n)


def _quad_float(f, epsabs, what):
    value, err, info, *rest = integrate.quad(f, 0.0, 1.0, epsabs=epsabs, epsrel=0.0, limit=500, full_output=1)
    if not math.isfinite(value) or err > epsabs:
        msg = rest[0] if rest else ""
        raise ConvergenceError(
            f"{what}: quadrature error estimate {err:.3g} exceeds {epsabs:.3g}. {msg}".strip(),
            partial=value,
        )
    return value, err, info["neval"]


def _quad_mp(f, epsabs, what):
    count = [0]

    def counted(u):
        count[0] += 1
        return f(u)

    value, err = mpmath.quad(counted, [0, 1], error=True)
    if err > epsabs:
        raise ConvergenceError(f"{what}: mpmath quadrature error {mpmath.nstr(err, 3)} exceeds {epsabs:.3g}", partial=value)
    return value, err, count[0]


def gamma_lower_scaled(s: float, x: float, tol: float = DEFAULT_TOL, *, dps: int | None = None) -> EvalResult:
    """``x^-s * gamma(s, x)`` for ``s, x > 0`` by quadrature.

    The substitution ``t = x u^(1/s)`` turns the integral into
    ``(1/s) int_0^1 exp(-x u^(1/s)) du`` whose integrand is bounded by one.
    """
    s, x = float(s), float(x)
    if not (s > 0 and x > 0):
        raise DomainError(f"gamma_lower_scaled needs s > 0 and x > 0, got s={s!r}, x={x!r}")
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol!r}")
    p = 1.0 / s
    what = f"gamma_lower_scaled({s}, {x})"
    if dps is None:
        value, err, n = _quad_float(lambda u: math.exp(-x * u**p), tol * s, what)
        return EvalResult(value / s, err / s + _EPS * value / s, n)
    with mpmath.workdps(dps):
        pm, xm = mpmath.mpf(1) / s, mpmath.mpf(x)
        value, err, n = _quad_mp(lambda u: mpmath.exp(-xm * u**pm), tol * s, what)
        return EvalResult(float(value * pm), float(err * pm) + _EPS * float(value * pm), n)


def _big_f_mp(s, x, tol, dps):
    if x == 0:
        return mpmath.mpf(0), mpmath.mpf(0), 0
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        p = 1 / (mpmath.mpf(s) + 1)
        scale = abs(xm) * p
        value, err, n = _quad_mp(lambda u: mpmath.exp(xm * (1 - u**p)), tol / scale, f"big_f({s}, {x})")
        return -xm * p * value, scale * err, n


def big_f(s: float, x: float, tol: float = DEFAULT_TOL, *, dps: int | None = None) -> EvalResult:
    """``-x * int_0^1 (1 - y)^s e^(x y) dy`` for ``s > -1``.

    With ``1 - y = u^(1/(s+1))`` the integral becomes
    ``1/(s+1) * int_0^1 exp(x (1 - u^(1/(s+1)))) du``, continuous on [0, 1]
    even when ``-1 < s < 0``.
    """
    s, x = float(s), float(x)
    if not s > -1:
        raise DomainError(f"big_f needs s > -1, got s={s!r}")
    if not (math.isfinite(s) and math.isfinite(x)):
        raise DomainError(f"non-finite argument s={s!r}, x={x!r}")
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol!r}")
    if x == 0.0:
        return EvalResult(0.0, 0.0, 0)
    if dps is not None:
        value, err, n = _big_f_mp(s, x, tol, dps)
        value = float(value)
        return EvalResult(value, float(err) + _EPS * abs(value), n)
    p = 1.0 / (s + 1.0)
    scale = abs(x) * p
    # Tiny |x| makes tol / scale overflow; the integrand is then within |x| of one.
    epsabs = min(tol / scale, 0.5) if scale > 0 else 0.5
    value, err, n = _quad_float(lambda u: math.exp(x * (1.0 - u**p)), epsabs, f"big_f({s}, {x})")
    value = -x * p * value
    return EvalResult(value, scale * err + _EPS * abs(value), n)


def identity_residual(s: float, x: float, tol: float = DEFAULT_TOL, *, dps: int | None = EXTENDED_DPS) -> float:
    """``|F(s, x) - (1 - s e^x bargamma(s, x))|`` with each side computed independently.

    Both sides are evaluated (and subtracted) at ``dps`` digits, so the value
    measures the identity itself rather than double-precision rounding. Pass
    ``dps=None`` to use the double-precision paths instead.
    """
    s, x = float(s), float(x)
    if not s > -1:
        raise DomainError(f"identity_residual needs s > -1, got s={s!r}")
    _check_series_args(s, x, tol)
    # The series enters multiplied by s e^x; scale its tolerance accordingly.
    series_tol = tol / (abs(s) * math.exp(x))
    if dps is None:
        lhs = big_f(s, x, tol).value
        rhs = 1.0 - s * math.exp(x) * bargamma_series(s, x, series_tol).value
        return abs(lhs - rhs)
    lhs, _, _ = _big_f_mp(s, x, tol, dps)
    g, _, _ = _bargamma_mp(s, x, series_tol, dps)
    with mpmath.workdps(dps):
        rhs = 1 - mpmath.mpf(s) * mpmath.exp(mpmath.mpf(x)) * g
        return float(abs(lhs - rhs))
