"""Quasi-stationary distributions nu_theta by two independent routes.

``qsd_recurrence`` expands the left-eigenvector equations state by state;
``qsd_from_gf`` reads off Taylor coefficients of the closed-form generating
function. Their agreement is checked in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, DomainError, InvalidThetaError
from .model import ModelParams
from .solver import DEFAULT_TOL, solve_theta_star_series

DEFAULT_EPS_TAIL = 1e-14
MAX_STATES = 100_000
MAX_GF_TERMS = 10_000
_GF_REL_FLOOR = 1e-14
_PL_MIN_N = 1024
_GF_MAX_ROUNDING = 1e-10
_PL_SLOPE_TOL = 0.05
_PL_AGREEMENT = 1e-12


@dataclass(frozen=True)
class QsdVector:
    """Truncated distribution ``probs[k-1] = nu(k)`` for k = 1..truncation_N."""

    theta: float
    probs: np.ndarray
    truncation_N: int
    tail_mass_estimate: float

    @property
    def total_mass(self) -> float:
        return math.fsum(self.probs) + self.tail_mass_estimate

    def dense(self, n: int) -> np.ndarray:
        """First ``n`` entries, zero-padded past the truncation point."""
        out = np.zeros(n)
        m = min(n, len(self.probs))
        out[:m] = self.probs[:m]
        return out


@dataclass(frozen=True)
class GeneratingFunctionPoint:
    s: float
    value: float
    abs_error_estimate: float = 0.0


def _geometric_tail(last, prev):
    if last == 0.0:
        return 0.0
    r = last / prev if prev > 0 else math.inf
    if not r < 1.0:
        return math.inf
    return last * r / (1.0 - r)


def _check_theta(params, theta):
    if not (0 < theta < params.q):
        raise DomainError(f"theta={theta!r} outside (0, q) for q={params.q!r}")


def _power_law_tail(probs, alpha):
    """Tail mass past N when ``nu(j) ~ j^-(1+alpha) (C + c1/j + c2/j^2)``, else None.

    For theta below theta* the generating function has a ``(1-s)^alpha``
    singularity at s = 1, which fixes this exponent. The three coefficients
    are fitted at N/4, N/2 and N and the tail is summed with Hurwitz zeta.
    """
    n = len(probs)
    if n < _PL_MIN_N or probs[-1] <= 0 or probs[n // 2 - 1] <= 0:
        return None
    slope = math.log(probs[n // 2 - 1] / probs[-1]) / math.log(n / (n // 2))
    if abs(slope - (1 + alpha)) > _PL_SLOPE_TOL * (1 + alpha):
        return None
    j = np.array([n // 4, n // 2, n], dtype=float)
    y = probs[j.astype(int) - 1] * j ** (1 + alpha)
    c0, c1, c2 = np.linalg.solve(np.vstack([np.ones(3), 1 / j, 1 / j**2]).T, y)
    return float(c0 * special.zeta(1 + alpha, n + 1) + c1 * special.zeta(2 + alpha, n + 1) + c2 * special.zeta(3 + alpha, n + 1))


def qsd_recurrence(
    params: ModelParams,
    theta: float,
    eps_tail: float = DEFAULT_EPS_TAIL,
    max_states: int = MAX_STATES,
) -> QsdVector:
    """Forward balance recurrence started from ``nu(1) = theta/q``.

    Row 1 has no inflow from the absorbing state, so
    ``nu(2) = nu(1) (a + q - theta) / (2q)`` and, for j >= 2,
    ``nu(j+1) = ((a + j q - theta) nu(j) - a nu(j-1)) / ((j+1) q)``.

    At theta* the entries decay faster than geometrically and the recurrence
    stops at the first N with ``nu(N) < eps_tail`` and ``nu(N) < nu(N-1)``,
    with a single-ratio geometric tail. Below theta* the entries decay like
    ``N^-(1 + theta/q)``; the tail is then modelled by that power law and the
    run stops once two successive doubling checkpoints give the same total
    mass to ``_PL_AGREEMENT``. A tail that has stopped decreasing at
    ``max_states`` raises ConvergenceError. A negative entry means
    theta > theta* and raises InvalidThetaError.
    """
    _check_theta(params, theta)
    a, q = params.a, params.q
    alpha = theta / q
    probs = [alpha]
    prev, cur = 0.0, probs[0]
    checkpoint, last_total = _PL_MIN_N, None
    pl_tail = None
    for j in range(1, max_states):
        nxt = ((a + j * q - theta) * cur - a * prev) / ((j + 1) * q)
        if nxt < 0:
            raise InvalidThetaError(theta, j + 1, nxt)
        probs.append(nxt)
        prev, cur = cur, nxt
        if cur < eps_tail and cur < prev:
            break
        if j + 1 == checkpoint:
            checkpoint *= 2
            pl_tail = _power_law_tail(np.array(probs), alpha)
            if pl_tail is None:
                last_total = None
                continue
            total = math.fsum(probs) + pl_tail
            if last_total is not None and abs(total - last_total) <= _PL_AGREEMENT:
                return QsdVector(theta, np.array(probs), len(probs), pl_tail)
            last_total = total
    else:
        if not cur < prev:
            raise ConvergenceError(f"nu(N) not decreasing at N={max_states} for theta={theta!r}", partial=np.array(probs))
    arr = np.array(probs)
    tail = _power_law_tail(arr, alpha)
    if tail is None:
        tail = _geometric_tail(arr[-1], arr[-2]) if len(arr) > 1 else 0.0
    return QsdVector(theta, arr, len(arr), tail)


def _trunc_mul(x, y, n):
    return np.convolve(x, y)[:n]


def gf_coefficients(params: ModelParams, theta: float, n: int) -> np.ndarray:
    """Coefficients 0..n-1 of the generating function at s = 0.

    The three factors are expanded separately: the binomial series of
    ``(1-s)^alpha``, the exponential series of ``e^(b s)``, and the term-wise
    antiderivative of the Cauchy product ``(1-x)^(-alpha) e^(-b x)``, where
    ``alpha = theta/q`` and ``b = a/q``.
    """
    alpha, b = theta / params.q, params.ratio
    k = np.arange(1, n)
    binom = np.ones(n)
    binom[1:] = np.cumprod((k - 1 - alpha) / k)  # (1 - s)^alpha
    inv_binom = np.ones(n)
    inv_binom[1:] = np.cumprod((k - 1 + alpha) / k)  # (1 - x)^(-alpha)
    expo = np.ones(n)
    expo[1:] = np.cumprod(b / k)  # e^(b s)
    neg_expo = expo * (-1.0) ** np.arange(n)  # e^(-b x)
    integrand = _trunc_mul(inv_binom, neg_expo, n)
    bracket = np.empty(n)
    bracket[0] = -1.0
    bracket[1:] = b * integrand[:-1] / k  # -1 + b * int_0^s
    coeffs = _trunc_mul(_trunc_mul(binom, expo, n), bracket, n)
    coeffs[0] += 1.0
    return coeffs


def _gf_rounding_bound(params: ModelParams, theta: float, n: int) -> np.ndarray:
    """Per-coefficient rounding bound: the same convolutions run on absolute values."""
    alpha, b = theta / params.q, params.ratio
    k = np.arange(1, n)
    binom = np.ones(n)
    binom[1:] = np.cumprod(np.abs(k - 1 - alpha) / k)
    inv_binom = np.ones(n)
    inv_binom[1:] = np.cumprod((k - 1 + alpha) / k)
    expo = np.ones(n)
    expo[1:] = np.cumprod(b / k)
    bracket = np.empty(n)
    bracket[0] = 1.0
    bracket[1:] = b * _trunc_mul(inv_binom, expo, n)[:-1] / k
    return 4 * n * 2.0**-53 * (_trunc_mul(_trunc_mul(binom, expo, n), bracket, n) + 1.0)


def qsd_from_gf(params: ModelParams, theta: float, N: int) -> QsdVector:
    """nu(1..N) as Taylor coefficients of the closed-form generating function.

    The factor series alternate, so cancellation grows with a/q. Raises
    ConvergenceError when the worst-case rounding bound exceeds
    ``_GF_MAX_ROUNDING``.
    """
    _check_theta(params, theta)
    if not 1 <= N <= MAX_GF_TERMS:
        raise DomainError(f"N must be in [1, {MAX_GF_TERMS}], got {N!r}")
    probs = gf_coefficients(params, theta, N + 1)[1:]
    bound = float(_gf_rounding_bound(params, theta, N + 1)[1:].max())
    if bound > _GF_MAX_ROUNDING:
        raise ConvergenceError(
            f"generating-function coefficients lose all accuracy at a/q={params.ratio:g}: rounding bound {bound:.3g}",
            partial=probs,
        )
    tail = _geometric_tail(probs[-1], probs[-2]) if N > 1 else math.inf
    return QsdVector(theta, probs, N, tail)


def generating_function(
    params: ModelParams, theta: float, s: float, tol: float = DEFAULT_TOL
) -> GeneratingFunctionPoint:
    """``g(s) = 1 + (1-s)^alpha e^(b s) (-1 + b int_0^s (1-x)^-alpha e^(-b x) dx)``.

    The inner integral is taken in ``u = (1-x)^(1-alpha)``, which removes the
    ``(1-x)^-alpha`` singularity that matters as s approaches 1. theta above
    theta* is accepted; the result may then exceed one.
    """
    _check_theta(params, theta)
    if not 0 <= s < 1:
        raise DomainError(f"s={s!r} outside [0, 1)")
    if s == 0:
        return GeneratingFunctionPoint(0.0, 0.0, 0.0)
    alpha, b = theta / params.q, params.ratio
    p = 1.0 / (1.0 - alpha)
    lo = (1.0 - s) ** (1.0 - alpha)
    outer = (1.0 - s) ** alpha * math.exp(b * s)
    pref = b * p * outer
    # The bracket cancels to O(1/outer), and outer grows like e^(a/q); the
    # relative floor keeps the quadrature within what double precision resolves.
    inner, err, info, *rest = integrate.quad(
        lambda u: math.exp(-b * (1.0 - u**p)), lo, 1.0, epsabs=tol / pref, epsrel=_GF_REL_FLOOR, limit=500, full_output=1
    )
    if err > max(tol / pref, 10 * _GF_REL_FLOOR * abs(inner)):
        raise ConvergenceError(f"generating function at s={s!r}: quadrature error {err * pref:.3g} > {tol:.3g}")
    value = 1.0 + outer * (-1.0 + b * p * inner)
    rounding = 2.0**-52 * (1.0 + outer + pref * abs(inner))
    return GeneratingFunctionPoint(s, value, pref * err + rounding)


def balance_residual(params: ModelParams, theta: float, probs) -> np.ndarray:
    """``(nu Q + theta nu)(j)`` for j = 1..N-1, the rows fully determined by ``probs``."""
    nu = np.concatenate([[0.0], np.asarray(probs, dtype=float)])  # nu[0] = 0: absorbing
    a, q = params.a, params.q
    j = np.arange(1, len(nu) - 1)
    inflow = a * nu[j - 1] + (j + 1) * q * nu[j + 1]
    return inflow - (a + j * q) * nu[j] + theta * nu[j]


def yaglom_reference(params: ModelParams, tol: float = DEFAULT_TOL) -> QsdVector:
    """Minimal QSD nu*: the recurrence run at theta*."""
    theta = solve_theta_star_series(params, tol).theta
    return qsd_recurrence(params, theta)
