"""Independent high-precision oracles used to freeze expected values in the tests.

Run as a script to regenerate the numbers pinned in the test modules. Nothing here
imports the package under test.
"""

import mpmath as mp

mp.mp.dps = 60


def bargamma_exact(s, x):
    """Direct summation of the series at 60 digits, summed until terms underflow 1e-70."""
    s, x = mp.mpf(s), mp.mpf(x)
    total = mp.mpf(0)
    term = mp.mpf(1)  # (-x)^k / k!
    k = 0
    while True:
        total += term / (k + s)
        k += 1
        term *= -x / k
        if k > 2 * abs(x) + 10 and abs(term) < mp.mpf(10) ** -70:
            return total


def theta_star_bisect(a, q, tol=mp.mpf(10) ** -30):
    """Bisection on the sign of the series root characterization."""
    a, q = mp.mpf(a), mp.mpf(q)
    lo, hi = q * mp.mpf(10) ** -12, q * (1 - mp.mpf(10) ** -12)
    f = lambda th: bargamma_exact(-th / q, -a / q)
    flo = f(lo)
    assert flo < 0 < f(hi)
    while hi - lo > tol * q:
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def big_f_hyp(s, x):
    """F(s, x) through the confluent hypergeometric closed form -x/(s+1) 1F1(1; s+2; x)."""
    s, x = mp.mpf(s), mp.mpf(x)
    return -x / (s + 1) * mp.hyp1f1(1, s + 2, x)


def gamma_lower_scaled_ref(s, x):
    s, x = mp.mpf(s), mp.mpf(x)
    return mp.gammainc(s, 0, x) / x**s


def integral_map_ref(a, q, theta):
    """The map equals F(-theta/q, -a/q); use the 1F1 closed form rather than quadrature."""
    a, q, theta = mp.mpf(a), mp.mpf(q), mp.mpf(theta)
    return big_f_hyp(-theta / q, -a / q)


def mgf_ref(a, q, theta):
    a, q, theta = mp.mpf(a), mp.mpf(q), mp.mpf(theta)
    return (a - theta) / a - 1 / (a / q * mp.exp(-a / q) * bargamma_exact(-theta / q, -a / q))


def qsd_gf_coefficients(a, q, theta, n):
    """Taylor coefficients of the generating function via mpmath.taylor at 60 digits."""
    a, q, theta = mp.mpf(a), mp.mpf(q), mp.mpf(theta)
    al, b = theta / q, a / q

    def g(s):
        inner = b * mp.quad(lambda y: (1 - y) ** (-al) * mp.exp(-b * y), [0, s])
        return 1 + (1 - s) ** al * mp.exp(b * s) * (-1 + inner)

    return mp.taylor(g, 0, n)


if __name__ == "__main__":
    for a in (1, 5, 0.01, 0.1, 0.5, 2, 10, 20):
        print(f"theta*({a},1) =", mp.nstr(theta_star_bisect(a, 1), 25))
    print("bargamma(-0.5,-1) =", mp.nstr(bargamma_exact(-0.5, -1), 25))
    print("gamma_lower_scaled(0.5,2) =", mp.nstr(gamma_lower_scaled_ref(0.5, 2), 25))
    print("F(-0.45,-1) =", mp.nstr(big_f_hyp(-0.45, -1), 25))
    print("series(a=1,q=1,0.4) =", mp.nstr(bargamma_exact(-0.4, -1), 25))
    print("series(a=1,q=1,0.6) =", mp.nstr(bargamma_exact(-0.6, -1), 25))
    print("map(1,1,0.5) =", mp.nstr(integral_map_ref(1, 1, 0.5), 25))
    ts = theta_star_bisect(1, 1)
    print("mgf(1,1,0.99 th*) =", mp.nstr(mgf_ref(1, 1, 0.99 * ts), 25))
    print("mgf(1,1,0.5 th*) =", mp.nstr(mgf_ref(1, 1, 0.5 * ts), 25))
