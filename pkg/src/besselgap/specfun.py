"""Special functions: Bessel J, Gamma, regularized incomplete gamma, and
orthonormal Laguerre polynomials.

All functions are pure and deterministic.  Truncation of the Bessel series
and of the incomplete-gamma series/continued fraction is controlled by a
SpecFunConfig; the module-level DEFAULT_CONFIG is used when none is given.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import core


@dataclass(frozen=True)
class SpecFunConfig:
    """Truncation control for series and continued-fraction evaluation.

    series_tol: relative tolerance at which iteration stops (> 0).
    max_terms: hard cap on the number of iterations (>= 1).
    """

    series_tol: float = 1e-11
    max_terms: int = 200

    def __post_init__(self):
        if not self.series_tol > 0.0:
            raise ValueError("series_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")


DEFAULT_CONFIG = SpecFunConfig()


def _check_bessel_domain(alpha, x):
    if alpha <= -1.0:
        raise ValueError(f"Bessel order must exceed -1, got {alpha}")
    if np.any(np.asarray(x) < 0.0):
        raise ValueError("Bessel argument must be nonnegative")


def bessel_j(alpha, x, config=DEFAULT_CONFIG):
    """Bessel function of the first kind J_alpha(x), x >= 0, alpha > -1.

    Ascending series below argument 12, Hankel asymptotics plus
    forward/backward recurrence above; relative accuracy is
    10 * config.series_tol or better on x in [0, 1e4].
    Accepts scalars or arrays in x.
    """
    _check_bessel_domain(alpha, x)
    return core.bessel_j_pair(alpha, x, config.series_tol, config.max_terms)[0]


def bessel_j_prime(alpha, x, config=DEFAULT_CONFIG):
    """Derivative J_alpha'(x) from J_alpha and J_{alpha+1}; same accuracy contract.

    J_alpha'(x) = (alpha/x) J_alpha(x) - J_{alpha+1}(x), which equals the
    symmetric difference (J_{alpha-1} - J_{alpha+1})/2 wherever both apply
    but stays inside the order domain alpha > -1.
    """
    _check_bessel_domain(alpha, x)
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    j, j1 = core.bessel_j_pair(alpha, x_arr, config.series_tol, config.max_terms)
    out = np.empty_like(x_arr)
    pos = x_arr > 0.0
    out[pos] = (alpha / x_arr[pos]) * j[pos] - j1[pos]
    if np.any(~pos):
        # limits at 0: series J_a(x) ~ (x/2)^a / Gamma(a+1)
        if alpha == 1.0:
            v0 = 0.5
        elif alpha == 0.0 or alpha > 1.0:
            v0 = 0.0
        elif alpha > 0.0:
            v0 = np.inf
        else:
            v0 = -np.inf
        out[~pos] = v0
    return float(out[0]) if scalar else out


def gamma_fn(z):
    """Gamma(z) for z > 0."""
    if z <= 0.0:
        raise ValueError(f"gamma_fn requires z > 0, got {z}")
    return math.gamma(z)


def ln_gamma(z):
    """log Gamma(z) for z > 0."""
    if z <= 0.0:
        raise ValueError(f"ln_gamma requires z > 0, got {z}")
    return math.lgamma(z)


def reg_lower_gamma(a, x, config=DEFAULT_CONFIG):
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x)/Gamma(a).

    Series expansion for x < a + 1, Lentz continued fraction for the upper
    tail otherwise; monotone in x with P(a, 0) = 0 and P(a, inf) = 1.
    """
    if a <= 0.0:
        raise ValueError(f"reg_lower_gamma requires a > 0, got {a}")
    if x < 0.0:
        raise ValueError(f"reg_lower_gamma requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    lpre = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        # P = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
        term = 1.0 / a
        total = term
        ap = a
        for _ in range(config.max_terms):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * config.series_tol:
                break
        if lpre < -700.0:
            return 0.0
        return min(1.0, math.exp(lpre) * total)
    # modified Lentz for the continued fraction of Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, config.max_terms + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < config.series_tol:
            break
    q = math.exp(lpre) * h if lpre > -700 else 0.0
    return 1.0 - q


def laguerre_orthonormal(n, alpha, x, config=DEFAULT_CONFIG):
    """Values p_0(x), ..., p_{n-1}(x) of the orthonormal Laguerre polynomials.

    Orthonormal with respect to x^alpha e^-x on (0, inf); forward three-term
    recurrence x p_j = sg_{j+1} p_{j+1} + (2j + alpha + 1) p_j + sg_j p_{j-1}
    with sg_j = sqrt(j (j + alpha)).  Returns shape (n,) for scalar x and
    (n, len(x)) for array x.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if alpha <= -1.0:
        raise ValueError(f"weight exponent must exceed -1, got {alpha}")
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    out = np.empty((n, x_arr.size))
    p_prev = np.zeros_like(x_arr)
    p_cur = np.full_like(x_arr, math.exp(-0.5 * math.lgamma(alpha + 1.0)))
    out[0] = p_cur
    for j in range(1, n):
        sg_j = math.sqrt((j - 1) * (j - 1 + alpha)) if j > 1 else 0.0
        sg_j1 = math.sqrt(j * (j + alpha))
        p_next = ((x_arr - (2 * (j - 1) + alpha + 1)) * p_cur - sg_j * p_prev) / sg_j1
        out[j] = p_next
        p_prev, p_cur = p_cur, p_next
    return out[:, 0] if scalar else out
