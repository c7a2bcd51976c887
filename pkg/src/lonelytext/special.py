"""Special functions: digamma, regularized incomplete beta, Student-t tails."""

import math

import numba
import numpy as np

# Bernoulli-number coefficients B_2k / (2k) of the digamma asymptotic series.
_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_SHIFT_TO = 10.0


def digamma(x):
    """Digamma function for positive real arguments (array or scalar).

    Arguments below 10 are shifted upward with psi(x) = psi(x + 1) - 1/x,
    then the asymptotic expansion in 1/x^2 is summed.
    """
    x = np.array(x, dtype=np.float64, copy=True)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.zeros_like(x)
    bad = ~(x > 0)
    x[bad] = 1.0
    while True:
        small = x < _SHIFT_TO
        if not small.any():
            break
        out[small] -= 1.0 / x[small]
        x[small] += 1.0
    inv2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    for c in reversed(_ASYMPTOTIC):
        series = (series + c) * inv2
    out += np.log(x) - 0.5 / x - series
    out[bad] = np.nan
    return out[0] if scalar else out


@numba.njit(cache=True, nogil=True)
def digamma_scalar(x):
    """Scalar digamma for compiled kernels; same method as :func:`digamma`."""
    if not x > 0.0:
        return np.nan
    out = 0.0
    while x < _SHIFT_TO:
        out -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    for k in range(len(_ASYMPTOTIC) - 1, -1, -1):
        series = (series + _ASYMPTOTIC[k]) * inv2
    return out + math.log(x) - 0.5 / x - series


def _beta_continued_fraction(a, b, x, max_iter=500, eps=1e-16):
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    return h


def betainc(a, b, x):
    """Regularized incomplete beta function I_x(a, b) for a, b > 0."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc requires a > 0 and b > 0")
    if not 0.0 <= x <= 1.0:
        raise ValueError("betainc requires 0 <= x <= 1")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # The continued fraction converges fast only on this side of the mean.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def t_two_sided_pvalue(t, df):
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    t2 = t * t
    return betainc(0.5 * df, 0.5, df / (df + t2))


def t_cdf(t, df):
    half = 0.5 * t_two_sided_pvalue(t, df)
    return 1.0 - half if t > 0 else half
