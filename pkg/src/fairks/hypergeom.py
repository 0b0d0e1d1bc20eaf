"""Real Gauss hypergeometric function 2F1(a, b; c; z) for 0 <= z <= 1.

Strategy: the defining power series for z <= 0.9, and the linear
transformation to 1 - z above that. When c - a - b is (numerically) an
integer the transformation degenerates and the logarithmic forms are used.
Gamma and digamma come from scipy.special; the summation is ours.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import digamma, gamma, rgamma

SERIES_TOL = 1e-16
MAX_TERMS = 20000
DIRECT_LIMIT = 0.9
# distance from an integer below which c - a - b is snapped to it
INTEGER_SNAP = 1e-8


class HypergeometricDomainError(ValueError):
    """Raised for parameter/argument combinations where the series diverges."""


def _is_nonpos_int(x: float) -> bool:
    return x <= 0 and abs(x - round(x)) < 1e-14


def power_series(a: float, b: float, c: float, z, tol: float = SERIES_TOL) -> np.ndarray:
    """Partial sums of sum (a)_n (b)_n / (c)_n z^n / n! until the increment is below tol."""
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    for n in range(MAX_TERMS):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
        total = total + term
        if np.all(np.abs(term) <= tol * np.abs(total)):
            return total
    raise HypergeometricDomainError(f"series did not converge in {MAX_TERMS} terms (a={a}, b={b}, c={c})")


def _connection(a, b, c, y):
    d = c - a - b
    g1 = gamma(c) * gamma(d) * rgamma(c - a) * rgamma(c - b)
    g2 = gamma(c) * gamma(-d) * rgamma(a) * rgamma(b)
    out = g1 * power_series(a, b, 1.0 - d, y)
    if g2 != 0.0:
        out = out + g2 * y**d * power_series(c - a, c - b, 1.0 + d, y)
    return out


def _log_series(p, q, m, y, shift_p, shift_q, log_y, tol=SERIES_TOL):
    """sum_n (p)_n (q)_n / (n! (n+m)!) y^n [log y - psi(n+1) - psi(n+m+1) + psi(shift_p+n) + psi(shift_q+n)]."""
    coef = np.full_like(y, 1.0 / math.factorial(m))
    total = np.zeros_like(y)
    for n in range(MAX_TERMS):
        bracket = log_y - digamma(n + 1.0) - digamma(n + m + 1.0) + digamma(shift_p + n) + digamma(shift_q + n)
        term = coef * bracket
        total = total + term
        if n > 2 and np.all(np.abs(term) <= tol * np.maximum(np.abs(total), 1e-300)):
            return total
        coef = coef * ((p + n) * (q + n) / ((n + 1.0) * (n + m + 1.0))) * y
    raise HypergeometricDomainError("logarithmic series did not converge")


def _integer_case(a, b, m, y):
    """c = a + b + m with integer m (either sign)."""
    log_y = np.log(y)
    if m == 0:
        s = _log_series(a, b, 0, y, a, b, log_y)
        return -gamma(a + b) * rgamma(a) * rgamma(b) * s
    if m > 0:
        c = a + b + m
        finite = np.zeros_like(y)
        coef = 1.0
        for n in range(m):
            finite = finite + coef * y**n
            if n + 1 < m:
                coef *= (a + n) * (b + n) / ((n + 1.0) * (1.0 - m + n))
        finite = finite * gamma(m) * gamma(c) * rgamma(a + m) * rgamma(b + m)
        s = _log_series(a + m, b + m, m, y, a + m, b + m, log_y)
        return finite - (-y) ** m * gamma(c) * rgamma(a) * rgamma(b) * s
    mm = -m
    c = a + b - mm
    finite = np.zeros_like(y)
    coef = 1.0
    for n in range(mm):
        finite = finite + coef * y**n
        if n + 1 < mm:
            coef *= (a - mm + n) * (b - mm + n) / ((n + 1.0) * (1.0 - mm + n))
    finite = finite * gamma(mm) * gamma(c) * rgamma(a) * rgamma(b) * y ** (-mm)
    s = _log_series(a, b, mm, y, a, b, log_y)
    return finite - (-1.0) ** mm * gamma(c) * rgamma(a - mm) * rgamma(b - mm) * s


def gauss_at_one(a: float, b: float, c: float) -> float:
    d = c - a - b
    if d <= 0:
        raise HypergeometricDomainError(f"2F1 diverges at z=1 when c-a-b={d} <= 0")
    return float(gamma(c) * gamma(d) * rgamma(c - a) * rgamma(c - b))


def gauss_hypergeometric(a: float, b: float, c: float, z, one_minus_z=None):
    """2F1(a, b; c; z) for real parameters and 0 <= z <= 1 (scalar or array).

    ``one_minus_z`` may carry an accurately computed 1 - z for arguments
    close to 1.
    """
    if _is_nonpos_int(c):
        raise HypergeometricDomainError("c must not be a nonpositive integer")
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if one_minus_z is None:
        omz = 1.0 - z
    else:
        omz = np.broadcast_to(np.asarray(one_minus_z, dtype=float), z.shape)
    if np.any(z < 0) or np.any(z > 1):
        raise HypergeometricDomainError("z must lie in [0, 1]")
    out = np.empty_like(z)
    terminating = _is_nonpos_int(a) or _is_nonpos_int(b)
    direct = (z <= DIRECT_LIMIT) | terminating
    if np.any(direct):
        out[direct] = power_series(a, b, c, z[direct])
    at_one = (omz == 0.0) & ~direct
    if np.any(at_one):
        out[at_one] = gauss_at_one(a, b, c)
    near = ~direct & ~at_one
    if np.any(near):
        y = omz[near]
        d = c - a - b
        m = round(d)
        if abs(d - m) < INTEGER_SNAP:
            out[near] = _integer_case(a, b, int(m), y)
        else:
            out[near] = _connection(a, b, c, y)
    return float(out[0]) if scalar else out
