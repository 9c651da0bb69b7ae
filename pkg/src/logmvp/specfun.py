"""Modified Bessel I0, the coefficient a(t) and unit-ball volumes.

``a(t) = 2 (I0(t) - 1) / t**2`` is the factor relating the log-weighted disc
mean of a panharmonic function to its centre value.  Everything here works on
scalars or numpy arrays; scalar in, Python float out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: I0 switches from the power series to the large-argument expansion here.
I0_ASYMPTOTIC_THRESHOLD = 15.0
#: a(t) uses its own even series below this argument.
A_SMALL_T_THRESHOLD = 1e-2
#: Series are truncated once the next term drops below this fraction of the sum.
SERIES_RTOL = 1e-18

_MAX_TERMS = 500


@dataclass(frozen=True)
class CoeffEval:
    t: float
    value: float
    method: str  # "series", "asymptotic" or "small_t_series"


def _as_checked_array(t, name="t"):
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {t!r}")
    return arr


def _i0_series(t, skip_constant=False):
    """Sum (t/2)^(2k) / (k!)^2 over k >= 0 (or k >= 1), elementwise."""
    q = 0.25 * t * t
    term = np.ones_like(t)
    total = np.zeros_like(t) if skip_constant else np.ones_like(t)
    active = np.ones(t.shape, dtype=bool)
    for k in range(1, _MAX_TERMS):
        term = term * q / (k * k)
        total = np.where(active, total + term, total)
        active &= term >= SERIES_RTOL * total
        if not active.any():
            break
    return total


def _i0_asymptotic(t):
    """e^t / sqrt(2 pi t) * sum_k ((2k-1)!!)^2 / (k! (8t)^k), optimally truncated."""
    total = np.ones_like(t)
    term = np.ones_like(t)
    active = np.ones(t.shape, dtype=bool)
    for k in range(1, _MAX_TERMS):
        nxt = term * (2 * k - 1) ** 2 / (8.0 * k * t)
        # stop at the smallest term (divergent series) or once negligible
        active &= (nxt < term) & (nxt >= SERIES_RTOL * total)
        if not active.any():
            break
        term = np.where(active, nxt, term)
        total = np.where(active, total + nxt, total)
    return np.exp(t) / np.sqrt(2.0 * np.pi * t) * total


def _i0(t):
    t = np.abs(t)
    out = np.empty_like(t)
    small = t < I0_ASYMPTOTIC_THRESHOLD
    if small.any():
        out[small] = _i0_series(t[small])
    if (~small).any():
        out[~small] = _i0_asymptotic(t[~small])
    return out


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return float(value.reshape(()))
    return value


def bessel_i0(t):
    """Modified Bessel function of the first kind, order zero.

    Power series below ``I0_ASYMPTOTIC_THRESHOLD`` and the Hankel-type
    asymptotic expansion above it.  ``I0(-t) = I0(t)``.

    >>> bessel_i0(0.0)
    1.0
    """
    arr = _as_checked_array(t)
    flat = np.atleast_1d(arr).astype(float)
    return _scalar_or_array(_i0(flat).reshape(arr.shape), t)


def bessel_i0m1(t):
    """I0(t) - 1 without cancellation for small |t|."""
    arr = _as_checked_array(t)
    flat = np.abs(np.atleast_1d(arr).astype(float))
    out = np.empty_like(flat)
    small = flat < I0_ASYMPTOTIC_THRESHOLD
    if small.any():
        out[small] = _i0_series(flat[small], skip_constant=True)
    if (~small).any():
        out[~small] = _i0_asymptotic(flat[~small]) - 1.0
    return _scalar_or_array(out.reshape(arr.shape), t)


def i0_method(t: float) -> str:
    return "series" if abs(t) < I0_ASYMPTOTIC_THRESHOLD else "asymptotic"


def _a_small_series(t):
    # a(t) = sum_{k>=1} t^(2k-2) / (2^(2k-1) (k!)^2) = 1/2 + t^2/32 + t^4/1152 + ...
    q = 0.25 * t * t
    term = np.full_like(t, 0.5)
    total = term.copy()
    active = np.ones(t.shape, dtype=bool)
    for k in range(1, _MAX_TERMS):
        term = term * q / ((k + 1) * (k + 1))
        total = np.where(active, total + term, total)
        active &= term >= SERIES_RTOL * total
        if not active.any():
            break
    return total


def _a_direct(t):
    return 2.0 * bessel_i0m1(t) / (t * t)


def weight_coeff_a(t):
    """The coefficient ``a(t) = 2 (I0(t) - 1) / t**2`` with ``a(0) = 1/2``.

    Below ``A_SMALL_T_THRESHOLD`` the even Taylor series is summed directly;
    ``a(0)`` is exactly 0.5.  Raises :class:`DomainError` for negative or
    non-finite ``t``.
    """
    arr = _as_checked_array(t)
    if np.any(arr < 0):
        raise DomainError(f"a(t) is defined for t >= 0, got {t!r}")
    flat = np.atleast_1d(arr).astype(float)
    out = np.empty_like(flat)
    small = flat < A_SMALL_T_THRESHOLD
    if small.any():
        out[small] = _a_small_series(flat[small])
    if (~small).any():
        out[~small] = _a_direct(flat[~small])
    return _scalar_or_array(out.reshape(arr.shape), t)


def coeff_a_eval(t: float) -> CoeffEval:
    value = weight_coeff_a(t)
    method = "small_t_series" if t < A_SMALL_T_THRESHOLD else i0_method(t)
    return CoeffEval(t=float(t), value=value, method=method)


def _gamma_half_integer(x: float) -> float:
    """Gamma at a positive integer or half-integer via Gamma(x+1) = x Gamma(x)."""
    twice = round(2 * x)
    if twice < 1 or abs(2 * x - twice) > 0:
        raise DomainError(f"expected a positive (half-)integer, got {x!r}")
    if twice % 2 == 0:
        g, y = 1.0, 1.0
    else:
        g, y = math.sqrt(math.pi), 0.5
    while y < x:
        g *= y
        y += 1.0
    return g


def ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1)."""
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be an integer >= 1, got {d!r}")
    d = int(d)
    return math.pi ** (d / 2) / _gamma_half_integer(d / 2 + 1)


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d, ``d * ball_volume(d)``."""
    return d * ball_volume(d)
