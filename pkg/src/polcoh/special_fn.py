"""Laguerre polynomials, factorial ratios and truncated series.

Everything here is evaluated in double precision.  Factorial ratios are kept
in log space so that series with ``n + l`` in the hundreds never overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

LAGUERRE_MAX_DEGREE = 400
SERIES_MAX_TERMS = 2000
SERIES_PATIENCE = 20
SERIES_REL_TOL = 1e-16


@dataclass(frozen=True)
class LaguerreOrder:
    """Degree ``n`` and superscript order ``l`` of ``L^l_n``."""

    n: int
    l: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"Laguerre degree must be a non-negative integer, got {self.n}")
        if int(self.l) != self.l or self.l < 0:
            raise DomainError(f"Laguerre order must be a non-negative integer, got {self.l}")


def _laguerre_upward(n, l, x):
    # (k+1) L_{k+1} = (2k+l+1-x) L_k - (k+l) L_{k-1}
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for k in range(n):
        prev, cur = cur, ((2 * k + l + 1 - x) * cur - (k + l) * prev) / (k + 1)
    return cur


def laguerre(order: LaguerreOrder, x):
    """Generalized Laguerre polynomial ``L^l_n(x)`` by upward recurrence in n.

    Parameters
    ----------
    order : LaguerreOrder
        Degree and superscript order.
    x : float or array_like
        Evaluation points, all ``>= 0``.

    Returns
    -------
    float or numpy.ndarray
        Same shape as ``x``.
    """
    if order.n > LAGUERRE_MAX_DEGREE:
        raise DomainError(f"degree {order.n} exceeds supported range {LAGUERRE_MAX_DEGREE}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or not np.all(np.isfinite(xa)):
        raise DomainError("Laguerre argument must be finite and non-negative")
    out = _laguerre_upward(order.n, order.l, xa)
    return float(out) if out.ndim == 0 else out


def laguerre_functions(n_max: int, l, r):
    """Normalized radial functions for degrees ``0..n_max``.

    Returns ``sqrt(n!/(n+l)!) * r**l * exp(-r**2/2) * L^l_n(r**2)`` stacked
    along a new leading axis of length ``n_max + 1``.  ``l`` and ``r``
    broadcast against each other.  The recurrence runs on the normalized
    values directly, so nothing overflows; every entry is bounded by 1 in
    magnitude.
    """
    l = np.asarray(l, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    l, r = np.broadcast_arrays(l, r)
    x = r * r
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.where(r > 0, np.log(np.where(r > 0, r, 1.0)), -np.inf)
        log0 = np.where(l > 0, l * logr, 0.0) - 0.5 * x - 0.5 * gammaln(l + 1)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = np.exp(log0)
    prev = np.zeros_like(x)
    for k in range(n_max):
        nxt = ((2 * k + l + 1 - x) * out[k] - np.sqrt(k * (k + l)) * prev) / np.sqrt((k + 1) * (k + l + 1))
        prev = out[k]
        out[k + 1] = nxt
    return out


def log_factorial_ratio(n: int, l: int) -> float:
    """Return ``ln(n! / (n+l)!)`` without forming either factorial."""
    if n < 0 or l < 0:
        raise DomainError("factorial arguments must be non-negative")
    if n + l > 10**6:
        raise DomainError(f"n + l = {n + l} exceeds the supported range 10**6")
    if l == 0:
        return 0.0
    if l <= 64:
        return -math.fsum(math.log(k) for k in range(n + 1, n + l + 1))
    return math.lgamma(n + 1) - math.lgamma(n + l + 1)


def converged_sum(term: Callable[[int], complex], n_max: int = SERIES_MAX_TERMS,
                  rel_tol: float = SERIES_REL_TOL, patience: int = SERIES_PATIENCE):
    """Sum ``term(0) + term(1) + ...`` until the tail is negligible.

    Stops once ``patience`` consecutive terms are each below
    ``rel_tol * |partial sum|``, or after ``n_max`` terms.

    Returns
    -------
    (value, n_terms)
    """
    re_parts, im_parts = [], []
    total = 0.0
    quiet = 0
    n = 0
    while n <= n_max:
        t = complex(term(n))
        re_parts.append(t.real)
        im_parts.append(t.imag)
        total += t
        if abs(t) < rel_tol * abs(total):
            quiet += 1
            if quiet >= patience:
                break
        else:
            quiet = 0
        n += 1
    value = complex(math.fsum(re_parts), math.fsum(im_parts))
    return value, len(re_parts)


def factorial_ratio_series(x: float, l: int, n_max: int = SERIES_MAX_TERMS) -> float:
    """Truncated ``sum_n (n+l)!/n! * x**n`` for ``0 <= x < 1``."""
    if not 0 <= x < 1:
        raise DomainError("series requires 0 <= x < 1")
    if x == 0:
        return float(math.factorial(l))
    lx = math.log(x)
    value, _ = converged_sum(lambda n: math.exp(n * lx - log_factorial_ratio(n, l)), n_max=n_max)
    return value.real


def generating_function_check(a: complex, l: int, x: float, n_max: int | None = None):
    """Both sides of the Laguerre generating-function identity.

    ``lhs = sum_{n<=n_max} a**n L^l_n(x)`` and
    ``rhs = (1-a)**(-l-1) * exp(x*a/(a-1))``.  With ``n_max=None`` the sum is
    truncated adaptively by :func:`converged_sum`.
    """
    a = complex(a)
    if abs(a) > 0.95:
        raise DomainError("generating-function check supports |a| <= 0.95")
    if x < 0:
        raise DomainError("x must be non-negative")
    rhs = (1 - a) ** (-l - 1) * np.exp(x * a / (a - 1))
    limit = SERIES_MAX_TERMS if n_max is None else n_max
    # one recurrence pass; terms are consumed in order
    values = []
    prev, cur = 0.0, 1.0
    for k in range(limit + 1):
        values.append(cur)
        prev, cur = cur, ((2 * k + l + 1 - x) * cur - (k + l) * prev) / (k + 1)
    if n_max is None:
        lhs, _ = converged_sum(lambda n: a**n * values[n], n_max=limit)
    else:
        terms = [a**n * values[n] for n in range(n_max + 1)]
        lhs = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    return complex(lhs), complex(rhs)
