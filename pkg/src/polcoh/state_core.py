"""Coherent-state parameters, closed-form wavefunction and overlaps.

A state is labelled by complex ``alpha`` (``|alpha| < 1``), complex ``beta``
and a chirality ``+1`` (right-handed, angular factor ``exp(+i l phi)``) or
``-1`` (left-handed).  The normalization constant is taken real and positive.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import ChiralityMismatchError, InvalidParameterError

RIGHT = +1
LEFT = -1


@dataclass(frozen=True)
class CoherentParams:
    """State label ``(alpha, beta, chirality)``."""

    alpha: complex
    beta: complex
    chirality: int = RIGHT

    def __post_init__(self):
        a = complex(self.alpha)
        b = complex(self.beta)
        if not (cmath.isfinite(a) and cmath.isfinite(b)):
            raise InvalidParameterError("alpha and beta must be finite")
        if not abs(a) < 1:
            raise InvalidParameterError(f"|alpha| must be < 1, got {abs(a)!r}")
        if self.chirality not in (RIGHT, LEFT):
            raise InvalidParameterError(f"chirality must be +1 or -1, got {self.chirality!r}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "chirality", int(self.chirality))

    @property
    def is_real(self) -> bool:
        return self.alpha.imag == 0 and self.beta.imag == 0

    def replace(self, **changes) -> "CoherentParams":
        fields = {"alpha": self.alpha, "beta": self.beta, "chirality": self.chirality}
        fields.update(changes)
        return CoherentParams(**fields)


class PolarPoint(NamedTuple):
    r: float
    phi: float


def _check(params: CoherentParams):
    if not isinstance(params, CoherentParams):
        raise InvalidParameterError(f"expected CoherentParams, got {type(params).__name__}")


def log_normalization(params: CoherentParams) -> float:
    s = abs(params.alpha) ** 2
    return 0.5 * math.log1p(-s) - abs(params.beta) ** 2 / (2 * (1 - s))


def normalization(params: CoherentParams) -> float:
    """``N(alpha, beta) = sqrt(1-|alpha|^2) exp(-|beta|^2 / (2(1-|alpha|^2)))``."""
    _check(params)
    return math.exp(log_normalization(params))


def amplitude(params: CoherentParams, r, phi):
    """Closed-form wavefunction at polar coordinates ``(r, phi)``.

    Uses the prefactor ``N / (sqrt(pi) (1 - alpha))``, which is valid for
    complex ``alpha``.  ``r`` and ``phi`` broadcast.
    """
    _check(params)
    a, b, chi = params.alpha, params.beta, params.chirality
    s = abs(a) ** 2
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    one_m = 1 - a
    expo = (-(1 + a) * r * r / (2 * one_m)
            + b * np.exp(1j * chi * phi) * r / one_m
            - abs(b) ** 2 / (2 * (1 - s)))
    pref = math.sqrt(1 - s) / (math.sqrt(math.pi) * one_m)
    out = pref * np.exp(expo)
    return complex(out) if out.ndim == 0 else out


def _log_power(mag, k):
    k = np.asarray(k, dtype=float)
    if mag == 0:
        return np.where(k == 0, 0.0, -np.inf)
    return k * math.log(mag)


def coefficients(params: CoherentParams, n, l):
    """Expansion coefficients on ``|n, chirality*l>`` for broadcast ``n``, ``l``.

    ``N * sqrt((n+l)!/n!) / l! * alpha**n * beta**l`` evaluated through
    logarithms of the magnitudes; phases are carried separately.
    """
    _check(params)
    n = np.asarray(n)
    l = np.asarray(l)
    a, b = params.alpha, params.beta
    with np.errstate(invalid="ignore"):
        logmag = (log_normalization(params)
                  + 0.5 * (gammaln(n + l + 1.0) - gammaln(n + 1.0))
                  - gammaln(l + 1.0)
                  + _log_power(abs(a), n) + _log_power(abs(b), l))
    phase = n * cmath.phase(a) + l * cmath.phase(b)
    return np.exp(logmag) * np.exp(1j * phase)


def coefficient(params: CoherentParams, label) -> complex:
    """Coefficient of a single Fock label (anything with ``n``, ``l``, ``sign``)."""
    if label.sign != params.chirality:
        raise ChiralityMismatchError(
            f"label sign {label.sign:+d} does not match state chirality {params.chirality:+d}")
    return complex(coefficients(params, label.n, label.l))


def _overlap_parts(a: CoherentParams, b: CoherentParams):
    _check(a)
    _check(b)
    sa = abs(a.alpha) ** 2
    sb = abs(b.alpha) ** 2
    denom = 1 - a.alpha * b.alpha.conjugate()
    pref = math.sqrt(1 - sa) * math.sqrt(1 - sb) / denom
    gauss = -abs(a.beta) ** 2 / (2 * (1 - sa)) - abs(b.beta) ** 2 / (2 * (1 - sb))
    return pref, gauss, denom


def overlap_same_chirality(a: CoherentParams, b: CoherentParams) -> complex:
    """``<b|a>`` for two states of equal chirality (closed form)."""
    if a.chirality != b.chirality:
        raise ChiralityMismatchError("states have different chirality")
    if a == b:
        return 1.0 + 0j
    pref, gauss, denom = _overlap_parts(a, b)
    return complex(pref * cmath.exp(gauss + a.beta * b.beta.conjugate() / denom))


def overlap_cross_chirality(a: CoherentParams, b: CoherentParams) -> complex:
    """``<b|a>`` for states of opposite chirality; only ``l = 0`` terms survive."""
    if a.chirality == b.chirality:
        raise ChiralityMismatchError("states have equal chirality")
    pref, gauss, _ = _overlap_parts(a, b)
    return complex(pref * math.exp(gauss))


def overlap(a: CoherentParams, b: CoherentParams) -> complex:
    """``<b|a>`` dispatching on the two chiralities."""
    if a.chirality == b.chirality:
        return overlap_same_chirality(a, b)
    return overlap_cross_chirality(a, b)
