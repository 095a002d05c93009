"""Energy / angular-momentum eigenstates and the truncated Fock series.

This module is deliberately independent of the closed-form wavefunction in
:mod:`polcoh.state_core`: the coherent state is rebuilt here as an explicit
double sum over eigenfunctions and serves as the reference it is checked
against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, TruncationError
from .special_fn import laguerre_functions
from .state_core import CoherentParams, coefficients, log_normalization

_SQRT_PI = math.sqrt(math.pi)
N_CAP = 2000
L_CAP = 2000


@dataclass(frozen=True)
class FockLabel:
    """Quantum numbers of ``|n, sign*l>``; ``l >= 0`` is the magnitude."""

    n: int
    l: int
    sign: int = +1

    def __post_init__(self):
        if self.n < 0 or self.l < 0:
            raise InvalidParameterError("n and l must be non-negative")
        if self.sign not in (+1, -1):
            raise InvalidParameterError("sign must be +1 or -1")

    @property
    def energy(self) -> int:
        return 2 * self.n + self.l + 1


@dataclass(frozen=True)
class TruncationPolicy:
    n_max: int
    l_max: int
    tail_tol: float = 1e-12

    def __post_init__(self):
        if self.n_max < 0 or self.l_max < 0:
            raise InvalidParameterError("n_max and l_max must be non-negative")
        if not self.tail_tol > 0:
            raise InvalidParameterError("tail_tol must be positive")


def eigen_energy(label: FockLabel) -> int:
    return label.energy


def eigenfunction(label: FockLabel, r, phi):
    """``(n!/(pi (n+l)!))**0.5 exp(+-i l phi) exp(-r^2/2) r^l L^l_n(r^2)``."""
    radial = laguerre_functions(label.n, label.l, r)[label.n]
    out = radial * np.exp(1j * label.sign * label.l * np.asarray(phi, dtype=float)) / _SQRT_PI
    return complex(out) if np.ndim(out) == 0 else out


def evolve_label_phase(label: FockLabel, t: float) -> complex:
    """Dynamical phase ``exp(-i E t)`` of an eigenstate."""
    return complex(np.exp(-1j * label.energy * t))


def _n_tail(params: CoherentParams, n_max: int, l_max: int) -> float:
    a = abs(params.alpha)
    if a == 0:
        return 0.0
    l = np.arange(l_max + 1)
    first = np.abs(coefficients(params, n_max + 1, l))
    ratio = a * np.sqrt((n_max + l + 2.0) / (n_max + 2.0))
    if np.any(ratio >= 1):
        return math.inf
    return float(np.sum(first / (1 - ratio)))


def _l_tail(params: CoherentParams, l_max: int) -> float:
    a = abs(params.alpha)
    b = abs(params.beta)
    if b == 0:
        return 0.0
    g = b / math.sqrt(1 - a)
    k = l_max + 1
    ratio = g / math.sqrt(k + 1)
    if ratio >= 1:
        return math.inf
    log_first = log_normalization(params) - math.log1p(-a) + k * math.log(g) - 0.5 * math.lgamma(k + 1)
    return math.exp(log_first) / (1 - ratio)


def tail_bound(params: CoherentParams, n_max: int, l_max: int) -> float:
    """Upper bound on the dropped part of the double series at any point.

    Every eigenfunction is bounded by ``1/sqrt(pi)`` in magnitude, so the
    bound is ``sum |c_{n,l}| / sqrt(pi)`` over the dropped index set.  The
    n-tail at fixed l is geometric with the ratio taken at ``n_max + 1``;
    the l-tail uses ``sum_n |c_{n,l}| <= N (1-|a|)^-1 g^l / sqrt(l!)`` with
    ``g = |beta| / sqrt(1-|a|)`` (Cauchy-Schwarz over n).
    """
    return (_n_tail(params, n_max, l_max) + _l_tail(params, l_max)) / _SQRT_PI


def adaptive_policy(params: CoherentParams, tail_tol: float = 1e-12) -> TruncationPolicy:
    """Small ``n_max``, ``l_max`` whose tail bound meets ``tail_tol``."""
    budget = tail_tol * _SQRT_PI
    l_max = 0
    if params.beta != 0:
        l_max = int(abs(params.beta) ** 2 / (1 - abs(params.alpha))) + 1
        while _l_tail(params, l_max) > budget / 2:
            l_max += max(1, l_max // 16)
            if l_max > L_CAP:
                raise TruncationError(f"l_max would exceed {L_CAP}")
    n_max = 0
    if params.alpha != 0:
        n_max = 8
        while tail_bound(params, n_max, l_max) > tail_tol:
            n_max = int(n_max * 1.15) + 1
            if n_max > N_CAP:
                raise TruncationError(f"n_max would exceed {N_CAP}")
    return TruncationPolicy(n_max, l_max, tail_tol)


def _series(params: CoherentParams, r: float, phi: float, policy: TruncationPolicy, t: float | None):
    n = np.arange(policy.n_max + 1)[:, None]
    l = np.arange(policy.l_max + 1)[None, :]
    radial = laguerre_functions(policy.n_max, np.arange(policy.l_max + 1), r)
    coef = coefficients(params, n, l)
    if t is not None:
        coef = coef * np.exp(-1j * (2 * n + l + 1) * t)
    # inner sum over n for each l, then the l sum
    per_l = np.sum(coef * radial, axis=0) * np.exp(1j * params.chirality * np.arange(policy.l_max + 1) * phi)
    order = np.argsort(np.abs(per_l))
    value = complex(math.fsum(per_l.real[order]), math.fsum(per_l.imag[order]))
    return value / _SQRT_PI


def series_amplitude(params: CoherentParams, r: float, phi: float,
                     policy: TruncationPolicy | None = None, t: float | None = None):
    """Truncated Fock-series wavefunction at one point.

    With ``t`` given, each term carries its dynamical phase ``exp(-i E t)``.

    Returns
    -------
    (value, tail_bound)
    """
    if policy is None:
        policy = adaptive_policy(params)
    bound = tail_bound(params, policy.n_max, policy.l_max)
    if bound > policy.tail_tol:
        raise TruncationError(
            f"tail bound {bound:.3e} exceeds tolerance {policy.tail_tol:.3e} "
            f"for n_max={policy.n_max}, l_max={policy.l_max}")
    return _series(params, float(r), float(phi), policy, t), bound
