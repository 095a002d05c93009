"""Time evolution and closed-form packet observables.

The closed forms hold in the real gauge: ``alpha`` and ``beta`` real at
``t = 0``.  Any other label is reduced to that gauge by
:func:`real_gauge`, which pairs a real label with a time offset and a rigid
rotation of the plane.

Conventions (oscillator units, hbar = 1): the packet centre of a
left-handed state starts at ``(beta/(1+alpha), 0)`` and moves clockwise;
right-handed states are the mirror image ``y -> -y`` and move
counterclockwise.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError, UnsupportedParameterError
from .state_core import CoherentParams

REAL_TOL = 1e-12


def evolve_params(params: CoherentParams, t: float) -> CoherentParams:
    """``(alpha, beta) -> (alpha e^{-2it}, beta e^{-it})``; chirality kept."""
    return params.replace(alpha=params.alpha * cmath.exp(-2j * t),
                          beta=params.beta * cmath.exp(-1j * t))


def _real_pair(params: CoherentParams):
    a, b = params.alpha, params.beta
    if abs(a.imag) > REAL_TOL * (1 + abs(a)) or abs(b.imag) > REAL_TOL * (1 + abs(b)):
        raise UnsupportedParameterError(
            f"closed-form moments need real alpha and beta, got {a}, {b}; use real_gauge()")
    return a.real, b.real


@dataclass(frozen=True)
class GaugeReduction:
    """``state(params)`` equals ``state(real)`` evolved by ``time_offset`` and
    rotated counterclockwise by ``rotation`` (up to a global phase)."""

    real: CoherentParams
    time_offset: float
    rotation: float


def real_gauge(params: CoherentParams) -> GaugeReduction:
    """Reduce a complex label to a real one plus a time shift and rotation.

    ``alpha = |alpha| e^{i theta}`` is reached from ``|alpha|`` after time
    ``-theta/2``, where ``beta`` has become ``|beta| e^{i theta/2}``.  The
    leftover phase of ``beta`` only enters through ``beta e^{i chi phi}``, so
    it is a rigid rotation of the plane.
    """
    theta = cmath.phase(params.alpha) if params.alpha != 0 else 0.0
    tau = -theta / 2
    gamma = theta / 2 - cmath.phase(params.beta) if params.beta != 0 else 0.0
    real = params.replace(alpha=abs(params.alpha), beta=abs(params.beta))
    return GaugeReduction(real, tau, params.chirality * gamma)


def _rot(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def _denominator(alpha: float, t: float) -> float:
    # |1 - alpha e^{-2it}|^2; equals |1 - alpha e^{+2it}|^2 for real alpha
    return 1 + alpha * alpha - 2 * alpha * math.cos(2 * t)


# ---------------------------------------------------------------- data types

@dataclass(frozen=True)
class PacketMoments:
    q: np.ndarray
    p: np.ndarray
    U: np.ndarray
    V: np.ndarray
    t: float


@dataclass(frozen=True)
class DispersionSet:
    dx2: float
    dy2: float
    dpx2: float
    dpy2: float
    dxpx: float
    dypy: float
    t: float


@dataclass(frozen=True)
class EllipseGeometry:
    semi_major: float
    semi_minor: float
    eccentricity: float
    degenerate: bool = False


# --------------------------------------------------------------- closed forms

def packet_center(params: CoherentParams, t: float):
    """Centre position ``q`` and mean momentum ``p`` at time ``t``.

    For the left-handed state ``q = (beta cos t/(1+alpha), -beta sin t/(1-alpha))``;
    the right-handed state flips the sign of ``q_y``.  ``p`` is the mean of
    ``-i grad`` and, as required by Ehrenfest's theorem for this Hamiltonian,
    equals ``dq/dt``.
    """
    a, b = _real_pair(params)
    chi = params.chirality
    q = np.array([b * math.cos(t) / (1 + a), chi * b * math.sin(t) / (1 - a)])
    p = np.array([-b * math.sin(t) / (1 + a), chi * b * math.cos(t) / (1 - a)])
    return q, p


def width_matrices(params: CoherentParams, t: float):
    """Width matrix ``U`` and velocity-gradient matrix ``V`` (both scalar).

    ``U = |1 - alpha e^{-2it}|^2/(1 - alpha^2)`` so that the density is
    ``exp(-(x-q) U^-1 (x-q))``.  ``V = 2 alpha sin 2t / |1 - alpha e^{-2it}|^2``
    is the gradient of the local velocity field, entering the current as
    ``rho (p + V (x - q))``.
    """
    a, _ = _real_pair(params)
    d = _denominator(a, t)
    eye = np.eye(2)
    return d / (1 - a * a) * eye, 2 * a * math.sin(2 * t) / d * eye


def packet_moments(params: CoherentParams, t: float) -> PacketMoments:
    q, p = packet_center(params, t)
    U, V = width_matrices(params, t)
    return PacketMoments(q, p, U, V, float(t))


def packet_moments_general(params: CoherentParams, t: float) -> PacketMoments:
    """Closed-form moments for any label via :func:`real_gauge`."""
    g = real_gauge(params)
    m = packet_moments(g.real, t + g.time_offset)
    R = _rot(g.rotation)
    return PacketMoments(R @ m.q, R @ m.p, m.U, m.V, float(t))


def density_and_current(moments: PacketMoments, x, normalized: bool = False):
    """Gaussian density and probability current at points ``x`` (``(..., 2)``).

    The default density has peak value 1 at the centre; with
    ``normalized=True`` it is divided by ``pi sqrt(det U)`` and integrates to
    one.  The current uses the same density.
    """
    U = np.asarray(moments.U, dtype=float)
    det = np.linalg.det(U)
    if det <= 0 or np.any(np.linalg.eigvalsh(U) <= 0):
        raise SingularMatrixError("width matrix must be positive definite")
    x = np.asarray(x, dtype=float)
    d = x - moments.q
    quad = np.einsum("...i,ij,...j->...", d, np.linalg.inv(U), d)
    rho = np.exp(-quad)
    if normalized:
        rho = rho / (math.pi * math.sqrt(det))
    j = rho[..., None] * (moments.p + d @ np.asarray(moments.V).T)
    return rho, j


def dispersions(params: CoherentParams, t: float) -> DispersionSet:
    """Position/momentum variances and symmetrized covariances at time ``t``."""
    a, _ = _real_pair(params)
    s = a * a
    d = _denominator(a, t)
    s2t = math.sin(2 * t)
    dx2 = 0.5 * d / (1 - s)
    dp2 = 2 * s * s2t * s2t / ((1 - s) * d) + 0.5 * (1 - s) / d
    cov = a * s2t / (1 - s)
    return DispersionSet(dx2, dx2, dp2, dp2, cov, cov, float(t))


def rs_determinant(d: DispersionSet):
    """Robertson-Schroedinger combination ``<dx^2><dp^2> - <dx dp>^2`` per axis."""
    return d.dx2 * d.dpx2 - d.dxpx ** 2, d.dy2 * d.dpy2 - d.dypy ** 2


def classical_ellipse(params: CoherentParams) -> EllipseGeometry:
    """Orbit of the packet centre: semi-axes ``beta/(1 -+ alpha)``."""
    a, b = _real_pair(params)
    a, b = abs(a), abs(b)
    major = b / (1 - a)
    minor = b / (1 + a)
    ecc = 2 * math.sqrt(a) / (1 + a)
    return EllipseGeometry(major, minor, ecc, degenerate=(b == 0))


def ellipse_polyline(params: CoherentParams, n: int = 256) -> np.ndarray:
    """Closed polyline (``n + 1`` vertices) of the classical orbit in the plane."""
    g = real_gauge(params)
    ts = np.linspace(0, 2 * np.pi, n + 1)
    pts = np.array([packet_center(g.real, t)[0] for t in ts])
    pts[-1] = pts[0]
    return pts @ _rot(g.rotation).T
