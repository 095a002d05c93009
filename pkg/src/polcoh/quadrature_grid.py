"""Polar quadrature grids, sampled fields, inner products and moments.

Radial nodes are Gauss-Legendre points mapped to ``[0, r_max]``; angular
nodes are uniform on ``[0, 2 pi)``.  The area element ``r dr dphi`` is folded
into :attr:`PolarGrid.weights`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import GridMismatchError, InvalidParameterError, ResourceLimitError
from .state_core import CoherentParams, amplitude

log = logging.getLogger(__name__)

MAX_NR = 2048
MAX_NPHI = 8192


@dataclass(frozen=True)
class PolarGrid:
    """Tensor-product grid; immutable and hashable by its three sizes."""

    r_max: float
    nr: int
    nphi: int

    def __post_init__(self):
        if not self.r_max > 0:
            raise InvalidParameterError("r_max must be positive")
        if self.nr < 2 or self.nphi < 4:
            raise InvalidParameterError("grid needs nr >= 2 and nphi >= 4")
        object.__setattr__(self, "r_max", float(self.r_max))

    @cached_property
    def _gauss(self):
        x, w = np.polynomial.legendre.leggauss(self.nr)
        return 0.5 * self.r_max * (x + 1), 0.5 * self.r_max * w

    @property
    def r(self) -> np.ndarray:
        return self._gauss[0]

    @property
    def r_weights(self) -> np.ndarray:
        return self._gauss[1]

    @cached_property
    def phi(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.nphi) / self.nphi

    @property
    def dphi(self) -> float:
        return 2 * np.pi / self.nphi

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights for ``r dr dphi``, shape ``(nr, nphi)``."""
        w = (self.r_weights * self.r)[:, None] * self.dphi
        return np.broadcast_to(w, self.shape)

    @property
    def shape(self):
        return (self.nr, self.nphi)

    @cached_property
    def mesh(self):
        return np.meshgrid(self.r, self.phi, indexing="ij")

    @cached_property
    def xy(self):
        rr, pp = self.mesh
        return rr * np.cos(pp), rr * np.sin(pp)

    def refined(self, factor: float = 2.0) -> "PolarGrid":
        return PolarGrid(self.r_max, int(round(self.nr * factor)), int(round(self.nphi * factor)))

    def integrate(self, values) -> complex:
        return complex(np.sum(self.weights * values))


@dataclass(frozen=True)
class WaveField:
    """Complex samples on a :class:`PolarGrid`, indexed ``[r_node, phi_node]``."""

    values: np.ndarray
    grid: PolarGrid

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise GridMismatchError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("wave field contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def _same(self, other: "WaveField"):
        if self.grid != other.grid:
            raise GridMismatchError("fields live on different grids")

    def __add__(self, other):
        self._same(other)
        return WaveField(self.values + other.values, self.grid)

    def __sub__(self, other):
        self._same(other)
        return WaveField(self.values - other.values, self.grid)

    def __mul__(self, c):
        return WaveField(self.values * c, self.grid)

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self).real, 0.0))


def sample_state(params: CoherentParams, grid: PolarGrid, amplitude_fn=amplitude) -> WaveField:
    rr, pp = grid.mesh
    return WaveField(amplitude_fn(params, rr, pp), grid)


def sample(fn, grid: PolarGrid) -> WaveField:
    """Sample ``fn(r, phi)`` on the grid."""
    rr, pp = grid.mesh
    return WaveField(np.broadcast_to(fn(rr, pp), grid.shape), grid)


def inner_product(f: WaveField, g: WaveField) -> complex:
    """Discrete ``<f|g> = sum w r conj(f) g dphi``."""
    f._same(g)
    return complex(np.sum(f.grid.weights * np.conj(f.values) * g.values))


# ---------------------------------------------------------------- grid sizing

def support_radius(params: CoherentParams) -> float:
    a = abs(params.alpha)
    width = math.sqrt(0.5 * (1 + a) / (1 - a))
    return abs(params.beta) / (1 - a) + 8 * width


def _phi_nodes_floor(params: CoherentParams, r_max: float) -> int:
    a = abs(params.alpha)
    need = 8 * math.sqrt(abs(params.beta) * r_max / (1 - a)) + 32
    return 1 << max(2, math.ceil(math.log2(need)))


def _diagnostics(states, grid):
    """Normalization error and gradient energy ``||grad psi||^2`` per state."""
    out = []
    for p in states:
        v = sample_state(p, grid).values
        dens = float(np.sum(grid.weights * np.abs(v) ** 2))
        dr = radial_derivative_matrix(grid, None) @ v
        dp = d_phi(v) / grid.r[:, None]
        grad = float(np.sum(grid.weights * (np.abs(dr) ** 2 + np.abs(dp) ** 2)))
        out.append((abs(dens - 1.0), grad))
    return out


def _change(a, b):
    return max(max(abs(x[0] - y[0]), abs(x[1] - y[1]) / max(1.0, abs(y[1]))) for x, y in zip(a, b))


def build_grid(params: CoherentParams | Iterable[CoherentParams], accuracy: float = 1e-10,
               max_nr: int = MAX_NR, max_nphi: int = MAX_NPHI) -> PolarGrid:
    """Grid on which every given state integrates to 1 within ``accuracy``.

    ``r_max`` covers the packet orbit plus eight maximal widths.  Node counts
    start from a bandwidth estimate and grow until the normalization error is
    below ``accuracy`` and neither the normalization nor the gradient energy
    moves by more than ``accuracy / 10`` when either direction is refined.
    The gradient criterion keeps first derivatives resolved, which the
    normalization alone does not guarantee.

    Raises
    ------
    ResourceLimitError
        When the required node counts exceed ``max_nr`` or ``max_nphi``.
    """
    states = [params] if isinstance(params, CoherentParams) else list(params)
    if not states:
        raise InvalidParameterError("need at least one state")
    r_max = max(support_radius(p) for p in states)
    nphi = max(_phi_nodes_floor(p, r_max) for p in states)
    nr = 32
    while True:
        nr_up = int(nr * 1.5)
        if nr_up > max_nr or 2 * nphi > max_nphi:
            raise ResourceLimitError(
                f"grid would need nr>{nr}, nphi>{nphi} (caps {max_nr}, {max_nphi})")
        grid = PolarGrid(r_max, nr, nphi)
        base = _diagnostics(states, grid)
        err_r = _change(_diagnostics(states, PolarGrid(r_max, nr_up, nphi)), base)
        err_phi = _change(_diagnostics(states, PolarGrid(r_max, nr, 2 * nphi)), base)
        worst = max(b[0] for b in base)
        log.debug("grid nr=%d nphi=%d err=%.2e dr=%.2e dphi=%.2e", nr, nphi, worst, err_r, err_phi)
        if worst <= accuracy and err_r <= accuracy / 10 and err_phi <= accuracy / 10:
            return grid
        if err_phi > err_r and err_phi > accuracy / 10:
            nphi *= 2
        else:
            nr = nr_up


# ------------------------------------------------------------ differentiation

def _bary_weights(x: np.ndarray) -> np.ndarray:
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    logw = -np.sum(np.log(np.abs(diff)), axis=1)
    sign = np.prod(np.sign(diff), axis=1)
    return sign * np.exp(logw - logw.max())


def _diff_rows(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Barycentric first-derivative matrix on nodes ``x``."""
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    d = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


@lru_cache(maxsize=32)
def radial_derivative_matrix(grid: PolarGrid, stencil: int | None = 5):
    """First-derivative operator along ``r``.

    ``stencil=None`` gives the global (spectral) barycentric matrix on all
    radial nodes as a dense array.  An odd ``stencil`` width gives local
    polynomial differentiation on the nearest ``stencil`` consecutive nodes,
    returned as a sparse matrix; width 5 is fourth order.
    """
    x = grid.r
    n = x.size
    if stencil is None:
        return _diff_rows(x, _bary_weights(x))
    if stencil % 2 == 0 or stencil < 3 or stencil > n:
        raise InvalidParameterError(f"stencil width must be odd and in [3, {n}]")
    half = stencil // 2
    rows, cols, vals = [], [], []
    for i in range(n):
        lo = min(max(i - half, 0), n - stencil)
        idx = np.arange(lo, lo + stencil)
        xs = x[idx]
        local = _diff_rows(xs, _bary_weights(xs))[i - lo]
        rows.extend([i] * stencil)
        cols.extend(idx)
        vals.extend(local)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def d_r(values: np.ndarray, grid: PolarGrid, stencil: int | None = 5) -> np.ndarray:
    return radial_derivative_matrix(grid, stencil) @ values


def d_phi(values: np.ndarray, order: int = 1) -> np.ndarray:
    """Spectral ``phi`` derivative along axis 1."""
    m = values.shape[1]
    k = np.fft.fftfreq(m, 1.0 / m)
    if order % 2 == 1 and m % 2 == 0:
        k = k.copy()
        k[m // 2] = 0.0
    return np.fft.ifft((1j * k) ** order * np.fft.fft(values, axis=1), axis=1)


def d_x(values, grid, stencil=None):
    _, pp = grid.mesh
    rr = grid.r[:, None]
    return np.cos(pp) * d_r(values, grid, stencil) - np.sin(pp) / rr * d_phi(values)


def d_y(values, grid, stencil=None):
    _, pp = grid.mesh
    rr = grid.r[:, None]
    return np.sin(pp) * d_r(values, grid, stencil) + np.cos(pp) / rr * d_phi(values)


# -------------------------------------------------------------------- moments

@dataclass(frozen=True)
class CartesianMoments:
    norm: float
    mean_x: float
    mean_y: float
    mean_px: float
    mean_py: float
    var_x: float
    var_y: float
    var_px: float
    var_py: float
    cov_xpx: float
    cov_ypy: float


def cartesian_moments(f: WaveField, max_order: int = 2, stencil: int | None = None) -> CartesianMoments:
    """First and second cartesian moments of a sampled state.

    Momenta act as ``-i d/dx``; covariances are symmetrized,
    ``(<x p + p x>)/2 - <x><p>``.  Moments are divided by the field norm.
    Second-order entries are NaN when ``max_order == 1``.
    """
    if max_order not in (1, 2):
        raise InvalidParameterError("max_order must be 1 or 2")
    g = f.grid
    v = f.values
    w = g.weights
    x, y = g.xy
    dens = np.abs(v) ** 2
    norm = float(np.sum(w * dens))
    ex = lambda a: float(np.sum(w * a)) / norm  # noqa: E731
    mx, my = ex(x * dens), ex(y * dens)
    gx = d_x(v, g, stencil)
    gy = d_y(v, g, stencil)
    # <p> = Re <v| -i d v>
    mpx = ex((np.conj(v) * -1j * gx).real)
    mpy = ex((np.conj(v) * -1j * gy).real)
    nan = float("nan")
    if max_order == 1:
        return CartesianMoments(norm, mx, my, mpx, mpy, nan, nan, nan, nan, nan, nan)
    vx = ex(x * x * dens) - mx * mx
    vy = ex(y * y * dens) - my * my
    vpx = ex(np.abs(gx) ** 2) - mpx * mpx
    vpy = ex(np.abs(gy) ** 2) - mpy * mpy
    cx = ex((np.conj(v) * x * -1j * gx).real) - mx * mpx
    cy = ex((np.conj(v) * y * -1j * gy).real) - my * mpy
    if norm < 0.5 or abs(norm - 1) > 1e-3:
        log.warning("field norm %.6f; moments may be under-resolved", norm)
    return CartesianMoments(norm, mx, my, mpx, mpy, vx, vy, vpx, vpy, cx, cy)
