import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polcoh.errors import GridMismatchError, InvalidParameterError, ResourceLimitError
from polcoh.quadrature_grid import (PolarGrid, WaveField, build_grid, cartesian_moments, d_phi, d_r,
                                    d_x, d_y, inner_product, radial_derivative_matrix, sample,
                                    sample_state)
from polcoh.state_core import CoherentParams


def test_grid_validation():
    with pytest.raises(InvalidParameterError):
        PolarGrid(-1.0, 10, 10)
    with pytest.raises(InvalidParameterError):
        PolarGrid(1.0, 1, 10)


def test_grid_is_hashable_and_comparable():
    assert PolarGrid(5.0, 16, 32) == PolarGrid(5, 16, 32)
    assert len({PolarGrid(5.0, 16, 32), PolarGrid(5.0, 16, 32)}) == 1


def test_nodes_exclude_origin():
    g = PolarGrid(4.0, 20, 8)
    assert g.r.min() > 0 and g.r.max() < 4.0


@settings(max_examples=30, deadline=None)
@given(deg=st.integers(0, 30), k=st.integers(-8, 8))
def test_quadrature_exact_for_polynomials(deg, k):
    g = PolarGrid(2.0, 16, 32)
    rr, pp = g.mesh
    # integral of r^deg e^{ik phi} r dr dphi over the disc of radius 2
    value = g.integrate(rr ** deg * np.exp(1j * k * pp))
    scale = 2 * math.pi * 2.0 ** (deg + 2) / (deg + 2)
    exact = scale if k == 0 else 0.0
    assert abs(value - exact) <= 1e-13 * scale


def test_wavefield_is_read_only():
    g = PolarGrid(3.0, 8, 8)
    f = WaveField(np.ones(g.shape), g)
    with pytest.raises(ValueError):
        f.values[0, 0] = 2


def test_wavefield_rejects_nonfinite_and_bad_shape():
    g = PolarGrid(3.0, 8, 8)
    with pytest.raises(InvalidParameterError):
        WaveField(np.full(g.shape, np.nan), g)
    with pytest.raises(GridMismatchError):
        WaveField(np.ones((3, 3)), g)


def test_inner_product_grid_mismatch():
    f = WaveField(np.ones((8, 8)), PolarGrid(3.0, 8, 8))
    h = WaveField(np.ones((8, 8)), PolarGrid(4.0, 8, 8))
    with pytest.raises(GridMismatchError):
        inner_product(f, h)


@pytest.mark.parametrize("alpha,beta,acc", [(0, 0, 1e-10), (0.4, 5, 1e-8), (0.7, 6, 1e-8), (0.6j, 1 + 1j, 1e-10)])
def test_build_grid_normalization(alpha, beta, acc):
    p = CoherentParams(alpha, beta)
    g = build_grid(p, acc)
    psi = sample_state(p, g)
    assert abs(inner_product(psi, psi).real - 1) <= acc
    if beta == 5:
        assert g.r_max > 25 / 3


def test_build_grid_grows_with_parameters():
    small = build_grid(CoherentParams(0, 0))
    large = build_grid(CoherentParams(0.7, 6), 1e-8)
    assert large.nr * large.nphi > small.nr * small.nphi


def test_build_grid_resource_limit():
    with pytest.raises(ResourceLimitError):
        build_grid(CoherentParams(0.9, 6), 1e-10, max_nr=40, max_nphi=64)


def test_doubling_changes_moments_below_accuracy():
    p = CoherentParams(0.4, 2 - 1j)
    g = build_grid(p, 1e-9)
    m1 = cartesian_moments(sample_state(p, g))
    m2 = cartesian_moments(sample_state(p, g.refined(2)))
    for name in ("mean_x", "mean_y", "mean_px", "var_x", "var_px", "cov_ypy"):
        assert abs(getattr(m1, name) - getattr(m2, name)) <= 1e-8


@pytest.mark.parametrize("stencil,tol", [(5, 5e-5), (7, 1e-6), (None, 1e-11)])
def test_radial_derivative(stencil, tol):
    g = PolarGrid(6.0, 120, 8)
    f = np.exp(-(g.r - 2.0) ** 2)[:, None] * np.ones((1, 8))
    exact = (-2 * (g.r - 2.0) * np.exp(-(g.r - 2.0) ** 2))[:, None]
    # one-sided stencils near the interval ends are excluded, as in all residual norms
    inner = (g.r > 0.05 * g.r_max) & (g.r < 0.9 * g.r_max)
    assert np.max(np.abs(d_r(f, g, stencil) - exact)[inner]) <= tol


def test_five_point_stencil_is_fourth_order():
    errs = []
    for nr in (100, 200):
        g = PolarGrid(6.0, nr, 8)
        f = np.exp(-(g.r - 2.0) ** 2)[:, None]
        exact = (-2 * (g.r - 2.0) * np.exp(-(g.r - 2.0) ** 2))[:, None]
        inner = (g.r > 0.05 * g.r_max) & (g.r < 0.9 * g.r_max)
        errs.append(np.max(np.abs(d_r(f, g, 5) - exact)[inner]))
    assert errs[0] / errs[1] > 12


def test_stencil_validation():
    with pytest.raises(InvalidParameterError):
        radial_derivative_matrix(PolarGrid(6.0, 20, 8), 4)


def test_phi_derivative_spectral():
    phi = 2 * np.pi * np.arange(32) / 32
    f = np.exp(np.sin(phi))[None, :]
    np.testing.assert_allclose(d_phi(f), np.cos(phi) * f, atol=1e-12)
    np.testing.assert_allclose(d_phi(f, 2), (np.cos(phi) ** 2 - np.sin(phi)) * f, atol=1e-11)


def test_cartesian_derivatives():
    g = PolarGrid(8.0, 80, 64)
    x, y = g.xy
    f = np.exp(-((x - 1) ** 2 + (y + 0.5) ** 2) / 2)
    np.testing.assert_allclose(d_x(f, g), -(x - 1) * f, atol=1e-10)
    np.testing.assert_allclose(d_y(f, g), -(y + 0.5) * f, atol=1e-10)


def test_ground_state_moments():
    p = CoherentParams(0, 0)
    m = cartesian_moments(sample_state(p, build_grid(p)))
    assert abs(m.mean_x) < 1e-12 and abs(m.mean_py) < 1e-12
    assert m.var_x == pytest.approx(0.5, abs=1e-12)
    assert m.var_px == pytest.approx(0.5, abs=1e-12)


def test_displaced_packet_mean():
    p = CoherentParams(0.4, 5)
    m = cartesian_moments(sample_state(p, build_grid(p)))
    assert m.mean_x == pytest.approx(25 / 7, abs=1e-9)


def test_max_order_one_leaves_nan():
    g = PolarGrid(6.0, 32, 16)
    m = cartesian_moments(sample(lambda r, p: np.exp(-r * r / 2) / math.sqrt(math.pi), g), max_order=1)
    assert math.isnan(m.var_x)
    with pytest.raises(InvalidParameterError):
        cartesian_moments(sample(lambda r, p: np.exp(-r * r / 2), g), max_order=3)
