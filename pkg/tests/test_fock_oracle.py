import cmath
import math

import numpy as np
import pytest

from polcoh.errors import InvalidParameterError, TruncationError
from polcoh.fock_oracle import (FockLabel, TruncationPolicy, adaptive_policy, eigen_energy,
                                eigenfunction, evolve_label_phase, series_amplitude, tail_bound)
from polcoh.quadrature_grid import PolarGrid, inner_product, sample
from polcoh.state_core import LEFT, CoherentParams, amplitude, coefficient


@pytest.mark.parametrize("n,l,energy", [(0, 0, 1), (1, 1, 4), (3, 2, 9)])
def test_energy(n, l, energy):
    assert eigen_energy(FockLabel(n, l)) == energy


def test_label_validation():
    with pytest.raises(InvalidParameterError):
        FockLabel(-1, 0)
    with pytest.raises(InvalidParameterError):
        FockLabel(0, 1, 0)


def test_ground_eigenfunction():
    assert eigenfunction(FockLabel(0, 0), 0.0, 1.0) == pytest.approx(1 / math.sqrt(math.pi))


@pytest.mark.parametrize("n,l,sign", [(1, 0, 1), (2, 3, -1), (4, 1, 1)])
def test_eigenfunction_explicit(n, l, sign):
    # explicit polynomial form of L^l_n
    r, phi = 1.3, 0.9
    x = r * r
    L = sum(math.comb(n + l, n - k) * (-x) ** k / math.factorial(k) for k in range(n + 1))
    ref = (math.sqrt(math.factorial(n) / (math.pi * math.factorial(n + l)))
           * cmath.exp(1j * sign * l * phi) * math.exp(-x / 2) * r ** l * L)
    assert eigenfunction(FockLabel(n, l, sign), r, phi) == pytest.approx(ref, abs=1e-14)


def test_orthonormality_on_grid():
    g = PolarGrid(12.0, 64, 32)
    labels = [FockLabel(n, l, s) for n in range(7) for l in range(7) for s in ((1, -1) if l else (1,))]
    fields = [sample(lambda r, p, lab=lab: eigenfunction(lab, r, p), g) for lab in labels]
    gram = np.array([[inner_product(f, h) for h in fields] for f in fields])
    assert np.max(np.abs(gram - np.eye(len(labels)))) <= 1e-10


@pytest.mark.parametrize("t", [0.0, 2 * math.pi, 1.234])
def test_phase_is_unimodular(t):
    assert abs(abs(evolve_label_phase(FockLabel(2, 1), t)) - 1) < 1e-15


def test_phase_values():
    assert evolve_label_phase(FockLabel(5, 3), 0.0) == 1
    assert evolve_label_phase(FockLabel(0, 0), 2 * math.pi) == pytest.approx(1, abs=1e-15)
    assert evolve_label_phase(FockLabel(1, 1), math.pi / 2) == pytest.approx(1, abs=1e-15)


def test_series_fixed_policy():
    p = CoherentParams(0.3, 2)
    value, bound = series_amplitude(p, 1.0, 0.0, TruncationPolicy(120, 120))
    assert bound <= 1e-12
    assert abs(value - amplitude(p, 1.0, 0.0)) <= 1e-10


def test_series_adaptive_large_parameters():
    p = CoherentParams(0.7, 4)
    value, _ = series_amplitude(p, 3.0, 1.2)
    assert abs(value - amplitude(p, 3.0, 1.2)) <= 1e-9
    pol = adaptive_policy(p)
    assert pol.n_max > 100 and pol.l_max > 50


def test_truncation_error_when_policy_too_small():
    with pytest.raises(TruncationError):
        series_amplitude(CoherentParams(0.5, 3), 1.0, 0.0, TruncationPolicy(5, 5))


def test_tail_bound_is_a_bound():
    p = CoherentParams(0.5 + 0.2j, 2.5 - 1j, LEFT)
    ref, _ = series_amplitude(p, 1.4, 2.0, TruncationPolicy(400, 200))
    for n_max, l_max in [(12, 20), (20, 25), (40, 30), (80, 40)]:
        v = series_amplitude(p, 1.4, 2.0, TruncationPolicy(n_max, l_max, tail_tol=1e300))[0]
        assert abs(v - ref) <= tail_bound(p, n_max, l_max) + 1e-14


def test_tail_bound_zero_for_vacuum():
    assert tail_bound(CoherentParams(0, 0), 0, 0) == 0.0


@pytest.mark.parametrize("params,r,phi,t", [
    (CoherentParams(0.3, 2), 1.0, 0.3, 0.7),
    (CoherentParams(0.5j, 1 - 1j, LEFT), 2.0, 4.0, 2.5),
    (CoherentParams(-0.4, 3.0), 3.5, 1.0, 5.9),
])
def test_evolution_term_by_term(params, r, phi, t):
    # sum_c c e^{-iEt} psi equals e^{-it} times the state with (alpha e^{-2it}, beta e^{-it})
    evolved = params.replace(alpha=params.alpha * cmath.exp(-2j * t), beta=params.beta * cmath.exp(-1j * t))
    pol = adaptive_policy(params)
    lhs, _ = series_amplitude(params, r, phi, pol, t=t)
    rhs, _ = series_amplitude(evolved, r, phi, pol)
    assert abs(lhs - cmath.exp(-1j * t) * rhs) <= 1e-10


def test_explicit_double_sum_matches_series():
    p = CoherentParams(0.25, 1.5)
    r, phi = 0.8, 1.1
    total = sum(coefficient(p, FockLabel(n, l)) * eigenfunction(FockLabel(n, l), r, phi)
                for n in range(40) for l in range(40))
    assert abs(total - series_amplitude(p, r, phi)[0]) <= 1e-12
