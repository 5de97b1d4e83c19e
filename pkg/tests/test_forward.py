import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from dirac_spectra.core import Monodromy, PotentialGrid, free_solution
from dirac_spectra.determinant import delta0
from dirac_spectra.errors import BoundaryTooCloseError, ValidationError, WindingError
from dirac_spectra.forward import (
    char_det,
    closed_form_constant_q,
    constant_q_spectrum,
    count_zeros_in_disk,
    locate_spectrum,
    monodromy_entries,
    propagate,
    refine_disk,
    wronskian_defect,
)


def smooth_potential(seed, M=1025, scale=0.5):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))

    def make(c):
        return lambda x: scale * sum(c[k] * np.cos((k + 1) * x + k) for k in range(3))
    return PotentialGrid.from_functions(make(a[0]), make(a[1]), M=M)


def exact_constant(p, q, lam):
    # y' = A y with B = [[0, 1], [-1, 0]]
    A = np.array([[q, -(lam + p)], [lam - p, -q]], dtype=complex)
    return expm(math.pi * A)


@pytest.mark.parametrize("steps", [1, 7, 64, 4096])
@pytest.mark.parametrize("lam", [1.0, 2.5 - 0.7j, -9 + 2j])
def test_free_propagation_is_exact(steps, lam):
    E = monodromy_entries(PotentialGrid.zero(), lam, steps)
    E0, _ = free_solution(math.pi, lam)
    assert np.max(np.abs(E - E0)) < 1e-12 * max(1, np.abs(E0).max())


def test_free_case_lambda_one():
    m = propagate(PotentialGrid.zero(), 1.0, 16)
    assert m.c1 == pytest.approx(-1, abs=1e-15) and m.c2 == pytest.approx(-1, abs=1e-15)
    assert abs(m.s1) < 1e-15 and abs(m.s2) < 1e-15
    assert wronskian_defect(m) < 1e-15


def test_constant_q_trace():
    m = propagate(PotentialGrid.constant(0.0, 0.5, M=9), 3.0, 4096)
    assert m.trace == pytest.approx(2 * math.cos(math.pi * math.sqrt(9 - 0.25)), abs=1e-12)
    assert wronskian_defect(m) < 1e-13


@settings(max_examples=40, deadline=None)
@given(p=st.complex_numbers(max_magnitude=2), q=st.complex_numbers(max_magnitude=2),
       lam=st.complex_numbers(max_magnitude=8))
def test_constant_potential_matches_matrix_exponential(p, q, lam):
    E = monodromy_entries(PotentialGrid.constant(p, q, M=3), lam, 32)
    ref = exact_constant(p, q, lam)
    assert np.max(np.abs(E - ref)) <= 1e-9 * max(1.0, np.abs(ref).max())


def test_wronskian_random_smooth():
    m = propagate(smooth_potential(1), 2 + 1j, 4096)
    assert wronskian_defect(m) < 1e-8


def test_wronskian_defect_algebra():
    m = propagate(smooth_potential(2), 0.3, 256)
    bumped = Monodromy(m.c1 + 0.1, m.s1, m.s2, m.c2, m.lam)
    assert wronskian_defect(bumped) == pytest.approx(abs(0.1 * m.c2 + (m.c1 * m.c2 + m.s1 * m.s2 - 1)), rel=1e-12)


def test_second_order_convergence():
    pot = smooth_potential(5, M=4097)
    lam = np.array([1.5 + 0.5j, -4.0, 7 - 1j])
    E = {S: monodromy_entries(pot, lam, S) for S in (256, 512, 1024, 2048)}
    d = [np.abs(E[S] - E[2 * S]).max() for S in (256, 512, 1024)]
    assert 3.0 < d[0] / d[1] < 5.0 and 3.0 < d[1] / d[2] < 5.0


def test_char_det_examples():
    zero = PotentialGrid.zero()
    assert char_det(zero, 0, 1.0) == pytest.approx(-2, abs=1e-14)
    assert char_det(zero, 0, 0.0) == pytest.approx(0, abs=1e-14)
    assert char_det(zero, 1, 1.0) == pytest.approx(0, abs=1e-14)


def test_count_zeros_examples():
    assert count_zeros_in_disk(lambda z: delta0(0, z), 2.0, 0.45) == 2
    assert count_zeros_in_disk(lambda z: delta0(0, z), 1.0, 0.45) == 0
    pot = PotentialGrid.constant(0.0, 0.5, M=5)
    assert count_zeros_in_disk(lambda z: char_det(pot, 0, z), 2.0, 0.45) == 2


def test_count_zeros_errors():
    with pytest.raises(ValidationError):
        count_zeros_in_disk(lambda z: z, 0, 1, boundary_points=32)
    with pytest.raises(BoundaryTooCloseError):
        count_zeros_in_disk(lambda z: delta0(0, z), 1.0, 1.0)
    with pytest.raises(WindingError):
        count_zeros_in_disk(lambda z: z ** 40, 0.0, 1.0, boundary_points=64)


def test_refine_disk_polynomial_oracle():
    roots = np.array([0.1, -0.2 + 0.05j, 0.05j])
    loc = refine_disk(lambda z: np.prod(z[..., None] - roots, axis=-1), 0.0, 0.4)
    assert loc.zero_count == 3
    assert np.allclose(np.sort_complex(np.array(loc.refined_roots)), np.sort_complex(roots), atol=1e-10)


def test_refine_disk_double_root():
    loc = refine_disk(lambda z: (z - 0.1) ** 2 * (z + 3), 0.0, 0.45)
    assert loc.zero_count == 2
    assert loc.refined_roots[0] == loc.refined_roots[1]
    assert abs(loc.refined_roots[0] - 0.1) < 1e-9


@pytest.mark.parametrize("theta,nmax", [(0, 3), (1, 2)])
def test_free_spectrum(theta, nmax):
    sp = locate_spectrum(PotentialGrid.zero(), theta, nmax)
    n = np.arange(-nmax, nmax + 1)
    assert np.max(np.abs(sp.values - (2 * n + theta)[:, None])) < 1e-12


def test_constant_q_spectrum_located():
    pot = PotentialGrid.constant(0.0, 0.5, M=5)
    sp = locate_spectrum(pot, 0, 4)
    ref = constant_q_spectrum(0.5, 0, 4)
    assert np.max(np.abs(sp.values - ref.values)) < 1e-9
    assert np.allclose(sp.pair(0), (-0.5, 0.5))
    assert np.allclose(sp.pair(3), (math.sqrt(36.25),) * 2)
    # located values are zeros of the determinant
    res = np.abs(char_det(pot, 0, sp.values.ravel()))
    assert res.max() < 1e-9


def test_closed_form_constant_q_agrees_with_propagator():
    pot = PotentialGrid.constant(0.0, 0.5j, M=3)
    lam = np.linspace(-6, 6, 13) + 0.25j
    assert np.allclose(char_det(pot, 1, lam), closed_form_constant_q(0.5j, 1, lam), atol=1e-11)


def test_located_eps_square_summable():
    sp = locate_spectrum(PotentialGrid.constant(0.0, 0.3, M=5), 0, 16)
    e2 = np.sum(np.abs(sp.eps) ** 2, axis=1)
    tail = np.cumsum(e2[::-1])[::-1]
    # eps ~ a^2/(4n): the squared mass beyond |n| = 8 is tiny
    assert tail[-8] < 1e-4
