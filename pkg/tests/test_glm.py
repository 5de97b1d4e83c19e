import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_spectra.core import free_y0
from dirac_spectra.construction import build_construction
from dirac_spectra.determinant import DeterminantModel
from dirac_spectra.errors import ValidationError
from dirac_spectra.forward import constant_q_spectrum
from dirac_spectra.glm import (
    GlmData,
    default_x_grid,
    hermitian_form,
    kernel_F,
    kernel_matrix,
    mode_combination,
    nystrom_operator,
    parseval_defect,
    row_norms,
    sigma_min,
    solvability_check,
)


@pytest.fixture(scope="module")
def mild():
    model = DeterminantModel(constant_q_spectrum(0.04, 0, 128), 128)
    return GlmData.from_construction(build_construction(model, 48), 32)


def test_reference_kernel_cancels():
    data = GlmData.reference(24)
    x = np.linspace(0, math.pi, 32)
    assert np.max(np.abs(kernel_matrix(data, x, x))) < 1e-12


def test_reference_operator_is_identity():
    data = GlmData.reference(16)
    A = nystrom_operator(data, 2.0, 40)
    assert np.max(np.abs(A - np.eye(80))) < 1e-12
    assert sigma_min(data, 2.0, 40) == pytest.approx(1, abs=1e-12)


def test_single_node_kernel():
    # one shifted node: F = z Y0(x, l) Y0(t, l)^T - (1/pi) Y0(x, 0) Y0(t, 0)^T
    data = GlmData(np.array([0.3]), np.array([0.4 + 0.1j]), 0)
    x, t = 1.1, 2.5
    ref = (0.4 + 0.1j) * np.outer(free_y0(x, 0.3), free_y0(t, 0.3)) - np.outer(free_y0(x, 0.0), free_y0(t, 0.0)) / math.pi
    assert np.allclose(kernel_F(data, x, t), ref, atol=1e-15)


def test_kernel_transpose_symmetry(mild):
    x = np.linspace(0, math.pi, 17)
    F = kernel_matrix(mild, x, x)
    assert np.allclose(F, np.transpose(F, (1, 0, 3, 2)), atol=1e-13)


def test_half_plane_required():
    n = np.arange(-2, 3).astype(float)
    z = np.full(5, 1 / math.pi, dtype=complex)
    z[3] = -0.5 + 0.2j
    with pytest.raises(ValidationError):
        GlmData(n, z, 2)
    with pytest.raises(ValidationError):
        GlmData(n, np.full(5, 0.3 + 0j), 3)
    with pytest.raises(ValidationError):
        kernel_F(GlmData.reference(2), 4.0, 0.0)
    with pytest.raises(ValidationError):
        nystrom_operator(GlmData.reference(2), 1.0, 4)


def test_mild_target_is_solvable(mild):
    rows = solvability_check(mild, default_x_grid(4), grid_points=96)
    assert all(r.passed for r in rows)
    assert all(0.1 < r.sigma_min <= 1.0 + 1e-9 for r in rows)
    again = solvability_check(mild, default_x_grid(4), grid_points=96, threads=2)
    assert [r.sigma_min for r in again] == [r.sigma_min for r in rows]


def test_sigma_min_converges_with_grid(mild):
    a, b = sigma_min(mild, math.pi, 96), sigma_min(mild, math.pi, 192)
    assert abs(a - b) < 1e-4


def test_default_x_grid():
    assert np.allclose(default_x_grid(4), [math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi])
    with pytest.raises(ValidationError):
        default_x_grid(0)


def test_row_norms(mild):
    assert np.max(row_norms(GlmData.reference(8), [0.5, 2.0])) < 1e-12
    r = row_norms(mild, [0.5, 1.5, 3.0])
    assert np.all(np.isfinite(r)) and np.all(r > 0)


def test_parseval_single_mode():
    t = np.linspace(0, math.pi, 1025)
    f = mode_combination({3: 1.0}, t)
    assert parseval_defect(f, 8) < 1e-10
    # a mode outside the window is missed entirely; its norm is pi
    assert parseval_defect(f, 2) == pytest.approx(math.pi, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2), min_size=17, max_size=17))
def test_parseval_mode_combinations(coeffs):
    t = np.linspace(0, math.pi, 1025)
    f = mode_combination(dict(zip(range(-8, 9), coeffs)), t)
    norm2 = math.pi * sum(abs(c) ** 2 for c in coeffs)
    assert parseval_defect(f, 8) <= 1e-9 * (1 + norm2)


def test_parseval_rejects_bad_samples():
    with pytest.raises(ValidationError):
        parseval_defect(np.zeros((10, 3)), 4)
    with pytest.raises(ValidationError):
        parseval_defect(np.zeros((10, 2)), 0)


@pytest.mark.parametrize("x", [1.0, math.pi])
def test_hermitian_form_identity(mild, x):
    rng = np.random.default_rng(7)
    f = rng.normal(size=(64, 2)) + 1j * rng.normal(size=(64, 2))
    direct, series = hermitian_form(mild, x, f)
    assert abs(direct - series) <= 1e-10 * max(1.0, abs(direct))
    _, zero = hermitian_form(GlmData.reference(8), x, f)
    assert abs(zero) < 1e-10
