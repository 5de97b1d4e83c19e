import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_spectra.core import SpectrumTable
from dirac_spectra.errors import ConfigurationError, DomainError, ZeroFactorError
from dirac_spectra.forward import closed_form_constant_q, constant_q_spectrum, count_zeros_in_disk
from dirac_spectra.determinant import (
    DeterminantModel,
    delta0,
    delta0_product,
    delta_from_spectrum,
    f_at_integers,
    log_phi,
    phi,
    phi_direct,
    pw_l2_estimate,
    tail_bound,
)
from dirac_spectra.admissibility import counterexample_spectrum


def single_pair(theta, k, d1, d2=None, N=16):
    eps = np.zeros((2 * N + 1, 2), dtype=complex)
    eps[N + k] = [d1, d1 if d2 is None else d2]
    return SpectrumTable.from_eps(theta, eps)


def test_delta0_examples():
    assert delta0(0, 0.0) == 0
    assert np.allclose(delta0(0, np.array([1.0, -3.0, 7.0])), -2)
    assert delta0(0, 1j) == pytest.approx(-1 + math.cosh(math.pi))
    assert delta0(1, 1.0) == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("theta", [0, 1])
def test_delta0_product_form(theta):
    lam = np.array([0.3, 1.7 + 0.4j, -2.2])
    # truncation error of the product is O(|lam|^2 / N)
    err = np.abs(delta0_product(theta, lam, 4000) - delta0(theta, lam))
    assert err.max() < 5e-3 * (1 + np.abs(delta0(theta, lam)).max())
    err_small = np.abs(delta0_product(theta, lam, 16000) - delta0(theta, lam))
    assert err_small.max() < err.max() / 3


@pytest.mark.parametrize("theta", [0, 1])
def test_unperturbed_model_is_delta0(theta):
    m = DeterminantModel(SpectrumTable.free(theta, 8), 8)
    lam = np.array([0.7, 0.7 + 2j, -13.3, 2.0 + theta])
    assert np.allclose(delta_from_spectrum(m, lam), delta0(theta, lam), atol=1e-10, rtol=1e-12)


@settings(max_examples=60)
@given(re=st.floats(-30, 30), im=st.floats(-3, 3))
def test_unperturbed_parity(re, im):
    m = DeterminantModel(SpectrumTable.free(0, 8), 8)
    lam = complex(re, im)
    a, b = delta_from_spectrum(m, lam), delta_from_spectrum(m, -lam)
    assert abs(a - b) <= 1e-12 * (1 + abs(a))


def test_stored_eigenvalues_are_exact_zeros():
    sp = constant_q_spectrum(0.5, 0, 16)
    m = DeterminantModel(sp, 16)
    assert delta_from_spectrum(m, sp.pair(3)[0]) == 0
    assert np.all(delta_from_spectrum(m, sp.values.ravel()) == 0)


def test_zero_placement():
    sp = constant_q_spectrum(0.3, 1, 16)
    m = DeterminantModel(sp, 16)
    for c in sp.centers[12:21]:
        assert count_zeros_in_disk(m.evaluator(), c, 0.45) == 2


def test_phi_examples():
    m0 = DeterminantModel(SpectrumTable.free(0, 4), 4)
    assert phi(m0, 1.0 + 0.5j) == pytest.approx(1)
    m = DeterminantModel(single_pair(0, 1, 0.1, 0.0, N=4), 4)
    assert phi(m, 1.0) == pytest.approx(1.1, rel=1e-14)


def test_phi_constant_q_matches_forward():
    a = 0.5
    m = DeterminantModel(constant_q_spectrum(a, 0, 512), 512)
    lam = 5 + 0.3j
    ref = closed_form_constant_q(a, 0, lam) / delta0(0, lam)
    assert abs(phi(m, lam) - ref) < 1e-3 * abs(ref)


def test_branch_consistency():
    m = DeterminantModel(constant_q_spectrum(0.5j, 0, 64), 64)
    lam = np.array([3.0 + 0.1j, -7.5, 11 + 2j, 0.5 + 0.5j])
    assert np.allclose(phi(m, lam), phi_direct(m, lam), rtol=1e-12)
    assert np.allclose(np.exp(log_phi(m, lam)), phi_direct(m, lam), rtol=1e-12)


def test_phi_domain_errors():
    m = DeterminantModel(single_pair(0, 1, 0.5, 0.0, N=4), 4)
    with pytest.raises(DomainError):
        phi(m, 2.1)
    with pytest.raises(ZeroFactorError):
        phi(m, 2.5)


def test_truncation_beyond_stored_range():
    with pytest.raises(ConfigurationError):
        DeterminantModel(SpectrumTable.free(0, 4), 5)


def test_f_vanishes_for_free_spectrum():
    fs = f_at_integers(DeterminantModel(SpectrumTable.free(1, 10), 10), 12)
    # exact at the centres, rounding elsewhere
    assert np.all(fs.f[(fs.k - 1) % 2 == 0] == 0)
    assert fs.partial[-1] < 1e-12


@pytest.mark.parametrize("delta", [1e-2, 1e-3, 1e-4])
def test_single_pair_quadratic_bound(delta):
    k = 3
    m = DeterminantModel(single_pair(0, k, delta), 16)
    fs = f_at_integers(m, 8)
    f2k = fs.f[fs.k == 2 * k][0]
    # Delta0(lam) / (2k - lam)^2 -> -pi^2/2 at lam = 2k
    assert f2k == pytest.approx(-(math.pi ** 2) / 2 * delta ** 2, rel=1e-10)


def test_counterexample_f_sums_keep_growing():
    m = DeterminantModel(counterexample_spectrum(9), 512)
    fs = f_at_integers(m, 512)
    inc = [fs.partial[2 ** j] - fs.partial[2 ** (j - 1)] for j in range(5, 10)]
    assert min(inc) > 0.1


def test_partial_sums_monotone():
    fs = f_at_integers(DeterminantModel(constant_q_spectrum(0.3, 0, 64), 64), 40)
    assert np.all(np.diff(fs.partial) >= 0)
    rows = list(fs.rows())
    assert rows[0][0] == -40 and rows[-1][2] == fs.partial[-1]


def test_pw_l2_examples():
    assert pw_l2_estimate(DeterminantModel(SpectrumTable.free(0, 8), 8), 10, 0.05) < 1e-24
    m = DeterminantModel(constant_q_spectrum(0.3, 0, 256), 256)
    e32, e64 = pw_l2_estimate(m, 32, 0.01), pw_l2_estimate(m, 64, 0.01)
    assert 0 < e32 < math.inf and abs(e64 - e32) < 0.01 * e32


def test_pw_l2_single_pair_closed_form():
    d = 0.05
    m = DeterminantModel(single_pair(0, 2, d, N=8), 8)
    x = np.linspace(-20, 20, 8001)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = delta0(0, x) * (((4 + d - x) / (4 - x)) ** 2 - 1)
    # removable point: Delta0 has a double zero at the centre 4
    f[np.isnan(f)] = -(math.pi ** 2) / 2 * d ** 2
    ref = np.trapezoid(np.abs(f) ** 2, x)
    assert pw_l2_estimate(m, 20, 0.005) == pytest.approx(ref, rel=1e-10)


def test_tail_bound_dominates_true_tail():
    a = 0.5
    full = constant_q_spectrum(a, 0, 1024)
    T = 32
    m = DeterminantModel(full, T)
    lam = 3.3 + 0.4j
    n = full.n
    sel = np.abs(n) > T
    actual = np.sum(np.abs(full.eps[sel] / (full.centers[sel] - lam)[:, None]))
    tail_l2 = float(np.sqrt(np.sum(np.abs(full.eps[sel]) ** 2)))
    assert actual <= tail_bound(m, lam, tail_l2)
