import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from heattrace.quadrature import (DivergenceError, envelope_integral, gauss_legendre_panels, integrate_adaptive,
                                  integrate_graded, integrate_lateral_time, integrate_mapped)


@given(st.integers(0, 12), st.floats(-2, 2), st.floats(0.1, 3))
def test_adaptive_integrates_polynomials(n, a, w):
    b = a + w
    r = integrate_adaptive(lambda x: x ** n, a, b, 1e-12)
    exact = (b ** (n + 1) - a ** (n + 1)) / (n + 1)
    assert r.converged
    assert r.value == pytest.approx(exact, rel=1e-10, abs=1e-12)


def test_adaptive_error_estimate_is_honest():
    for tol in (1e-4, 1e-8, 1e-12):
        r = integrate_adaptive(lambda x: np.sqrt(x), 0.0, 1.0, tol)
        assert abs(r.value - 2 / 3) <= max(r.error_estimate, 1e-15) * 10
        assert r.error_estimate <= tol


def test_adaptive_reversed_and_empty():
    assert integrate_adaptive(np.sin, 1.0, 0.0).value == pytest.approx(-(1 - np.cos(1.0)))
    assert integrate_adaptive(np.sin, 1.0, 1.0).value == 0.0


def test_adaptive_breakpoints_handle_kinks():
    r = integrate_adaptive(lambda x: np.abs(x - 0.3), 0.0, 1.0, 1e-13, breakpoints=[0.3])
    assert r.value == pytest.approx(0.045 + 0.245, abs=1e-13)


def test_adaptive_reports_non_convergence():
    r = integrate_adaptive(lambda x: np.sin(1 / np.maximum(x, 1e-12)), 0.0, 1.0, 1e-14, max_panels=50)
    assert not r.converged


def test_mapped_vectorized_components():
    lo = np.array([0.0, 1.0, -1.0])
    hi = np.array([1.0, 2.0, 1.0])
    r = integrate_mapped(lambda y: y ** 2, lo, hi, 1e-12)
    assert np.allclose(r.value, (hi ** 3 - lo ** 3) / 3, atol=1e-12)


def test_graded_singular_integrand():
    r = integrate_graded(lambda x: x ** -0.5, 0.0, 1.0, 0.5, 1e-10)
    assert r.value == pytest.approx(2.0, abs=1e-8)
    r = integrate_graded(lambda x: x * x ** -1.5, 0.0, 1.0, 1.5, 1e-10, weighted=True)
    assert r.value == pytest.approx(2.0, abs=1e-8)


def test_graded_detects_divergence():
    with pytest.raises(DivergenceError):
        integrate_graded(lambda x: 1 / x, 0.0, 1.0, 1.0)


@given(st.integers(1, 3), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_envelope_integral_closed_form(n, delta, hi):
    c1, c2 = 1.3, 0.25
    f = lambda tau: c1 * tau ** (-(n + 1) / 2) * np.exp(-c2 * delta ** 2 / tau)
    r = integrate_adaptive(f, 0.0, hi, 1e-12, initial_panels=32)
    assert envelope_integral(n, delta, c1, c2, 0.0, hi) == pytest.approx(r.value, rel=1e-7, abs=1e-14)


def test_lateral_time_integral_of_boundary_layer():
    # int_0^1 delta/(2 sqrt(pi)) tau^{-3/2} exp(-delta^2/(4 tau)) dtau = erfc(delta/2)
    delta = 0.05
    f = lambda s: delta / (2 * np.sqrt(np.pi)) * (1.0 - s) ** -1.5 * np.exp(-delta ** 2 / (4 * (1.0 - s)))
    r = integrate_lateral_time(f, 0.0, 1.0, 1e-10, n=2, delta=delta, c1=delta / (2 * np.sqrt(np.pi)), c2=0.25)
    assert r.value == pytest.approx(special.erfc(delta / 2), abs=1e-9)
    assert r.converged


def test_gauss_legendre_panels_weights():
    x, w = gauss_legendre_panels([0.0, 0.5, 2.0], 8)
    assert w.sum() == pytest.approx(2.0)
    assert np.dot(w, x ** 5) == pytest.approx(2.0 ** 6 / 6)
