import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from heattrace.domain import DomainError, make_domain
from heattrace.kernels import (EllipticGreen, KernelEvaluator, green_1d, log_green_1d, log_normal_1d, normal_1d,
                               tail_bound)

L = np.pi
xs = st.floats(0.01, L - 0.01)
taus = st.floats(1e-3, 2.0)

# frozen reference values, series summed to machine precision
G_MID_1 = 0.2342779
NORMAL_MID_1 = 0.2339636
ELLIPTIC_1_2 = 0.3633802


def test_frozen_kernel_values(dom):
    k = KernelEvaluator(dom)
    assert float(k.heat_green(L / 2, 1.0, L / 2, 0.0).value) == pytest.approx(G_MID_1, abs=5e-8)
    assert float(k.heat_green_normal(L / 2, 1.0, "left", 0.0).value) == pytest.approx(NORMAL_MID_1, abs=5e-8)
    assert float(EllipticGreen(dom).green(1.0, 2.0)) == pytest.approx(ELLIPTIC_1_2, abs=5e-8)


def test_closed_form_series_at_long_times():
    # two-mode truncation is exact to e^{-9 tau} at long times
    tau = 3.0
    x, y = 0.7, 2.1
    ref = (2 / L) * sum(np.exp(-n * n * tau) * np.sin(n * x) * np.sin(n * y) for n in range(1, 40))
    assert float(green_1d(x, y, tau).value) == pytest.approx(ref, rel=1e-12)


@given(xs, xs, taus)
def test_symmetry_is_exact(x, y, tau):
    assert green_1d(x, y, tau).value == green_1d(y, x, tau).value


@given(xs, xs, st.floats(1e-2, 2.0))
def test_positivity(x, y, tau):
    assert green_1d(x, y, tau).value > 0
    assert normal_1d(x, tau).value > 0


@given(xs, xs, st.floats(0.02, 0.3))
def test_spectral_and_image_forms_agree_within_certified_errors(x, y, tau):
    spec = green_1d(x, y, tau, switch=0.0)
    img = green_1d(x, y, tau, switch=10.0)
    assert abs(spec.value - img.value) <= spec.error + img.error + 1e-15
    ns = normal_1d(x, tau, switch=0.0)
    ni = normal_1d(x, tau, switch=10.0)
    assert abs(ns.value - ni.value) <= ns.error + ni.error + 1e-15


@pytest.mark.parametrize("x,y,t,s,r", [(0.4, 2.0, 1.0, 0.0, 0.3), (1.5, 1.6, 0.2, 0.05, 0.1), (3.0, 0.2, 0.5, 0.1, 0.45)])
def test_semigroup(x, y, t, s, r):
    f = lambda z: green_1d(x, z, t - r).value * green_1d(z, y, r - s).value
    val, _ = quad(f, 0, L, epsabs=1e-13, points=[x, y], limit=200)
    assert val == pytest.approx(float(green_1d(x, y, t - s).value), abs=1e-9)


@given(xs, st.floats(1e-2, 2.0))
def test_total_mass_at_most_one(x, tau):
    val, _ = quad(lambda y: green_1d(x, y, tau).value, 0, L, epsabs=1e-12, points=[x], limit=200)
    assert val <= 1 + 1e-9


def test_normal_derivative_is_boundary_limit_of_kernel():
    tau, x = 0.3, 1.1
    eta = 1e-4
    fd = float(green_1d(x, eta, tau).value) / eta
    assert fd == pytest.approx(float(normal_1d(x, tau).value), rel=1e-6)


def test_log_forms_match_values_where_representable():
    for x, y, tau in [(1.0, 1.2, 1e-2), (0.3, 0.5, 5e-3)]:
        assert float(log_green_1d(x, y, tau)) == pytest.approx(np.log(float(green_1d(x, y, tau).value)), abs=1e-9)
    assert float(log_normal_1d(0.5, 1e-2)) == pytest.approx(np.log(float(normal_1d(0.5, 1e-2).value)), abs=1e-9)
    assert np.isfinite(log_green_1d(0.2, 2.9, 1e-4))


def test_tail_bounds_shrink_with_more_terms():
    assert tail_bound("spectral", 10, 0.1) < tail_bound("spectral", 5, 0.1)
    assert tail_bound("image", 5, 0.5) < tail_bound("image", 3, 0.5)
    with pytest.raises(ValueError):
        tail_bound("fourier", 3, 0.1)
    with pytest.raises(ValueError):
        tail_bound("image", 3, 0.0)


def test_reported_error_meets_tolerance():
    for tol in (1e-6, 1e-10):
        r = green_1d(np.linspace(0.1, 3, 20), 1.0, 0.2, tol=tol)
        assert np.all(r.error <= tol * 1.0 + 1e-14)


def test_evaluator_argument_checks(dom):
    k = KernelEvaluator(dom)
    with pytest.raises(ValueError):
        k.heat_green(1.0, 0.5, 1.0, 0.5)
    with pytest.raises(DomainError):
        k.heat_green(4.0, 1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        k.heat_green_normal(1.0, 1.0, "top", 0.0)
    with pytest.raises(DomainError):
        k.heat_green_shrunken(0.5, 1.0, 1.0, 1.0, 0.0)


def test_shrunken_kernel_is_kernel_of_smaller_interval(dom):
    k = KernelEvaluator(dom)
    eps = 0.2
    a = float(k.heat_green_shrunken(eps, 1.0, 0.5, 1.3, 0.0).value)
    b = float(green_1d(1.0 - eps, 1.3 - eps, 0.5, L - 2 * eps).value)
    assert a == b
    assert a < float(k.heat_green(1.0, 0.5, 1.3, 0.0).value)


def test_rectangle_kernel_is_product():
    d = make_domain("rectangle", (0, 2, 0, 1), 0.2)
    k = KernelEvaluator(d)
    v = float(k.heat_green(np.array([0.5, 0.4]), 0.3, np.array([1.2, 0.7]), 0.0).value)
    ref = float(green_1d(0.5, 1.2, 0.3, 2.0).value) * float(green_1d(0.4, 0.7, 0.3, 1.0).value)
    assert v == pytest.approx(ref, rel=1e-12)


@given(xs)
def test_elliptic_martin_kernel_is_normal_derivative(x):
    e = EllipticGreen(make_domain())
    h = 1e-6
    assert float(e.martin(x, "left")) == pytest.approx(float(e.green(x, h)) / h, rel=1e-5)
    assert float(e.green(x, 1.0)) <= e.bound_constant * 1.0 + 1e-15
