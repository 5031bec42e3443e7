import numpy as np
import pytest
from hypothesis import given, strategies as st

from heattrace.fixtures import default_domain, get_fixture
from heattrace.kernels import EllipticGreen
from heattrace.measures import LateralMeasure
from heattrace.representation import field_from_function, solution_field
from heattrace.traces import (ExtractionSchedule, H_function, TraceError, cutoff_boundary_test, default_schedule,
                              extract_traces, extrapolate, green_potential, lateral_identity, martin_kernel,
                              pair_initial_trace, pair_lateral_shrinking, riesz_martin_decompose_1d, sine_test,
                              standard_boundary_tests)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.5, 2.0))
def test_extrapolation_removes_first_order_error(limit, c, order):
    levels = 0.1 * 0.5 ** np.arange(6)
    est = extrapolate(levels, limit + c * levels)
    assert est.value == pytest.approx(limit, abs=1e-12)
    est = extrapolate(levels, limit + c * levels ** 2, order=2.0)
    assert est.value == pytest.approx(limit, abs=1e-12)
    if abs(c) > 1e-3:
        assert extrapolate(levels, limit + c * levels).order == pytest.approx(1.0, abs=1e-6)


def test_schedule_validation(dom):
    with pytest.raises(ValueError):
        ExtractionSchedule((0.1, 0.2), (0.01, 0.005))
    with pytest.raises(ValueError):
        ExtractionSchedule((0.1,), (0.01,))
    with pytest.raises(ValueError):
        ExtractionSchedule((0.5, 0.25), (0.01, 0.005)).check(dom, 1.0)
    s = default_schedule(dom)
    assert s.epsilons[0] == dom.epsilon0 and len(s.times) == 8


def test_initial_pairing_of_eigenfunction(dom):
    u = solution_field(get_fixture("eigenfunction"), dom)
    est = pair_initial_trace(u, sine_test(dom), default_schedule(dom))
    assert est.value == pytest.approx(np.pi / 2, abs=1e-7)


def test_initial_pairing_of_corner_atom(dom):
    # int sin(x) u dx -> lambda_left * d(sin)/dn at the left end
    u = solution_field(get_fixture("corner-atom"), dom)
    est = pair_initial_trace(u, sine_test(dom), default_schedule(dom))
    assert est.value == pytest.approx(0.3, abs=1e-4)


def test_pairing_refuses_schedule_below_floor(dom):
    u = solution_field(get_fixture("interior-atom"), dom)
    with pytest.raises(TraceError):
        pair_initial_trace(u, sine_test(dom), default_schedule(dom))


def test_shrinking_pairing_and_identity_agree_on_boundary_value_one(dom):
    u = solution_field(get_fixture("boundary-value-one"), dom)
    hs = [cutoff_boundary_test(0.2, 0.6, 0.1, 1.0, 0.0)]
    ident = lateral_identity(u, hs)
    shrink = pair_lateral_shrinking(u, hs[0], default_schedule(dom))
    assert ident.values[0] == pytest.approx(0.3, abs=1e-4)
    assert float(shrink.value) == pytest.approx(0.3, abs=1e-6)


def test_standard_boundary_tests_shapes():
    hs = standard_boundary_tests()
    assert len(hs) == 5
    t = np.linspace(0, 1, 1001)
    for h in hs:
        for side in ("left", "right"):
            v = h.value(side, t)
            assert np.all(v >= 0)
            assert np.all(v[(t < h.support[0]) | (t > h.support[1])] == 0)
            dv = np.gradient(v, t)
            assert np.allclose(dv[5:-5], h.dt(side, t)[5:-5], atol=2e-2 * max(1.0, np.abs(dv).max()))


def test_green_potential_of_constant(dom):
    u = field_from_function(dom, 1.0, lambda x, t: np.ones_like(x))
    xs = np.linspace(0.2, 3.0, 9)
    pot = green_potential(u, 0.5, xs)
    assert np.allclose(pot.values, xs * (np.pi - xs) / 2, atol=1e-12)


@given(st.floats(0.05, np.pi - 0.05))
def test_martin_kernel_matches_elliptic_green(x):
    d = default_domain()
    e = EllipticGreen(d)
    assert float(martin_kernel(d, x, "left")) == pytest.approx(float(e.martin(x, "left")))
    assert float(martin_kernel(d, x, "right")) == pytest.approx(float(e.martin(x, "right")))


def test_riesz_martin_recovers_synthetic_split(dom):
    a, b = dom.bounds
    xs = np.linspace(0.1, np.pi - 0.1, 121)
    # mu = sin(x) dx gives G mu = sin(x); add 0.3 M_left + 0.2 M_right and an atom of 0.5 at a node
    xa = xs[60]
    atom = 0.5 * np.where(xs < xa, xs * (np.pi - xa), xa * (np.pi - xs)) / np.pi
    w = np.sin(xs) + 0.3 * martin_kernel(dom, xs, "left") + 0.2 * martin_kernel(dom, xs, "right") + atom
    mu, lam, diag = riesz_martin_decompose_1d(dom, xs, w)
    assert lam.mass_at("left") == pytest.approx(0.3, abs=2e-3)
    assert lam.mass_at("right") == pytest.approx(0.2, abs=2e-3)
    assert len(mu.atoms) == 1 and mu.atoms[0][0] == pytest.approx(xa, abs=xs[1] - xs[0])
    assert mu.atoms[0][1] == pytest.approx(0.5, abs=5e-3)


def test_riesz_martin_rejects_non_superharmonic(dom):
    xs = np.linspace(0.1, np.pi - 0.1, 51)
    with pytest.raises(TraceError):
        riesz_martin_decompose_1d(dom, xs, xs ** 2)


def test_H_function_of_eigenfunction(dom):
    # w(x, t) = exp(-t) sin x and nu = 0
    u = solution_field(get_fixture("eigenfunction"), dom)
    x = np.array([0.5, 1.5])
    H, err = H_function(u, LateralMeasure(), 0.9, x, 0.3)
    assert np.allclose(H, np.exp(-0.3) * np.sin(x), atol=1e-7)
    with pytest.raises(ValueError):
        H_function(u, LateralMeasure(), 0.9, x, 0.95)


def test_extract_traces_corner_atom(dom):
    u = solution_field(get_fixture("corner-atom"), dom)
    rep = extract_traces(u, default_schedule(dom), np.linspace(0.05, 0.95, 5))
    assert rep.lambda_estimate.mass_at("left") == pytest.approx(0.3, abs=1e-3)
    assert rep.lambda_estimate.mass_at("right") == pytest.approx(0.0, abs=1e-3)
    assert np.max(np.abs(rep.diagnostics["lateral"]["sides"]["left"]["mass"])) < 1e-3
