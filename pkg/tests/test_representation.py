import numpy as np
import pytest
from hypothesis import given, strategies as st

from heattrace.domain import DomainError
from heattrace.fdsolve import fd_data_from_triple, fd_solve
from heattrace.fixtures import default_domain, exact_solution, get_fixture
from heattrace.kernels import green_1d, normal_1d
from heattrace.measures import add_triples, scale_triple
from heattrace.representation import (RepresentationConfig, evaluate_on_grid, evaluate_solution,
                                      field_from_function, interior_representation, solution_field)

# odd-mode series for boundary value one, frozen
BV_MID_HALF = 0.2324550345

xs = st.floats(0.02, np.pi - 0.02)
ts = st.floats(0.02, 1.0)


def test_boundary_value_one_frozen(dom):
    ev = evaluate_solution(get_fixture("boundary-value-one"), dom, np.pi / 2, 0.5)
    assert float(ev.value) == pytest.approx(BV_MID_HALF, abs=1e-9)
    assert float(ev.error) <= 1e-9


def test_boundary_value_one_against_series(dom):
    x, t = np.array([0.4, 1.3, 2.9]), np.array([0.1, 0.4, 0.95])
    k = np.arange(1, 4001, 2)[:, None]
    series = 1.0 - (4 / np.pi) * np.sum(np.exp(-k ** 2 * t) * np.sin(k * x) / k, axis=0)
    assert np.allclose(evaluate_solution(get_fixture("boundary-value-one"), dom, x, t).value, series, atol=2e-9)


@given(xs, ts)
def test_eigenfunction_exact(x, t):
    ev = evaluate_solution(get_fixture("eigenfunction"), default_domain(), x, t)
    assert abs(float(ev.value) - float(exact_solution("eigenfunction")(x, t))) <= max(float(ev.error), 1e-12)


def test_atoms_reduce_to_kernels(dom):
    x, t = np.array([0.3, 1.5, 2.8]), np.array([0.2, 0.6, 0.9])
    ev = lambda name: evaluate_solution(get_fixture(name), dom, x, t).value
    assert np.allclose(ev("corner-atom"), 0.3 * normal_1d(x, t).value, rtol=1e-9)
    assert np.allclose(ev("interior-atom"), green_1d(x, np.pi / 2, t).value, rtol=1e-9)
    lag = np.maximum(t - 0.5, 1e-9)
    assert np.allclose(ev("lateral-atom"), np.where(t > 0.5, normal_1d(x, lag).value, 0.0), rtol=1e-9, atol=1e-14)


@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0), xs, ts)
def test_linearity_in_the_triple(c1, c2, x, t):
    d = default_domain()
    a, b = get_fixture("corner-atom"), get_fixture("lateral-cutoff")
    combo = add_triples(scale_triple(a, c1), scale_triple(b, c2))
    lhs = evaluate_solution(combo, d, x, t)
    rhs = c1 * evaluate_solution(a, d, x, t).value + c2 * evaluate_solution(b, d, x, t).value
    assert abs(float(lhs.value) - float(rhs)) <= 3 * float(lhs.error) + 1e-12


@given(xs, ts)
def test_solutions_are_nonnegative(x, t):
    for name in ("boundary-value-one", "blowup", "lateral-cutoff"):
        ev = evaluate_solution(get_fixture(name), default_domain(), x, t)
        assert float(ev.value) >= -float(ev.error)


def test_blowup_solution_matches_fd(dom):
    tr = get_fixture("blowup")
    x, t = np.array([0.5, 1.5, 2.5]), np.array([0.3, 0.6, 0.9])
    u0, gl, gr = fd_data_from_triple(tr, dom, 1 / 256)
    fd = fd_solve(dom, u0, gl, gr, 1.0, 1 / 256, 1 / 256)(x, t)
    assert np.allclose(evaluate_solution(tr, dom, x, t).value, fd, rtol=2e-3)


def test_grid_evaluation_and_errors(dom):
    fld = evaluate_on_grid(get_fixture("eigenfunction"), dom, np.linspace(0.1, 3.0, 5), [0.1, 0.5])
    xs_, ts_, vals, errs = fld.grid_cache
    assert vals.shape == (2, 5)
    assert np.all(errs <= 1e-9)
    assert np.allclose(vals, np.exp(-ts_[:, None]) * np.sin(xs_[None, :]), atol=1e-9)


def test_tolerance_controls_error(dom):
    loose = evaluate_solution(get_fixture("lateral-cutoff"), dom, 0.2, 0.5, RepresentationConfig(tolerance=1e-5))
    tight = evaluate_solution(get_fixture("lateral-cutoff"), dom, 0.2, 0.5, RepresentationConfig(tolerance=1e-11, kernel_tolerance=1e-13))
    assert float(tight.error) <= 1e-11
    assert abs(float(loose.value) - float(tight.value)) <= float(loose.error) + float(tight.error)


def test_argument_checks(dom):
    tr = get_fixture("eigenfunction")
    with pytest.raises(DomainError):
        evaluate_solution(tr, dom, 0.0, 0.5)
    with pytest.raises(DomainError):
        evaluate_solution(tr, dom, 1.0, 0.0)
    with pytest.raises(DomainError):
        evaluate_solution(tr, dom, 1.0, 1.5)
    with pytest.raises(DomainError, match="atomic"):
        evaluate_solution(get_fixture("interior-atom"), dom, 1.0, 1e-5)


@pytest.mark.parametrize("eps,s", [(0.2, 0.3), (0.05, 0.1)])
def test_interior_representation_reproduces_solution(dom, eps, s):
    u = solution_field(get_fixture("boundary-value-one"), dom)
    parts = interior_representation(u, eps, s, 1.0, 0.7)
    assert parts.total == pytest.approx(float(u(1.0, 0.7)), abs=1e-6)


def test_field_from_function(dom):
    u = field_from_function(dom, 1.0, lambda x, t: x * t, error=1e-3)
    ev = u.evaluate(np.array([1.0, 2.0]), 0.5)
    assert np.allclose(ev.value, [0.5, 1.0]) and np.allclose(ev.error, 1e-3)
