import numpy as np
import pytest

from heattrace.fdsolve import fd_data_from_triple, fd_solve, mollify_atoms
from heattrace.fixtures import get_fixture
from heattrace.verify import fd_convergence_order

zero = lambda t: 0.0 * np.asarray(t)
one = lambda t: 1.0 + 0.0 * np.asarray(t)


def test_eigenmode_decay(dom):
    sol = fd_solve(dom, np.sin, zero, zero, 1.0, 1 / 128, 1 / 128)
    x, t = np.array([0.5, 1.5, 2.5]), np.array([0.2, 0.5, 1.0])
    assert np.allclose(sol(x, t), np.exp(-t) * np.sin(x), atol=1e-4)


def test_second_order_convergence(dom):
    rep = fd_convergence_order(dom)
    chk = rep.get("fd_observed_order")
    assert chk.passed
    assert chk.measured > 1.8


def test_boundary_value_one_stays_in_range(dom):
    sol = fd_solve(dom, lambda x: 0.0 * x, one, one, 1.0, 1 / 64, 1 / 64)
    assert sol.min_value >= -1e-12
    assert sol.values.max() <= 1.0 + 1e-12


def test_mollified_atoms_keep_mass_and_moment():
    xs = np.linspace(0, np.pi, 129)
    rho = mollify_atoms(xs, [(1.234, 0.7)])
    h = xs[1] - xs[0]
    assert np.sum(rho) * h == pytest.approx(0.7)
    assert np.sum(rho * xs) * h == pytest.approx(0.7 * 1.234)


def test_data_from_triple_rejects_lateral_atoms(dom):
    with pytest.raises(ValueError):
        fd_data_from_triple(get_fixture("lateral-atom"), dom, 1 / 64)


def test_step_validation(dom):
    with pytest.raises(ValueError):
        fd_solve(dom, np.sin, zero, zero, 1.0, 0.0, 0.1)
