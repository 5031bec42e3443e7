"""Check suites and their fault injections on small configurations."""
import json

import numpy as np
import pytest

from heattrace.fixtures import get_fixture
from heattrace.representation import field_from_function, solution_field
from heattrace.verify import (KERNEL_MUTATIONS, ROUNDTRIP_MUTATIONS, SuiteReport, add_boundary_singularity,
                              alternate_near_boundary, bounded_along, check_boundedness, check_bounds, check_lateral_convergence,
                              check_monotone_H, halve_on_subregion, kernel_check, oracle_compare, roundtrip)


def test_report_bookkeeping():
    rep = SuiteReport("demo")
    rep.add("b_check", "anchor b", True, 0.1, 1.0, runtime=3.0)
    rep.add("a_check", "anchor a", False, 2.0, 1.0)
    assert not rep.passed
    assert rep.failed() == ["a_check"]
    d = rep.to_dict()
    assert [c["name"] for c in d["checks"]] == ["a_check", "b_check"]
    assert "runtime" not in json.dumps(d)
    assert "FAIL" in rep.table()


def test_bounded_along():
    assert bounded_along([1.0, 1.5, 1.75, 1.875, 1.9375])[0]
    assert not bounded_along([1.0, 2.0, 3.0, 4.0, 5.0])[0]
    assert not bounded_along([1.0, 2.0, 4.0, 8.0])[0]


def test_kernel_suite_passes(dom):
    rep = kernel_check(dom, n_probes=30)
    assert rep.passed, rep.table()


@pytest.mark.parametrize("name", sorted(KERNEL_MUTATIONS))
def test_kernel_mutations_are_caught(dom, name):
    rep = kernel_check(dom, n_probes=30, mutation=name)
    for target in KERNEL_MUTATIONS[name][1]:
        assert not rep.get(target).passed, f"{name} not caught by {target}"


def test_bounds_and_their_mutation(dom):
    u = solution_field(get_fixture("boundary-value-one"), dom)
    assert check_bounds(u, n_probes=10).passed
    bad = check_bounds(halve_on_subregion(u, (0.5, 2.64), (0.6, 9)), n_probes=10)
    assert len(bad.failed()) >= 3


def test_boundedness_and_boundary_singularity(dom):
    u = solution_field(get_fixture("corner-atom"), dom)
    assert check_boundedness(u).passed
    assert not check_boundedness(add_boundary_singularity(u)).passed


def test_lateral_convergence_and_alternating_mutation(dom):
    tr = get_fixture("boundary-value-one")
    rep = check_lateral_convergence(tr, dom)
    assert rep.passed, rep.table()
    u = solution_field(tr, dom)
    bad = check_lateral_convergence(tr, dom, field=alternate_near_boundary(u))
    assert not bad.passed


def test_roundtrip_corner_atom_and_mutations(dom):
    tr = get_fixture("corner-atom")
    assert roundtrip(tr, dom).passed
    assert not roundtrip(tr, dom, mutation="scaled").get("lambda_absolute").passed
    assert set(ROUNDTRIP_MUTATIONS) == {"scaled", "contaminated"}


def test_oracle_eigenfunction(dom):
    rep = oracle_compare(get_fixture("eigenfunction"), dom, n_probes=5)
    assert rep.passed


def test_monotone_H_eigenfunction(dom):
    u = solution_field(get_fixture("eigenfunction"), dom)
    assert check_monotone_H(u, n_probes=4).passed


def test_monotone_H_catches_increasing_field(dom):
    # u growing in time makes the Green potential increase
    u = field_from_function(dom, 1.0, lambda x, t: np.exp(t) * np.sin(x))
    assert not check_monotone_H(u, n_probes=4, zero_nu=True).passed
