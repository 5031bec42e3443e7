from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heattrace.fixtures import FIXTURES, default_domain, get_fixture
from heattrace.measures import (CornerMeasure, Density, InteriorMeasure, LateralMeasure, MeasureError, TraceTriple,
                                add_triples, cutoff, empty_triple, integrate_against, lateral_mass, parse_triple,
                                parse_triple_text, scale_triple, serialize_triple, triple_to_dict, validate_triple,
                                weighted_mass)

masses = st.floats(0.0, 5.0)
sides = st.sampled_from(["left", "right"])
FIXTURE_DIR = Path(__file__).resolve().parents[1] / "fixtures"


@st.composite
def triples(draw):
    mu_atoms = tuple((draw(st.floats(0.1, 3.0)), draw(masses)) for _ in range(draw(st.integers(0, 2))))
    dens = ()
    if draw(st.booleans()):
        dens = (Density((0.0, np.pi), samples=tuple(draw(st.lists(masses, min_size=1, max_size=5)))),)
    lam = CornerMeasure(tuple((draw(sides), draw(masses)) for _ in range(draw(st.integers(0, 2)))))
    nu_atoms = tuple((draw(sides), draw(st.floats(0.05, 0.95)), draw(masses)) for _ in range(draw(st.integers(0, 2))))
    nu_dens = (Density((0.1, 0.9), expr="1 + t", side=draw(sides), weight=draw(masses)),) if draw(st.booleans()) else ()
    return TraceTriple(InteriorMeasure(mu_atoms, dens), lam, LateralMeasure(nu_atoms, nu_dens, 1.0), 1.0)


@given(triples())
def test_serialization_round_trip(tr):
    text = serialize_triple(tr)
    back = parse_triple_text(text)
    assert serialize_triple(back) == text
    assert back == tr


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixture_files_match_builtin_fixtures(name, dom):
    tr = parse_triple(FIXTURE_DIR / f"{name}.json", dom)
    assert tr == get_fixture(name)


@pytest.mark.parametrize("text,needle", [
    ('{"schema": "heattrace.triple/1", "mu": {"atoms": [1,}}', "line 1, column"),
    ('{"schema": "other"}', "document.schema"),
    ('{"schema": "heattrace.triple/1", "extra": 1}', "unknown key"),
    ('{"schema": "heattrace.triple/1", "mu": {"atoms": [{"x": 1.0, "mass": -1}]}}', "mu.atoms[0].mass"),
    ('{"schema": "heattrace.triple/1", "mu": {"atoms": [{"x": 1.0}]}}', "missing 'mass'"),
    ('{"schema": "heattrace.triple/1", "nu": {"densities": [{"segment": [0, 1], "expr": "1"}]}}', "missing 'side'"),
    ('{"schema": "heattrace.triple/1", "nu": {"atoms": [{"side": "left", "t": 2.0, "mass": 1}]}}', "outside"),
    ('{"schema": "heattrace.triple/1", "mu": {"densities": [{"segment": [0, 1], "samples": [1, -2]}]}}', "negative"),
])
def test_malformed_documents_name_the_problem(text, needle):
    with pytest.raises(MeasureError) as exc:
        parse_triple_text(text)
    assert needle in str(exc.value)


def test_domain_validation(dom):
    bad_atom = '{"schema": "heattrace.triple/1", "mu": {"atoms": [{"x": 4.0, "mass": 1}]}}'
    with pytest.raises(MeasureError, match="not interior"):
        parse_triple_text(bad_atom, dom)
    bad_side = '{"schema": "heattrace.triple/1", "lambda": {"atoms": [{"side": "top", "mass": 1}]}}'
    with pytest.raises(MeasureError, match="unknown side"):
        parse_triple_text(bad_side, dom)
    negative = '{"schema": "heattrace.triple/1", "mu": {"densities": [{"segment": [0, 3], "expr": "x - 1"}]}}'
    with pytest.raises(MeasureError, match="negative"):
        parse_triple_text(negative, dom)


def test_pi_literal_is_accepted():
    tr = parse_triple_text('{"schema": "heattrace.triple/1", "mu": {"densities": [{"segment": [0, "pi"], "expr": "sin(x)"}]}}')
    assert tr.mu.densities[0].segment == (0.0, np.pi)


def test_weighted_masses(dom):
    assert weighted_mass(get_fixture("eigenfunction").mu, dom).value == pytest.approx(2.0, abs=1e-8)
    assert weighted_mass(get_fixture("blowup").mu, dom).value == pytest.approx(np.pi, abs=1e-8)


@pytest.mark.parametrize("alpha", [0.0, 1.9])
def test_nonintegrable_blowup_is_rejected(dom, alpha):
    m = InteriorMeasure(densities=(Density((0.0, np.pi), expr="delta**-2.5"),), blowup_exponent=alpha)
    with pytest.raises(MeasureError, match="diverges"):
        weighted_mass(m, dom)
    with pytest.raises(MeasureError):
        InteriorMeasure(blowup_exponent=2.0)


def test_lateral_mass_of_cutoff_density():
    # plateau from 0.02 to 0.5 minus half the rise width, on both sides
    assert lateral_mass(get_fixture("lateral-cutoff").nu, 0.5).value == pytest.approx(2 * 0.44, abs=1e-8)
    with pytest.raises(MeasureError):
        lateral_mass(LateralMeasure(), 1.0)


def test_cutoff_shape():
    c = cutoff(np.array([0.0, 0.02, 0.06, 0.1, 0.5, 0.98, 1.0]), 0.02, 0.98, 0.08)
    assert c[0] == 0 and c[1] == 0 and 0 < c[2] < 1 and c[3] == 1 and c[4] == 1 and c[5] == 0


@given(triples(), st.floats(0.0, 3.0))
def test_pairing_is_linear_under_scaling(tr, c):
    d = default_domain()
    f = lambda x: np.sin(x) + 0.5
    a = integrate_against(scale_triple(tr, c).mu, f, 1e-10, domain=d).value
    b = integrate_against(tr.mu, f, 1e-10, domain=d).value
    assert a == pytest.approx(c * b, rel=1e-8, abs=1e-9)
    g = lambda side, t: np.ones_like(t) * (2.0 if side == "left" else 1.0)
    a = integrate_against(scale_triple(tr, c).nu, g, 1e-10).value
    b = integrate_against(tr.nu, g, 1e-10).value
    assert a == pytest.approx(c * b, rel=1e-8, abs=1e-9)


@given(triples(), triples())
def test_pairing_is_additive(t1, t2):
    g = lambda side, t: 1.0 + np.asarray(t)
    s = integrate_against(add_triples(t1, t2).nu, g, 1e-10).value
    assert s == pytest.approx(integrate_against(t1.nu, g, 1e-10).value + integrate_against(t2.nu, g, 1e-10).value,
                              rel=1e-8, abs=1e-9)
    h = lambda side: 3.0 if side == "left" else 1.0
    assert integrate_against(add_triples(t1, t2).lam, h).value == pytest.approx(
        integrate_against(t1.lam, h).value + integrate_against(t2.lam, h).value)


def test_negative_scaling_rejected():
    with pytest.raises(MeasureError):
        scale_triple(get_fixture("corner-atom"), -1.0)


def test_empty_triple_is_valid(dom):
    validate_triple(empty_triple(), dom)
    assert triple_to_dict(empty_triple())["mu"] == {"atoms": [], "densities": [], "blowup_exponent": 0.0}


def test_horizon_mismatch():
    with pytest.raises(MeasureError, match="horizon"):
        TraceTriple(nu=LateralMeasure(horizon=2.0), horizon=1.0)
    with pytest.raises(MeasureError):
        add_triples(empty_triple(1.0), empty_triple(2.0))
