"""Named trace triples used by the checks, the CLI and the tests.

All live on the interval (0, pi) with horizon T = 1 unless stated.
"""
from __future__ import annotations

import numpy as np

from .domain import Domain, make_domain
from .measures import CornerMeasure, Density, InteriorMeasure, LateralMeasure, TraceTriple

__all__ = ["FIXTURES", "get_fixture", "default_domain", "exact_solution"]


def default_domain() -> Domain:
    return make_domain("interval", (0.0, np.pi), 0.3)


def eigenfunction(T: float = 1.0) -> TraceTriple:
    """(sin x dx, 0, 0); the solution is exp(-t) sin x."""
    mu = InteriorMeasure(densities=(Density((0.0, np.pi), expr="sin(x)"),))
    return TraceTriple(mu, CornerMeasure(), LateralMeasure(horizon=T), T)


def corner_atom(T: float = 1.0, mass: float = 0.3) -> TraceTriple:
    return TraceTriple(InteriorMeasure(), CornerMeasure((("left", mass),)), LateralMeasure(horizon=T), T)


def lateral_cutoff(T: float = 1.0) -> TraceTriple:
    """nu = c(t) dt on both ends, c a smooth plateau on (0.02, 0.98)."""
    dens = tuple(Density((0.0, T), expr="cutoff(t, 0.02, 0.98, 0.08)", side=s) for s in ("left", "right"))
    return TraceTriple(InteriorMeasure(), CornerMeasure(), LateralMeasure((), dens, T), T)


def boundary_value_one(T: float = 1.0) -> TraceTriple:
    """Boundary value 1 on both ends from t = 0, zero initial data."""
    dens = tuple(Density((0.0, T), samples=(1.0,), side=s) for s in ("left", "right"))
    return TraceTriple(InteriorMeasure(), CornerMeasure(), LateralMeasure((), dens, T), T)


def blowup(T: float = 1.0) -> TraceTriple:
    """mu = dx / delta(x): infinite mass, finite delta-weighted mass."""
    mu = InteriorMeasure(densities=(Density((0.0, np.pi), expr="1/delta"),), blowup_exponent=1.0)
    return TraceTriple(mu, CornerMeasure(), LateralMeasure(horizon=T), T)


def lateral_atom(T: float = 1.0, t0: float = 0.5, mass: float = 1.0) -> TraceTriple:
    return TraceTriple(InteriorMeasure(), CornerMeasure(), LateralMeasure((("left", t0, mass),), (), T), T)


def interior_atom(T: float = 1.0) -> TraceTriple:
    mu = InteriorMeasure(atoms=((np.pi / 2, 1.0),))
    return TraceTriple(mu, CornerMeasure(), LateralMeasure(horizon=T), T)


FIXTURES = {
    "eigenfunction": eigenfunction,
    "corner-atom": corner_atom,
    "lateral-cutoff": lateral_cutoff,
    "boundary-value-one": boundary_value_one,
    "blowup": blowup,
    "lateral-atom": lateral_atom,
    "interior-atom": interior_atom,
}


def get_fixture(name: str) -> TraceTriple:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}") from None


def exact_solution(name: str):
    """Closed form u(x, t) where one exists (eigenfunction only), else None."""
    if name == "eigenfunction":
        return lambda x, t: np.exp(-np.asarray(t)) * np.sin(np.asarray(x))
    return None
