"""Trace-triple data model: interior, corner and lateral measures as atoms plus
piecewise densities, with admissibility checks, pairings and a JSON schema.

Densities are either whitelisted expressions (``"sin(x)"``, ``"1/delta"``,
``"cutoff(t, 0.02, 0.98, 0.08)"``) or samples on nodes, linearly interpolated.
A single sample means a constant on the segment.
"""
from __future__ import annotations

import ast
import functools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .domain import Domain, delta as distance
from .quadrature import DivergenceError, QuadratureResult, integrate_adaptive, integrate_graded

__all__ = [
    "MeasureError",
    "Density",
    "InteriorMeasure",
    "CornerMeasure",
    "LateralMeasure",
    "TraceTriple",
    "SCHEMA",
    "weighted_mass",
    "lateral_mass",
    "integrate_against",
    "validate_triple",
    "parse_triple",
    "parse_triple_text",
    "serialize_triple",
    "triple_to_dict",
    "add_triples",
    "scale_triple",
    "empty_triple",
    "cutoff",
]

SCHEMA = "heattrace.triple/1"


class MeasureError(ValueError):
    """Schema or admissibility violation; the message names the offending entry."""


# ---------------------------------------------------------------- expressions

def _smooth_step(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


def cutoff(t, a, b, width):
    """C-infinity plateau: 0 outside (a, b), 1 on [a + width, b - width]."""
    t = np.asarray(t, dtype=float)
    return _smooth_step((t - a) / width) * _smooth_step((b - t) / width)


_FUNCS = {
    "sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
    "abs": np.abs, "tanh": np.tanh, "minimum": np.minimum, "maximum": np.maximum,
    "where": np.where, "cutoff": cutoff,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_VARS = {"x", "y", "t", "s", "delta"}
_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Compare,
    ast.Lt, ast.LtE, ast.Gt, ast.GtE,
)


@functools.lru_cache(maxsize=256)
def _compile(expr: str):
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise MeasureError(f"cannot parse expression {expr!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise MeasureError(f"disallowed construct {type(node).__name__} in {expr!r}")
        if isinstance(node, ast.Name) and node.id not in _FUNCS and node.id not in _CONSTS and node.id not in _VARS:
            raise MeasureError(f"unknown name {node.id!r} in {expr!r}")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise MeasureError(f"only whitelisted functions may be called in {expr!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise MeasureError(f"non-numeric constant in {expr!r}")
    return compile(tree, "<density>", "eval")


def _number(value, where: str) -> float:
    if isinstance(value, bool):
        raise MeasureError(f"{where}: expected a number")
    if isinstance(value, (int, float)):
        v = float(value)
    elif isinstance(value, str):
        try:
            v = float(eval(_compile(value), {"__builtins__": {}}, dict(_FUNCS, **_CONSTS)))
        except MeasureError:
            raise
        except Exception:
            raise MeasureError(f"{where}: {value!r} is not a constant expression") from None
    else:
        raise MeasureError(f"{where}: expected a number, got {type(value).__name__}")
    if not math.isfinite(v):
        raise MeasureError(f"{where}: value must be finite")
    return v


# ------------------------------------------------------------------ densities

@dataclass(frozen=True)
class Density:
    """Nonnegative density on ``segment`` (in x for mu, in t for nu)."""

    segment: tuple
    expr: str | None = None
    samples: tuple | None = None
    nodes: tuple | None = None
    side: str | None = None
    weight: float = 1.0

    def __post_init__(self):
        if (self.expr is None) == (self.samples is None):
            raise MeasureError("density needs exactly one of 'expr' or 'samples'")
        lo, hi = self.segment
        if not hi > lo:
            raise MeasureError(f"density segment {self.segment} is empty")
        if self.expr is not None:
            _compile(self.expr)
        else:
            if len(self.samples) == 0:
                raise MeasureError("density samples are empty")
            if self.nodes is not None and len(self.nodes) != len(self.samples):
                raise MeasureError("density nodes and samples differ in length")
            if min(self.samples) < 0:
                raise MeasureError("density samples must be nonnegative")
        if self.weight < 0:
            raise MeasureError("density weight must be nonnegative")

    @property
    def sample_nodes(self) -> np.ndarray:
        if self.nodes is not None:
            return np.asarray(self.nodes, dtype=float)
        return np.linspace(self.segment[0], self.segment[1], len(self.samples))

    def __call__(self, points, delta=None) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        lo, hi = self.segment
        inside = (p >= lo) & (p <= hi)
        if self.samples is not None:
            if len(self.samples) == 1:
                val = np.full(p.shape, float(self.samples[0]))
            else:
                val = np.interp(p, self.sample_nodes, np.asarray(self.samples, dtype=float))
        else:
            env = dict(_FUNCS, **_CONSTS, x=p, y=p, t=p, s=p, delta=delta if delta is not None else np.full(p.shape, np.nan))
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                val = np.broadcast_to(np.asarray(eval(_compile(self.expr), {"__builtins__": {}}, env), float), p.shape)
        return np.where(inside, self.weight * val, 0.0)


# ------------------------------------------------------------------- measures

@dataclass(frozen=True)
class InteriorMeasure:
    """mu: atoms ``(x, mass)`` plus densities; ``blowup_exponent`` alpha allows
    densities growing like ``delta^-alpha`` at the boundary (alpha < 2)."""

    atoms: tuple = ()
    densities: tuple = ()
    blowup_exponent: float = 0.0

    def __post_init__(self):
        for i, (_, m) in enumerate(self.atoms):
            if m < 0:
                raise MeasureError(f"mu.atoms[{i}]: negative mass {m}")
        if not 0 <= self.blowup_exponent < 2:
            raise MeasureError(f"mu.blowup_exponent={self.blowup_exponent}: delta-weighted mass needs 0 <= alpha < 2")

    def density(self, x, d: Domain) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        dl = distance(d, np.clip(x, *d.bounds))
        out = np.zeros(x.shape)
        for dens in self.densities:
            out = out + dens(x, dl)
        return out


@dataclass(frozen=True)
class CornerMeasure:
    """lambda: atoms ``(side, mass)`` at the ends of the interval."""

    atoms: tuple = ()

    def __post_init__(self):
        for i, (side, m) in enumerate(self.atoms):
            if m < 0:
                raise MeasureError(f"lambda.atoms[{i}]: negative mass {m}")

    def mass_at(self, side: str) -> float:
        return float(sum(m for s, m in self.atoms if s == side))


@dataclass(frozen=True)
class LateralMeasure:
    """nu: atoms ``(side, time, mass)`` plus per-side densities in t."""

    atoms: tuple = ()
    densities: tuple = ()
    horizon: float = 1.0

    def __post_init__(self):
        for i, (side, t, m) in enumerate(self.atoms):
            if m < 0:
                raise MeasureError(f"nu.atoms[{i}]: negative mass {m}")
            if not 0 < t < self.horizon:
                raise MeasureError(f"nu.atoms[{i}]: time {t} outside (0, {self.horizon})")
        for i, dens in enumerate(self.densities):
            if dens.side is None:
                raise MeasureError(f"nu.densities[{i}]: missing 'side'")
            if dens.segment[0] < 0 or dens.segment[1] > self.horizon:
                raise MeasureError(f"nu.densities[{i}]: segment {dens.segment} outside (0, {self.horizon})")

    def density(self, side: str, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for dens in self.densities:
            if dens.side == side:
                out = out + dens(t)
        return out

    def breakpoints(self, side: str | None = None) -> list:
        pts = set()
        for dens in self.densities:
            if side is None or dens.side == side:
                pts.update(dens.segment)
                if dens.samples is not None and len(dens.samples) > 1:
                    pts.update(dens.sample_nodes.tolist())
        return sorted(pts)


@dataclass(frozen=True)
class TraceTriple:
    mu: InteriorMeasure = field(default_factory=InteriorMeasure)
    lam: CornerMeasure = field(default_factory=CornerMeasure)
    nu: LateralMeasure = field(default_factory=LateralMeasure)
    horizon: float = 1.0

    def __post_init__(self):
        if self.horizon <= 0:
            raise MeasureError("horizon must be positive")
        if not math.isclose(self.nu.horizon, self.horizon):
            raise MeasureError(f"horizon mismatch: triple {self.horizon}, nu {self.nu.horizon}")


def empty_triple(horizon: float = 1.0) -> TraceTriple:
    return TraceTriple(nu=LateralMeasure(horizon=horizon), horizon=horizon)


def _scale_density(dens: Density, c: float) -> Density:
    return replace(dens, weight=dens.weight * c)


def scale_triple(tr: TraceTriple, c: float) -> TraceTriple:
    if c < 0:
        raise MeasureError("only nonnegative multiples keep a triple admissible")
    mu = InteriorMeasure(tuple((x, c * m) for x, m in tr.mu.atoms),
                         tuple(_scale_density(d, c) for d in tr.mu.densities), tr.mu.blowup_exponent)
    lam = CornerMeasure(tuple((s, c * m) for s, m in tr.lam.atoms))
    nu = LateralMeasure(tuple((s, t, c * m) for s, t, m in tr.nu.atoms),
                        tuple(_scale_density(d, c) for d in tr.nu.densities), tr.nu.horizon)
    return TraceTriple(mu, lam, nu, tr.horizon)


def add_triples(a: TraceTriple, b: TraceTriple) -> TraceTriple:
    if not math.isclose(a.horizon, b.horizon):
        raise MeasureError("cannot add triples with different horizons")
    mu = InteriorMeasure(a.mu.atoms + b.mu.atoms, a.mu.densities + b.mu.densities,
                         max(a.mu.blowup_exponent, b.mu.blowup_exponent))
    lam = CornerMeasure(a.lam.atoms + b.lam.atoms)
    nu = LateralMeasure(a.nu.atoms + b.nu.atoms, a.nu.densities + b.nu.densities, a.horizon)
    return TraceTriple(mu, lam, nu, a.horizon)


# ------------------------------------------------------------------- pairings

def _touching(d: Domain, seg) -> str | None:
    a, b = d.bounds
    lo_touch = seg[0] <= a + 1e-14
    hi_touch = seg[1] >= b - 1e-14
    if lo_touch and hi_touch:
        return "both"
    return "left" if lo_touch else "right" if hi_touch else None


def _pair_interior_density(m: InteriorMeasure, d: Domain, f, tol, compensated, graded=False) -> QuadratureResult:
    alpha = m.blowup_exponent
    value = 0.0
    err = 0.0
    evals = 0
    ok = True
    a, b = d.bounds

    for dens in m.densities:
        lo, hi = max(dens.segment[0], a), min(dens.segment[1], b)
        if hi <= lo:
            continue

        def g(x, dens=dens):
            fx = f(x)
            # a compensating factor that vanishes exactly wins over the blowup
            return np.where(fx == 0, 0.0, fx * dens(x, np.minimum(x - a, b - x)))

        sing = _touching(d, (lo, hi)) if alpha > 0 or graded else None
        if sing is None:
            res = integrate_adaptive(g, lo, hi, tol / max(len(m.densities), 1))
        else:
            res = integrate_graded(g, lo, hi, alpha, tol / max(len(m.densities), 1),
                                   weighted=compensated, singular=sing)
        value = value + res.value
        err = err + res.error_estimate
        evals += res.evaluations
        ok &= res.converged
    return QuadratureResult(value, err, evals, ok)


def integrate_against(measure, f: Callable, tol: float = 1e-6, *, domain: Domain | None = None,
                      T1: float | None = None, compensated: bool | None = None,
                      graded: bool = False) -> QuadratureResult:
    """Pair a measure with ``f``.

    * InteriorMeasure: ``f(x)``; needs ``domain``. ``compensated`` says that ``f``
      vanishes linearly at the boundary (default: whenever alpha >= 1).
      ``graded=True`` forces geometric meshes at the boundary, which also
      detects undeclared blowup.
    * CornerMeasure: ``f(side)``.
    * LateralMeasure: ``f(side, t)``; restricted to ``t < T1`` when given.
    """
    if isinstance(measure, InteriorMeasure):
        if domain is None:
            raise ValueError("pairing an interior measure needs the domain")
        atom_sum = sum(m * np.asarray(f(np.array([x])))[..., 0] for x, m in measure.atoms) if measure.atoms else 0.0
        comp = measure.blowup_exponent >= 1 if compensated is None else compensated
        res = _pair_interior_density(measure, domain, f, tol, comp, graded)
        return QuadratureResult(res.value + atom_sum, res.error_estimate, res.evaluations, res.converged)
    if isinstance(measure, CornerMeasure):
        val = sum(m * f(side) for side, m in measure.atoms) if measure.atoms else 0.0
        return QuadratureResult(val, 0.0, len(measure.atoms), True)
    if isinstance(measure, LateralMeasure):
        top = measure.horizon if T1 is None else T1
        value = 0.0
        for side, t, m in measure.atoms:
            if t < top:
                value = value + m * np.asarray(f(side, np.array([t])))[..., 0]
        err = 0.0
        evals = 0
        ok = True
        for dens in measure.densities:
            lo, hi = dens.segment[0], min(dens.segment[1], top)
            if hi <= lo:
                continue
            inner = [p for p in (dens.sample_nodes.tolist() if dens.samples is not None and len(dens.samples) > 1 else [])
                     if lo < p < hi]
            res = integrate_adaptive(lambda t, dens=dens: f(dens.side, t) * dens(t), lo, hi,
                                     tol / max(len(measure.densities), 1), breakpoints=inner)
            value = value + res.value
            err = err + res.error_estimate
            evals += res.evaluations
            ok &= res.converged
        return QuadratureResult(value, err, evals, ok)
    raise TypeError(f"cannot pair {type(measure).__name__}")


def weighted_mass(m: InteriorMeasure, d: Domain, tol: float = 1e-8) -> QuadratureResult:
    """Delta-weighted mass; raises MeasureError when it diverges."""
    try:
        res = integrate_against(m, lambda x: distance(d, np.clip(x, *d.bounds)), tol, domain=d,
                                compensated=True, graded=True)
    except DivergenceError as exc:
        raise MeasureError(f"mu is not admissible: delta-weighted mass diverges ({exc})") from None
    if not np.isfinite(res.value):
        raise MeasureError("mu is not admissible: delta-weighted mass is not finite")
    return res


def lateral_mass(n: LateralMeasure, T1: float, tol: float = 1e-8) -> QuadratureResult:
    """Mass of nu on the boundary times (0, T1)."""
    if not 0 < T1 < n.horizon:
        raise MeasureError(f"T1={T1} outside (0, {n.horizon})")
    return integrate_against(n, lambda side, t: np.ones_like(t), tol, T1=T1)


def validate_triple(tr: TraceTriple, d: Domain) -> None:
    """Admissibility gates: nonnegative densities, finite delta-weighted mass of
    mu, finite nu-mass on every (0, T1) with T1 < T."""
    a, b = d.bounds
    for i, dens in enumerate(tr.mu.densities):
        if dens.segment[0] < a - 1e-12 or dens.segment[1] > b + 1e-12:
            raise MeasureError(f"mu.densities[{i}]: segment {dens.segment} leaves the domain")
        x = np.linspace(max(dens.segment[0], a), min(dens.segment[1], b), 203)[1:-1]
        v = dens(x, np.minimum(x - a, b - x))
        if np.any(~np.isfinite(v)) or np.any(v < -1e-12):
            raise MeasureError(f"mu.densities[{i}]: density negative or non-finite inside the domain")
    for i, (x, _) in enumerate(tr.mu.atoms):
        if not a < x < b:
            raise MeasureError(f"mu.atoms[{i}]: x={x} not interior")
    for i, (side, _) in enumerate(tr.lam.atoms):
        if side not in d.sides:
            raise MeasureError(f"lambda.atoms[{i}]: unknown side {side!r}")
    for i, (side, _, _) in enumerate(tr.nu.atoms):
        if side not in d.sides:
            raise MeasureError(f"nu.atoms[{i}]: unknown side {side!r}")
    for i, dens in enumerate(tr.nu.densities):
        if dens.side not in d.sides:
            raise MeasureError(f"nu.densities[{i}]: unknown side {dens.side!r}")
        lo, hi = dens.segment
        t = np.linspace(lo, hi, 203)[1:-1]
        v = dens(t)
        if np.any(~np.isfinite(v)) or np.any(v < -1e-12):
            raise MeasureError(f"nu.densities[{i}]: density negative or non-finite inside its segment")
    weighted_mass(tr.mu, d, tol=1e-6)
    for frac in (0.5, 0.9, 0.99):
        res = lateral_mass(tr.nu, frac * tr.horizon, tol=1e-6)
        if not np.isfinite(res.value):
            raise MeasureError(f"nu mass on (0, {frac * tr.horizon}) is not finite")


# --------------------------------------------------------------------- schema

def _density_to_dict(dens: Density) -> dict:
    out = {"segment": [dens.segment[0], dens.segment[1]]}
    if dens.side is not None:
        out["side"] = dens.side
    if dens.expr is not None:
        out["expr"] = dens.expr
    else:
        out["samples"] = list(dens.samples)
        if dens.nodes is not None:
            out["nodes"] = list(dens.nodes)
    if dens.weight != 1.0:
        out["weight"] = dens.weight
    return out


def triple_to_dict(tr: TraceTriple) -> dict:
    return {
        "schema": SCHEMA,
        "horizon": tr.horizon,
        "mu": {
            "atoms": [{"x": x, "mass": m} for x, m in tr.mu.atoms],
            "densities": [_density_to_dict(d) for d in tr.mu.densities],
            "blowup_exponent": tr.mu.blowup_exponent,
        },
        "lambda": {"atoms": [{"side": s, "mass": m} for s, m in tr.lam.atoms]},
        "nu": {
            "atoms": [{"side": s, "t": t, "mass": m} for s, t, m in tr.nu.atoms],
            "densities": [_density_to_dict(d) for d in tr.nu.densities],
        },
    }


def serialize_triple(tr: TraceTriple) -> str:
    return json.dumps(triple_to_dict(tr), indent=2, sort_keys=True) + "\n"


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise MeasureError(f"{where}: expected an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise MeasureError(f"{where}: unknown key(s) {sorted(extra)}")


def _density_from_dict(obj, where, need_side):
    _check_keys(obj, {"segment", "expr", "samples", "nodes", "side", "weight"}, where)
    if "segment" not in obj or not isinstance(obj["segment"], list) or len(obj["segment"]) != 2:
        raise MeasureError(f"{where}.segment: expected [lo, hi]")
    seg = (_number(obj["segment"][0], f"{where}.segment[0]"), _number(obj["segment"][1], f"{where}.segment[1]"))
    side = obj.get("side")
    if need_side and side is None:
        raise MeasureError(f"{where}: missing 'side'")
    samples = obj.get("samples")
    nodes = obj.get("nodes")
    if samples is not None:
        samples = tuple(_number(v, f"{where}.samples[{j}]") for j, v in enumerate(samples))
        for j, v in enumerate(samples):
            if v < 0:
                raise MeasureError(f"{where}.samples[{j}]: negative density {v}")
    if nodes is not None:
        nodes = tuple(_number(v, f"{where}.nodes[{j}]") for j, v in enumerate(nodes))
    expr = obj.get("expr")
    if expr is not None and not isinstance(expr, str):
        raise MeasureError(f"{where}.expr: expected a string")
    weight = _number(obj.get("weight", 1.0), f"{where}.weight")
    try:
        return Density(seg, expr, samples, nodes, side, weight)
    except MeasureError as exc:
        raise MeasureError(f"{where}: {exc}") from None


def _mass(obj, where):
    if "mass" not in obj:
        raise MeasureError(f"{where}: missing 'mass'")
    m = _number(obj["mass"], f"{where}.mass")
    if m < 0:
        raise MeasureError(f"{where}.mass: negative mass {m}")
    return m


def triple_from_dict(obj: dict) -> TraceTriple:
    _check_keys(obj, {"schema", "horizon", "mu", "lambda", "nu"}, "document")
    if obj.get("schema") != SCHEMA:
        raise MeasureError(f"document.schema: expected {SCHEMA!r}, got {obj.get('schema')!r}")
    horizon = _number(obj.get("horizon", 1.0), "horizon")
    mu_obj = obj.get("mu", {})
    _check_keys(mu_obj, {"atoms", "densities", "blowup_exponent"}, "mu")
    mu_atoms = []
    for i, at in enumerate(mu_obj.get("atoms", [])):
        _check_keys(at, {"x", "mass"}, f"mu.atoms[{i}]")
        mu_atoms.append((_number(at.get("x"), f"mu.atoms[{i}].x"), _mass(at, f"mu.atoms[{i}]")))
    mu = InteriorMeasure(
        tuple(mu_atoms),
        tuple(_density_from_dict(dd, f"mu.densities[{i}]", False) for i, dd in enumerate(mu_obj.get("densities", []))),
        _number(mu_obj.get("blowup_exponent", 0.0), "mu.blowup_exponent"),
    )
    lam_obj = obj.get("lambda", {})
    _check_keys(lam_obj, {"atoms"}, "lambda")
    lam_atoms = []
    for i, at in enumerate(lam_obj.get("atoms", [])):
        _check_keys(at, {"side", "mass"}, f"lambda.atoms[{i}]")
        lam_atoms.append((str(at.get("side")), _mass(at, f"lambda.atoms[{i}]")))
    nu_obj = obj.get("nu", {})
    _check_keys(nu_obj, {"atoms", "densities"}, "nu")
    nu_atoms = []
    for i, at in enumerate(nu_obj.get("atoms", [])):
        _check_keys(at, {"side", "t", "mass"}, f"nu.atoms[{i}]")
        nu_atoms.append((str(at.get("side")), _number(at.get("t"), f"nu.atoms[{i}].t"), _mass(at, f"nu.atoms[{i}]")))
    nu = LateralMeasure(
        tuple(nu_atoms),
        tuple(_density_from_dict(dd, f"nu.densities[{i}]", True) for i, dd in enumerate(nu_obj.get("densities", []))),
        horizon,
    )
    return TraceTriple(mu, CornerMeasure(tuple(lam_atoms)), nu, horizon)


def parse_triple_text(text: str, domain: Domain | None = None) -> TraceTriple:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeasureError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    tr = triple_from_dict(obj)
    if domain is not None:
        validate_triple(tr, domain)
    return tr


def parse_triple(path, domain: Domain | None = None) -> TraceTriple:
    with open(path, encoding="utf-8") as fh:
        return parse_triple_text(fh.read(), domain)
