"""Forward evaluation of u(x, t) from a trace triple on the interval.

    u(x,t) = int G(x,t;y,0) dmu(y) + sum_sides dG/dN(x,t;side,0) lambda(side)
             + int_0^t sum_sides dG/dN(x,t;side,s) dnu(side,s)

Every term is vectorised over arrays of points (x, t). The interior
representation on a shrunken interval is also provided; it works from any
SolutionField, so it can check fields built by other means.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from .domain import Domain, DomainError
from .kernels import green_1d, normal_1d
from .measures import TraceTriple
from .quadrature import integrate_adaptive, integrate_lateral_time, integrate_mapped

__all__ = [
    "RepresentationConfig",
    "field_from_function",
    "InteriorParts",
    "Evaluation",
    "SolutionField",
    "evaluate_bottom_term",
    "evaluate_corner_term",
    "evaluate_lateral_term",
    "evaluate_solution",
    "solution_field",
    "evaluate_on_grid",
    "interior_representation",
]


@dataclass(frozen=True)
class RepresentationConfig:
    tolerance: float = 1e-9  # absolute, per point, split 50/10/40 over the three terms
    kernel_tolerance: float = 1e-10
    time_floor: float = 1e-4  # smallest t allowed with atomic mu
    window: float = 12.0  # bottom-term window half-width in units of sqrt(t)
    chunk: int = 512


class Evaluation(NamedTuple):
    value: np.ndarray
    error: np.ndarray


def _points(d: Domain, triple: TraceTriple, x, t, floor_needed=False, cfg=None):
    if d.kind != "interval":
        raise DomainError("forward evaluation from measures is implemented on the interval")
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    if not np.all(d.contains(x)):
        raise DomainError("evaluation point outside the open interval")
    if np.any(t <= 0):
        raise DomainError("evaluation needs t > 0")
    if np.any(t > triple.horizon * (1 + 1e-12)):
        raise DomainError(f"evaluation time beyond the horizon {triple.horizon}")
    if floor_needed and cfg is not None and np.any(t < cfg.time_floor):
        raise DomainError(f"atomic mu needs t >= {cfg.time_floor}")
    return x, t


def _chunks(n, size):
    for lo in range(0, n, size):
        yield slice(lo, min(n, lo + size))


def evaluate_bottom_term(triple: TraceTriple, d: Domain, x, t,
                         cfg: RepresentationConfig = RepresentationConfig()) -> Evaluation:
    """Pairing of mu with G(x, t; ., 0)."""
    mu = triple.mu
    x, t = _points(d, triple, x, t, floor_needed=bool(mu.atoms), cfg=cfg)
    shape = x.shape
    xf, tf = x.ravel(), t.ravel()
    a, b = d.bounds
    L = b - a
    value = np.zeros(xf.shape)
    err = np.zeros(xf.shape)
    kt = cfg.kernel_tolerance
    for y0, m in mu.atoms:
        g = green_1d(xf - a, y0 - a, tf, L, tol=kt)
        value += m * g.value
        err += m * g.error
    if mu.densities:
        tol = 0.5 * cfg.tolerance / (2 * len(mu.densities))
        mid = 0.5 * (a + b)
        breaks = 0.5 ** np.arange(1, 45) if mu.blowup_exponent > 0 else None
        for dens in mu.densities:
            for half in ("left", "right"):
                # integrate in the distance r to the nearer end so r -> 0 stays exact
                if half == "left":
                    r_lo, r_hi = max(dens.segment[0], a) - a, min(dens.segment[1], mid) - a
                    xi = xf - a
                else:
                    r_lo, r_hi = b - min(dens.segment[1], b), b - max(dens.segment[0], mid)
                    xi = b - xf
                if r_hi <= r_lo:
                    continue
                for sl in _chunks(len(xf), cfg.chunk):
                    reach = cfg.window * np.sqrt(tf[sl])
                    lo = np.clip(xi[sl] - reach, r_lo, r_hi)
                    hi = np.clip(xi[sl] + reach, r_lo, r_hi)
                    xi_c, t_c = xi[sl, None], tf[sl, None]

                    def f(r, xi_c=xi_c, t_c=t_c, dens=dens, half=half):
                        y = a + r if half == "left" else b - r
                        g = green_1d(xi_c, r, t_c, L, tol=kt)
                        rho = dens(y, r)
                        return g.value * rho

                    res = integrate_mapped(f, lo, hi, tol, breaks=breaks)
                    value[sl] += res.value
                    # kernel error is relative; bound it through the pairing of |rho|
                    err[sl] += res.error_estimate + kt * np.abs(res.value)
    return Evaluation(value.reshape(shape), err.reshape(shape))


def evaluate_corner_term(triple: TraceTriple, d: Domain, x, t,
                         cfg: RepresentationConfig = RepresentationConfig()) -> Evaluation:
    """Pairing of lambda with the lateral kernel at s = 0."""
    x, t = _points(d, triple, x, t)
    a, b = d.bounds
    value = np.zeros(x.shape)
    err = np.zeros(x.shape)
    for side, m in triple.lam.atoms:
        xi = x - a if side == "left" else b - x
        k = normal_1d(xi, t, b - a, tol=cfg.kernel_tolerance)
        value = value + m * k.value
        err = err + m * k.error
    return Evaluation(value, err)


_DROP = 40.0  # drop t - s below xi^2 / (4 * _DROP)


def evaluate_lateral_term(triple: TraceTriple, d: Domain, x, t,
                          cfg: RepresentationConfig = RepresentationConfig()) -> Evaluation:
    """Time integral of the lateral kernel against nu over (0, t).

    The integral runs in sigma = log(t - s). Lags shorter than
    ``xi^2 / 160`` are dropped; there the kernel mass is at most
    ``erfc(sqrt(40))`` per unit density, which enters the error.
    """
    nu = triple.nu
    x, t = _points(d, triple, x, t)
    shape = x.shape
    xf, tf = x.ravel(), t.ravel()
    a, b = d.bounds
    L = b - a
    value = np.zeros(xf.shape)
    err = np.zeros(xf.shape)
    kt = cfg.kernel_tolerance
    for side, s0, m in nu.atoms:
        xi = xf - a if side == "left" else b - xf
        live = s0 < tf
        if live.any():
            k = normal_1d(xi[live], tf[live] - s0, L, tol=kt)
            value[live] += m * k.value
            err[live] += m * k.error
    sides = sorted({dd.side for dd in nu.densities})
    if not sides:
        return Evaluation(value.reshape(shape), err.reshape(shape))
    tol = 0.4 * cfg.tolerance / len(sides)
    probe = np.linspace(0.0, triple.horizon, 4001)
    dropped_mass = 2.0 * special.erfc(np.sqrt(_DROP))
    for side in sides:
        gmax = float(np.max(nu.density(side, probe)))
        xi = xf - a if side == "left" else b - xf
        for sl in _chunks(len(xf), cfg.chunk):
            lo = np.log(xi[sl] ** 2 / (4 * _DROP))
            hi = np.log(tf[sl])
            live = lo < hi
            lo = np.where(live, lo, hi)
            xi_c, t_c = xi[sl, None], tf[sl, None]

            def f(sig, xi_c=xi_c, t_c=t_c, side=side):
                tau = np.exp(sig)
                k = normal_1d(xi_c, tau, L, tol=kt)
                return k.value * nu.density(side, t_c - tau) * tau

            res = integrate_mapped(f, lo, hi, tol)
            value[sl] += res.value
            err[sl] += res.error_estimate + kt * np.abs(res.value) + gmax * dropped_mass
    return Evaluation(value.reshape(shape), err.reshape(shape))


def evaluate_solution(triple: TraceTriple, d: Domain, x, t,
                      cfg: RepresentationConfig = RepresentationConfig()) -> Evaluation:
    parts = [fn(triple, d, x, t, cfg) for fn in (evaluate_bottom_term, evaluate_corner_term, evaluate_lateral_term)]
    return Evaluation(sum(p.value for p in parts), sum(p.error for p in parts))


@dataclass
class SolutionField:
    """u on the cylinder: a vectorised ``evaluator(x, t) -> Evaluation`` plus
    an optional grid cache ``(xs, ts, values, errors)``."""

    domain: Domain
    horizon: float
    evaluator: Callable
    grid_cache: tuple | None = None
    tolerance: float = 1e-9
    source: object = field(default=None, repr=False)
    time_floor: float = 0.0  # smallest admissible t

    def evaluate(self, x, t) -> Evaluation:
        return self.evaluator(x, t)

    def __call__(self, x, t) -> np.ndarray:
        return self.evaluator(x, t).value


def solution_field(triple: TraceTriple, d: Domain, cfg: RepresentationConfig = RepresentationConfig()) -> SolutionField:
    return SolutionField(d, triple.horizon, lambda x, t: evaluate_solution(triple, d, x, t, cfg),
                         tolerance=cfg.tolerance, source=triple,
                         time_floor=cfg.time_floor if triple.mu.atoms else 0.0)


def field_from_function(d: Domain, horizon: float, fn: Callable, error: float = 0.0) -> SolutionField:
    """Wrap a closed-form ``fn(x, t)`` as a SolutionField."""
    def ev(x, t):
        v = np.asarray(fn(np.asarray(x, float), np.asarray(t, float)), dtype=float)
        return Evaluation(v, np.full(v.shape, error))
    return SolutionField(d, horizon, ev, tolerance=max(error, 1e-300))


def evaluate_on_grid(triple: TraceTriple, d: Domain, xs, ts,
                     cfg: RepresentationConfig = RepresentationConfig()) -> SolutionField:
    """Evaluate on the tensor grid ``xs x ts``; values have shape (len(ts), len(xs))."""
    xs = np.asarray(xs, dtype=float).ravel()
    ts = np.asarray(ts, dtype=float).ravel()
    fld = solution_field(triple, d, cfg)
    if xs.size == 0 or ts.size == 0:
        fld.grid_cache = (xs, ts, np.zeros((ts.size, xs.size)), np.zeros((ts.size, xs.size)))
        return fld
    X, Tm = np.meshgrid(xs, ts)
    ev = evaluate_solution(triple, d, X, Tm, cfg)
    fld.grid_cache = (xs, ts, ev.value, ev.error)
    return fld


class InteriorParts(NamedTuple):
    bottom: float
    lateral: float
    bottom_error: float
    lateral_error: float

    @property
    def total(self) -> float:
        return self.bottom + self.lateral


def interior_representation(u: SolutionField, eps: float, s: float, x: float, t: float,
                            tol: float = 1e-7, kernel_tolerance: float = 1e-10) -> InteriorParts:
    """Both terms of the representation of u(x, t) on the shrunken interval
    ``(a + eps, b - eps)`` from data at time ``s``."""
    d = u.domain
    if d.kind != "interval":
        raise DomainError("interior representation is implemented on the interval")
    a, b = d.bounds
    if not 0 < eps <= d.epsilon0:
        raise DomainError(f"eps={eps} outside (0, epsilon0]")
    if not a + eps < x < b - eps:
        raise DomainError("x must lie in the shrunken interval")
    if not 0 < s < t <= u.horizon:
        raise DomainError("need 0 < s < t <= T")
    Le = b - a - 2 * eps
    lo, hi = a + eps, b - eps
    tau = t - s

    def bottom(y):
        g = green_1d(x - lo, y - lo, tau, Le, tol=kernel_tolerance).value
        return g * u(y, np.full(np.shape(y), s))

    reach = 12.0 * np.sqrt(tau)
    blo, bhi = max(lo, x - reach), min(hi, x + reach)
    rb = integrate_adaptive(bottom, blo, bhi, tol / 2)
    lateral = 0.0
    lat_err = 0.0
    for side, zpos in (("left", lo), ("right", hi)):
        xi = x - lo if side == "left" else hi - x

        def f(tt, xi=xi, zpos=zpos):
            k = normal_1d(xi, t - tt, Le, tol=kernel_tolerance).value
            return k * u(np.full(np.shape(tt), zpos), tt)

        umax = float(np.max(u(np.full(9, zpos), np.linspace(s, t, 9))))
        # kernel <= 2 xi (4 pi tau)^{-1/2} tau^{-1} exp(-xi^2 / (4 tau)) on short lags
        c1 = max(umax, 1e-300) * xi / np.sqrt(np.pi)
        r = integrate_lateral_time(f, s, t, tol / 4, n=2, delta=xi, c1=c1, c2=0.25, cut=_DROP)
        lateral += float(r.value)
        lat_err += float(r.error_estimate)
    return InteriorParts(float(rb.value), lateral, float(rb.error_estimate), lat_err)
