"""Recover the trace triple from a solution field on the interval.

* initial trace: pair u(., t) with test functions and extrapolate t -> 0;
* lateral trace: integrate u on the shrunken boundary and extrapolate
  eps -> 0, or use the eps-free identity built from delta_bar and a
  normal-constant extension;
* Green potentials w(., t), their t -> 0 limit w*, and the split of w* into
  a Green potential of mu plus a Martin-kernel part carrying lambda.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domain import Domain, DomainError, delta_bar, normal_extension
from .measures import CornerMeasure, Density, InteriorMeasure, LateralMeasure
from .quadrature import gauss_legendre_panels, integrate_adaptive, integrate_mapped
from .representation import SolutionField

__all__ = [
    "TraceError",
    "TestFunction",
    "BoundaryTest",
    "ExtractionSchedule",
    "LimitEstimate",
    "Potential",
    "TraceReport",
    "sine_test",
    "cutoff_boundary_test",
    "standard_boundary_tests",
    "default_schedule",
    "extrapolate",
    "pair_initial_trace",
    "pair_lateral_shrinking",
    "extract_lateral_shrinking",
    "lateral_identity",
    "green_potential",
    "H_function",
    "riesz_martin_decompose_1d",
    "extract_initial_trace",
    "extract_traces",
    "martin_kernel",
]


class TraceError(RuntimeError):
    """An extraction limit failed to converge or its input is inadmissible."""


# ------------------------------------------------------------- test functions

@dataclass(frozen=True)
class TestFunction:
    """Smooth eta vanishing at both ends, with derivatives and inner normal
    derivatives at the ends."""

    value: Callable
    gradient: Callable
    laplacian: Callable
    normal_derivative: dict

    __test__ = False  # not a pytest class


def sine_test(d: Domain, k: int = 1, weight: float = 1.0) -> TestFunction:
    a, b = d.bounds
    w = k * np.pi / (b - a)
    return TestFunction(
        lambda x: weight * np.sin(w * (np.asarray(x) - a)),
        lambda x: weight * w * np.cos(w * (np.asarray(x) - a)),
        lambda x: -weight * w * w * np.sin(w * (np.asarray(x) - a)),
        {"left": weight * w, "right": -weight * w * np.cos(k * np.pi)},
    )


def _smooth_step_and_slope(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        inside = (s > 0) & (s < 1)
        sc = np.where(inside, s, 0.5)
        A = np.exp(-1.0 / sc)
        B = np.exp(-1.0 / (1.0 - sc))
        val = A / (A + B)
        slope = A * B * (1.0 / sc ** 2 + 1.0 / (1.0 - sc) ** 2) / (A + B) ** 2
    val = np.where(s >= 1, 1.0, np.where(s <= 0, 0.0, val))
    slope = np.where(inside, slope, 0.0)
    return val, slope


@dataclass(frozen=True)
class BoundaryTest:
    """h(side, t) on the lateral boundary, with h_t, supported in ``support``."""

    value: Callable
    dt: Callable
    support: tuple
    label: str = ""


def cutoff_boundary_test(t0: float, t1: float, width: float, left: float = 1.0, right: float = 1.0,
                         freq: float = 0.0, amp: float = 0.0, label: str = "") -> BoundaryTest:
    """``c_side * cutoff(t; t0, t1, width) * (1 + amp sin(freq t))``."""
    coef = {"left": left, "right": right}

    def parts(t):
        t = np.asarray(t, dtype=float)
        up, dup = _smooth_step_and_slope((t - t0) / width)
        dn, ddn = _smooth_step_and_slope((t1 - t) / width)
        mod = 1.0 + amp * np.sin(freq * t)
        dmod = amp * freq * np.cos(freq * t)
        c = up * dn
        dc = dup * dn / width - up * ddn / width
        return c * mod, dc * mod + c * dmod

    return BoundaryTest(lambda side, t: coef[side] * parts(t)[0],
                        lambda side, t: coef[side] * parts(t)[1],
                        (t0, t1), label or f"cutoff({t0:g},{t1:g},{width:g})")


def standard_boundary_tests(T: float = 1.0) -> list:
    """Five smooth boundary tests used to compare the two lateral extractors."""
    return [
        cutoff_boundary_test(0.1 * T, 0.9 * T, 0.1 * T, label="both sides, plateau"),
        cutoff_boundary_test(0.2 * T, 0.6 * T, 0.1 * T, 1.0, 0.0, label="left only, early"),
        cutoff_boundary_test(0.4 * T, 0.9 * T, 0.15 * T, 0.0, 1.0, label="right only, late"),
        cutoff_boundary_test(0.1 * T, 0.9 * T, 0.2 * T, 1.0, 0.5, 2 * np.pi / T, 0.5, label="modulated"),
        cutoff_boundary_test(0.3 * T, 0.7 * T, 0.2 * T, 2.0, 1.0, label="narrow, weighted"),
    ]


# ------------------------------------------------------------ limit machinery

@dataclass(frozen=True)
class ExtractionSchedule:
    epsilons: tuple
    times: tuple
    richardson: bool = True

    def __post_init__(self):
        for name, seq in (("epsilons", self.epsilons), ("times", self.times)):
            arr = np.asarray(seq, dtype=float)
            if arr.size < 2 or np.any(arr <= 0) or np.any(np.diff(arr) >= 0):
                raise ValueError(f"{name} must be a strictly decreasing positive sequence of length >= 2")

    def check(self, d: Domain, horizon: float):
        if self.epsilons[0] > d.epsilon0 + 1e-15:
            raise ValueError("epsilons must not exceed epsilon0")
        if self.times[0] >= horizon:
            raise ValueError("times must lie inside (0, T)")


def default_schedule(d: Domain, t0: float = 0.005, levels: int = 8) -> ExtractionSchedule:
    j = np.arange(levels)
    return ExtractionSchedule(tuple(d.epsilon0 * 0.5 ** j), tuple(t0 * 0.5 ** j))


@dataclass
class LimitEstimate:
    value: np.ndarray
    residual: np.ndarray
    order: np.ndarray
    levels: np.ndarray
    table: np.ndarray  # raw values per level, first axis = level
    extrapolated: np.ndarray = None

    @property
    def error(self):
        return self.residual


def extrapolate(levels, values, richardson: bool = True, order: float = 1.0) -> LimitEstimate:
    """Limit of ``values`` as ``levels -> 0`` for a halving schedule.

    Assumes error ~ level^order and eliminates it by Richardson; the empirical
    order from the last three levels is reported, not used. The residual is
    the change between the last two extrapolants.
    """
    levels = np.asarray(levels, dtype=float)
    v = np.asarray(values, dtype=float)
    diffs = np.diff(v, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        emp = np.log2(np.abs(diffs[-2]) / np.abs(diffs[-1])) if len(v) >= 3 else np.full(v.shape[1:], np.nan)
    if richardson:
        r = v[1:] + diffs / (2.0 ** order - 1.0)
        value = r[-1]
        resid = np.abs(r[-1] - r[-2]) if len(r) >= 2 else np.abs(diffs[-1])
    else:
        r = v
        value = v[-1]
        resid = np.abs(diffs[-1])
    return LimitEstimate(value, resid, emp, levels, v, r)


def _time_floor(u: SolutionField) -> float:
    return float(getattr(u, "time_floor", 0.0))


def _x_integral(u: SolutionField, weight: Callable, t: float, tol: float = 1e-9) -> tuple:
    """int weight(x) u(x, t) dx with panels graded toward both ends at scale sqrt(t)."""
    a, b = u.domain.bounds
    edges = _graded_edges(a, b, t, 32)
    xs, ws = gauss_legendre_panels(edges, 16)
    x8, w8 = gauss_legendre_panels(edges, 10)
    vals = u(xs, np.full(xs.shape, t))
    v8 = u(x8, np.full(x8.shape, t))
    hi = float(np.sum(ws * weight(xs) * vals))
    lo = float(np.sum(w8 * weight(x8) * v8))
    return hi, abs(hi - lo)


def _graded_edges(a, b, t, n_uniform=64, extra=()):
    L = b - a
    r = np.sqrt(t) * 2.0 ** np.arange(-4, 7)
    r = r[r < 0.5 * L]
    e = np.concatenate([np.linspace(a, b, n_uniform + 1), a + r, b - r, np.asarray(extra, dtype=float)])
    e = np.unique(np.clip(e, a, b))
    # merge edges closer than 1e-12 so panels stay non-degenerate
    keep = np.concatenate([[True], np.diff(e) > 1e-12])
    return e[keep]


# -------------------------------------------------------------- initial trace

def pair_initial_trace(u: SolutionField, eta: TestFunction, sched: ExtractionSchedule) -> LimitEstimate:
    """Extrapolated limit of int eta u(., t) dx as t -> 0 along ``sched.times``."""
    if min(sched.times) < _time_floor(u):
        raise TraceError("schedule reaches below the evaluation floor of this field")
    vals, errs = zip(*(_x_integral(u, eta.value, t) for t in sched.times))
    est = extrapolate(sched.times, np.array(vals), sched.richardson)
    est.residual = est.residual + 2 * max(errs)
    return est


# -------------------------------------------------------------- lateral trace

def _boundary_positions(d: Domain, eps: float):
    a, b = d.bounds
    return {"left": a + eps, "right": b - eps}


def pair_lateral_shrinking(u: SolutionField, h: BoundaryTest, sched: ExtractionSchedule,
                           tol: float = 1e-9) -> LimitEstimate:
    """eps -> 0 limit of sum_sides int u(z_eps, t) h(side, t) dt."""
    t0, t1 = h.support
    t1 = min(t1, u.horizon)
    vals = []
    for eps in sched.epsilons:
        total = 0.0
        for side, z in _boundary_positions(u.domain, eps).items():
            res = integrate_adaptive(lambda t, side=side, z=z: u(np.full(np.shape(t), z), t) * h.value(side, t),
                                     t0, t1, tol, initial_panels=16)
            total += float(res.value)
        vals.append(total)
    return extrapolate(sched.epsilons, np.array(vals), sched.richardson)


def _bin_integrals(u: SolutionField, z: float, edges: np.ndarray, tol: float):
    """Per-bin int u(z, t) dt and int t u(z, t) dt, all bins in one call."""
    def f(t):
        v = u(np.full(t.shape, z), t)
        return np.stack([v, t * v], axis=1)

    res = integrate_mapped(f, edges[:-1], edges[1:], tol, initial_panels=8)
    return res.value[:, 0], res.value[:, 1], res.error_estimate[:, 0]


def extract_lateral_shrinking(u: SolutionField, sched: ExtractionSchedule, edges=None, tol: float = 1e-9,
                              spike_factor: float = 3.0, noise_floor: float = 1e-3):
    """Histogram estimate of nu from boundary integrals on shrinking intervals.

    Returns ``(LateralMeasure, diagnostics)``. Bins whose extrapolated mass
    exceeds ``spike_factor`` times the median of their neighbours (and the
    noise floor) are reported as atoms located at the bin's first moment.
    """
    d = u.domain
    T = u.horizon
    if edges is None:
        edges = np.linspace(0.05 * T, 0.95 * T, 17)
    edges = np.asarray(edges, dtype=float)
    if np.any(np.diff(edges) <= 0) or edges[0] <= 0 or edges[-1] > T:
        raise ValueError("bin edges must increase inside (0, T]")
    widths = np.diff(edges)
    diag = {"edges": edges, "epsilons": np.asarray(sched.epsilons), "sides": {}}
    atoms = []
    densities = []
    for side in d.sides:
        masses, moments, qerr = [], [], []
        for eps in sched.epsilons:
            m, mom, e = _bin_integrals(u, _boundary_positions(d, eps)[side], edges, tol)
            masses.append(m)
            moments.append(mom)
            qerr.append(e)
        est = extrapolate(sched.epsilons, np.array(masses), sched.richardson)
        mom_est = extrapolate(sched.epsilons, np.array(moments), sched.richardson)
        mass = est.value
        err = est.residual + 2 * np.max(qerr, axis=0)
        spikes = []
        for i in range(len(mass)):
            nb = np.concatenate([mass[max(0, i - 2):i], mass[i + 1:i + 3]])
            base = float(np.median(nb)) if nb.size else 0.0
            if mass[i] > spike_factor * max(base, 0.0) and mass[i] - base * widths[i] / np.median(widths) > noise_floor:
                base_mass = max(base, 0.0) * widths[i] / float(np.median(widths[max(0, i - 2):i + 3]))
                t_atom = float(mom_est.value[i] / mass[i])
                atoms.append((side, float(np.clip(t_atom, edges[i], edges[i + 1] - 1e-12)), float(mass[i] - base_mass)))
                spikes.append(i)
                dens_val = max(base_mass, 0.0) / widths[i]
            else:
                dens_val = max(float(mass[i]), 0.0) / widths[i]
            densities.append(Density((float(edges[i]), float(edges[i + 1])), samples=(dens_val,), side=side))
        diag["sides"][side] = {"mass": mass, "error": err, "order": est.order, "table": est.table,
                               "moment": mom_est.value, "spikes": spikes}
    measure = LateralMeasure(tuple(atoms), tuple(densities), T)
    return measure, diag


@dataclass
class IdentityResult:
    values: np.ndarray
    errors: np.ndarray


def lateral_identity(u: SolutionField, hs, n_time_panels: int = 10, order: int = 16) -> IdentityResult:
    """Evaluate iint h dnu for each boundary test without any eps-limit:

        iint h dnu = - int_0^T int u (h_bar Lap(delta_bar) + 2 h_bar' delta_bar'
                                      + delta_bar Lap(h_bar) + delta_bar h_bar_t) dx dt

    with h_bar the normal-constant extension. The integrand vanishes where
    delta > epsilon0 + w, so only two boundary strips are integrated. The
    error estimate is the gap to a lower-order rule on the same panels.
    """
    single = isinstance(hs, BoundaryTest)
    hs = [hs] if single else list(hs)
    d = u.domain
    a, b = d.bounds
    e0, w = d.epsilon0, d.blend_width
    t_lo = min(h.support[0] for h in hs)
    t_hi = min(max(h.support[1] for h in hs), u.horizon)
    x_edges_l = np.concatenate([np.linspace(0, e0, 4), np.linspace(e0, e0 + w, 3)[1:]])
    results = []
    for q in (order, max(order - 6, 4)):
        xl, wl = gauss_legendre_panels(a + x_edges_l, q)
        xr, wr = gauss_legendre_panels(b - x_edges_l[::-1], q)
        xs = np.concatenate([xl, xr])
        wx = np.concatenate([wl, wr])
        ts, wt = gauss_legendre_panels(np.linspace(t_lo, t_hi, n_time_panels + 1), q)
        X, Tm = np.meshgrid(xs, ts)
        U = u(X, Tm)
        db, dbx, dblap = delta_bar(d, xs)
        vals = []
        for h in hs:
            hb, hx, hxx = normal_extension(d, h.value, X, Tm, derivatives=True)
            hbt = normal_extension(d, h.dt, X, Tm)
            integrand = hb * dblap + 2 * hx * dbx + db * hxx + db * hbt
            vals.append(-float(np.einsum("i,ij,j->", wt, U * integrand, wx)))
        results.append(np.array(vals))
    values = results[0]
    errors = np.abs(results[0] - results[1]) + 1e-12
    return IdentityResult(values[0] if single else values, errors[0] if single else errors)


# ----------------------------------------------------------- Green potentials

@dataclass
class Potential:
    xs: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    t: float


def martin_kernel(d: Domain, x, side: str):
    a, b = d.bounds
    x = np.asarray(x, dtype=float)
    return (b - x) / (b - a) if side == "left" else (x - a) / (b - a)


def green_potential(u: SolutionField, t: float, xs=None, n_panels: int = 64) -> Potential:
    """w(x, t) = int G(x, y) u(y, t) dy with the elliptic Green function.

    G is linear in y on each side of x, so w at the grid points follows from
    two running integrals of (y - a) u and (b - y) u over panels that contain
    every grid point as an edge.
    """
    d = u.domain
    if d.kind != "interval":
        raise DomainError("Green potentials are implemented on the interval")
    a, b = d.bounds
    L = b - a
    xs = np.linspace(a, b, 129)[1:-1] if xs is None else np.atleast_1d(np.asarray(xs, dtype=float))
    edges = _graded_edges(a, b, t, n_panels, extra=xs)
    out = []
    for q in (16, 10):
        yn, wn = gauss_legendre_panels(edges, q)
        uv = u(yn, np.full(yn.shape, t))
        left_part = ((yn - a) * uv * wn).reshape(-1, q).sum(axis=1)
        right_part = ((b - yn) * uv * wn).reshape(-1, q).sum(axis=1)
        A = np.concatenate([[0.0], np.cumsum(left_part)])  # int_a^{edge}
        B = np.concatenate([np.cumsum(right_part[::-1])[::-1], [0.0]])  # int_{edge}^b
        idx = np.searchsorted(edges, xs)
        idx = np.clip(idx, 0, len(edges) - 1)
        if not np.allclose(edges[idx], xs, atol=1e-12, rtol=0):
            raise RuntimeError("grid points must be panel edges")
        out.append(((b - xs) * A[idx] + (xs - a) * B[idx]) / L)
    return Potential(xs, out[0], np.abs(out[0] - out[1]) + 1e-15, t)


def _lateral_mass_between(nu: LateralMeasure, side: str, t0: float, t1: float) -> float:
    total = sum(m for s, tt, m in nu.atoms if s == side and t0 < tt <= t1)
    for dens in nu.densities:
        if dens.side != side:
            continue
        lo, hi = max(dens.segment[0], t0), min(dens.segment[1], t1)
        if hi > lo:
            total += float(integrate_adaptive(dens, lo, hi, 1e-12, breakpoints=dens.sample_nodes if dens.samples
                                              is not None and len(dens.samples) > 1 else ()).value)
    return total


def H_function(u: SolutionField, nu_est: LateralMeasure, T1: float, x, t: float):
    """H(x, t) = w(x, t) + sum_sides M(x, side) nu(side x (t, T1)).

    Returns ``(values, errors)``; the error covers the Green potential only.
    """
    if not 0 < t < T1 < u.horizon + 1e-12:
        raise ValueError("need 0 < t < T1 < T")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    pot = green_potential(u, t, xs=np.unique(x))
    w = np.interp(x, pot.xs, pot.values)
    werr = np.interp(x, pot.xs, pot.errors)
    lat = sum(martin_kernel(u.domain, x, side) * _lateral_mass_between(nu_est, side, t, T1) for side in u.domain.sides)
    return w + lat, werr


# ------------------------------------------------------- Riesz-Martin split

def _green_of_linear_density(d: Domain, nodes: np.ndarray, rho: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """int G(x, y) rho(y) dy for piecewise-linear rho on ``nodes`` at each
    x in ``xs`` (which must be nodes); Simpson is exact cell by cell."""
    a, b = d.bounds
    L = b - a
    mids = 0.5 * (nodes[1:] + nodes[:-1])
    rho_mid = 0.5 * (rho[1:] + rho[:-1])
    hcell = np.diff(nodes)
    out = np.empty(len(xs))
    for i, x in enumerate(xs):
        def G(y):
            lo, hi = np.minimum(x, y), np.maximum(x, y)
            return (lo - a) * (b - hi) / L
        f0, f1, fm = G(nodes[:-1]) * rho[:-1], G(nodes[1:]) * rho[1:], G(mids) * rho_mid
        out[i] = float(np.sum(hcell * (f0 + 4 * fm + f1) / 6.0))
    return out


def riesz_martin_decompose_1d(d: Domain, xs, w_star, noise: float = 1e-4, spike_factor: float = 3.0):
    """Split w* = int G dmu + lambda_left M_left + lambda_right M_right.

    ``xs`` is a uniform interior grid. The density of mu is minus the second
    difference of w*, extended to the ends by a straight-line fit to the
    outermost five values; second-difference spikes above ``spike_factor``
    times the neighbouring median become atoms. The affine remainder is fitted
    by least squares on the grid. Returns ``(mu, lambda, diagnostics)``.
    """
    if d.kind != "interval":
        raise DomainError("the Riesz-Martin split is implemented on the interval")
    a, b = d.bounds
    xs = np.asarray(xs, dtype=float)
    w_star = np.asarray(w_star, dtype=float)
    h = float(xs[1] - xs[0])
    if not np.allclose(np.diff(xs), h, rtol=1e-9, atol=1e-12):
        raise ValueError("grid must be uniform")
    lap = -(w_star[2:] - 2 * w_star[1:-1] + w_star[:-2]) / h ** 2
    inner = xs[1:-1]
    if lap.min() < -noise:
        raise TraceError(f"w* is not superharmonic: second difference {lap.min():.3g} below -{noise:g}")
    atoms = []
    dens = lap.copy()
    for i in range(len(lap)):
        nb = np.concatenate([lap[max(0, i - 3):max(0, i - 1)], lap[i + 2:i + 4]])
        base = float(np.median(nb)) if nb.size else 0.0
        if lap[i] > spike_factor * max(base, noise) and (lap[i] - base) * h > 10 * noise:
            atoms.append((float(inner[i]), float((lap[i] - base) * h)))
            dens[i] = base
    # merge atoms on neighbouring nodes (a kink between nodes shows on both)
    merged = []
    for x, m in atoms:
        if merged and abs(x - merged[-1][0]) <= 1.5 * h:
            x0, m0 = merged[-1]
            merged[-1] = ((x0 * m0 + x * m) / (m0 + m), m0 + m)
        else:
            merged.append((x, m))
    dens = np.maximum(dens, 0.0)
    k = min(5, len(dens))
    pl = np.polyfit(inner[:k], dens[:k], 1)
    pr = np.polyfit(inner[-k:], dens[-k:], 1)
    nodes = np.concatenate([[a], inner, [b]])
    rho = np.concatenate([[max(np.polyval(pl, a), 0.0)], dens, [max(np.polyval(pr, b), 0.0)]])
    pot = _green_of_linear_density(d, nodes, rho, inner)
    for xa, m in merged:
        pot += m * np.where(inner < xa, (inner - a) * (b - xa), (xa - a) * (b - inner)) / (b - a)
    resid = w_star[1:-1] - pot
    design = np.stack([martin_kernel(d, inner, "left"), martin_kernel(d, inner, "right")], axis=1)
    coef, *_ = np.linalg.lstsq(design, resid, rcond=None)
    fit_resid = float(np.max(np.abs(design @ coef - resid)))
    mu = InteriorMeasure(tuple(merged), (Density((a, b), samples=tuple(rho.tolist()), nodes=tuple(nodes.tolist())),))
    lam = CornerMeasure((("left", float(max(coef[0], 0.0))), ("right", float(max(coef[1], 0.0)))))
    diag = {"lambda_raw": coef, "affine_fit_residual": fit_resid, "min_second_difference": float(lap.min()),
            "density_nodes": nodes, "density": rho}
    return mu, lam, diag


def extract_initial_trace(u: SolutionField, sched: ExtractionSchedule, margin: float = 0.1, n_grid: int = 121):
    """w* on a uniform grid inside ``(a + margin, b - margin)`` by extrapolating
    Green potentials along ``sched.times``, then the Riesz-Martin split."""
    d = u.domain
    a, b = d.bounds
    if min(sched.times) < _time_floor(u):
        raise TraceError("schedule reaches below the evaluation floor of this field")
    xs = np.linspace(a + margin, b - margin, n_grid)
    pots = [green_potential(u, t, xs) for t in sched.times]
    est = extrapolate(sched.times, np.array([p.values for p in pots]), sched.richardson)
    w_err = est.residual + 2 * np.max([p.errors for p in pots], axis=0)
    mu, lam, diag = riesz_martin_decompose_1d(d, xs, est.value, noise=max(1e-4, 8 * float(w_err.max()) / (xs[1] - xs[0]) ** 2))
    diag.update({"xs": xs, "w_star": est.value, "w_star_error": w_err, "w_table": est.table, "order": est.order})
    return mu, lam, diag


@dataclass
class TraceReport:
    mu_estimate: InteriorMeasure
    lambda_estimate: CornerMeasure
    nu_estimate: LateralMeasure
    diagnostics: dict = field(default_factory=dict)


def extract_traces(u: SolutionField, sched: ExtractionSchedule | None = None, edges=None) -> TraceReport:
    sched = sched or default_schedule(u.domain)
    sched.check(u.domain, u.horizon)
    mu, lam, d_init = extract_initial_trace(u, sched)
    nu, d_lat = extract_lateral_shrinking(u, sched, edges)
    return TraceReport(mu, lam, nu, {"initial": d_init, "lateral": d_lat})
