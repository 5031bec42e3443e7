"""Verification suites: kernel identities, representation bounds, boundedness
monitors, lateral convergence, round trips, the finite-difference oracle and
monotonicity of H.

Every suite returns a SuiteReport. Each check carries a descriptive anchor
naming the statement it tests, a measured value, the tolerance it was held
to and a pass flag. Most suites accept a mutation hook so tests can show the
check fails when its target property is deliberately broken.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domain import Domain, delta
from .fdsolve import fd_data_from_triple, fd_solve
from .kernels import Evaluated, KernelEvaluator, green_1d, log_green_1d, log_normal_1d, normal_1d
from .measures import (CornerMeasure, Density, InteriorMeasure, LateralMeasure, TraceTriple, add_triples,
                       scale_triple, triple_to_dict)
from .quadrature import gauss_legendre_panels, integrate_adaptive, integrate_lateral_time, integrate_mapped
from .representation import (Evaluation, RepresentationConfig, SolutionField, interior_representation,
                             solution_field)
from .traces import (ExtractionSchedule, H_function, _lateral_mass_between, default_schedule,
                     extract_initial_trace, extract_lateral_shrinking, martin_kernel)

__all__ = [
    "CheckResult",
    "SuiteReport",
    "KernelUnderTest",
    "KERNEL_MUTATIONS",
    "kernel_check",
    "mutate_field",
    "halve_on_subregion",
    "add_boundary_singularity",
    "alternate_near_boundary",
    "check_bounds",
    "bounded_along",
    "check_boundedness",
    "check_lateral_convergence",
    "roundtrip",
    "ROUNDTRIP_MUTATIONS",
    "contamination",
    "oracle_compare",
    "fd_convergence_order",
    "check_monotone_H",
]


# ----------------------------------------------------------------- reports

@dataclass
class CheckResult:
    name: str
    anchor: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""
    runtime: float = 0.0  # seconds; kept out of serialized output

    def to_dict(self, runtime: bool = False) -> dict:
        out = {"name": self.name, "anchor": self.anchor, "passed": bool(self.passed),
               "measured": float(self.measured), "tolerance": float(self.tolerance), "detail": self.detail}
        if runtime:
            out["runtime"] = self.runtime
        return out


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def add(self, name, anchor, passed, measured, tolerance, detail="", runtime=0.0):
        self.checks.append(CheckResult(name, anchor, bool(passed), float(measured), float(tolerance), detail, runtime))
        self.checks.sort(key=lambda c: c.name)
        return self.checks[-1]

    def merge(self, other: "SuiteReport", prefix: str = "") -> "SuiteReport":
        for c in other.checks:
            self.checks.append(CheckResult(prefix + c.name, c.anchor, c.passed, c.measured, c.tolerance,
                                           c.detail, c.runtime))
        self.checks.sort(key=lambda c: c.name)
        return self

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self, runtime: bool = False) -> dict:
        return {"suite": self.suite, "passed": self.passed,
                "checks": [c.to_dict(runtime) for c in sorted(self.checks, key=lambda c: c.name)]}

    def table(self) -> str:
        rows = [("check", "status", "measured", "tolerance", "anchor")]
        for c in sorted(self.checks, key=lambda c: c.name):
            rows.append((c.name, "PASS" if c.passed else "FAIL", f"{c.measured:.3e}", f"{c.tolerance:.3e}", c.anchor))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(r[i].ljust(widths[i]) for i in range(4)) + "  " + r[4] for r in rows]
        return "\n".join([f"[{self.suite}]"] + lines)


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


# ------------------------------------------------------------ kernel suite

@dataclass(frozen=True)
class KernelUnderTest:
    """The kernel functions a kernel check exercises, in local coordinates of
    an interval of length ``L``. Mutations replace individual entries."""

    L: float
    green: Callable  # (xi, eta, tau) -> Evaluated
    normal: Callable  # (xi, tau) -> Evaluated, left end
    spectral: Callable  # (xi, eta, tau) -> Evaluated
    image: Callable

    @classmethod
    def from_evaluator(cls, k: KernelEvaluator) -> "KernelUnderTest":
        a, b = k.domain.bounds
        L = b - a
        o = dict(tol=k.tolerance, cap=k.series_cap)
        return cls(
            L,
            lambda xi, eta, tau: green_1d(xi, eta, tau, L, switch=k.switch_threshold, **o),
            lambda xi, tau: normal_1d(xi, tau, L, switch=k.switch_threshold, **o),
            lambda xi, eta, tau: green_1d(xi, eta, tau, L, switch=0.0, **o),
            lambda xi, eta, tau: green_1d(xi, eta, tau, L, switch=np.inf, **o),
        )


def _mut_scaled(k: KernelUnderTest) -> KernelUnderTest:
    g = k.green
    return KernelUnderTest(k.L, lambda *a: Evaluated(1.01 * g(*a).value, g(*a).error), k.normal, k.spectral, k.image)


def _mut_asymmetric(k: KernelUnderTest) -> KernelUnderTest:
    g = k.green

    def green(xi, eta, tau):
        r = g(xi, eta, tau)
        return Evaluated(r.value * (1 + 1e-3 * (np.asarray(xi) - np.asarray(eta))), r.error)
    return KernelUnderTest(k.L, green, k.normal, k.spectral, k.image)


def _mut_shifted(k: KernelUnderTest) -> KernelUnderTest:
    g = k.green
    return KernelUnderTest(k.L, lambda *a: Evaluated(g(*a).value - 1e-3, g(*a).error), k.normal, k.spectral, k.image)


def _mut_truncated(k: KernelUnderTest) -> KernelUnderTest:
    # a coarse spectral sum that claims to be exact
    L = k.L

    def spectral(xi, eta, tau):
        r = green_1d(xi, eta, tau, L, tol=1e-3, switch=0.0)
        return Evaluated(r.value, np.zeros_like(r.error))
    return KernelUnderTest(k.L, k.green, k.normal, spectral, k.image)


def _mut_normal_scaled(k: KernelUnderTest) -> KernelUnderTest:
    n = k.normal
    return KernelUnderTest(k.L, k.green, lambda *a: Evaluated(1.01 * n(*a).value, n(*a).error), k.spectral, k.image)


def _mut_normal_singular(k: KernelUnderTest) -> KernelUnderTest:
    n = k.normal

    def normal(xi, tau):
        r = n(xi, tau)
        return Evaluated(r.value / np.sqrt(np.asarray(tau)), r.error)
    return KernelUnderTest(k.L, k.green, normal, k.spectral, k.image)


# mutation name -> (transform, checks it must break)
KERNEL_MUTATIONS = {
    "scaled": (_mut_scaled, ("semigroup", "total_mass_at_most_one")),
    "asymmetric": (_mut_asymmetric, ("symmetry",)),
    "shifted": (_mut_shifted, ("positivity",)),
    "truncated_unreported": (_mut_truncated, ("spectral_image_agreement",)),
    "normal_scaled": (_mut_normal_scaled, ("boundary_consistency",)),
    "normal_singular": (_mut_normal_singular, ("gaussian_bound",)),
}


def kernel_check(d: Domain, kernel: KernelEvaluator | None = None, n_probes: int = 100, seed: int = 0,
                 mutation: str | Callable | None = None) -> SuiteReport:
    """Identity suite for the interval heat kernel on randomized probes."""
    k = kernel or KernelEvaluator(d)
    kt = KernelUnderTest.from_evaluator(k)
    if mutation is not None:
        fn = KERNEL_MUTATIONS[mutation][0] if isinstance(mutation, str) else mutation
        kt = fn(kt)
    L = kt.L
    rng = np.random.default_rng(seed)
    rep = SuiteReport("kernel-check")
    tol = k.tolerance

    # semigroup: int G(x,t;y,s) G(y,s;z,r) dy = G(x,t;z,r)
    with _Timer() as tm:
        x = rng.uniform(0.02, 0.98, n_probes) * L
        z = rng.uniform(0.02, 0.98, n_probes) * L
        t1 = 10 ** rng.uniform(-2, 0, n_probes)
        t2 = 10 ** rng.uniform(-2, 0, n_probes)

        def f(y):
            return kt.green(x[:, None], y, t1[:, None]).value * kt.green(y, z[:, None], t2[:, None]).value

        res = integrate_mapped(f, np.zeros(n_probes), np.full(n_probes, L), 1e-11, initial_panels=8)
        direct = kt.green(x, z, t1 + t2)
        gap = np.abs(res.value - direct.value)
        budget = 1e-8
    rep.add("semigroup", "Chapman-Kolmogorov property of the Dirichlet heat kernel", gap.max() <= budget,
            gap.max(), budget, f"{n_probes} probes, lags in [1e-2, 1]", tm.elapsed)

    with _Timer() as tm:
        xi = rng.uniform(0, 1, n_probes) * L
        eta = rng.uniform(0, 1, n_probes) * L
        tau = 10 ** rng.uniform(-3, 0.5, n_probes)
        asym = np.abs(kt.green(xi, eta, tau).value - kt.green(eta, xi, tau).value)
    rep.add("symmetry", "spatial symmetry of the heat kernel", asym.max() == 0.0, asym.max(), 0.0,
            "exact equality required", tm.elapsed)

    with _Timer() as tm:
        xi_in = rng.uniform(0.01, 0.99, n_probes) * L
        eta_in = rng.uniform(0.01, 0.99, n_probes) * L
        tau_p = 10 ** rng.uniform(-2, 0, n_probes)
        g = kt.green(xi_in, eta_in, tau_p).value
        nrm = kt.normal(xi_in, tau_p).value
        edge = kt.green(xi_in, np.zeros(n_probes), tau_p).value
        # shorter lags underflow in double precision; there positivity is read off the log forms
        tau_s = 10 ** rng.uniform(-3, -2, n_probes)
        logs_ok = bool(np.all(np.isfinite(log_green_1d(xi_in, eta_in, tau_s, L)))
                       and np.all(np.isfinite(log_normal_1d(xi_in, tau_s, L))))
        worst = min(float(g.min()), float(nrm.min()))
        ok = worst > 0 and np.all(edge == 0) and logs_ok
    rep.add("positivity", "positivity of the kernel and of its inner normal derivative", ok, worst, 0.0,
            "strict positivity inside, zero on the boundary", tm.elapsed)

    with _Timer() as tm:
        tau_b = rng.uniform(0.02, 0.2, n_probes)
        sp = kt.spectral(xi, eta, tau_b)
        im = kt.image(xi, eta, tau_b)
        gap = np.abs(sp.value - im.value)
        allowed = sp.error + im.error
        worst = float(np.max(gap / np.maximum(allowed, 1e-300)))
    rep.add("spectral_image_agreement", "equality of the eigenfunction and image forms of the kernel", worst <= 1.0,
            worst, 1.0, "ratio of disagreement to summed certified tails", tm.elapsed)

    with _Timer() as tm:
        xb = rng.uniform(0.05, 0.95, n_probes) * L
        tb = rng.uniform(0.02, 1.0, n_probes)
        etas = (2e-3, 1e-3, 5e-4)
        q = [kt.green(xb, np.full(n_probes, e), tb) for e in etas]
        qv = [g.value / e for g, e in zip(q, etas)]
        qe = [g.error / e for g, e in zip(q, etas)]
        rich = (4 * qv[2] - qv[1]) / 3
        coarse = (4 * qv[1] - qv[0]) / 3
        nv = kt.normal(xb, tb)
        gap = np.abs(rich - nv.value)
        # certified kernel errors propagated through the difference quotient,
        # plus the remaining O(eta^4) term estimated from two extrapolants
        allowed = 10 * ((4 * qe[2] + qe[1]) / 3 + nv.error + np.abs(rich - coarse))
        worst = float(np.max(gap / allowed))
    rep.add("boundary_consistency", "normal derivative as the boundary limit of G / distance", worst <= 1.0, worst,
            1.0, "Richardson on eta = 2e-3, 1e-3, 5e-4; ratio to 10x error budget", tm.elapsed)

    with _Timer() as tm:
        C2 = 0.2

        def envelope_ratio(xs_, taus_):
            X, Tm = np.meshgrid(xs_, taus_)
            dd = np.minimum(X, L - X)
            v = kt.normal(X, Tm).value
            return v * Tm * np.exp(C2 * dd ** 2 / Tm)

        fit = envelope_ratio(np.linspace(0.05, 0.95, 40) * L, np.geomspace(1e-2, 1, 20))
        C1 = float(fit.max())
        held = envelope_ratio(np.linspace(0.03, 0.97, 97) * L, np.geomspace(1e-3, 1, 61))
        worst = float(held.max() / C1)
    rep.add("gaussian_bound", "Gaussian upper bound for the lateral kernel", worst <= 1.1, worst, 1.1,
            f"C1={C1:.4g} fitted on lags [1e-2,1] with C2={C2}; held-out lags [1e-3,1]", tm.elapsed)

    with _Timer() as tm:
        xm = rng.uniform(0.01, 0.99, n_probes) * L
        tm_ = 10 ** rng.uniform(-3, 0.5, n_probes)
        res = integrate_mapped(lambda y: kt.green(xm[:, None], y, tm_[:, None]).value,
                               np.zeros(n_probes), np.full(n_probes, L), 1e-11, initial_panels=8)
        excess = float(np.max(res.value - 1.0))
    rep.add("total_mass_at_most_one", "sub-stochastic total mass of the absorbing kernel",
            excess <= 10 * tol, excess, 10 * tol, "max of int G dy - 1", tm.elapsed)
    return rep


# ------------------------------------------------------------ field helpers

def mutate_field(u: SolutionField, fn: Callable) -> SolutionField:
    """Field whose values are ``fn(x, t, u(x, t))``; the error estimates are kept."""
    def ev(x, t):
        e = u.evaluate(x, t)
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        return Evaluation(np.asarray(fn(x, t, e.value), dtype=float), e.error)
    return SolutionField(u.domain, u.horizon, ev, tolerance=u.tolerance, time_floor=u.time_floor)


def halve_on_subregion(u: SolutionField, x_range, t_range=(0.0, np.inf)) -> SolutionField:
    def fn(x, t, v):
        inside = (x > x_range[0]) & (x < x_range[1]) & (t > t_range[0]) & (t < t_range[1])
        return np.where(inside, 0.5 * v, v)
    return mutate_field(u, fn)


def add_boundary_singularity(u: SolutionField, c: float = 1e-3) -> SolutionField:
    """u + c / (t delta(x)): infinite weighted mass, flux and space-time mass."""
    d = u.domain
    return mutate_field(u, lambda x, t, v: v + c / (t * delta(d, np.clip(x, *d.bounds))))


def alternate_near_boundary(u: SolutionField, amplitude: float = 0.01) -> SolutionField:
    """Scale u by 1 +- amplitude, the sign flipping each time delta halves
    from epsilon0; breaks convergence along a halving schedule."""
    d = u.domain

    def fn(x, t, v):
        k = np.round(np.log2(d.epsilon0 / np.maximum(delta(d, np.clip(x, *d.bounds)), 1e-300)))
        return v * (1 + amplitude * (-1.0) ** k)
    return mutate_field(u, fn)


def _full_bottom(u: SolutionField, s: float, x: float, t: float, tol: float, kt: float):
    a, b = u.domain.bounds
    L = b - a
    tau = t - s
    reach = 12.0 * np.sqrt(tau)
    lo, hi = max(a, x - reach), min(b, x + reach)
    r = integrate_adaptive(lambda y: green_1d(x - a, y - a, tau, L, tol=kt).value * u(y, np.full(np.shape(y), s)),
                           lo, hi, tol, breakpoints=(x,))
    return float(r.value), float(r.error_estimate)


# ------------------------------------------------------------ bounds

def check_bounds(u: SolutionField, probes=None, eps: float = 0.1, n_probes: int = 50, seed: int = 0,
                 tol: float = 1e-8, kernel_tolerance: float = 1e-10) -> SuiteReport:
    """Bottom and lateral terms of the shrunken-interval representation, and
    the full-interval bottom term, are each at most u(x, t).

    ``probes`` is an array of rows ``(x, s, t)``; by default ``n_probes``
    seeded probes with x at least ``2 eps`` from the ends, t in [0.3 T, T]
    and s in (0.05 t, 0.95 t).
    """
    d = u.domain
    a, b = d.bounds
    T = u.horizon
    if probes is None:
        rng = np.random.default_rng(seed)
        x = rng.uniform(a + 2 * eps, b - 2 * eps, n_probes)
        t = rng.uniform(0.3 * T, T, n_probes)
        s = t * rng.uniform(0.05, 0.95, n_probes)
        s = np.maximum(s, u.time_floor)
        probes = np.stack([x, s, t], axis=1)
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    rows = []
    with _Timer() as tm:
        for x, s, t in probes:
            ut = u.evaluate(np.array([x]), np.array([t]))
            uv, ue = float(ut.value[0]), float(ut.error[0])
            parts = interior_representation(u, eps, s, x, t, tol=tol, kernel_tolerance=kernel_tolerance)
            fb, fbe = _full_bottom(u, s, x, t, tol, kernel_tolerance)
            kterm = kernel_tolerance * (abs(parts.bottom) + abs(parts.lateral) + abs(fb)) + 1e-14
            rows.append((x, s, t, uv, ue, parts, fb, fbe, kterm))
    rep = SuiteReport("bounds")
    n = len(rows)

    def summarize(name, anchor, excess_and_budget):
        ratios = [e / bud for e, bud in excess_and_budget]
        i = int(np.argmax(ratios))
        x, s, t = rows[i][:3]
        rep.add(name, anchor, max(ratios) <= 1.0, max(ratios), 1.0,
                f"{n} probes; worst excess/budget at (x={x:.4f}, s={s:.4f}, t={t:.4f})", tm.elapsed / 4)

    summarize("bottom_shrunken_le_u", "bottom term on the shrunken interval is at most u",
              [(p.bottom - uv, 2 * (p.bottom_error + ue + k)) for _, _, _, uv, ue, p, _, _, k in rows])
    summarize("lateral_shrunken_le_u", "lateral term on the shrunken interval is at most u",
              [(p.lateral - uv, 2 * (p.lateral_error + ue + k)) for _, _, _, uv, ue, p, _, _, k in rows])
    summarize("bottom_full_le_u", "propagated data at an earlier time is at most u",
              [(fb - uv, 2 * (fbe + ue + k)) for _, _, _, uv, ue, _, fb, fbe, k in rows])
    summarize("shrunken_representation", "u equals the sum of both terms on the shrunken interval",
              [(abs(p.total - uv), 2 * (p.bottom_error + p.lateral_error + ue + k))
               for _, _, _, uv, ue, p, _, _, k in rows])
    return rep


# ------------------------------------------------------------ boundedness

def bounded_along(values, ratio_max: float = 0.9, tiny: float = 1e-6) -> tuple:
    """Decide whether a monitored sequence on a halving schedule settles.

    Bounded means the mean ratio of successive increments over the last
    three steps is below ``ratio_max`` or the last increment is tiny
    relative to the value. Returns ``(bounded, ratio, extrapolated_limit)``.
    """
    v = np.asarray(values, dtype=float)
    inc = np.abs(np.diff(v))
    scale = max(1.0, float(np.max(np.abs(v))))
    if inc[-1] <= tiny * scale:
        return True, 0.0, float(v[-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        r = inc[1:] / inc[:-1]
    r = r[np.isfinite(r)][-3:]
    ratio = float(np.mean(r)) if r.size else np.inf
    limit = float(v[-1] + np.sign(v[-1] - v[-2]) * inc[-1] * ratio / (1 - ratio)) if ratio < 1 else np.inf
    return ratio < ratio_max, ratio, limit


def _x_integral_on(u, t, lo, hi, weight=None, n=24, order=10):
    """int_lo^hi weight(x) u(x, t) dx on panels graded at sqrt(t) toward both ends."""
    r = np.sqrt(t) * 2.0 ** np.arange(-4, 7)
    r = r[r < 0.5 * (hi - lo)]
    e = np.unique(np.concatenate([np.linspace(lo, hi, n + 1), lo + r, hi - r]))
    xs, ws = gauss_legendre_panels(e, order)
    vals = u(xs, np.full(xs.shape, t))
    if weight is not None:
        vals = vals * weight(xs)
    return float(np.sum(ws * vals))


def _log_time_integral(fn, lo, hi, anchor, tol, floor):
    """int_lo^hi fn(tau) dtau in sigma = log(tau - anchor); ``fn`` vectorised."""
    if hi <= lo:
        return 0.0, 0.0
    s_lo = np.log(max(lo - anchor, floor))
    s_hi = np.log(hi - anchor)
    if s_hi <= s_lo:
        return 0.0, 0.0
    r = integrate_adaptive(lambda sg: fn(anchor + np.exp(sg)) * np.exp(sg), s_lo, s_hi, tol)
    return float(r.value), float(r.error_estimate)


def _anchored_time_integral(fn, lo, hi, anchors, tol, floor):
    """int_lo^hi fn over pieces split at ``anchors``; each piece is graded
    logarithmically toward every anchor it touches. Parts closer to an
    anchor than ``floor`` are dropped."""
    pts = sorted({lo, hi} | {p for p in anchors if lo < p < hi})
    anchors = set(anchors)
    total = err = 0.0
    for p, q in zip(pts[:-1], pts[1:]):
        left, right = p in anchors, q in anchors
        if left and right:
            m = 0.5 * (p + q)
            pieces = [(p, m, p, 1), (m, q, q, -1)]
        elif left:
            pieces = [(p, q, p, 1)]
        elif right:
            pieces = [(p, q, q, -1)]
        else:
            r = integrate_adaptive(fn, p, q, tol, initial_panels=8)
            total += float(r.value)
            err += float(r.error_estimate)
            continue
        for a_, b_, anc, sgn in pieces:
            if sgn > 0:
                v, e = _log_time_integral(fn, a_, b_, anc, tol, floor)
            else:
                v, e = _log_time_integral(lambda tau: fn(2 * anc - tau), 2 * anc - b_, 2 * anc - a_, anc, tol, floor)
            total += v
            err += e
    return total, err


def _lateral_anchors(u: SolutionField):
    src = u.source
    if isinstance(src, TraceTriple):
        return {float(t) for _, t, _ in src.nu.atoms}
    return set()


def check_boundedness(u: SolutionField, T1: float | None = None, sched: ExtractionSchedule | None = None,
                      tol: float = 1e-8) -> SuiteReport:
    """Tabulate and judge the three monitored quantities:

    * weighted mass ``int u(x, t) delta(x) dx`` along ``sched.times``;
    * lateral flux ``int_0^T1 sum_sides u(z_eps, tau) dtau`` along ``sched.epsilons``;
    * space-time mass ``int_t^T1 int_{Omega_eps} u`` along the pairs ``(eps_j, t_j)``.

    The unweighted mass ``int u(x, t) dx`` and the torsion identity on the
    coarsest shrunken interval are reported in ``extra``.
    """
    d = u.domain
    a, b = d.bounds
    T1 = T1 if T1 is not None else 0.9 * u.horizon
    if not 0 < T1 < u.horizon + 1e-12:
        raise ValueError("need 0 < T1 <= T")
    sched = sched or default_schedule(d)
    sched.check(d, u.horizon)
    if min(sched.times) < u.time_floor:
        raise ValueError("schedule reaches below the evaluation floor of this field")
    rep = SuiteReport("boundedness")
    times = np.asarray(sched.times)
    epss = np.asarray(sched.epsilons)

    with _Timer() as tm:
        wm = [_x_integral_on(u, t, a, b, weight=lambda x: delta(d, np.clip(x, a, b))) for t in times]
        um = [_x_integral_on(u, t, a, b) for t in times]
    ok, ratio, lim = bounded_along(wm)
    rep.add("weighted_mass_bounded", "finite delta-weighted mass as t -> 0", ok, ratio, 0.9,
            "values " + " ".join(f"{v:.6g}" for v in wm) + f"; limit {lim:.6g}", tm.elapsed)
    u_ok, u_ratio, _ = bounded_along(um)
    rep.extra["weighted_mass"] = wm
    rep.extra["unweighted_mass"] = um
    rep.extra["unweighted_mass_bounded"] = bool(u_ok)
    rep.extra["unweighted_increment_ratio"] = u_ratio

    anchors = _lateral_anchors(u)
    with _Timer() as tm:
        flux = []
        for eps in epss:
            total = 0.0
            for z in (a + eps, b - eps):
                v, _ = _anchored_time_integral(lambda tau, z=z: u(np.full(np.shape(tau), z), tau), max(u.time_floor, 0.0),
                                               T1, anchors | {max(u.time_floor, 0.0)}, tol, eps * eps / 400)
                total += v
            flux.append(total)
    ok, ratio, lim = bounded_along(flux)
    rep.add("lateral_flux_bounded", "uniformly bounded boundary integrals on shrunken intervals", ok, ratio, 0.9,
            "values " + " ".join(f"{v:.6g}" for v in flux) + f"; limit {lim:.6g}", tm.elapsed)
    rep.extra["lateral_flux"] = flux

    with _Timer() as tm:
        # one x-panel set containing every shrunken end; one tau rule per schedule gap
        xe = np.unique(np.concatenate([np.linspace(a, b, 17), a + epss, b - epss, a + epss / 2, b - epss / 2]))
        xn, xw = gauss_legendre_panels(xe, 6)
        extra = [p + np.geomspace(1e-6, 0.1, 12) for p in anchors]
        t_edges = np.concatenate([times, np.geomspace(times[0], T1, 8)] + extra)
        t_edges = np.unique(t_edges[(t_edges >= times[-1]) & (t_edges <= T1)])
        tn, tw = gauss_legendre_panels(np.log(t_edges), 6)
        tn = np.exp(tn)
        tw = tw * tn
        U = u(xn[None, :], tn[:, None])
        st = []
        for eps, t in zip(epss, times):
            inside = (xn > a + eps) & (xn < b - eps)
            later = tn > t
            st.append(float(np.einsum("i,ij,j->", tw[later], U[later][:, inside], xw[inside])))
    ok, ratio, lim = bounded_along(st)
    rep.add("space_time_mass_bounded", "finite space-time mass near the parabolic boundary", ok, ratio, 0.9,
            "values " + " ".join(f"{v:.6g}" for v in st) + f"; limit {lim:.6g}", tm.elapsed)
    rep.extra["space_time_mass"] = st

    # torsion identity on the coarsest level
    eps, t = float(epss[0]), float(times[0])
    Le = b - a - 2 * eps

    def phi(x):
        return np.clip((x - a - eps) * (b - eps - x), 0, None) / 2

    lhs = _x_integral_on(u, T1, a + eps, b - eps, phi) - _x_integral_on(u, t, a + eps, b - eps, phi)
    inside = (xn > a + eps) & (xn < b - eps)
    later = tn > t
    vol = float(np.einsum("i,ij,j->", tw[later], U[later][:, inside], xw[inside]))
    bflux = 0.0
    for z in (a + eps, b - eps):
        r = integrate_adaptive(lambda tau, z=z: u(np.full(np.shape(tau), z), tau), t, T1, tol,
                               breakpoints=tuple(p for p in anchors if t < p < T1))
        bflux += float(r.value)
    rep.extra["torsion_identity_residual"] = abs(lhs - (-vol + Le / 2 * bflux))
    return rep


# ------------------------------------------------------------ lateral convergence

def _lateral_rhs(triple: TraceTriple, d: Domain, x: float, s: float, t: float, tol: float) -> float:
    a, b = d.bounds
    L = b - a
    total = 0.0
    for side, t0, m in triple.nu.atoms:
        if s < t0 < t:
            xi = x - a if side == "left" else b - x
            total += m * float(normal_1d(xi, t - t0, L).value)
    for side in sorted({dd.side for dd in triple.nu.densities}):
        xi = x - a if side == "left" else b - x
        r = integrate_lateral_time(lambda tau, xi=xi, side=side: normal_1d(xi, t - tau, L).value
                                   * triple.nu.density(side, tau), s, t, tol, n=2, delta=xi, c1=1.0, c2=0.25)
        total += float(r.value)
    return total


def check_lateral_convergence(triple: TraceTriple, d: Domain, x: float | None = None, t: float = 0.75, s: float = 0.25,
                  epsilons=None, final_tol: float = 1e-3, tol: float = 1e-9,
                  field: SolutionField | None = None) -> SuiteReport:
    """Boundary integral on shrunken intervals, with the shrunken lateral
    kernel, against the kernel integral over nu restricted to (s, t).

    The left side is computed for each eps in ``epsilons`` (default
    ``epsilon0 * 2^-j``, j = 0..9); the check passes when the disagreement
    decreases monotonically and ends below ``final_tol``.
    """
    a, b = d.bounds
    x = 0.5 * (a + b) if x is None else x
    epsilons = d.epsilon0 * 0.5 ** np.arange(10) if epsilons is None else np.asarray(epsilons)
    u = field if field is not None else solution_field(triple, d)
    anchors = {float(t0) for _, t0, _ in triple.nu.atoms if s < t0 < t}
    rhs = _lateral_rhs(triple, d, x, s, t, tol)
    lhs = []
    with _Timer() as tm:
        for eps in epsilons:
            Le = b - a - 2 * eps
            total = 0.0
            for side, z in (("left", a + eps), ("right", b - eps)):
                xi = x - z if side == "left" else z - x

                def f(tau, xi=xi, z=z):
                    tau = np.asarray(tau, dtype=float)
                    return normal_1d(xi, t - tau, Le).value * u(np.full(tau.shape, z), tau)

                v, _ = _anchored_time_integral(f, s, t, anchors | {t}, tol, min(eps * eps, xi * xi) / 400)
                total += v
            lhs.append(total)
    lhs = np.asarray(lhs)
    errs = np.abs(lhs - rhs)
    # steps already at quadrature noise count as converged
    noise = 100 * tol * max(1.0, abs(rhs))
    steps = np.diff(errs)
    monotone = bool(np.all((steps < 0) | (errs[1:] <= noise)))
    final = float(errs[-1] / abs(rhs)) if rhs != 0.0 else float(errs[-1])
    rep = SuiteReport("lateral-convergence")
    rep.add("lateral_limit_monotone", "shrinking-boundary integrals converge to the lateral kernel integral",
            monotone, float(max(steps[errs[1:] > noise], default=0.0)), 0.0,
            "errors " + " ".join(f"{e:.3e}" for e in errs), tm.elapsed / 2)
    rep.add("lateral_limit_final", "shrinking-boundary integrals converge to the lateral kernel integral",
            final <= final_tol, final, final_tol, f"rhs {rhs:.10g}, finest lhs {lhs[-1]:.10g} ({'relative' if rhs else 'absolute'})",
            tm.elapsed / 2)
    rep.extra.update({"epsilons": np.asarray(epsilons), "lhs": lhs, "rhs": rhs, "errors": errs})
    return rep


# ------------------------------------------------------------ round trip

def _rel_l1_density(mu_est: InteriorMeasure, mu_true: InteriorMeasure, d: Domain) -> tuple:
    a, b = d.bounds
    xs, ws = gauss_legendre_panels(np.linspace(a, b, 257), 8)
    est = mu_est.density(xs, d)
    tru = mu_true.density(xs, d)
    num = float(np.sum(ws * np.abs(est - tru)))
    den = float(np.sum(ws * np.abs(tru)))
    # atoms are compared by total mass
    num += abs(sum(m for _, m in mu_est.atoms) - sum(m for _, m in mu_true.atoms))
    den += sum(m for _, m in mu_true.atoms)
    return num, den


def _mu_total(mu: InteriorMeasure, d: Domain) -> float:
    a, b = d.bounds
    xs, ws = gauss_legendre_panels(np.linspace(a, b, 257), 8)
    return float(np.sum(ws * mu.density(xs, d))) + sum(m for _, m in mu.atoms)


def _bin_masses(nu: LateralMeasure, side: str, edges) -> np.ndarray:
    return np.array([_lateral_mass_between(nu, side, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])


def contamination(T: float = 1.0, amount: float = 0.01) -> TraceTriple:
    """A small amount of every component, for leakage fault injection."""
    mu = InteriorMeasure(densities=(Density((0.0, np.pi), expr="sin(x)", weight=amount),))
    lam = CornerMeasure((("right", amount),))
    nu = LateralMeasure((), tuple(Density((0.0, T), expr="cutoff(t, 0.02, 0.98, 0.08)", side=s, weight=amount)
                                  for s in ("left", "right")), T)
    return TraceTriple(mu, lam, nu, T)


ROUNDTRIP_MUTATIONS = {
    "scaled": lambda tr: scale_triple(tr, 1.05),
    "contaminated": lambda tr: add_triples(tr, contamination(tr.horizon)),
}


def roundtrip(triple: TraceTriple, d: Domain, *, mutation: str | Callable | None = None,
              sched: ExtractionSchedule | None = None, edges=None, cfg: RepresentationConfig = RepresentationConfig(),
              mu_tol: float = 0.02, lam_tol: float = 1e-3, nu_tol: float = 0.02, noise_floor: float = 1e-3) -> SuiteReport:
    """Build u from ``triple``, extract its traces and compare.

    ``mutation`` maps a triple to the triple actually used to build every
    field (fault injection); the comparison is always with ``triple``.
    The split check builds the nu-only field and the (mu, lambda)-only field
    and requires a null initial trace and a null lateral trace respectively.
    """
    if isinstance(mutation, str):
        mutation = ROUNDTRIP_MUTATIONS[mutation]
    mutate = mutation or (lambda tr: tr)
    T = triple.horizon
    sched = sched or default_schedule(d)
    edges = np.linspace(0.05 * T, 0.95 * T, 17) if edges is None else np.asarray(edges)
    rep = SuiteReport("roundtrip")
    anchor = "solution built from a trace triple has that trace triple"

    with _Timer() as tm:
        u = solution_field(mutate(triple), d, cfg)
        mu_est, lam_est, d_init = extract_initial_trace(u, sched)
        nu_est, d_lat = extract_lateral_shrinking(u, sched, edges, noise_floor=noise_floor)
    rep.extra.update({"mu": mu_est, "lambda": lam_est, "nu": nu_est, "initial": d_init, "lateral": d_lat})
    has_mu = bool(triple.mu.atoms or triple.mu.densities)
    has_lam = bool(triple.lam.atoms)
    has_nu = bool(triple.nu.atoms or triple.nu.densities)

    if has_mu:
        num, den = _rel_l1_density(mu_est, triple.mu, d)
        rel = num / den
        rep.add("mu_relative_l1", anchor, rel <= mu_tol, rel, mu_tol, "relative L1 distance of densities plus atom mass",
                tm.elapsed)
    else:
        tot = _mu_total(mu_est, d)
        rep.add("mu_leakage", anchor, tot <= noise_floor, tot, noise_floor, "total recovered mu mass", tm.elapsed)
    lam_gap = max(abs(lam_est.mass_at(s) - triple.lam.mass_at(s)) for s in d.sides)
    name = "lambda_absolute" if has_lam else "lambda_leakage"
    rep.add(name, anchor, lam_gap <= lam_tol, lam_gap, lam_tol,
            " ".join(f"{s}={lam_est.mass_at(s):.6g}" for s in d.sides), tm.elapsed)
    if has_nu:
        worst = 0.0
        for side in d.sides:
            true_m = _bin_masses(triple.nu, side, edges)
            est_m = _bin_masses(nu_est, side, edges)
            big = true_m > noise_floor
            if big.any():
                worst = max(worst, float(np.max(np.abs(est_m[big] - true_m[big]) / true_m[big])))
            if (~big).any():
                worst = max(worst, float(np.max(np.abs(est_m[~big] - true_m[~big]))) / noise_floor * nu_tol)
        rep.add("nu_bins_relative", anchor, worst <= nu_tol, worst, nu_tol,
                "max relative bin error (absolute/noise floor on empty bins)", tm.elapsed)
    else:
        tot = sum(float(np.sum(_bin_masses(nu_est, s, edges))) for s in d.sides)
        rep.add("nu_leakage", anchor, tot <= noise_floor, tot, noise_floor, "total recovered nu mass", tm.elapsed)

    # split: nu-only field has no initial trace, (mu, lambda)-only field no lateral trace
    same = triple_to_dict
    nu_only = TraceTriple(nu=triple.nu, horizon=T)
    ml_only = TraceTriple(mu=triple.mu, lam=triple.lam, nu=LateralMeasure(horizon=T), horizon=T)
    with _Timer() as tm:
        if same(nu_only) == same(triple):
            m1, l1 = mu_est, lam_est
        else:
            m1, l1, _ = extract_initial_trace(solution_field(mutate(nu_only), d, cfg), sched)
        v1 = _mu_total(m1, d) + sum(l1.mass_at(s) for s in d.sides)
    rep.add("split_lateral_part_initial_trace", "the nu-only part of the solution has zero initial trace",
            v1 <= noise_floor, v1, noise_floor, "mu mass + lambda mass of the nu-only field", tm.elapsed)
    with _Timer() as tm:
        if same(ml_only) == same(triple):
            n2 = nu_est
        else:
            n2, _ = extract_lateral_shrinking(solution_field(mutate(ml_only), d, cfg), sched, edges,
                                              noise_floor=noise_floor)
        v2 = sum(float(np.sum(_bin_masses(n2, s, edges))) for s in d.sides)
    rep.add("split_initial_part_lateral_trace", "the (mu, lambda) part of the solution has zero lateral trace",
            v2 <= noise_floor, v2, noise_floor, "nu mass of the (mu, lambda)-only field", tm.elapsed)
    return rep


# ------------------------------------------------------------ FD oracle

def _probes(d: Domain, T: float, n: int, seed: int, t_min: float = 0.05) -> np.ndarray:
    a, b = d.bounds
    rng = np.random.default_rng(seed)
    x = rng.uniform(a + 0.05 * (b - a), b - 0.05 * (b - a), n)
    t = rng.uniform(t_min, T, n)
    return np.stack([x, t], axis=1)


def oracle_compare(triple: TraceTriple, d: Domain, h: float = 1 / 256, k: float = 1 / 256, probes=None,
                   n_probes: int = 20, seed: int = 0, rel_tol: float = 1e-3,
                   cfg: RepresentationConfig = RepresentationConfig(),
                   field: SolutionField | None = None) -> SuiteReport:
    """Pointwise relative error of the representation against Crank-Nicolson.

    ``field`` replaces the representation-built field (fault injection).
    """
    T = triple.horizon
    P = _probes(d, T, n_probes, seed) if probes is None else np.atleast_2d(np.asarray(probes, dtype=float))
    with _Timer() as tm:
        u0, gl, gr = fd_data_from_triple(triple, d, h)
        fd = fd_solve(d, u0, gl, gr, T, h, k)
        ref = fd(P[:, 0], P[:, 1])
        u = field if field is not None else solution_field(triple, d, cfg)
        ev = u.evaluate(P[:, 0], P[:, 1])
        gap = np.abs(ev.value - ref)
        rel = gap / np.maximum(np.abs(ref), 1e-300)
    i = int(np.argmax(rel))
    rep = SuiteReport("oracle-compare")
    rep.add("oracle_relative_error", "representation formula against an independent finite-difference solution",
            rel.max() <= rel_tol, rel.max(), rel_tol,
            f"{len(P)} probes; worst at (x={P[i, 0]:.4f}, t={P[i, 1]:.4f}), u={ref[i]:.4e}, "
            f"abs gap {gap[i]:.3e}; max abs gap {gap.max():.3e}; FD min {fd.min_value:.2e}", tm.elapsed)
    rep.extra.update({"probes": P, "fd": ref, "representation": ev.value, "relative": rel, "absolute": gap})
    return rep


def fd_convergence_order(d: Domain, ns=(64, 128, 256), T: float = 1.0,
                         scheme: Callable = fd_solve) -> SuiteReport:
    """Observed order of the FD oracle on exp(-t) sin(x) with k = h."""
    a, b = d.bounds
    errs = []
    with _Timer() as tm:
        for n in ns:
            h = (b - a) / n
            sol = scheme(d, lambda x: np.sin(np.pi * (x - a) / (b - a)), lambda t: 0.0, lambda t: 0.0, T, h, h)
            lam = (np.pi / (b - a)) ** 2
            exact = np.exp(-lam * sol.ts[:, None]) * np.sin(np.pi * (sol.xs[None, :] - a) / (b - a))
            errs.append(float(np.max(np.abs(sol.values - exact))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    ok = bool(np.all((orders >= 1.8) & (orders <= 2.2)))
    rep = SuiteReport("fd-order")
    rep.add("fd_observed_order", "second-order accuracy of the finite-difference oracle", ok, float(orders[-1]), 2.0,
            "errors " + " ".join(f"{e:.3e}" for e in errs) + "; orders " + " ".join(f"{o:.3f}" for o in orders),
            tm.elapsed)
    rep.extra["errors"] = errs
    return rep


# ------------------------------------------------------------ monotone H

def check_monotone_H(u: SolutionField, T1: float | None = None, xs=None, times=None, n_probes: int = 10,
                     seed: int = 0, sched: ExtractionSchedule | None = None, nu_est=None,
                     zero_nu: bool = False) -> SuiteReport:
    """H(x, t) = w(x, t) + sum_sides M(x, side) nu((t, T1)) must not increase in t.

    nu is estimated by shrinking-boundary extraction on bins aligned with
    the time schedule ``t_j = 0.5 * 2^-j`` (j = 0..7). ``zero_nu`` replaces
    the estimate by the zero measure (fault injection).
    """
    d = u.domain
    a, b = d.bounds
    T = u.horizon
    T1 = 0.9 * T if T1 is None else T1
    times = np.asarray(0.5 * T * 0.5 ** np.arange(8) if times is None else times, dtype=float)
    if xs is None:
        rng = np.random.default_rng(seed)
        xs = np.sort(rng.uniform(a + 0.1 * (b - a), b - 0.1 * (b - a), n_probes))
    xs = np.asarray(xs, dtype=float)
    sched = sched or default_schedule(d)
    rep = SuiteReport("monotone-H")
    with _Timer() as tm:
        edges = np.unique(np.concatenate([times, [T1]]))
        if zero_nu:
            nu_est, nu_err = LateralMeasure(horizon=T), {s: np.zeros(len(edges) - 1) for s in d.sides}
        elif nu_est is None:
            nu_est, diag = extract_lateral_shrinking(u, sched, edges, spike_factor=np.inf)
            nu_err = {s: diag["sides"][s]["error"] for s in d.sides}
        else:
            nu_err = {s: np.zeros(len(edges) - 1) for s in d.sides}
        H = []
        Herr = []
        for t in times:
            v, e = H_function(u, nu_est, T1, xs, float(t))
            later = edges[:-1] >= t - 1e-15
            lat_err = sum(martin_kernel(d, xs, s) * float(np.sum(nu_err[s][later])) for s in d.sides)
            H.append(v)
            Herr.append(e + lat_err)
        H = np.array(H)  # rows follow decreasing t
        Herr = np.array(Herr)
        # along decreasing t, H must not decrease
        drop = H[:-1] - H[1:]
        allowed = Herr[:-1] + Herr[1:]
        ratio = float(np.max(drop / allowed))
    rep.add("H_nonincreasing", "monotonicity in t of the Green potential plus the lateral Martin part",
            ratio <= 1.0, ratio, 1.0,
            f"{len(xs)} probes x {len(times)} times; worst violation/allowed", tm.elapsed)
    rep.extra.update({"H": H, "H_error": Herr, "times": times, "xs": xs})
    return rep
