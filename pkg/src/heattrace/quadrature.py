"""Adaptive quadrature engines.

Everything here is built on one vectorised Gauss-Kronrod (7/15) core that
integrates many components at once over per-component windows ``[lo_i, hi_i]``.
All components share one adaptive subdivision of the unit interval, so a
single integrand call evaluates every component at every active node.

Integrands must be pure functions of their node arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

__all__ = [
    "QuadratureResult",
    "DivergenceError",
    "integrate_mapped",
    "integrate_adaptive",
    "integrate_lateral_time",
    "integrate_graded",
    "envelope_integral",
    "gauss_legendre_panels",
]

# Kronrod 15-point nodes (non-negative half) with the embedded Gauss 7-point weights.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-point rule on [-1, 1], Gauss weights zero on Kronrod-only nodes.
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
_g = np.zeros(8)
_g[1::2] = _WG
GAUSS_WEIGHTS = np.concatenate([_g[:-1], _g[::-1]])
del _g

_EPS = np.finfo(float).eps


class DivergenceError(ValueError):
    """Raised when an integral is detected (or declared) to diverge."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float | np.ndarray
    error_estimate: float | np.ndarray
    evaluations: int
    converged: bool
    early_exit: bool = False

    def __iter__(self):
        # allows ``value, err = result``
        yield self.value
        yield self.error_estimate


def integrate_mapped(
    f: Callable[[np.ndarray], np.ndarray],
    lo,
    hi,
    tol: float = 1e-8,
    *,
    initial_panels: int = 4,
    max_panels: int = 20000,
    breaks=None,
) -> QuadratureResult:
    """Integrate ``m`` components, component ``i`` over ``[lo[i], hi[i]]``.

    ``f`` receives nodes ``y`` of shape ``(m, n)`` and returns ``(m, ..., n)``.
    The result value has shape ``(m, ...)``. Convergence is declared when
    every component's summed error estimate is at most ``tol``.

    ``breaks`` are optional fractions in (0, 1) used as initial panel edges
    for every component.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    lo, hi = np.broadcast_arrays(lo, hi)
    width = hi - lo

    edges = np.linspace(0.0, 1.0, max(1, initial_panels) + 1)
    if breaks is not None:
        b = np.asarray(breaks, dtype=float).ravel()
        b = b[(b > 0.0) & (b < 1.0)]
        edges = np.unique(np.concatenate([edges, b]))
    left, right = edges[:-1], edges[1:]

    evaluations = 0
    converged = True
    kron_all = err_all = abs_all = None
    pl = np.empty(0)
    pr = np.empty(0)

    while True:
        centre = 0.5 * (left + right)
        half = 0.5 * (right - left)
        r = centre[:, None] + half[:, None] * NODES[None, :]  # (p, 15)
        y = lo[:, None, None] + width[:, None, None] * r[None]  # (m, p, 15)
        m, p = y.shape[0], y.shape[1]
        vals = np.asarray(f(y.reshape(m, p * 15)), dtype=float)
        evaluations += m * p * 15
        extra = vals.shape[1:-1]
        vals = vals.reshape((m,) + extra + (p, 15))
        scale = (width.reshape((m,) + (1,) * len(extra)))[..., None] * half
        kron = np.einsum("...pk,k->...p", vals, KRONROD_WEIGHTS) * scale
        gauss = np.einsum("...pk,k->...p", vals, GAUSS_WEIGHTS) * scale
        absk = np.einsum("...pk,k->...p", np.abs(vals), KRONROD_WEIGHTS) * np.abs(scale)
        if not np.all(np.isfinite(kron)):
            raise FloatingPointError("non-finite integrand value")
        err = np.abs(kron - gauss) + 50.0 * _EPS * absk

        if kron_all is None:
            kron_all, err_all, abs_all = kron, err, absk
        else:
            kron_all = np.concatenate([kron_all, kron], axis=-1)
            err_all = np.concatenate([err_all, err], axis=-1)
            abs_all = np.concatenate([abs_all, absk], axis=-1)
        pl = np.concatenate([pl, left])
        pr = np.concatenate([pr, right])

        comp_err = err_all.sum(axis=-1)
        # a tolerance below the rounding level of the integral is met once only rounding is left
        target = np.maximum(tol, 100.0 * _EPS * abs_all.sum(axis=-1))
        if comp_err.size == 0 or np.all(comp_err <= target):
            break
        panel_err = err_all.reshape(-1, len(pl)).max(axis=0)
        widths = pr - pl
        split = (panel_err > tol * widths) & (panel_err >= 0.1 * panel_err.max())
        if not split.any():
            split = panel_err >= 0.5 * panel_err.max()
        split &= widths > 1e-40
        if not split.any() or len(pl) + int(split.sum()) > max_panels:
            converged = False
            break
        mid = 0.5 * (pl[split] + pr[split])
        left = np.concatenate([pl[split], mid])
        right = np.concatenate([mid, pr[split]])
        keep = ~split
        kron_all, err_all, abs_all = kron_all[..., keep], err_all[..., keep], abs_all[..., keep]
        pl, pr = pl[keep], pr[keep]

    total = kron_all.sum(axis=-1)
    total_err = err_all.sum(axis=-1)
    if np.any(total_err > np.maximum(tol, 100.0 * _EPS * abs_all.sum(axis=-1))):
        converged = False
    return QuadratureResult(total, total_err, evaluations, converged)


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-8,
    *,
    breakpoints=(),
    initial_panels: int = 4,
    max_panels: int = 20000,
) -> QuadratureResult:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    ``f`` maps a 1-D node array to values of shape ``(..., n)``; vector-valued
    integrands share one subdivision. Hitting ``max_panels`` returns the best
    estimate with ``converged=False``.
    """
    a, b = float(a), float(b)
    if b == a:
        return QuadratureResult(0.0, 0.0, 0, True)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    breaks = [(float(p) - a) / (b - a) for p in breakpoints]

    def g(y):
        return np.asarray(f(y[0]), dtype=float)[None]

    res = integrate_mapped(g, [a], [b], tol, initial_panels=initial_panels,
                           max_panels=max_panels, breaks=breaks)
    value = sign * res.value[0]
    err = res.error_estimate[0]
    if np.ndim(value) == 0:
        value, err = float(value), float(err)
    return QuadratureResult(value, err, res.evaluations, res.converged)


def envelope_integral(n: int, delta: float, c1: float, c2: float, lo: float, hi: float) -> float:
    """Closed form of  ``int_lo^hi c1 tau^{-(n+1)/2} exp(-c2 delta^2 / tau) dtau``."""
    if hi <= lo:
        return 0.0
    q = c2 * delta * delta
    if q == 0.0:
        if n == 1:
            return np.inf if lo == 0.0 else c1 * np.log(hi / lo)
        return np.inf if lo == 0.0 else c1 * (lo ** ((1 - n) / 2) - hi ** ((1 - n) / 2)) * 2 / (n - 1)
    v_hi = q / lo if lo > 0 else np.inf
    v_lo = q / hi
    a = 0.5 * (n - 1)
    if n == 1:
        upper = special.exp1(v_lo) - (special.exp1(v_hi) if np.isfinite(v_hi) else 0.0)
        return float(c1 * upper)
    gam = special.gamma(a)
    upper = special.gammaincc(a, v_lo) - (special.gammaincc(a, v_hi) if np.isfinite(v_hi) else 0.0)
    return float(c1 * q ** (-a) * gam * upper)


def integrate_lateral_time(
    f: Callable[[np.ndarray], np.ndarray],
    s: float,
    t: float,
    tol: float = 1e-8,
    *,
    n: int = 1,
    delta: float = 0.0,
    c1: float = 1.0,
    c2: float = 0.25,
    cut: float = 40.0,
) -> QuadratureResult:
    """Integrate ``f(tau)`` over ``(s, t)`` when ``f`` has the boundary-layer
    profile ``c1 (t-tau)^{-(n+1)/2} exp(-c2 delta^2/(t-tau))`` near ``tau = t``.

    The substitution ``v = 1/(t - tau)`` turns the layer into exponential
    decay in ``v``; integrating in ``log v`` keeps every time scale between
    ``c2 delta^2 / cut`` and ``t - s`` equally resolved. The part of the span
    closer to ``t`` than that cutoff is dropped and its envelope integral is
    added to the error estimate.
    """
    span = t - s
    if span <= 0:
        raise ValueError("empty time span")
    tau_cut = c2 * delta * delta / cut
    if tau_cut >= span:
        env = envelope_integral(n, delta, c1, c2, 0.0, span)
        return QuadratureResult(0.0, env, 0, env <= tol, early_exit=True)
    dropped = envelope_integral(n, delta, c1, c2, 0.0, tau_cut) if tau_cut > 0 else 0.0
    lo = np.log(tau_cut) if tau_cut > 0 else np.log(span) - 50.0

    def g(sigma):
        tau = np.exp(sigma)
        return np.asarray(f(t - tau), dtype=float) * tau

    res = integrate_adaptive(g, lo, np.log(span), tol)
    if not np.isfinite(dropped):
        dropped = 0.0 if tau_cut == 0 else dropped
    err = res.error_estimate + dropped
    return QuadratureResult(res.value, err, res.evaluations, bool(np.all(np.asarray(err) <= tol)))


def integrate_graded(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    alpha: float,
    tol: float = 1e-8,
    *,
    weighted: bool = False,
    singular: str = "left",
    max_pieces: int = 200,
) -> QuadratureResult:
    """Integrate ``f`` on ``[a, b]`` where ``f`` may blow up like
    ``dist^{-alpha}`` at the ``singular`` end(s) ("left", "right", "both").

    With ``weighted=True`` the integrand is assumed to carry one compensating
    power of the distance, so the effective exponent is ``alpha - 1``.
    A geometric mesh with ratio ``0.5 ** (1 / (1 - p))`` is laid toward the
    singular end so that successive pieces shrink their contribution by about
    one half. Pieces that stop shrinking signal divergence.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    p = alpha - (1.0 if weighted else 0.0)
    if p >= 1.0:
        raise DivergenceError(f"integrand ~ dist^-{p:g} is not integrable")
    if singular == "both":
        mid = 0.5 * (a + b)
        r1 = integrate_graded(f, a, mid, alpha, tol / 2, weighted=weighted, singular="left", max_pieces=max_pieces)
        r2 = integrate_graded(f, mid, b, alpha, tol / 2, weighted=weighted, singular="right", max_pieces=max_pieces)
        return QuadratureResult(r1.value + r2.value, r1.error_estimate + r2.error_estimate,
                                r1.evaluations + r2.evaluations, r1.converged and r2.converged)
    if singular not in ("left", "right"):
        raise ValueError(f"unknown singular end {singular!r}")

    q = 0.5 ** (1.0 / (1.0 - max(p, 0.0)))
    w = b - a
    end = a if singular == "left" else b
    direction = 1.0 if singular == "left" else -1.0

    def piece(outer, inner):
        lo_, hi_ = sorted((end + direction * inner, end + direction * outer))
        return integrate_adaptive(f, lo_, hi_, tol / 8)

    value = 0.0
    err = 0.0
    evals = 0
    prev_mag = None
    stalled = 0
    outer = w
    converged = True
    for j in range(max_pieces):
        inner = outer * q if j < max_pieces - 1 else 0.0
        res = piece(outer, inner)
        value = value + res.value
        err = err + res.error_estimate
        evals += res.evaluations
        converged &= res.converged
        mag = float(np.max(np.abs(res.value)))
        if prev_mag is not None and prev_mag > 0:
            ratio = mag / prev_mag
            stalled = stalled + 1 if ratio > 0.95 else 0
            if stalled >= 6:
                raise DivergenceError(
                    f"graded pieces stopped shrinking near x={end:g} (ratio {ratio:.3f}); integral diverges")
            # stop once the tail is negligible or the mesh reaches float resolution at ``end``
            resolved = inner <= 64 * _EPS * max(abs(end), 1.0)
            if j >= 3 and ratio < 0.95:
                tail = mag * ratio / (1.0 - ratio)
                if tail <= tol / 4 or resolved:
                    value = value + np.sign(res.value) * tail
                    err = err + tail
                    break
        prev_mag = mag
        outer = inner
    else:
        converged = False
    if np.ndim(value) == 0:
        value, err = float(value), float(err)
    return QuadratureResult(value, err, evals, bool(converged and np.all(np.asarray(err) <= tol)))


def gauss_legendre_panels(edges, order: int = 16):
    """Composite Gauss-Legendre nodes and weights on consecutive panels."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[None]
    weights = 0.5 * (hi - lo) * w[None]
    return nodes.ravel(), weights.ravel()
