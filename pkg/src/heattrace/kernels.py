"""Dirichlet heat kernels, their boundary normal derivatives, and the elliptic
Green function.

Interval kernels use two representations, each truncated by a rigorous tail
bound:

* the sine series ``(2/L) sum_k exp(-(k pi/L)^2 tau) sin(k pi xi/L) sin(k pi eta/L)``
  for ``tau >= switch_threshold``;
* the method-of-images Gaussian sum for smaller ``tau``.

Rectangle kernels are products of interval kernels.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .domain import BoundaryPoint, Domain, DomainError

__all__ = [
    "Evaluated",
    "KernelEvaluator",
    "EllipticGreen",
    "tail_bound",
    "green_1d",
    "normal_1d",
    "log_green_1d",
    "log_normal_1d",
]

_EPS = np.finfo(float).eps
_CHUNK = 4_000_000


class Evaluated(NamedTuple):
    value: np.ndarray
    error: np.ndarray


def _spectral_tail(kind: str, n_terms: int, tau: float, L: float) -> float:
    c = (np.pi / L) ** 2 * tau
    k1 = n_terms + 1
    if kind == "value":
        tail = np.exp(-c * k1 * k1) + 0.5 * np.sqrt(np.pi / c) * special.erfc(k1 * np.sqrt(c))
        return float(2.0 / L * tail)
    # k exp(-c k^2) decreases once k >= 1/sqrt(2c)
    if k1 < 1.0 / np.sqrt(2.0 * c):
        return np.inf
    tail = k1 * np.exp(-c * k1 * k1) + np.exp(-c * k1 * k1) / (2.0 * c)
    return float(2.0 / L * np.pi / L * tail)


def _image_tail(kind: str, n_pairs: int, tau: float, L: float) -> float:
    j = n_pairs + 1
    norm = 1.0 / np.sqrt(4.0 * np.pi * tau)

    def gauss_sum(r0):
        # sum over a family with spacing 2L starting at r0 of the Gaussian
        return norm * np.exp(-r0 * r0 / (4 * tau)) + 0.5 * special.erfc(r0 / (2 * np.sqrt(tau))) / (2 * L)

    if kind == "value":
        return float(2.0 * (gauss_sum((2 * j - 1) * L) + gauss_sum(2 * (j - 1) * L)))
    r0 = (2 * j - 1) * L
    if r0 < np.sqrt(2 * tau):
        return np.inf
    f0 = r0 / tau * norm * np.exp(-r0 * r0 / (4 * tau))
    return float(2.0 * (f0 + 2.0 * norm * np.exp(-r0 * r0 / (4 * tau)) / (2 * L)))


def tail_bound(representation: str, terms_used: int, t_minus_s: float,
               length: float = np.pi, kind: str = "value") -> float:
    """Upper bound on the truncation error of a kernel evaluation.

    ``representation`` is "spectral" (``terms_used`` sine modes) or "image"
    (``terms_used = 2M + 1`` image pairs ``m = -M..M``). ``kind`` is "value"
    for G or "normal" for its boundary normal derivative.
    """
    if terms_used < 1 or t_minus_s <= 0:
        raise ValueError("terms_used >= 1 and t_minus_s > 0 required")
    if representation == "spectral":
        return _spectral_tail(kind, terms_used, t_minus_s, length)
    if representation == "image":
        return _image_tail(kind, max((terms_used - 1) // 2, 0), t_minus_s, length)
    raise ValueError(f"unknown representation {representation!r}")


def _spectral_terms(kind, tau_min, L, target, cap):
    c = (np.pi / L) ** 2 * tau_min
    n = max(1, int(np.sqrt(max(np.log(1.0 / max(target, 1e-300)), 1.0) / c)) - 2)
    n = min(n, cap)
    while n < cap and _spectral_tail(kind, n, tau_min, L) > target:
        n += max(1, n // 8)
    n = min(n, cap)
    return n, _spectral_tail(kind, n, tau_min, L)


def _image_pairs(kind, tau_max, L, target):
    m = 1
    while _image_tail(kind, m, tau_max, L) > target and m < 50:
        m += 1
    return m, _image_tail(kind, m, tau_max, L)


def _reference_scale(tau, L):
    # typical kernel magnitude used to turn the relative tolerance into an absolute one
    return np.maximum(1.0 / np.sqrt(4 * np.pi * tau), 2.0 / L) * np.exp(-np.minimum((np.pi / L) ** 2 * tau, 700.0))


def _eval_split(kind, xi, eta, tau, L, tol, cap, switch):
    """Shared driver for G (kind 'value') and the left normal derivative (kind 'normal')."""
    xi, eta, tau = np.broadcast_arrays(np.asarray(xi, float), np.asarray(eta, float), np.asarray(tau, float))
    if kind == "value":
        # order the arguments so that symmetry holds bit for bit
        xi, eta = np.minimum(xi, eta), np.maximum(xi, eta)
    shape = xi.shape
    xi, eta, tau = xi.ravel(), eta.ravel(), tau.ravel()
    value = np.zeros(xi.shape)
    err = np.zeros(xi.shape)
    if np.any(tau <= 0):
        raise ValueError("kernel needs t > s")
    spec = tau >= switch
    for mask, rep in ((spec, "spectral"), (~spec, "image")):
        if not mask.any():
            continue
        idx = np.nonzero(mask)[0]
        tm = tau[idx]
        if rep == "spectral":
            target = tol * float(np.min(_reference_scale(tm, L)))
            n, tail = _spectral_terms(kind, float(tm.min()), L, target, cap)
            k = np.arange(1, n + 1, dtype=float)
            step = max(1, _CHUNK // n)
            for lo in range(0, len(idx), step):
                sl = idx[lo:lo + step]
                kx = np.pi / L * k[None, :]
                decay = np.exp(-kx ** 2 * tau[sl, None])
                if kind == "value":
                    terms = decay * np.sin(kx * xi[sl, None]) * np.sin(kx * eta[sl, None])
                else:
                    terms = decay * kx * np.sin(kx * xi[sl, None])
                value[sl] = 2.0 / L * terms.sum(axis=1)
                err[sl] = tail + 4 * _EPS * 2.0 / L * np.abs(terms).sum(axis=1)
        else:
            target = tol * float(np.min(_reference_scale(tm, L)))
            m, tail = _image_pairs(kind, float(tm.max()), L, target)
            shifts = 2.0 * L * np.arange(-m, m + 1, dtype=float)
            t4 = 4.0 * tau[idx, None]
            norm = 1.0 / np.sqrt(np.pi * t4[:, 0])
            if kind == "value":
                r1 = xi[idx, None] - eta[idx, None] + shifts[None]
                r2 = xi[idx, None] + eta[idx, None] + shifts[None]
                terms = np.exp(-r1 ** 2 / t4) - np.exp(-r2 ** 2 / t4)
                absum = np.exp(-r1 ** 2 / t4) + np.exp(-r2 ** 2 / t4)
                value[idx] = norm * terms.sum(axis=1)
                err[idx] = tail + 4 * _EPS * norm * absum.sum(axis=1)
            else:
                r = xi[idx, None] + shifts[None]
                terms = r / tau[idx, None] * np.exp(-r ** 2 / t4)
                value[idx] = norm * terms.sum(axis=1)
                err[idx] = tail + 4 * _EPS * norm * np.abs(terms).sum(axis=1)
    return value.reshape(shape), err.reshape(shape)


def green_1d(xi, eta, tau, L=np.pi, tol=1e-10, cap=10_000, switch=0.05) -> Evaluated:
    """Dirichlet heat kernel of (0, L) in local coordinates."""
    return Evaluated(*_eval_split("value", xi, eta, tau, L, tol, cap, switch))


def normal_1d(xi, tau, L=np.pi, tol=1e-10, cap=10_000, switch=0.05) -> Evaluated:
    """Inner normal derivative of the (0, L) kernel at the left end y = 0."""
    return Evaluated(*_eval_split("normal", xi, 0.0, tau, L, tol, cap, switch))


def log_green_1d(xi, eta, tau, L=np.pi, n_pairs=3):
    """log G via the image sum, normalised by its dominant term; for small tau
    where G itself underflows."""
    xi, eta, tau = np.broadcast_arrays(*(np.asarray(v, float) for v in (xi, eta, tau)))
    d0 = xi - eta
    shifts = 2.0 * L * np.arange(-n_pairs, n_pairs + 1, dtype=float)
    r1 = d0[..., None] + shifts
    r2 = (xi + eta)[..., None] + shifts
    t4 = 4 * tau[..., None]
    rel = np.exp(-(r1 ** 2 - d0[..., None] ** 2) / t4)
    rel_sub = np.exp(-(r2 ** 2 - d0[..., None] ** 2) / t4)
    # the m=0 pair is 1 - exp(-xi*eta/tau); keep it accurate when that is small
    centre = n_pairs
    rest = rel.sum(-1) - rel[..., centre] - (rel_sub.sum(-1) - rel_sub[..., centre])
    s = -np.expm1(-xi * eta / tau) + rest
    return -0.5 * np.log(4 * np.pi * tau) - d0 ** 2 / (4 * tau) + np.log(s)


def log_normal_1d(xi, tau, L=np.pi, n_pairs=3):
    """log of the left normal derivative via the image sum (small tau)."""
    xi, tau = np.broadcast_arrays(np.asarray(xi, float), np.asarray(tau, float))
    shifts = 2.0 * L * np.arange(-n_pairs, n_pairs + 1, dtype=float)
    r = xi[..., None] + shifts
    rel = (r / xi[..., None]) * np.exp(-(r ** 2 - xi[..., None] ** 2) / (4 * tau[..., None]))
    return -0.5 * np.log(4 * np.pi * tau) + np.log(xi / tau) - xi ** 2 / (4 * tau) + np.log(rel.sum(-1))


@dataclass(frozen=True)
class KernelEvaluator:
    """Heat kernels of ``domain x R`` with certified truncation.

    ``tolerance`` is relative to the kernel's natural scale at the given
    time lag; the reported error includes the analytic tail bound plus a
    rounding term.
    """

    domain: Domain
    tolerance: float = 1e-10
    series_cap: int = 10_000
    switch_threshold: float = 0.05

    def _opts(self):
        return dict(tol=self.tolerance, cap=self.series_cap, switch=self.switch_threshold)

    def _interval_args(self, eps=0.0):
        a, b = self.domain.bounds[:2]
        return a + eps, b - a - 2 * eps

    def _check_time(self, t, s):
        tau = np.asarray(t, float) - np.asarray(s, float)
        if np.any(tau <= 0):
            raise ValueError("kernel evaluation needs s < t")
        return tau

    def _check_points(self, pts, eps=0.0):
        pts = np.asarray(pts, float)
        if self.domain.kind == "interval":
            a, b = self.domain.bounds
            ok = (pts >= a + eps - 1e-12) & (pts <= b - eps + 1e-12)
        else:
            a, b, c, d = self.domain.bounds
            ok = ((pts[..., 0] >= a + eps - 1e-12) & (pts[..., 0] <= b - eps + 1e-12)
                  & (pts[..., 1] >= c + eps - 1e-12) & (pts[..., 1] <= d - eps + 1e-12))
        if not np.all(ok):
            raise DomainError("kernel argument outside the closed domain")
        return pts

    def heat_green(self, x, t, y, s, eps: float = 0.0) -> Evaluated:
        """G(x, t; y, s); with ``eps > 0`` the kernel of the shrunken domain."""
        tau = self._check_time(t, s)
        x = self._check_points(x, eps)
        y = self._check_points(y, eps)
        if self.domain.kind == "interval":
            a, L = self._interval_args(eps)
            v, e = green_1d(x - a, y - a, tau, L, **self._opts())
            return Evaluated(np.where((y <= a) | (y >= a + L), 0.0, v), e)
        (a1, L1), (a2, L2) = self._rect_args(eps)
        g1 = green_1d(x[..., 0] - a1, y[..., 0] - a1, tau, L1, **self._opts())
        g2 = green_1d(x[..., 1] - a2, y[..., 1] - a2, tau, L2, **self._opts())
        return _product(g1, g2)

    def heat_green_shrunken(self, eps: float, x, t, y, s) -> Evaluated:
        if not 0 < eps <= self.domain.epsilon0:
            raise DomainError(f"eps={eps} outside (0, epsilon0]")
        return self.heat_green(x, t, y, s, eps=eps)

    def _rect_args(self, eps):
        a, b, c, d = self.domain.bounds
        return (a + eps, b - a - 2 * eps), (c + eps, d - c - 2 * eps)

    def heat_green_normal(self, x, t, z, s, eps: float = 0.0) -> Evaluated:
        """Inner-normal derivative in y of G(x, t; y, s) at the boundary point ``z``.

        ``z`` is a BoundaryPoint or, for the interval, a side label. With
        ``eps > 0`` the boundary is that of the shrunken domain.
        """
        tau = self._check_time(t, s)
        x = self._check_points(x, eps)
        side, param = (z.side, z.param) if isinstance(z, BoundaryPoint) else (z, 0.0)
        if self.domain.kind == "interval":
            a, L = self._interval_args(eps)
            if side == "left":
                return normal_1d(x - a, tau, L, **self._opts())
            if side == "right":
                return normal_1d(a + L - x, tau, L, **self._opts())
            raise DomainError(f"{side!r} is not a boundary side of the interval")
        (a1, L1), (a2, L2) = self._rect_args(eps)
        opts = self._opts()
        if side in ("bottom", "top"):
            along = green_1d(x[..., 0] - a1, param, tau, L1, **opts)
            xi2 = x[..., 1] - a2 if side == "bottom" else a2 + L2 - x[..., 1]
            across = normal_1d(xi2, tau, L2, **opts)
        elif side in ("left", "right"):
            along = green_1d(x[..., 1] - a2, param, tau, L2, **opts)
            xi1 = x[..., 0] - a1 if side == "left" else a1 + L1 - x[..., 0]
            across = normal_1d(xi1, tau, L1, **opts)
        else:
            raise DomainError(f"{side!r} is not a side of the rectangle")
        return _product(along, across)

    def log_heat_green_normal(self, x, t, side, s):
        """log of the interval normal kernel, usable where the value underflows."""
        tau = self._check_time(t, s)
        a, L = self._interval_args()
        xi = np.asarray(x, float) - a if side == "left" else a + L - np.asarray(x, float)
        return np.where(tau < self.switch_threshold, log_normal_1d(xi, tau, L),
                        np.log(np.maximum(normal_1d(xi, np.maximum(tau, self.switch_threshold), L).value, 1e-300)))

    def log_heat_green(self, x, t, y, s):
        tau = self._check_time(t, s)
        a, L = self._interval_args()
        return log_green_1d(np.asarray(x, float) - a, np.asarray(y, float) - a, tau, L)


def _product(g1: Evaluated, g2: Evaluated) -> Evaluated:
    v = g1.value * g2.value
    e = np.abs(g1.value) * g2.error + np.abs(g2.value) * g1.error + g1.error * g2.error
    return Evaluated(v, e)


@dataclass(frozen=True)
class EllipticGreen:
    """Green function of -Laplace with Dirichlet data, and its Martin kernel."""

    domain: Domain
    rectangle_terms: int = 400

    @property
    def bound_constant(self) -> float:
        """C with G(x, y) <= C delta(y) on the interval."""
        return 1.0

    def green(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if not (np.all(self.domain.contains(x, True)) and np.all(self.domain.contains(y, True))):
            raise DomainError("elliptic Green argument outside the closed domain")
        if self.domain.kind == "interval":
            a, b = self.domain.bounds
            lo = np.minimum(x, y) - a
            hi = np.maximum(x, y) - a
            L = b - a
            return lo * (L - hi) / L
        return self._rect_green(x, y)

    def martin(self, x, z):
        """Inner normal derivative in y of G(x, y) at the boundary point (side label) ``z``."""
        side = z.side if isinstance(z, BoundaryPoint) else z
        x = np.asarray(x, float)
        if self.domain.kind != "interval":
            return self._rect_martin(x, z)
        a, b = self.domain.bounds
        if side == "left":
            return (b - x) / (b - a)
        if side == "right":
            return (x - a) / (b - a)
        raise DomainError(f"{side!r} is not a boundary side of the interval")

    def _rect_green(self, x, y):
        # single sine series in the first coordinate with the 1-D Green function
        # of (-d^2 + kappa^2) in the second, written with decaying exponentials
        a, b, c, d = self.domain.bounds
        A, B = b - a, d - c
        k = np.arange(1, self.rectangle_terms + 1, dtype=float)
        kap = k * np.pi / A
        x1, x2 = x[..., 0, None] - a, x[..., 1, None] - c
        y1, y2 = y[..., 0, None] - a, y[..., 1, None] - c
        lo, hi = np.minimum(x2, y2), np.maximum(x2, y2)
        # sinh(k lo) sinh(k (B - hi)) / (k sinh(k B))
        g = (np.exp(-kap * (hi - lo)) * (-np.expm1(-2 * kap * lo)) * (-np.expm1(-2 * kap * (B - hi)))
             / (2 * kap * (-np.expm1(-2 * kap * B))))
        return (2.0 / A * np.sin(kap * x1) * np.sin(kap * y1) * g).sum(-1)

    def _rect_martin(self, x, z):
        a, b, c, d = self.domain.bounds
        side, param = z.side, z.param
        if side in ("bottom", "top"):
            A, B = b - a, d - c
            along_x, p = x[..., 0, None] - a, param
            across = x[..., 1, None] - c if side == "bottom" else d - x[..., 1, None]
        else:
            A, B = d - c, b - a
            along_x, p = x[..., 1, None] - c, param
            across = x[..., 0, None] - a if side == "left" else b - x[..., 0, None]
        k = np.arange(1, self.rectangle_terms + 1, dtype=float)
        kap = k * np.pi / A
        # d/dy2 of sinh(k y2) sinh(k (B - x2)) / (k sinh(k B)) at y2 = 0
        g = np.exp(-kap * across) * (-np.expm1(-2 * kap * (B - across))) / (-np.expm1(-2 * kap * B))
        return (2.0 / A * np.sin(kap * along_x) * np.sin(kap * p) * g).sum(-1)
