"""Cylindrical-domain geometry: distance to the boundary, its smooth interior
extension, shrunken subdomains and normal-constant extensions.

The interval is the fully supported case. The rectangle is a tensor-product
special case used for kernels and forward evaluation only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import gauss_legendre_panels

__all__ = [
    "Domain",
    "BoundaryPoint",
    "BoundaryQuadrature",
    "DomainError",
    "make_domain",
    "delta",
    "delta_bar",
    "shrunken_boundary",
    "normal_extension",
    "foot_point",
    "smoothstep",
]

INTERVAL_SIDES = ("left", "right")
RECTANGLE_SIDES = ("bottom", "right", "top", "left")


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Domain:
    kind: str
    bounds: tuple
    epsilon0: float

    @property
    def dimension(self) -> int:
        return 1 if self.kind == "interval" else 2

    @property
    def sides(self) -> tuple:
        return INTERVAL_SIDES if self.kind == "interval" else RECTANGLE_SIDES

    @property
    def length(self) -> float:
        """Length of the interval (first side length for rectangles)."""
        return self.bounds[1] - self.bounds[0]

    @property
    def half_width(self) -> float:
        """Half the minimal side length, the largest possible distance to the boundary."""
        if self.kind == "interval":
            return 0.5 * self.length
        a, b, c, d = self.bounds
        return 0.5 * min(b - a, d - c)

    @property
    def blend_width(self) -> float:
        # width of the transition zone beyond epsilon0 used by delta_bar and normal_extension
        return min(self.epsilon0, self.half_width - self.epsilon0)

    def boundary_point(self, side: str, param: float = 0.0) -> "BoundaryPoint":
        if side not in self.sides:
            raise DomainError(f"unknown side {side!r} for {self.kind}")
        if self.kind == "interval":
            a, b = self.bounds
            coords = (a,) if side == "left" else (b,)
            normal = (1.0,) if side == "left" else (-1.0,)
            return BoundaryPoint(side, 0.0, coords, normal)
        a, b, c, d = self.bounds
        if side == "bottom":
            return BoundaryPoint(side, param, (a + param, c), (0.0, 1.0))
        if side == "top":
            return BoundaryPoint(side, param, (a + param, d), (0.0, -1.0))
        if side == "left":
            return BoundaryPoint(side, param, (a, c + param), (1.0, 0.0))
        return BoundaryPoint(side, param, (b, c + param), (-1.0, 0.0))

    def contains(self, x, closed: bool = False) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "interval":
            a, b = self.bounds
            return (x >= a) & (x <= b) if closed else (x > a) & (x < b)
        a, b, c, d = self.bounds
        x1, x2 = x[..., 0], x[..., 1]
        if closed:
            return (x1 >= a) & (x1 <= b) & (x2 >= c) & (x2 <= d)
        return (x1 > a) & (x1 < b) & (x2 > c) & (x2 < d)


@dataclass(frozen=True)
class BoundaryPoint:
    side: str
    param: float
    coords: tuple
    inner_normal: tuple


@dataclass(frozen=True)
class BoundaryQuadrature:
    nodes: tuple  # of (BoundaryPoint, weight)
    epsilon: float

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, w in self.nodes))


def make_domain(kind: str = "interval", bounds=None, epsilon0: float = 0.3) -> Domain:
    """Validate and build a Domain; the default is the interval (0, pi)."""
    if kind not in ("interval", "rectangle"):
        raise DomainError(f"unknown domain kind {kind!r}")
    if bounds is None:
        bounds = (0.0, np.pi) if kind == "interval" else (0.0, np.pi, 0.0, np.pi)
    bounds = tuple(float(v) for v in bounds)
    expected = 2 if kind == "interval" else 4
    if len(bounds) != expected:
        raise DomainError(f"{kind} needs {expected} bounds, got {len(bounds)}")
    sides = [bounds[1] - bounds[0]] + ([bounds[3] - bounds[2]] if kind == "rectangle" else [])
    if not all(np.isfinite(bounds)) or min(sides) <= 0:
        raise DomainError(f"degenerate bounds {bounds}")
    epsilon0 = float(epsilon0)
    if not 0 < epsilon0 < 0.5 * min(sides):
        raise DomainError(f"epsilon0={epsilon0} must lie in (0, {0.5 * min(sides):g})")
    return Domain(kind, bounds, epsilon0)


def _check_inside(d: Domain, x, closed=False):
    if not np.all(d.contains(x, closed=closed)):
        raise DomainError("point outside the domain")


def delta(d: Domain, x) -> np.ndarray:
    """Euclidean distance to the boundary."""
    x = np.asarray(x, dtype=float)
    _check_inside(d, x, closed=True)
    if d.kind == "interval":
        a, b = d.bounds
        return np.minimum(x - a, b - x)
    a, b, c, d_ = d.bounds
    x1, x2 = x[..., 0], x[..., 1]
    return np.minimum(np.minimum(x1 - a, b - x1), np.minimum(x2 - c, d_ - x2))


def _blend_profile(s):
    """Monotone quintic from slope 1 to slope 0, value 0 -> 1/2 (in units of width)."""
    p = s - s ** 3 + 0.5 * s ** 4
    dp = 1.0 - 3.0 * s ** 2 + 2.0 * s ** 3
    d2p = -6.0 * s + 6.0 * s ** 2
    return p, dp, d2p


def delta_bar(d: Domain, x):
    """Smooth positive extension of the distance function.

    Returns ``(value, gradient, laplacian)``. It equals the distance for
    ``delta <= epsilon0``; beyond that a quintic matching value, slope and
    curvature rises to the plateau ``epsilon0 + w/2`` over a zone of width
    ``w = min(epsilon0, half_width - epsilon0)`` (plateau ``1.5 epsilon0``
    whenever ``epsilon0 <= half_width / 2``). Interval only.
    """
    if d.kind != "interval":
        raise DomainError("delta_bar is implemented for the interval only")
    x = np.asarray(x, dtype=float)
    _check_inside(d, x, closed=True)
    a, b = d.bounds
    dist = np.minimum(x - a, b - x)
    sgn = np.where(x - a <= b - x, 1.0, -1.0)  # d(dist)/dx
    e0, w = d.epsilon0, d.blend_width
    s = np.clip((dist - e0) / w, 0.0, 1.0)
    p, dp, d2p = _blend_profile(s)
    inner = dist <= e0
    value = np.where(inner, dist, e0 + w * p)
    grad = np.where(inner, sgn, sgn * dp)
    lap = np.where(inner, 0.0, d2p / w)
    return value, grad, lap


def smoothstep(s):
    """C^2 step: 1 for s <= 0, 0 for s >= 1. Returns value, first and second derivative."""
    s = np.clip(s, 0.0, 1.0)
    v = 1.0 - (10 * s ** 3 - 15 * s ** 4 + 6 * s ** 5)
    dv = -(30 * s ** 2 - 60 * s ** 3 + 30 * s ** 4)
    d2v = -(60 * s - 180 * s ** 2 + 120 * s ** 3)
    return v, dv, d2v


def foot_point(d: Domain, x):
    """Nearest boundary side for interval points; returns side labels array."""
    if d.kind != "interval":
        raise DomainError("foot_point is implemented for the interval only")
    x = np.asarray(x, dtype=float)
    a, b = d.bounds
    return np.where(x - a <= b - x, "left", "right")


def shrunken_boundary(d: Domain, eps: float, order: int = 16) -> BoundaryQuadrature:
    """Quadrature over the boundary of ``{delta > eps}`` with inner normals."""
    if not 0 < eps <= d.epsilon0:
        raise DomainError(f"eps={eps} outside (0, epsilon0={d.epsilon0}]")
    if d.kind == "interval":
        a, b = d.bounds
        return BoundaryQuadrature(
            ((BoundaryPoint("left", 0.0, (a + eps,), (1.0,)), 1.0),
             (BoundaryPoint("right", 0.0, (b - eps,), (-1.0,)), 1.0)),
            eps,
        )
    a, b, c, d_ = d.bounds
    nodes = []
    for side in RECTANGLE_SIDES:
        length = (b - a - 2 * eps) if side in ("bottom", "top") else (d_ - c - 2 * eps)
        xs, ws = gauss_legendre_panels([0.0, length], order)
        for s, w in zip(xs, ws):
            if side == "bottom":
                bp = BoundaryPoint(side, s, (a + eps + s, c + eps), (0.0, 1.0))
            elif side == "top":
                bp = BoundaryPoint(side, s, (a + eps + s, d_ - eps), (0.0, -1.0))
            elif side == "left":
                bp = BoundaryPoint(side, s, (a + eps, c + eps + s), (1.0, 0.0))
            else:
                bp = BoundaryPoint(side, s, (b - eps, c + eps + s), (-1.0, 0.0))
            nodes.append((bp, float(w)))
    return BoundaryQuadrature(tuple(nodes), eps)


def normal_extension(d: Domain, h: Callable, x, t, derivatives: bool = False):
    """Extension of a boundary function ``h(side, t)`` into the interval.

    The extension is constant along inner normals for ``delta <= epsilon0``
    and is switched off by a C^2 cutoff across the blend zone
    ``epsilon0 < delta < epsilon0 + w``. With ``derivatives=True`` returns
    ``(value, d/dx, d2/dx2)``; ``h`` must then be smooth in ``t`` only,
    which is all the spatial derivatives need.
    """
    if d.kind != "interval":
        raise DomainError("normal_extension is implemented for the interval only")
    x = np.asarray(x, dtype=float)
    _check_inside(d, x, closed=True)
    a, b = d.bounds
    x, t = np.broadcast_arrays(x, np.asarray(t, dtype=float))
    dist = np.minimum(x - a, b - x)
    sgn = np.where(x - a <= b - x, 1.0, -1.0)
    left = x - a <= b - x
    hv = np.where(left, h("left", t), h("right", t))
    cut, dcut, d2cut = smoothstep((dist - d.epsilon0) / d.blend_width)
    value = hv * cut
    if not derivatives:
        return value
    w = d.blend_width
    return value, hv * dcut * sgn / w, hv * d2cut / (w * w)
