"""Crank-Nicolson finite-difference heat solver on an interval.

Independent of the kernel machinery; used as the oracle that the
representation formula is checked against. The first step is replaced by
four backward-Euler quarter steps so that incompatible corner data (boundary
value 1, initial value 0) does not leave undamped oscillations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import solve_banded

from .domain import Domain
from .measures import TraceTriple

__all__ = ["FDSolution", "fd_solve", "fd_data_from_triple", "mollify_atoms"]


@dataclass
class FDSolution:
    xs: np.ndarray
    ts: np.ndarray
    values: np.ndarray  # (len(ts), len(xs))
    h: float
    k: float
    scheme: str = "crank-nicolson, 4 backward-Euler quarter steps at start"

    def __post_init__(self):
        self._interp = RegularGridInterpolator((self.ts, self.xs), self.values, method="cubic")

    def __call__(self, x, t) -> np.ndarray:
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        pts = np.stack([t.ravel(), x.ravel()], axis=-1)
        return self._interp(pts).reshape(x.shape)

    @property
    def min_value(self) -> float:
        return float(self.values.min())


def _second_difference(n, h):
    # banded storage of -(1/h^2) tridiag(1, -2, 1) on n interior nodes
    ab = np.zeros((3, n))
    ab[0, 1:] = -1.0 / h ** 2
    ab[1, :] = 2.0 / h ** 2
    ab[2, :-1] = -1.0 / h ** 2
    return ab


def _apply(ab, u):
    out = ab[1] * u
    out[:-1] += ab[0, 1:] * u[1:]
    out[1:] += ab[2, :-1] * u[:-1]
    return out


def fd_solve(d: Domain, initial: Callable | np.ndarray, g_left: Callable, g_right: Callable, T: float,
             h: float = 1 / 256, k: float = 1 / 256) -> FDSolution:
    """Solve u_t = u_xx on the interval with Dirichlet data up to time T.

    ``initial`` is a function of x or an array of nodal values; the spatial
    step is adjusted to ``L / round(L / h)`` so the grid fits the interval.
    """
    if h <= 0 or k <= 0:
        raise ValueError("steps must be positive")
    a, b = d.bounds
    n_cells = max(2, int(round((b - a) / h)))
    h = (b - a) / n_cells
    xs = np.linspace(a, b, n_cells + 1)
    n_steps = max(1, int(np.ceil(T / k - 1e-9)))
    k = T / n_steps
    ts = np.linspace(0.0, T, n_steps + 1)
    if callable(initial):
        u0 = np.asarray(initial(xs), dtype=float)
    else:
        u0 = np.asarray(initial, dtype=float)
    if u0.shape != xs.shape:
        raise ValueError("initial data does not match the grid")
    if np.any(u0 < 0):
        raise ValueError("initial data must be nonnegative")
    n = n_cells - 1
    A = _second_difference(n, h)  # this is -D2

    def bvec(t):
        v = np.zeros(n)
        v[0] += float(g_left(t)) / h ** 2
        v[-1] += float(g_right(t)) / h ** 2
        return v

    def implicit(dt, theta):
        ab = theta * dt * A
        ab[1] += 1.0
        return ab

    values = np.empty((n_steps + 1, n_cells + 1))
    values[0] = u0
    values[0, 0], values[0, -1] = u0[0], u0[-1]
    u = u0[1:-1].copy()
    be = implicit(k / 4, 1.0)
    cn = implicit(k, 0.5)
    # quarter steps of backward Euler damp the corner incompatibility
    t = 0.0
    for _ in range(4):
        t += k / 4
        u = solve_banded((1, 1), be, u + (k / 4) * bvec(t))
    values[1, 1:-1] = u
    values[1, 0], values[1, -1] = g_left(ts[1]), g_right(ts[1])
    for j in range(1, n_steps):
        rhs = u - 0.5 * k * _apply(A, u) + 0.5 * k * (bvec(ts[j]) + bvec(ts[j + 1]))
        u = solve_banded((1, 1), cn, rhs)
        if not np.all(np.isfinite(u)):
            raise FloatingPointError("finite-difference solution blew up")
        values[j + 1, 1:-1] = u
        values[j + 1, 0], values[j + 1, -1] = g_left(ts[j + 1]), g_right(ts[j + 1])
    return FDSolution(xs, ts, values, h, k)


def mollify_atoms(xs: np.ndarray, atoms) -> np.ndarray:
    """Nodal density of point masses spread by the hat of half-width h onto
    the two neighbouring nodes; keeps mass and first moment."""
    h = xs[1] - xs[0]
    out = np.zeros_like(xs)
    for y0, m in atoms:
        j = int(np.clip(np.floor((y0 - xs[0]) / h), 0, len(xs) - 2))
        frac = (y0 - xs[j]) / h
        out[j] += m * (1 - frac) / h
        out[j + 1] += m * frac / h
    out[0] = out[-1] = 0.0
    return out


def fd_data_from_triple(tr: TraceTriple, d: Domain, h: float):
    """Initial nodal values and boundary functions for the FD oracle.

    Corner atoms become interior atoms of mass ``lambda / (2h)`` at distance
    ``2h`` from their end. Lateral atoms have no FD counterpart.
    """
    if tr.nu.atoms:
        raise ValueError("lateral atoms cannot be passed to the finite-difference oracle")
    a, b = d.bounds
    n_cells = max(2, int(round((b - a) / h)))
    xs = np.linspace(a, b, n_cells + 1)
    hh = xs[1] - xs[0]
    u0 = np.zeros_like(xs)
    inner = xs[1:-1]
    u0[1:-1] = tr.mu.density(inner, d) if tr.mu.densities else 0.0
    atoms = list(tr.mu.atoms)
    for side, m in tr.lam.atoms:
        pos = a + 2 * hh if side == "left" else b - 2 * hh
        atoms.append((pos, m / (2 * hh)))
    u0 += mollify_atoms(xs, atoms)

    def left(t):
        return float(tr.nu.density("left", np.array([t]))[0])

    def right(t):
        return float(tr.nu.density("right", np.array([t]))[0])

    return u0, left, right
