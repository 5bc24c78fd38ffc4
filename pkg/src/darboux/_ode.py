"""Fixed-step classical RK4 on a grid that contains 0, integrating outward."""
from __future__ import annotations

import numpy as np

from .errors import UsageError


def origin_index(x: np.ndarray) -> int:
    hits = np.flatnonzero(x == 0.0)
    if hits.size != 1:
        raise UsageError("grid must contain 0 exactly once")
    return int(hits[0])


def rk4_step(rhs, a: float, b: float, y):
    """One RK4 step from ``a`` to ``b`` for a tuple-of-arrays state ``y``.

    ``rhs(x, y, side)`` is evaluated at the cell ends as one-sided limits
    taken from inside the cell, and at the midpoint with ``side=0``.
    """
    h = b - a
    d = 1 if h > 0 else -1
    mid = a + 0.5 * h
    k1 = rhs(a, y, d)
    k2 = rhs(mid, tuple(u + 0.5 * h * k for u, k in zip(y, k1)), 0)
    k3 = rhs(mid, tuple(u + 0.5 * h * k for u, k in zip(y, k2)), 0)
    k4 = rhs(b, tuple(u + h * k for u, k in zip(y, k3)), -d)
    return tuple(u + (h / 6.0) * (p + 2.0 * q + 2.0 * r + s)
                 for u, p, q, r, s in zip(y, k1, k2, k3, k4))


def integrate_from_origin(rhs, y0, x: np.ndarray) -> list:
    """States at every node of ascending grid ``x``; ``y0`` is the state at 0."""
    x = np.asarray(x, dtype=float)
    if np.any(np.diff(x) <= 0):
        raise UsageError("grid must be strictly increasing")
    i0 = origin_index(x)
    out = [None] * len(x)
    out[i0] = tuple(np.asarray(u, dtype=np.complex128) for u in y0)
    for i in range(i0, len(x) - 1):
        out[i + 1] = rk4_step(rhs, x[i], x[i + 1], out[i])
    for i in range(i0, 0, -1):
        out[i - 1] = rk4_step(rhs, x[i], x[i - 1], out[i])
    return out


def make_grid(x_min: float, x_max: float, steps: int) -> np.ndarray:
    """Uniform-per-side grid on ``[x_min, x_max]`` with 0 as a node.

    ``steps`` cells are shared between the two sides in proportion to their
    lengths (at least one cell on every nonempty side).
    """
    x_min, x_max = float(x_min), float(x_max)
    if not x_min <= 0.0 <= x_max or x_min == x_max:
        raise UsageError("grid interval must contain 0")
    steps = int(steps)
    if steps < 1:
        raise UsageError("grid needs at least one step")
    length = x_max - x_min
    n_pos = int(round(steps * x_max / length)) if x_max > 0 else 0
    n_neg = steps - n_pos if x_min < 0 else 0
    if x_max > 0 and n_pos == 0:
        n_pos = 1
    if x_min < 0 and n_neg == 0:
        n_neg = 1
    parts = []
    if n_neg:
        parts.append(np.linspace(x_min, 0.0, n_neg + 1)[:-1])
    parts.append(np.array([0.0]))
    if n_pos:
        parts.append(np.linspace(0.0, x_max, n_pos + 1)[1:])
    return np.concatenate(parts)


def fd_first(values: np.ndarray, x: np.ndarray, valid=None):
    """Second-order first derivative along axis 0 on a (possibly nonuniform) grid.

    Central three-point stencil at interior nodes, one-sided three-point
    stencils at the ends of every run of valid nodes.  Returns
    ``(derivative, mask)``; nodes without a usable stencil are masked out.
    """
    values = np.asarray(values)
    n = len(x)
    valid = np.ones(n, bool) if valid is None else np.asarray(valid, bool)
    out = np.zeros_like(values, dtype=np.complex128)
    ok = np.zeros(n, bool)
    for i in range(n):
        if not valid[i]:
            continue
        if 0 < i < n - 1 and valid[i - 1] and valid[i + 1]:
            idx = (i - 1, i, i + 1)
        elif i + 2 < n and valid[i + 1] and valid[i + 2]:
            idx = (i, i + 1, i + 2)
        elif i >= 2 and valid[i - 1] and valid[i - 2]:
            idx = (i - 2, i - 1, i)
        else:
            continue
        w = _lagrange_deriv_weights(x[list(idx)], x[i])
        out[i] = sum(wk * values[k] for wk, k in zip(w, idx))
        ok[i] = True
    return out, ok


def _lagrange_deriv_weights(nodes, at):
    x0, x1, x2 = nodes
    return (
        ((at - x1) + (at - x2)) / ((x0 - x1) * (x0 - x2)),
        ((at - x0) + (at - x2)) / ((x1 - x0) * (x1 - x2)),
        ((at - x0) + (at - x1)) / ((x2 - x0) * (x2 - x1)),
    )
