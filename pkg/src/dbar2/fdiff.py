"""Centered finite-difference helpers on R^4 (vectorized over point batches)."""

from __future__ import annotations

import numpy as np

__all__ = ["fd_gradient", "fd_hessian", "wirtinger_fd"]


def fd_gradient(func, pts, h: float = 1e-5):
    """Centered gradient of func: (N,4)->(N,) at pts, shape (N,4)."""
    pts = np.atleast_2d(np.asarray(pts, float))
    grad = np.empty_like(pts)
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        grad[:, k] = (func(pts + e) - func(pts - e)) / (2.0 * h)
    return grad


def fd_hessian(func, pts, h: float = 1e-4):
    """Centered 4x4 Hessians of func: (N,4)->(N,), returned as (N,4,4)."""
    pts = np.atleast_2d(np.asarray(pts, float))
    n = pts.shape[0]
    H = np.empty((n, 4, 4))
    f0 = func(pts)
    for i in range(4):
        ei = np.zeros(4)
        ei[i] = h
        H[:, i, i] = (func(pts + ei) - 2.0 * f0 + func(pts - ei)) / (h * h)
        for j in range(i + 1, 4):
            ej = np.zeros(4)
            ej[j] = h
            mixed = (func(pts + ei + ej) - func(pts + ei - ej)
                     - func(pts - ei + ej) + func(pts - ei - ej)) / (4.0 * h * h)
            H[:, i, j] = mixed
            H[:, j, i] = mixed
    return H


def wirtinger_fd(func, pts, h: float = 1e-5):
    """d/dzbar_1 and d/dzbar_2 of a complex-valued func: (N,4)->(N,) complex.

    Uses d/dzbar_1 = (d/dx1 + i d/dx2)/2 and d/dzbar_2 = (d/dx3 + i d/dx4)/2.
    """
    pts = np.atleast_2d(np.asarray(pts, float))
    parts = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        parts.append((func(pts + e) - func(pts - e)) / (2.0 * h))
    d1 = 0.5 * (parts[0] + 1j * parts[1])
    d2 = 0.5 * (parts[2] + 1j * parts[3])
    return d1, d2
