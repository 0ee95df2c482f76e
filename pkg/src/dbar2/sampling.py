"""Seeded low-discrepancy sampling helpers (deterministic per seed)."""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc
from scipy.special import ndtri

__all__ = ["sobol", "sphere_directions", "box_points"]


def sobol(n: int, dim: int, seed: int) -> np.ndarray:
    """n scrambled Sobol points in [0,1)^dim; deterministic for fixed seed.

    Draws the next power of two internally (Sobol balance) and slices.
    """
    eng = qmc.Sobol(d=dim, scramble=True, seed=seed)
    m = max(1, int(np.ceil(np.log2(max(n, 1)))))
    return eng.random_base2(m)[:n]


def sphere_directions(n: int, seed: int, dim: int = 4) -> np.ndarray:
    """Quasi-random unit vectors: inverse-normal transform of Sobol points."""
    u = sobol(n, dim, seed)
    g = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0] = 1.0
    return g / norms[:, None]


def box_points(n: int, lo, hi, seed: int) -> np.ndarray:
    """Sobol points scaled into the box [lo, hi] (componentwise)."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    u = sobol(n, lo.size, seed)
    return lo + u * (hi - lo)
