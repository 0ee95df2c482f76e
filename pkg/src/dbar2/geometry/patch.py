"""Bounded-domain patching: Hessian audits and the patch-constant search.

A local convex defining function rho is turned into a bounded domain by
adding M * psi(|z|^2) with psi the flat convex bump from ``profiles``.  The
constant M is the smallest power of two whose patched boundary passes a
sampled strong-convexity audit away from the flat ball B(0, 2*eps).
"""

from __future__ import annotations

import numpy as np

from ..errors import AuditFailure, UnsupportedSmoothOperation
from ..fdiff import fd_hessian
from ..sampling import sphere_directions
from .profiles import psi_bump

__all__ = ["hessian_min_eigenvalue", "choose_patch_constant", "radial_boundary_solve"]

_AUDIT_SEED = 20240811
_HESS_STEP = 1e-4


def hessian_min_eigenvalue(func_or_spec, pts, h: float = _HESS_STEP):
    """Smallest eigenvalue of the real 4x4 Hessian at each point.

    Accepts either a callable (N,4)->(N,) or a DomainSpec (resolved through
    ``rho``).  Second derivatives are centered differences with step ``h``.
    """
    func = _as_rho_callable(func_or_spec)
    pts = np.atleast_2d(np.asarray(pts, float))
    H = fd_hessian(func, pts, h=h)
    eigs = np.linalg.eigvalsh(H)
    out = eigs[:, 0]
    return out if out.shape[0] > 1 else float(out[0])


def _as_rho_callable(func_or_spec):
    if callable(func_or_spec):
        return func_or_spec
    from .domains import rho as domain_rho  # late import; domains depends on this module
    spec = func_or_spec
    if spec.kind == "bidisc":
        raise UnsupportedSmoothOperation("bidisc has no smooth defining function")
    return lambda P: domain_rho(spec, P)


def radial_boundary_solve(rho_fn, center, dirs, r_max: float = 64.0, iters: int = 80):
    """Boundary crossing radius along rays from an interior center.

    Brackets by doubling, then bisects.  Returns radii (NaN where the ray
    never leaves the domain inside ``r_max``, which signals unboundedness).
    Assumes at most one crossing per ray (true for convex domains).
    """
    center = np.asarray(center, float)
    dirs = np.atleast_2d(np.asarray(dirs, float))
    n = dirs.shape[0]
    hi = np.full(n, 1e-3)
    for _ in range(40):
        inside = rho_fn(center + hi[:, None] * dirs) < 0
        grow = inside & (hi < r_max)
        if not grow.any():
            break
        hi[grow] = np.minimum(hi[grow] * 2.0, r_max)
    unbounded = rho_fn(center + np.full(n, r_max)[:, None] * dirs) < 0
    lo = np.zeros(n)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = rho_fn(center + mid[:, None] * dirs) < 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    r = 0.5 * (lo + hi)
    return np.where(unbounded, np.nan, r)


def choose_patch_constant(local_rho, eps: float, *, interior_point=None,
                          n_samples: int = 10_000, min_eig: float = 1e-6,
                          max_exponent: int = 30, seed: int = _AUDIT_SEED):
    """Smallest M in {1, 2, 4, ...} whose patched domain passes the audit.

    The patched function is local_rho + M * psi(|z|^2).  For each candidate,
    quasi-random rays from an interior point locate boundary samples; those
    with |z| > 2*eps must have Hessian minimum eigenvalue >= ``min_eig``.
    Raises AuditFailure past 2**max_exponent.
    """
    if interior_point is None:
        interior_point = np.array([0.0, 0.0, -0.5 * eps, 0.0])
    center = np.asarray(interior_point, float)
    dirs = sphere_directions(n_samples, seed)

    M = 1.0
    for _ in range(max_exponent + 1):
        patched = _patched(local_rho, eps, M)
        if patched(center[None, :])[0] >= 0:
            raise AuditFailure("interior point not inside the patched domain")
        radii = radial_boundary_solve(patched, center, dirs)
        if np.any(np.isnan(radii)):
            M *= 2.0
            continue
        pts = center + radii[:, None] * dirs
        outside_flat = np.linalg.norm(pts, axis=1) > 2.0 * eps
        if not outside_flat.any():
            return M  # boundary entirely inside B(0, 2 eps): audit vacuous
        eigs = hessian_min_eigenvalue(patched, pts[outside_flat])
        if np.min(eigs) >= min_eig:
            return M
        M *= 2.0
    raise AuditFailure(
        f"no M <= 2^{max_exponent} makes the patched boundary strongly convex "
        f"off B(0, {2 * eps})")


def _patched(local_rho, eps, M):
    def patched(P):
        P = np.atleast_2d(np.asarray(P, float))
        return local_rho(P) + M * psi_bump(np.sum(P * P, axis=1), eps)
    return patched
