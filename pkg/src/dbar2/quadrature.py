"""Numerical integration engines for the singular boundary and interior
integrals.

Boundary integrals run tensor-product Gauss panels on meshes graded toward
the parameter preimage of the near-singular point, with mesh lines aligned
to any chart breakpoints.  The interior integral splits into a polar ball
around the target point (the radial factor r^3 cancels the r^-3 kernel
growth) plus rejection-sampled quasi-Monte Carlo over a bounding box.

Error estimates come from two-level refinement (boundary/polar) and
replicated scrambles (QMC); convergence failures are flagged on the result,
never raised.  All accumulation is numpy pairwise summation over
deterministically ordered nodes, so results are reproducible bit-for-bit
for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .geometry.domains import DomainSpec, as_points, bounding_box, dist_to_boundary, membership
from .sampling import sobol

__all__ = ["QuadConfig", "IntegralResult", "integrate_chart", "integrate_interior",
           "integrate_chart_multi", "integrate_interior_multi", "l1_norm_boundary"]

_GAUSS_ORDER = 3
_MAX_AXIS_NODES = {2: 2048, 3: 168}
_CHUNK = 300_000


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature budget and behaviour knobs."""

    base_resolution: int = 8
    grading_exponent: float = 3.0
    exclusion_radius: float = 1e-6
    refinement_rounds: int = 2
    target_rel_error: float = 1e-4
    mc_samples: int = 2 ** 17
    seed: int = 7

    def __post_init__(self):
        if self.base_resolution < 4:
            raise ValueError("base_resolution must be >= 4")
        if not 0.0 < self.target_rel_error < 1.0:
            raise ValueError("target_rel_error must lie in (0, 1)")
        if self.exclusion_radius < 0.0:
            raise ValueError("exclusion_radius must be >= 0")
        if self.grading_exponent < 1.0:
            raise ValueError("grading_exponent must be >= 1")


@dataclass
class IntegralResult:
    value: complex
    est_rel_error: float
    nodes_used: int
    excluded_mass_bound: float = 0.0
    converged: bool = True
    parts: dict = field(default_factory=dict)

    def __post_init__(self):
        assert self.est_rel_error >= 0.0
        assert self.nodes_used > 0


# ---------------------------------------------------------------------------
# graded tensor meshes
# ---------------------------------------------------------------------------

def _axis_edges(lo, hi, attractor, n_panels, gamma, breakpoints):
    """Panel edges on [lo, hi], graded toward ``attractor`` within each
    sub-segment delimited by breakpoints."""
    knots = sorted({lo, hi, *[b for b in breakpoints if lo < b < hi]})
    t = min(max(attractor, lo), hi)
    edges = [lo]
    for a, b in zip(knots[:-1], knots[1:]):
        segs = []
        if a < t < b:
            segs = [(t, a, True), (t, b, False)]
        elif t <= a:
            segs = [(a, b, False)]
        else:
            segs = [(b, a, True)]
        seg_edges = set()
        for origin, far, _reverse in segs:
            x = (np.arange(1, n_panels + 1) / n_panels) ** gamma
            seg_edges.update(origin + x * (far - origin))
            seg_edges.add(origin)
        edges.extend(e for e in seg_edges if a < e <= b)
    return np.array(sorted(set(edges)))


def _gauss_on_edges(edges):
    x, w = leggauss(_GAUSS_ORDER)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _tensor_mesh(rect, attractor, n_panels, gamma, breakpoints, max_axis):
    axes = []
    for k in range(rect.shape[0]):
        edges = _axis_edges(rect[k, 0], rect[k, 1], attractor[k], n_panels,
                           gamma, breakpoints[k] if k < len(breakpoints) else ())
        nodes, weights = _gauss_on_edges(edges)
        if nodes.size > max_axis:
            return None
        axes.append((nodes, weights))
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    S = np.stack([g.ravel() for g in grids], axis=1)
    W = np.ones(S.shape[0])
    shape = [a[0].size for a in axes]
    for k, (_, w) in enumerate(axes):
        rs = [1] * len(axes)
        rs[k] = shape[k]
        W = W * np.broadcast_to(w.reshape(rs), shape).ravel()
    return S, W


def _locate_singular_param(chart, z):
    """Parameter point whose embedding is nearest to z (coarse scan + zoom)."""
    rect = chart.rect
    lo, hi = rect[:, 0].copy(), rect[:, 1].copy()
    best = 0.5 * (lo + hi)
    for m, rounds in ((13, 1), (9, 3)):
        for _ in range(rounds):
            axes = [np.linspace(lo[k], hi[k], m) for k in range(chart.dim)]
            grids = np.meshgrid(*axes, indexing="ij")
            S = np.stack([g.ravel() for g in grids], axis=1)
            d = np.linalg.norm(chart.embed(S) - z[None, :], axis=1)
            best = S[int(np.argmin(d))]
            span = (hi - lo) / (m - 1) * 2.0
            lo = np.maximum(rect[:, 0], best - span)
            hi = np.minimum(rect[:, 1], best + span)
    return best


def _masked_eval(density, P, S, z, exclusion_radius):
    dist = np.linalg.norm(P - z[None, :], axis=1)
    vals = np.empty(P.shape[0], dtype=complex)
    for start in range(0, P.shape[0], _CHUNK):
        sl = slice(start, min(start + _CHUNK, P.shape[0]))
        vals[sl] = density(P[sl], S[sl])
    bad = ~np.isfinite(vals)
    excl = (dist < exclusion_radius) | bad
    vals = np.where(excl, 0.0, vals)
    return vals, excl, dist


def _excluded_bound(values, dist, excl, radius, exponent, surface=True):
    if not excl.any():
        return 0.0
    keep = ~excl & (dist > 0)
    if not keep.any():
        return math.inf
    amp = np.max(np.abs(values[keep]) * dist[keep] ** (-exponent))
    if surface:  # integral of r^exponent over a 3D ball of the exclusion radius
        return float(amp * 2.0 * math.pi * radius ** (3 + exponent) / (3 + exponent))
    return float(amp * 2.0 * math.pi ** 2 * radius ** (4 + exponent) / (4 + exponent))


def integrate_chart_multi(densities, chart, z, cfg: QuadConfig, *,
                          local_exponent: int = -1):
    """Quadrature of several densities sharing one graded mesh.

    Sharing the mesh (and thus the error structure) across a finite
    difference stencil makes the quadrature error largely cancel in the
    differences.  Returns one IntegralResult per density.
    """
    z = as_points(z)[0]
    attractor = _locate_singular_param(chart, z)
    max_axis = _MAX_AXIS_NODES[chart.dim]

    history = [[] for _ in densities]
    nodes_total = 0
    excluded_bounds = [0.0] * len(densities)
    n = cfg.base_resolution
    for _ in range(max(1, cfg.refinement_rounds) + 1):
        mesh = _tensor_mesh(chart.rect, attractor, n, cfg.grading_exponent,
                            chart.breakpoints, max_axis)
        if mesh is None:
            break
        S, W = mesh
        P = chart.embed(S)
        worst_err = 0.0
        for i, density in enumerate(densities):
            vals, excl, dist = _masked_eval(density, P, S, z, cfg.exclusion_radius)
            excluded_bounds[i] = _excluded_bound(vals, dist, excl, cfg.exclusion_radius,
                                                 local_exponent, surface=True)
            history[i].append(complex(np.sum(vals * W)))
            if len(history[i]) >= 2:
                denom = max(abs(history[i][-1]), 1e-300)
                worst_err = max(worst_err, abs(history[i][-1] - history[i][-2]) / denom)
        nodes_total += S.shape[0]
        if len(history[0]) >= 2 and worst_err <= cfg.target_rel_error:
            break
        n *= 2

    out = []
    for i in range(len(densities)):
        vals = history[i]
        value = vals[-1]
        if len(vals) >= 2:
            est = abs(vals[-1] - vals[-2]) / max(abs(vals[-1]), 1e-300)
        else:
            est = math.inf
        converged = math.isfinite(est) and est <= cfg.target_rel_error
        out.append(IntegralResult(value=value, est_rel_error=est,
                                  nodes_used=nodes_total,
                                  excluded_mass_bound=excluded_bounds[i],
                                  converged=converged))
    return out


def integrate_chart(density, chart, z, cfg: QuadConfig, *, local_exponent: int = -1):
    """Graded tensor quadrature of ``density(points, params)`` over a chart.

    ``density`` must return the full integrand per unit parameter measure
    (surface jacobian included); NaN marks singularity-hit nodes, which are
    excluded and accounted for in ``excluded_mass_bound``.
    """
    return integrate_chart_multi([density], chart, z, cfg,
                                 local_exponent=local_exponent)[0]


# ---------------------------------------------------------------------------
# interior integral: polar ball + QMC complement
# ---------------------------------------------------------------------------

def _s3_nodes(n_polar, n_azimuth):
    xa, wa = _gauss_on_edges(np.linspace(0.0, math.pi, n_polar + 1))
    xb, wb = xa, wa
    c = (np.arange(n_azimuth) + 0.5) * (2.0 * math.pi / n_azimuth)
    wc = np.full(n_azimuth, 2.0 * math.pi / n_azimuth)
    A, B, C = np.meshgrid(xa, xb, c, indexing="ij")
    WA, WB, WC = np.meshgrid(wa, wb, wc, indexing="ij")
    sa, sb = np.sin(A), np.sin(B)
    dirs = np.stack([np.cos(A).ravel(),
                     (sa * np.cos(B)).ravel(),
                     (sa * sb * np.cos(C)).ravel(),
                     (sa * sb * np.sin(C)).ravel()], axis=1)
    measure = (sa ** 2 * sb * WA * WB * WC).ravel()
    return dirs, measure


def _exit_radii(spec, z, dirs):
    from .geometry.patch import radial_boundary_solve
    from .geometry.domains import _model
    model = _model(spec)
    return radial_boundary_solve(model.rho, z, dirs, iters=60)


def _polar_star(densities, spec, z, n_panels, radial_breaks=()):
    """Product-rule integral over the star region {z + r w : r < R_exit(w)}.

    The radial factor r^3 is applied here, so an r^-3 kernel growth is
    cancelled exactly at the nodes.  Radial panels are laid per ray on
    [0, R(w)], with optional absolute breakpoints (used to resolve
    off-center stencil singularities).  Evaluates every density on the
    same nodes.
    """
    dirs, sigma = _s3_nodes(n_panels, 2 * n_panels * _GAUSS_ORDER)
    R = _exit_radii(spec, z, dirs)
    if np.any(~np.isfinite(R)):
        raise ValueError("unbounded ray while integrating the interior")
    x, w = leggauss(_GAUSS_ORDER)
    totals = [0.0 + 0.0j] * len(densities)
    count = 0
    n_rays = dirs.shape[0]
    chunk = max(1, _CHUNK // (12 * n_panels))
    for start in range(0, n_rays, chunk):
        sl = slice(start, min(start + chunk, n_rays))
        Rc = R[sl]
        edges = np.linspace(0.0, 1.0, n_panels + 1)[None, :] * Rc[:, None]
        if radial_breaks:
            cuts = [np.clip(np.asarray(b) / np.maximum(Rc, 1e-300), 0.0, 1.0)
                    for b in radial_breaks]
            extra = np.stack([c * Rc for c in cuts], axis=1)
            edges = np.sort(np.concatenate([edges, extra], axis=1), axis=1)
        mid = 0.5 * (edges[:, 1:] + edges[:, :-1])
        half = 0.5 * (edges[:, 1:] - edges[:, :-1])
        r_nodes = (mid[:, :, None] + half[:, :, None] * x[None, None, :]).reshape(len(Rc), -1)
        r_weights = (half[:, :, None] * w[None, None, :]).reshape(len(Rc), -1)
        P = (z[None, None, :] + r_nodes[:, :, None] * dirs[sl][:, None, :]).reshape(-1, 4)
        weight = r_nodes ** 3 * r_weights
        for i, density in enumerate(densities):
            vals = density(P).reshape(r_nodes.shape)
            vals = np.where(np.isfinite(vals), vals, 0.0)
            radial = np.sum(vals * weight, axis=1)
            totals[i] += complex(np.sum(radial * sigma[sl]))
        count += r_nodes.shape[0] * r_nodes.shape[1]
    return totals, count


def integrate_interior_multi(densities, spec: DomainSpec, z, cfg: QuadConfig, *,
                             local_exponent: int = -3, radial_breaks=()):
    """Interior integrals of several densities sharing one polar mesh."""
    z = as_points(z)[0]
    if not membership(spec, z):
        raise ValueError("target point is not interior")

    polar_coarse, n1 = _polar_star(densities, spec, z, cfg.base_resolution, radial_breaks)
    polar_fine, n2 = _polar_star(densities, spec, z, 2 * cfg.base_resolution, radial_breaks)

    lo, hi = bounding_box(spec)
    vol = float(np.prod(hi - lo))
    n_half = max(1024, cfg.mc_samples // 2)
    estimates = [[] for _ in densities]
    nodes_mc = 0
    for rep in range(2):
        U = sobol(n_half, 4, cfg.seed + rep)
        P = lo + U * (hi - lo)
        keep = membership(spec, P) & _beyond_star(spec, z, P)
        for i, density in enumerate(densities):
            vals = np.zeros(P.shape[0], dtype=complex)
            if keep.any():
                v = density(P[keep])
                vals[keep] = np.where(np.isfinite(v), v, 0.0)
            estimates[i].append(vol * complex(np.sum(vals)) / n_half)
        nodes_mc += n_half

    out = []
    for i in range(len(densities)):
        qmc_value = 0.5 * (estimates[i][0] + estimates[i][1])
        qmc_err = 0.5 * abs(estimates[i][0] - estimates[i][1])
        polar_err = abs(polar_fine[i] - polar_coarse[i])
        value = polar_fine[i] + qmc_value
        abs_err = polar_err + qmc_err
        est = abs_err / max(abs(value), 1e-300)
        out.append(IntegralResult(
            value=value, est_rel_error=est, nodes_used=n1 + n2 + nodes_mc,
            excluded_mass_bound=0.0,
            converged=bool(est <= cfg.target_rel_error or abs_err < 1e-12),
            parts={"polar": polar_fine[i], "qmc": qmc_value,
                   "polar_err": polar_err, "qmc_err": qmc_err}))
    return out


def integrate_interior(density, spec: DomainSpec, z, cfg: QuadConfig, *,
                       local_exponent: int = -3, radial_breaks=()):
    """Interior integral of ``density(points)`` over the domain.

    The bulk is handled in polar coordinates around z: every ray is
    integrated to its boundary exit radius, which covers the whole domain
    when it is star-shaped around z (all supported domains are convex).
    A quasi-Monte Carlo sweep over the bounding box estimates whatever
    mass lies beyond the star region; for convex domains it finds none and
    contributes exactly zero.  Deterministic for fixed cfg.seed.
    """
    return integrate_interior_multi([density], spec, z, cfg,
                                    local_exponent=local_exponent,
                                    radial_breaks=radial_breaks)[0]


def _beyond_star(spec, z, P, probes: int = 16):
    """True where the segment from z to the point leaves the domain."""
    t = np.linspace(0.0, 1.0, probes + 2)[1:-1]
    seg = z[None, None, :] + t[None, :, None] * (P - z[None, :])[:, None, :]
    from .geometry.domains import rho as rho_fn
    vals = rho_fn(spec, seg.reshape(-1, 4)).reshape(P.shape[0], probes)
    return np.any(vals > 0, axis=1)


def l1_norm_boundary(abs_density, charts, z, cfg: QuadConfig):
    """Sum of chart integrals of a nonnegative density (L^1 probe)."""
    total = 0.0
    est_abs = 0.0
    nodes = 0
    excluded = 0.0
    parts = {}
    ok = True
    for chart in charts:
        res = integrate_chart(abs_density, chart, z, cfg)
        val = abs(res.value)
        parts[chart.label] = val
        total += val
        est_abs += res.est_rel_error * val if math.isfinite(res.est_rel_error) else val
        nodes += res.nodes_used
        excluded += res.excluded_mass_bound
        ok = ok and res.converged
    return IntegralResult(value=total, est_rel_error=est_abs / max(total, 1e-300),
                          nodes_used=nodes, excluded_mass_bound=excluded,
                          converged=ok, parts=parts)
