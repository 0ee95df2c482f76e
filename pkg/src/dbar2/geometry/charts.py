"""Parametrized boundary pieces with surface measure and outward normals.

Each chart maps a parameter rectangle (2D or 3D) onto a piece of the
boundary.  ``jacobian`` is the surface-measure density per unit parameter
volume, so integrating f(embed(s)) * jacobian(s) over the rectangle gives
the surface integral of f.  ``normal`` is the outward unit normal in R^4.

Radially solved charts (omega1/omega2) get their measure from the
star-shaped graph identity  dS = r^3 dsigma / (n . d),  with d the unit ray
direction, which needs only the analytic gradient and the solved radius.
"""

from __future__ import annotations

import math

import numpy as np

from . import profiles as pr
from .domains import DomainSpec, _model, complexify
from .patch import radial_boundary_solve

__all__ = ["BoundaryChart", "boundary_charts", "disc_chart", "sphere_angles_measure"]

TWO_PI = 2.0 * math.pi


class BoundaryChart:
    """A parametrized boundary piece.

    Parameters
    ----------
    label : piece identifier (P1 | P2 | P3 | Face1 | Face2 | Sphere | slice)
    rect : (dim, 2) parameter rectangle
    embed : (N, dim) -> (N, 4) map onto the boundary
    jacobian : (N, dim) -> (N,) surface-measure density (> 0 inside rect)
    normal : (N, dim) -> (N, 4) outward unit normal, or None for non-boundary
        helper charts
    breakpoints : per-axis tuples of interior mesh-alignment points
    """

    def __init__(self, label, rect, embed, jacobian, normal=None, breakpoints=None):
        self.label = label
        self.rect = np.asarray(rect, float)
        self.dim = self.rect.shape[0]
        self._embed = embed
        self._jacobian = jacobian
        self._normal = normal
        self.breakpoints = breakpoints or tuple(() for _ in range(self.dim))

    def embed(self, S):
        return self._embed(np.atleast_2d(np.asarray(S, float)))

    def jacobian(self, S):
        return self._jacobian(np.atleast_2d(np.asarray(S, float)))

    def normal(self, S):
        if self._normal is None:
            raise ValueError(f"chart {self.label!r} carries no normal")
        return self._normal(np.atleast_2d(np.asarray(S, float)))

    def __repr__(self):
        return f"BoundaryChart({self.label!r}, dim={self.dim})"


def sphere_angles_measure(S):
    """sin^2(a) sin(b) for S3 angle parameters (a, b, c)."""
    return np.sin(S[:, 0]) ** 2 * np.sin(S[:, 1])


def _s3_direction(S):
    a, b, c = S[:, 0], S[:, 1], S[:, 2]
    sa, sb = np.sin(a), np.sin(b)
    return np.stack([np.cos(a), sa * np.cos(b), sa * sb * np.cos(c), sa * sb * np.sin(c)], axis=1)


def _torus_embed(r1, th1, r2, th2):
    return np.stack([r1 * np.cos(th1), r1 * np.sin(th1),
                     r2 * np.cos(th2), r2 * np.sin(th2)], axis=1)


def _ball_chart(radius):
    def embed(S):
        return radius * _s3_direction(S)

    def jac(S):
        return radius ** 3 * sphere_angles_measure(S)

    def normal(S):
        return _s3_direction(S)

    rect = [(0.0, math.pi), (0.0, math.pi), (0.0, TWO_PI)]
    return BoundaryChart("Sphere", rect, embed, jac, normal)


def _bidisc_faces():
    def embed1(S):  # |zeta1| = 1, zeta2 in the disc
        return _torus_embed(1.0, S[:, 0], S[:, 1], S[:, 2])

    def embed2(S):  # |zeta2| = 1, zeta1 in the disc
        return _torus_embed(S[:, 1], S[:, 2], 1.0, S[:, 0])

    def jac(S):
        return S[:, 1].copy()

    def normal1(S):
        z = np.zeros((S.shape[0], 4))
        z[:, 0], z[:, 1] = np.cos(S[:, 0]), np.sin(S[:, 0])
        return z

    def normal2(S):
        z = np.zeros((S.shape[0], 4))
        z[:, 2], z[:, 3] = np.cos(S[:, 0]), np.sin(S[:, 0])
        return z

    rect = [(0.0, TWO_PI), (0.0, 1.0), (0.0, TWO_PI)]
    return [BoundaryChart("Face1", rect, embed1, jac, normal1),
            BoundaryChart("Face2", rect, embed2, jac, normal2)]


def _example1_charts(spec):
    chi = _model(spec).chi
    sq3 = math.sqrt(3.0)
    Rsq = 4.0 + chi.eta

    def embed_p1(S):
        return _torus_embed(S[:, 0], S[:, 1], sq3, S[:, 2])

    def jac_p1(S):
        return sq3 * S[:, 0]

    def normal_p1(S):
        z = np.zeros((S.shape[0], 4))
        z[:, 2], z[:, 3] = np.cos(S[:, 2]), np.sin(S[:, 2])
        return z

    def _p2_radii(s):
        r1 = np.sqrt(1.0 + s)
        r2 = np.sqrt(4.0 - pr.chi(1.0 + s, chi))
        return r1, r2

    def embed_p2(S):
        r1, r2 = _p2_radii(S[:, 0])
        return _torus_embed(r1, S[:, 1], r2, S[:, 2])

    def jac_p2(S):
        r1, r2 = _p2_radii(S[:, 0])
        cp = pr.chi_d1(1.0 + S[:, 0], chi)
        return 0.5 * np.sqrt(r2 ** 2 + (cp * r1) ** 2)

    def normal_p2(S):
        P = embed_p2(S)
        z1, z2 = complexify(P)
        cp = pr.chi_d1(np.abs(z1) ** 2, chi)
        g = np.stack([cp * P[:, 0], cp * P[:, 1], P[:, 2], P[:, 3]], axis=1)
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def embed_p3(S):
        r1 = np.sqrt(S[:, 0])
        r2 = np.sqrt(Rsq - S[:, 0])
        return _torus_embed(r1, S[:, 1], r2, S[:, 2])

    def jac_p3(S):
        return np.full(S.shape[0], 0.5 * math.sqrt(Rsq))

    def normal_p3(S):
        P = embed_p3(S)
        return P / np.linalg.norm(P, axis=1, keepdims=True)

    rect_p1 = [(0.0, 1.0), (0.0, TWO_PI), (0.0, TWO_PI)]
    rect_p2 = [(0.0, chi.a), (0.0, TWO_PI), (0.0, TWO_PI)]
    rect_p3 = [(1.0 + chi.a, Rsq), (0.0, TWO_PI), (0.0, TWO_PI)]
    return [
        BoundaryChart("P1", rect_p1, embed_p1, jac_p1, normal_p1),
        BoundaryChart("P2", rect_p2, embed_p2, jac_p2, normal_p2,
                      breakpoints=((chi.eps,), (), ())),
        BoundaryChart("P3", rect_p3, embed_p3, jac_p3, normal_p3),
    ]


def _radial_chart(spec):
    model = _model(spec)
    center = model.interior_anchor()

    def _solve(S):
        d = _s3_direction(S)
        r = radial_boundary_solve(model.rho, center, d, iters=90)
        return d, r

    def embed(S):
        d, r = _solve(S)
        return center + r[:, None] * d

    def normal(S):
        P = embed(S)
        g1, g2 = model.grad(P)
        g = np.stack([2 * g1.real, -2 * g1.imag, 2 * g2.real, -2 * g2.imag], axis=1)
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def jac(S):
        d, r = _solve(S)
        P = center + r[:, None] * d
        g1, g2 = model.grad(P)
        g = np.stack([2 * g1.real, -2 * g1.imag, 2 * g2.real, -2 * g2.imag], axis=1)
        n = g / np.linalg.norm(g, axis=1, keepdims=True)
        cos_gamma = np.sum(n * d, axis=1)
        return r ** 3 * sphere_angles_measure(S) / cos_gamma

    rect = [(0.0, math.pi), (0.0, math.pi), (0.0, TWO_PI)]
    return BoundaryChart("Sphere", rect, embed, jac, normal)


def boundary_charts(spec: DomainSpec):
    """Charts covering the boundary up to a measure-zero overlap set."""
    if spec.kind == "ball":
        return [_ball_chart(spec.radius)]
    if spec.kind == "bidisc":
        return _bidisc_faces()
    if spec.kind == "example1":
        return _example1_charts(spec)
    if spec.kind in ("omega1", "omega2"):
        return [_radial_chart(spec)]
    raise ValueError(f"no boundary charts for kind {spec.kind!r}")


def disc_chart(center: complex = 0.0, radius: float = 1.0, plane: int = 1,
               other=(0.0, 0.0)):
    """2D polar chart of a disc in the z1 or z2 coordinate plane.

    Used by quadrature tests and the slice integrals; carries no normal.
    """
    c = complex(center)
    o = (float(other[0]), float(other[1]))

    def embed(S):
        r, th = S[:, 0], S[:, 1]
        x = c.real + r * np.cos(th)
        y = c.imag + r * np.sin(th)
        fixed0 = np.full_like(x, o[0])
        fixed1 = np.full_like(x, o[1])
        if plane == 1:
            return np.stack([x, y, fixed0, fixed1], axis=1)
        return np.stack([fixed0, fixed1, x, y], axis=1)

    def jac(S):
        return S[:, 0].copy()

    rect = [(0.0, radius), (0.0, TWO_PI)]
    return BoundaryChart("slice", rect, embed, jac, None)
