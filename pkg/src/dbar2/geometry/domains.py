"""Supported domains: defining functions, complex gradients, membership.

Points of C^2 are stored as four real coordinates (x1, x2, x3, x4) with
z1 = x1 + i x2 and z2 = x3 + i x4.  Array-valued entry points take (N, 4)
float arrays; the CPoint2 dataclass is the scalar-friendly wrapper.

Domain kinds
------------
ball       |z1|^2 + |z2|^2 - r^2
bidisc     max(|z1|, |z2|) - 1           (non-smooth; never differentiated)
omega1     Re z2 + Phi(|z1|^2)   + M psi(|z|^2)
omega2     Re z2 + Phi((Re z1)^2) + M psi(|z|^2)
example1   chi(|z1|^2) + |z2|^2 - 4
example2   chi2(|z1|) + chi2(|z2|) - 2 + a

Phi is the exponential flatness profile exp(-1/t^(alpha/2)) continued by
its tangent line past the radial inflection point: the raw profile stops
being convex there, and the continuation is what keeps the patched domains
honestly convex (the support-plane sign of the Leray denominator depends
on it).  The exact profile is untouched on the neighborhood of the flat
point where all the lower-bound predicates live.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import UnsupportedSmoothOperation
from ..sampling import sphere_directions
from . import profiles as pr
from .patch import choose_patch_constant, radial_boundary_solve

__all__ = [
    "CPoint2", "DomainSpec",
    "ball", "bidisc", "omega1", "omega2", "example1", "example2",
    "rho", "grad_rho", "membership", "bounding_box", "interior_anchor",
    "dist_to_boundary", "flat_ladder", "domain_info",
    "as_points", "complexify", "realify",
]

KINDS = ("ball", "bidisc", "omega1", "omega2", "example1", "example2")


@dataclass(frozen=True)
class CPoint2:
    """A point of C^2 as four real coordinates."""

    x1: float
    x2: float
    x3: float
    x4: float

    @property
    def z1(self) -> complex:
        return complex(self.x1, self.x2)

    @property
    def z2(self) -> complex:
        return complex(self.x3, self.x4)

    @classmethod
    def from_complex(cls, z1: complex, z2: complex) -> "CPoint2":
        z1, z2 = complex(z1), complex(z2)
        return cls(z1.real, z1.imag, z2.real, z2.imag)

    def to_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3, self.x4], dtype=float)


def as_points(pts) -> np.ndarray:
    """Coerce CPoint2 | (4,) | (N,4) | list thereof to an (N,4) float array."""
    if isinstance(pts, CPoint2):
        return pts.to_array()[None, :]
    if isinstance(pts, (list, tuple)) and pts and isinstance(pts[0], CPoint2):
        return np.stack([p.to_array() for p in pts])
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[-1] != 4:
        raise ValueError("points must have 4 real coordinates")
    return arr


def complexify(P: np.ndarray):
    P = np.asarray(P, float)
    return P[..., 0] + 1j * P[..., 1], P[..., 2] + 1j * P[..., 3]


def realify(z1, z2) -> np.ndarray:
    z1 = np.asarray(z1, complex)
    z2 = np.asarray(z2, complex)
    return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1)


@dataclass(frozen=True)
class DomainSpec:
    """Tagged description of a supported domain plus its shape parameters.

    Unset optional parameters are resolved deterministically at first use
    (patch constant by audit, corner profile by the slope-cap rule) and
    cached; ``domain_info`` reports the resolved values.
    """

    kind: str
    radius: float | None = None
    alpha: float | None = None
    a: float | None = None
    eps: float | None = None
    eta: float | None = None
    M: float | None = None
    eps_patch: float | None = None
    k: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind != "bidisc" and self.kind != "ball" and not (self.alpha and self.alpha > 0):
            raise ValueError("alpha must be a positive real")
        if self.kind == "ball" and not (self.radius and self.radius > 0):
            raise ValueError("ball requires a positive radius")


def ball(radius: float = 2.0) -> DomainSpec:
    return DomainSpec(kind="ball", radius=float(radius))


def bidisc() -> DomainSpec:
    return DomainSpec(kind="bidisc")


def omega1(alpha: float, eps_patch: float = 0.1, M: float | None = None) -> DomainSpec:
    return DomainSpec(kind="omega1", alpha=float(alpha), eps_patch=float(eps_patch), M=M)


def omega2(alpha: float, eps_patch: float = 0.1, M: float | None = None) -> DomainSpec:
    return DomainSpec(kind="omega2", alpha=float(alpha), eps_patch=float(eps_patch), M=M)


def example1(alpha: float, a: float | None = None, eps: float | None = None,
             eta: float | None = None) -> DomainSpec:
    spec = DomainSpec(kind="example1", alpha=float(alpha), a=a, eps=eps, eta=eta)
    _model(spec)  # validate parameters eagerly
    return spec


def example2(alpha: float, a: float = 0.1, k: float | None = None) -> DomainSpec:
    expected = a * math.exp((2.0 * a - a * a) ** (-alpha / 2.0))
    if k is not None and not math.isclose(k, expected, rel_tol=1e-12):
        raise ValueError(f"k must equal a*exp(1/(2a-a^2)^(alpha/2)) = {expected!r}")
    return DomainSpec(kind="example2", alpha=float(alpha), a=float(a), k=expected)


# ---------------------------------------------------------------------------
# resolved models
# ---------------------------------------------------------------------------

class _Model:
    """Resolved, cached state for one DomainSpec."""

    def __init__(self, spec: DomainSpec):
        self.spec = spec
        kind = spec.kind
        self.chi = None
        self.M = None
        self.t_break = None
        if kind in ("omega1", "omega2"):
            self.t_break = pr.phi_convex_threshold(spec.alpha)
            self.M = spec.M if spec.M is not None else choose_patch_constant(
                self._local_rho, spec.eps_patch)
        elif kind == "example1":
            self.chi = pr.build_chi(spec.alpha, spec.a, spec.eps, spec.eta)
        self._bbox = None
        self._anchor = None

    # profile Phi: exp flatness continued by its tangent past the inflection
    def _profile(self, t):
        a = self.spec.alpha
        tb = self.t_break
        t = np.asarray(t, float)
        out = pr.phi(np.minimum(t, tb), a)
        beyond = t > tb
        out = np.where(beyond, pr.phi(tb, a) + pr.phi_d1(tb, a) * (t - tb), out)
        return out

    def _profile_d1(self, t):
        a = self.spec.alpha
        tb = self.t_break
        t = np.asarray(t, float)
        return np.where(t > tb, pr.phi_d1(tb, a), pr.phi_d1(np.minimum(t, tb), a))

    def _local_rho(self, P):
        P = np.atleast_2d(np.asarray(P, float))
        if self.spec.kind == "omega1":
            t = P[:, 0] ** 2 + P[:, 1] ** 2
        else:
            t = P[:, 0] ** 2
        return P[:, 2] + self._profile(t)

    def rho(self, P):
        P = np.atleast_2d(np.asarray(P, float))
        kind = self.spec.kind
        if kind == "ball":
            return np.sum(P * P, axis=1) - self.spec.radius ** 2
        if kind == "bidisc":
            z1, z2 = complexify(P)
            return np.maximum(np.abs(z1), np.abs(z2)) - 1.0
        if kind in ("omega1", "omega2"):
            return self._local_rho(P) + self.M * pr.psi_bump(np.sum(P * P, axis=1),
                                                             self.spec.eps_patch)
        if kind == "example1":
            z1, z2 = complexify(P)
            return pr.chi(np.abs(z1) ** 2, self.chi) + np.abs(z2) ** 2 - 4.0
        # example2
        z1, z2 = complexify(P)
        return (self._chi2(np.abs(z1)) + self._chi2(np.abs(z2))
                - 2.0 + self.spec.a)

    def _chi2(self, r):
        a, al, k = self.spec.a, self.spec.alpha, self.spec.k
        r = np.asarray(r, float)
        u = r * r - (1.0 - a) ** 2
        out = np.full_like(r, 1.0 - a)
        pos = u > 0
        out[pos] = k * pr.phi(u[pos], al) + 1.0 - a
        return out

    def _chi2_d1(self, r):
        a, al, k = self.spec.a, self.spec.alpha, self.spec.k
        r = np.asarray(r, float)
        u = r * r - (1.0 - a) ** 2
        out = np.zeros_like(r)
        pos = u > 0
        out[pos] = k * pr.phi_d1(u[pos], al) * 2.0 * r[pos]
        return out

    def grad(self, P):
        """Wirtinger derivatives (d rho/d zeta_1, d rho/d zeta_2), complex arrays."""
        P = np.atleast_2d(np.asarray(P, float))
        kind = self.spec.kind
        z1, z2 = complexify(P)
        if kind == "bidisc":
            raise UnsupportedSmoothOperation("bidisc defining function is not smooth")
        if kind == "ball":
            return np.conj(z1), np.conj(z2)
        if kind == "omega1":
            t = np.abs(z1) ** 2
            g1 = self._profile_d1(t) * np.conj(z1)
            g2 = np.full_like(g1, 0.5)
            pd = self.M * pr.psi_bump_d1(np.sum(P * P, axis=1), self.spec.eps_patch)
            return g1 + pd * np.conj(z1), g2 + pd * np.conj(z2)
        if kind == "omega2":
            x1 = P[:, 0]
            g1 = (self._profile_d1(x1 * x1) * x1).astype(complex)
            g2 = np.full_like(g1, 0.5)
            pd = self.M * pr.psi_bump_d1(np.sum(P * P, axis=1), self.spec.eps_patch)
            return g1 + pd * np.conj(z1), g2 + pd * np.conj(z2)
        if kind == "example1":
            t = np.abs(z1) ** 2
            return pr.chi_d1(t, self.chi) * np.conj(z1), np.conj(z2)
        # example2
        r1, r2 = np.abs(z1), np.abs(z2)
        with np.errstate(invalid="ignore", divide="ignore"):
            g1 = np.where(r1 > 0, self._chi2_d1(r1) * np.conj(z1) / (2.0 * r1), 0.0)
            g2 = np.where(r2 > 0, self._chi2_d1(r2) * np.conj(z2) / (2.0 * r2), 0.0)
        return g1, g2

    # -- geometry summaries -------------------------------------------------

    def interior_anchor(self) -> np.ndarray:
        if self._anchor is not None:
            return self._anchor
        kind = self.spec.kind
        if kind in ("ball", "bidisc", "example1", "example2"):
            anchor = np.zeros(4)
        else:
            depth = self._axis_depth()
            anchor = np.array([0.0, 0.0, -0.5 * depth, 0.0])
        assert self.rho(anchor[None, :])[0] < 0
        self._anchor = anchor
        return anchor

    def _axis_depth(self) -> float:
        """Extent of the patched domain along -Re z2 from the flat point."""
        dirs = np.array([[0.0, 0.0, -1.0, 0.0]])
        r = radial_boundary_solve(self.rho, np.zeros(4), dirs)[0]
        if not np.isfinite(r):
            raise ValueError("patched domain is unbounded along -Re z2")
        return float(r)

    def bounding_box(self):
        if self._bbox is not None:
            return self._bbox
        kind = self.spec.kind
        if kind == "ball":
            r = self.spec.radius
            box = (np.full(4, -r), np.full(4, r))
        elif kind == "bidisc":
            box = (np.full(4, -1.0), np.full(4, 1.0))
        elif kind == "example1":
            r1 = math.sqrt(4.0 + self.chi.eta)
            r2 = math.sqrt(3.0)
            box = (np.array([-r1, -r1, -r2, -r2]), np.array([r1, r1, r2, r2]))
        elif kind == "example2":
            box = (np.full(4, -1.0), np.full(4, 1.0))
        else:
            dirs = sphere_directions(512, 5)
            radii = radial_boundary_solve(self.rho, self.interior_anchor(), dirs)
            pts = self.interior_anchor() + radii[:, None] * dirs
            lo = pts.min(axis=0) - 0.05
            hi = pts.max(axis=0) + 0.05
            box = (lo, hi)
        self._bbox = box
        return box

    def dist_to_boundary(self, z: np.ndarray, n_dirs: int = 2048) -> float:
        z = np.asarray(z, float).reshape(4)
        kind = self.spec.kind
        z1, z2 = complexify(z[None, :])
        r1, r2 = float(np.abs(z1[0])), float(np.abs(z2[0]))
        if kind == "ball":
            return self.spec.radius - math.hypot(r1, r2)
        if kind == "bidisc":
            return min(1.0 - r1, 1.0 - r2)
        if kind == "example1":
            return self._dist_example1(r1, r2)
        dirs = sphere_directions(n_dirs, 11)
        radii = radial_boundary_solve(self.rho, z, dirs)
        return float(np.nanmin(radii))

    def _dist_example1(self, r1: float, r2: float) -> float:
        # every boundary piece is a torus over a profile curve in (|z1|, |z2|)
        sq3 = math.sqrt(3.0)
        d1 = math.hypot(max(r1 - 1.0, 0.0), r2 - sq3)
        R = math.sqrt(4.0 + self.chi.eta)
        a = self.chi.a
        edge = (math.sqrt(1.0 + a), math.sqrt(4.0 + self.chi.eta - (1.0 + a)))
        rad = math.hypot(r1, r2)
        if rad > 0 and (r1 * R / rad) ** 2 >= 1.0 + a:
            d3 = abs(R - rad)
        else:
            d3 = math.hypot(r1 - edge[0], r2 - edge[1])
        s = np.linspace(0.0, a, 4001)[1:]
        p1 = np.sqrt(1.0 + s)
        p2 = np.sqrt(4.0 - pr.chi(1.0 + s, self.chi))
        d2 = float(np.min(np.hypot(r1 - p1, r2 - p2)))
        return min(d1, d2, d3)


@lru_cache(maxsize=64)
def _model(spec: DomainSpec) -> _Model:
    return _Model(spec)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def rho(spec: DomainSpec, pts):
    """Defining function: negative inside, zero on the boundary."""
    P = as_points(pts)
    out = _model(spec).rho(P)
    return out if P.shape[0] > 1 else float(out[0])


def grad_rho(spec: DomainSpec, pts):
    """Complex Wirtinger gradient (rho_zeta1, rho_zeta2) at each point."""
    P = as_points(pts)
    g1, g2 = _model(spec).grad(P)
    if P.shape[0] > 1:
        return g1, g2
    return complex(g1[0]), complex(g2[0])


def membership(spec: DomainSpec, pts):
    P = as_points(pts)
    out = _model(spec).rho(P) < 0
    return out if P.shape[0] > 1 else bool(out[0])


def bounding_box(spec: DomainSpec):
    return _model(spec).bounding_box()


def interior_anchor(spec: DomainSpec) -> np.ndarray:
    return _model(spec).interior_anchor()


def dist_to_boundary(spec: DomainSpec, z) -> float:
    return _model(spec).dist_to_boundary(as_points(z)[0])


def flat_ladder(spec: DomainSpec, distances):
    """Interior points at prescribed distances from the infinite-type locus.

    ball: approaches the boundary point (radius, 0) radially (used by the
    uniformity probes even though the ball has no flat point).
    omega1/omega2: walks in from the flat point 0 along -Re z2.
    example1: walks in radially from a point on the corner circle
    {|z1| = 1, |z2| = sqrt(3)}.
    """
    distances = [float(d) for d in distances]
    pts = []
    if spec.kind == "ball":
        for d in distances:
            pts.append(np.array([spec.radius - d, 0.0, 0.0, 0.0]))
    elif spec.kind in ("omega1", "omega2"):
        for d in distances:
            pts.append(np.array([0.0, 0.0, -d, 0.0]))
    elif spec.kind == "example1":
        th1, th2 = 0.3, 1.1
        ring = np.array([math.cos(th1), math.sin(th1),
                         math.sqrt(3.0) * math.cos(th2), math.sqrt(3.0) * math.sin(th2)])
        for d in distances:
            pts.append(ring * (1.0 - d / 2.0))
    else:
        raise ValueError(f"no flat-locus ladder for kind {spec.kind!r}")
    P = np.stack(pts)
    inside = membership(spec, P)
    if not np.all(inside):
        raise ValueError("ladder point fell outside the domain")
    return P


def domain_info(spec: DomainSpec) -> dict:
    """Resolved parameters and audit results, for reports and docs."""
    m = _model(spec)
    info = {"kind": spec.kind}
    if spec.kind == "ball":
        info["radius"] = spec.radius
    if spec.alpha is not None:
        info["alpha"] = spec.alpha
    if spec.kind in ("omega1", "omega2"):
        info.update(M=m.M, eps_patch=spec.eps_patch,
                    profile_exact_up_to_t=m.t_break)
    if spec.kind == "example1":
        c = m.chi
        info.update(a=c.a, eps=c.eps, eta=c.eta, bridge=c.bridge_kind,
                    convex=c.convex,
                    chi2_pos_on_exp_branch_up_to=min(c.eps, pr.phi_convex_threshold(c.alpha)),
                    chi3_pos_on_exp_branch_up_to=min(c.eps, pr.phi_lemma_threshold(c.alpha)))
    if spec.kind == "example2":
        info.update(a=spec.a, k=spec.k)
    return info
