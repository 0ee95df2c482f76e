"""Scalar building blocks for the infinite-type defining functions.

Three families live here:

* ``phi`` and its derivatives: the exponential flatness profile
  phi(t) = exp(-1/t^(alpha/2)), extended by 0 at t = 0.  All derivatives
  vanish at 0, which is what makes the boundary infinitely flat.
* ``psi_bump``: the smooth convex patching bump, zero on [0, eps^2],
  used to cut a local defining function down to a bounded domain.
* ``ChiSpec`` / ``chi``: the radial profile of the rounded-corner domain
  (flat disc piece, exponential rounding, C^2 bridge, linear sphere tail).

Everything is vectorized over numpy arrays and pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "phi", "phi_d1", "phi_d2", "phi_d3",
    "phi_convex_threshold", "phi_lemma_threshold", "phi_slope_root",
    "psi_bump", "psi_bump_d1", "psi_bump_d2",
    "ChiSpec", "build_chi", "chi", "chi_d1", "chi_d2",
]


def _as_array(t):
    return np.asarray(t, dtype=float)


def phi(t, alpha: float):
    """exp(-1/t^(alpha/2)) for t > 0, and 0 at t = 0."""
    t = _as_array(t)
    if np.any(t < 0):
        raise ValueError("phi requires t >= 0")
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out[pos] = np.exp(-np.power(t[pos], -alpha / 2.0))
    return out if out.ndim else float(out)


def _phi_pos(t, alpha):
    with np.errstate(under="ignore"):
        return np.exp(-np.power(t, -alpha / 2.0))


def phi_d1(t, alpha: float):
    """First derivative: phi(t) * (alpha/2) / t^(1 + alpha/2); 0 at t = 0."""
    t = _as_array(t)
    out = np.zeros_like(t)
    pos = t > 0
    tp = t[pos]
    with np.errstate(under="ignore"):
        out[pos] = _phi_pos(tp, alpha) * (alpha / 2.0) * tp ** (-1.0 - alpha / 2.0)
    return out if out.ndim else float(out)


def phi_d2(t, alpha: float):
    """Second derivative: phi(t) * (alpha/2) * t^-(2+alpha) * [alpha/2 - (1+alpha/2) t^(alpha/2)]."""
    t = _as_array(t)
    out = np.zeros_like(t)
    pos = t > 0
    tp = t[pos]
    with np.errstate(under="ignore"):
        bracket = alpha / 2.0 - (1.0 + alpha / 2.0) * tp ** (alpha / 2.0)
        out[pos] = _phi_pos(tp, alpha) * (alpha / 2.0) * tp ** (-2.0 - alpha) * bracket
    return out if out.ndim else float(out)


def phi_d3(t, alpha: float):
    """Third derivative, in the factored form phi * (a/2) * t^-(3+3a/2) * Q(t^(a/2))."""
    t = _as_array(t)
    out = np.zeros_like(t)
    pos = t > 0
    tp = t[pos]
    a = alpha
    with np.errstate(under="ignore"):
        w = tp ** (a / 2.0)
        q = (a / 2.0) ** 2 - (a / 2.0) * (3.0 + 1.5 * a) * w + (1.0 + a / 2.0) * (2.0 + a / 2.0) * w * w
        out[pos] = _phi_pos(tp, alpha) * (a / 2.0) * tp ** (-3.0 - 1.5 * a) * q
    return out if out.ndim else float(out)


def phi_convex_threshold(alpha: float) -> float:
    """Largest t with phi''(t) >= 0; also where phi' peaks."""
    return (alpha / (2.0 + alpha)) ** (2.0 / alpha)


def phi_lemma_threshold(alpha: float) -> float:
    """Largest t below which phi'' >= 0 and phi''' >= 0 both hold.

    The cubic-derivative factor Q(w) = (a/2)^2 - (a/2)(3+3a/2) w + (1+a/2)(2+a/2) w^2
    (w = t^(a/2)) is positive below its smaller root, which sits below the
    phi'' threshold, so the smaller root decides the joint region.
    """
    a = alpha
    A = (1.0 + a / 2.0) * (2.0 + a / 2.0)
    B = (a / 2.0) * (3.0 + 1.5 * a)
    C = (a / 2.0) ** 2
    w1 = (B - math.sqrt(B * B - 4.0 * A * C)) / (2.0 * A)
    return w1 ** (2.0 / a)


def phi_slope_root(alpha: float, slope: float) -> float:
    """Smallest t with phi'(t) = slope on the rising branch of phi'.

    phi' increases from 0 to its peak at ``phi_convex_threshold`` and decays
    after; if the peak never reaches ``slope`` the threshold itself is
    returned (scaled just inside the convex region).
    """
    t_peak = phi_convex_threshold(alpha)
    if phi_d1(t_peak, alpha) <= slope:
        return 0.999 * t_peak
    lo = t_peak
    while phi_d1(lo, alpha) > slope:
        lo *= 0.5
    hi = t_peak
    for _ in range(200):
        mid = math.sqrt(lo * hi)  # geometric bisection: the root spans decades
        if phi_d1(mid, alpha) > slope:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * hi:
            break
    return lo


# ---------------------------------------------------------------------------
# patching bump
# ---------------------------------------------------------------------------

def psi_bump(t, eps: float):
    """0 on [0, eps^2]; exp(-1/(t-eps^2)) * (t^2 - eps^4) beyond."""
    t = _as_array(t)
    if np.any(t < 0):
        raise ValueError("psi_bump requires t >= 0")
    out = np.zeros_like(t)
    s = t - eps * eps
    pos = s > 0
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out[pos] = np.exp(-1.0 / s[pos]) * (t[pos] ** 2 - eps ** 4)
    return out if out.ndim else float(out)


def psi_bump_d1(t, eps: float):
    t = _as_array(t)
    out = np.zeros_like(t)
    s = t - eps * eps
    pos = s > 0
    tp, sp = t[pos], s[pos]
    with np.errstate(under="ignore"):
        out[pos] = np.exp(-1.0 / sp) * ((tp ** 2 - eps ** 4) / sp ** 2 + 2.0 * tp)
    return out if out.ndim else float(out)


def psi_bump_d2(t, eps: float):
    t = _as_array(t)
    out = np.zeros_like(t)
    s = t - eps * eps
    pos = s > 0
    tp, sp = t[pos], s[pos]
    with np.errstate(under="ignore"):
        quad = (tp ** 2 - eps ** 4) * (1.0 / sp ** 4 - 2.0 / sp ** 3)
        out[pos] = np.exp(-1.0 / sp) * (quad + 4.0 * tp / sp ** 2 + 2.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# rounded-corner radial profile chi
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChiSpec:
    """Assembled piecewise profile for the rounded bidisc-ball corner.

    Branches in t (= |z1|^2 in the domain definition):
      [0, 1]       -> 1
      (1, 1+eps)   -> 1 + phi(t - 1)
      [1+eps, 1+a] -> bridge (see ``build_chi``)
      [1+a, inf)   -> t - eta

    ``bridge_kind`` is one of "power", "quad", "quintic"; the first two are
    monotone convex in chi' and keep chi'' >= 0, the quintic honours an
    explicitly requested eta at the cost of convexity (recorded in the
    audit, not hidden).
    """

    alpha: float
    a: float
    eps: float
    eta: float
    bridge_kind: str
    coeffs: tuple
    convex: bool

    @property
    def left(self) -> float:
        return 1.0 + self.eps

    @property
    def right(self) -> float:
        return 1.0 + self.a


def _power_bridge(alpha, a, eps):
    """chi'' = cL * u^m with u = (R-t)/(R-L); requires phi'(eps) <= 1."""
    L, R = 1.0 + eps, 1.0 + a
    sL = float(phi_d1(eps, alpha))
    cL = float(phi_d2(eps, alpha))
    dS = 1.0 - sL
    width = R - L
    if dS <= 0:
        return None
    if cL * width >= 2.0 * dS:
        m = cL * width / dS - 1.0
        return ("power", (sL, cL, dS, width, m))
    gamma = 6.0 * (dS / width - cL / 2.0)
    return ("quad", (sL, cL, dS, width, gamma))


def _quintic_bridge(alpha, a, eps, eta):
    """C^2 bridge with a prescribed integral so that chi(1+a) = 1 + a - eta.

    Quintic in u = (t-L)/(R-L) for chi', pinned to the exact branch value and
    curvature on both sides plus the integral constraint; the sixth condition
    flattens the curvature at the right endpoint.
    """
    L, R = 1.0 + eps, 1.0 + a
    width = R - L
    sL = float(phi_d1(eps, alpha))
    cL = float(phi_d2(eps, alpha))
    target = (1.0 + a - eta) - (1.0 + float(phi(eps, alpha)))  # integral of chi' over [L, R]
    # h(u) = sum c_k u^k, chi'(t) = h((t-L)/width)
    rows, rhs = [], []
    rows.append([1, 0, 0, 0, 0, 0]); rhs.append(sL)                 # h(0) = sL
    rows.append([0, 1, 0, 0, 0, 0]); rhs.append(cL * width)         # h'(0) = cL*width
    rows.append([1, 1, 1, 1, 1, 1]); rhs.append(1.0)                # h(1) = 1
    rows.append([0, 1, 2, 3, 4, 5]); rhs.append(0.0)                # h'(1) = 0
    rows.append([0, 0, 2, 6, 12, 20]); rhs.append(0.0)              # h''(1) = 0
    rows.append([1, 1 / 2, 1 / 3, 1 / 4, 1 / 5, 1 / 6]); rhs.append(target / width)
    c = np.linalg.solve(np.array(rows, float), np.array(rhs, float))
    return ("quintic", (sL, cL, width, tuple(c)))


def build_chi(alpha: float, a: float | None = None, eps: float | None = None,
              eta: float | None = None, slope_cap: float = 0.95) -> ChiSpec:
    """Assemble a ChiSpec.

    With ``eps``/``eta`` omitted the construction picks eps on the rising
    branch of phi' (slope at most ``slope_cap``) and derives eta from value
    continuity, which keeps chi'' >= 0 everywhere and the resulting domain
    convex.  Explicit eps/eta are honoured exactly; if they are incompatible
    with convexity the bridge falls back to a C^2 quintic and the spec is
    marked non-convex.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    auto_eps = eps is None
    if eps is None:
        eps = phi_slope_root(alpha, slope_cap)
    if a is None:
        a = max(0.1, 2.0 * eps)
    if not a > eps > 0:
        raise ValueError(f"need a > eps > 0 (got a={a}, eps={eps})")

    if eta is None:
        bridge = _power_bridge(alpha, a, eps)
        if bridge is None:
            raise ValueError(
                "phi'(eps) > 1: no convex bridge exists; pass eta explicitly "
                "or use the automatic eps")
        kind, coeffs = bridge
        eta = _bridge_eta(alpha, a, eps, kind, coeffs)
        convex = auto_eps or eps <= phi_convex_threshold(alpha)
    else:
        kind, coeffs = _quintic_bridge(alpha, a, eps, eta)
        convex = False
    if not 0 < eta < a:
        raise ValueError(f"derived/explicit eta={eta:.3e} outside (0, a={a})")
    return ChiSpec(alpha=alpha, a=a, eps=eps, eta=eta,
                   bridge_kind=kind, coeffs=coeffs, convex=convex)


def _bridge_eta(alpha, a, eps, kind, coeffs):
    L, R = 1.0 + eps, 1.0 + a
    vL = 1.0 + float(phi(eps, alpha))
    chiR = vL + _bridge_int(kind, coeffs, R, L)
    return (1.0 + a) - chiR


def _bridge_d1(kind, coeffs, t, L):
    """chi' on the bridge."""
    if kind == "power":
        sL, cL, dS, width, m = coeffs
        u = (L + width - t) / width
        with np.errstate(under="ignore"):
            return sL + dS * (1.0 - u ** (m + 1.0))
    if kind == "quad":
        sL, cL, dS, width, gamma = coeffs
        u = (L + width - t) / width
        # integral of cL*u + gamma*u(1-u) from u .. 1, times width
        return sL + width * (cL * (1 - u ** 2) / 2.0
                             + gamma * ((1 - u ** 2) / 2.0 - (1 - u ** 3) / 3.0))
    sL, cL, width, c = coeffs
    u = (t - L) / width
    return sum(ck * u ** k for k, ck in enumerate(c))


def _bridge_d2(kind, coeffs, t, L):
    """chi'' on the bridge."""
    if kind == "power":
        sL, cL, dS, width, m = coeffs
        u = (L + width - t) / width
        with np.errstate(under="ignore"):
            return cL * u ** m
    if kind == "quad":
        sL, cL, dS, width, gamma = coeffs
        u = (L + width - t) / width
        return cL * u + gamma * u * (1.0 - u)
    sL, cL, width, c = coeffs
    u = (t - L) / width
    return sum(k * ck * u ** (k - 1) for k, ck in enumerate(c) if k >= 1) / width


def _bridge_int(kind, coeffs, t, L):
    """Integral of chi' over [L, t] on the bridge."""
    if kind == "power":
        sL, cL, dS, width, m = coeffs
        u = (L + width - t) / width
        with np.errstate(under="ignore"):
            tail = (1.0 - u ** (m + 2.0)) / (m + 2.0)
        return width * (sL * (1.0 - u) + dS * ((1.0 - u) - tail))
    if kind == "quad":
        sL, cL, dS, width, gamma = coeffs
        u = (L + width - t) / width
        # chi'(u) = sL + width*(cL*(1-u^2)/2 + gamma*(1/6 - u^2/2 + u^3/3)), dt = -width du
        return width * (sL * (1.0 - u)
                        + width * (cL / 2.0 * (2.0 / 3.0 - u + u ** 3 / 3.0)
                                   + gamma * (1.0 / 12.0 - u / 6.0 + u ** 3 / 6.0 - u ** 4 / 12.0)))
    sL, cL, width, c = coeffs
    u = (t - L) / width
    return width * sum(ck * u ** (k + 1) / (k + 1) for k, ck in enumerate(c))


def chi(t, spec: ChiSpec):
    """Profile value; vectorized in t >= 0."""
    t = _as_array(t)
    if np.any(t < 0):
        raise ValueError("chi requires t >= 0")
    L, R = spec.left, spec.right
    out = np.empty_like(t)
    flat = t <= 1.0
    expb = (t > 1.0) & (t < L)
    brid = (t >= L) & (t < R)
    tail = t >= R
    out[flat] = 1.0
    out[expb] = 1.0 + phi(t[expb] - 1.0, spec.alpha)
    vL = 1.0 + float(phi(spec.eps, spec.alpha))
    out[brid] = vL + _bridge_int(spec.bridge_kind, spec.coeffs, t[brid], L)
    out[tail] = t[tail] - spec.eta
    return out if out.ndim else float(out)


def chi_d1(t, spec: ChiSpec):
    t = _as_array(t)
    L, R = spec.left, spec.right
    out = np.empty_like(t)
    flat = t <= 1.0
    expb = (t > 1.0) & (t < L)
    brid = (t >= L) & (t < R)
    tail = t >= R
    out[flat] = 0.0
    out[expb] = phi_d1(t[expb] - 1.0, spec.alpha)
    out[brid] = _bridge_d1(spec.bridge_kind, spec.coeffs, t[brid], L)
    out[tail] = 1.0
    return out if out.ndim else float(out)


def chi_d2(t, spec: ChiSpec):
    t = _as_array(t)
    L, R = spec.left, spec.right
    out = np.empty_like(t)
    flat = t <= 1.0
    expb = (t > 1.0) & (t < L)
    brid = (t >= L) & (t < R)
    tail = t >= R
    out[flat] = 0.0
    out[expb] = phi_d2(t[expb] - 1.0, spec.alpha)
    out[brid] = _bridge_d2(spec.bridge_kind, spec.coeffs, t[brid], L)
    out[tail] = 0.0
    return out if out.ndim else float(out)
