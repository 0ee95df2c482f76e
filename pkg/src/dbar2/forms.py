"""(0,1)-forms f = f1 dzbar1 + f2 dzbar2 with evaluable coefficients.

The built-in catalog generates closed forms from polynomial potentials
g(zbar1, zbar2): taking f = (dg/dzbar1, dg/dzbar2) makes the closedness
identity automatic, and the potential doubles as an exact solution for
residual oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError
from .fdiff import wirtinger_fd
from .geometry.domains import DomainSpec, as_points, bounding_box, complexify, membership
from .sampling import box_points

__all__ = ["ZeroOneForm", "form_from_potential", "catalog_form", "sample_sup_norm"]


@dataclass
class ZeroOneForm:
    """A dbar-closed (0,1)-form given by two coefficient functions.

    f1 and f2 take complex arrays (z1, z2) and return complex arrays.
    """

    f1: Callable
    f2: Callable
    label: str = ""
    sup_bound: float | None = None
    potential: Callable | None = field(default=None, repr=False)
    _d2_dzbar1: Callable | None = field(default=None, repr=False)

    def eval1(self, P):
        z1, z2 = complexify(np.atleast_2d(P))
        return np.asarray(self.f1(z1, z2), dtype=complex)

    def eval2(self, P):
        z1, z2 = complexify(np.atleast_2d(P))
        return np.asarray(self.f2(z1, z2), dtype=complex)

    def d2_dzbar1(self, P):
        """df2/dzbar1 (equals df1/dzbar2 for closed forms); analytic when the
        form came from a potential, centered differences otherwise."""
        if self._d2_dzbar1 is not None:
            z1, z2 = complexify(np.atleast_2d(P))
            return np.asarray(self._d2_dzbar1(z1, z2), dtype=complex)
        d21, _ = wirtinger_fd(self.eval2, np.atleast_2d(P), h=1e-6)
        return d21

    def closedness_defect(self, spec: DomainSpec, n: int = 200, seed: int = 2,
                          h: float = 1e-5) -> float:
        """max | df1/dzbar2 - df2/dzbar1 | over sampled interior points."""
        lo, hi = bounding_box(spec)
        pts = box_points(4 * n, lo + 2 * h, hi - 2 * h, seed)
        pts = pts[membership(spec, pts)][:n]
        if pts.shape[0] == 0:
            raise ValueError("no interior sample points found")
        _, d12 = wirtinger_fd(self.eval1, pts, h=h)
        d21, _ = wirtinger_fd(self.eval2, pts, h=h)
        return float(np.max(np.abs(d12 - d21)))


def form_from_potential(coeffs: dict, label: str) -> ZeroOneForm:
    """Closed form from a potential g = sum c[j,k] zbar1^j zbar2^k."""
    items = sorted((int(j), int(k), complex(c)) for (j, k), c in coeffs.items())

    def f1(z1, z2):
        w1, w2 = np.conj(z1), np.conj(z2)
        out = np.zeros(np.broadcast(w1, w2).shape, dtype=complex)
        for j, k, c in items:
            if j >= 1:
                out = out + c * j * w1 ** (j - 1) * w2 ** k
        return out

    def f2(z1, z2):
        w1, w2 = np.conj(z1), np.conj(z2)
        out = np.zeros(np.broadcast(w1, w2).shape, dtype=complex)
        for j, k, c in items:
            if k >= 1:
                out = out + c * k * w1 ** j * w2 ** (k - 1)
        return out

    def potential(z1, z2):
        w1, w2 = np.conj(z1), np.conj(z2)
        out = np.zeros(np.broadcast(w1, w2).shape, dtype=complex)
        for j, k, c in items:
            out = out + c * w1 ** j * w2 ** k
        return out

    def d2_dzbar1(z1, z2):
        w1, w2 = np.conj(z1), np.conj(z2)
        out = np.zeros(np.broadcast(w1, w2).shape, dtype=complex)
        for j, k, c in items:
            if j >= 1 and k >= 1:
                out = out + c * j * k * w1 ** (j - 1) * w2 ** (k - 1)
        return out

    return ZeroOneForm(f1=f1, f2=f2, label=label, potential=potential,
                       _d2_dzbar1=d2_dzbar1)


def catalog_form(name: str, coeffs: dict | None = None) -> ZeroOneForm:
    """Built-in right-hand sides.

    zero        f = 0
    zbar-pair   f = zbar2 dzbar1 + zbar1 dzbar2   (potential zbar1*zbar2)
    zbar1-only  f = zbar1 dzbar1                  (potential zbar1^2/2)
    custom-poly potential from ``coeffs`` {(j, k): complex}
    """
    if name == "zero":
        form = form_from_potential({}, "zero")
        form.sup_bound = 0.0
        return form
    if name == "zbar-pair":
        return form_from_potential({(1, 1): 1.0}, "zbar-pair")
    if name == "zbar1-only":
        return form_from_potential({(2, 0): 0.5}, "zbar1-only")
    if name == "custom-poly":
        if not coeffs:
            raise ConfigError("custom-poly needs potential coefficients")
        return form_from_potential(coeffs, "custom-poly")
    raise ConfigError(f"unknown form {name!r}")


def sample_sup_norm(form: ZeroOneForm, spec: DomainSpec, n: int = 4096,
                    seed: int = 13) -> float:
    """Sampled sup over the closed domain of |f| = sqrt(|f1|^2 + |f2|^2)."""
    if form.sup_bound is not None:
        return form.sup_bound
    lo, hi = bounding_box(spec)
    pts = box_points(n, lo, hi, seed)
    pts = pts[membership(spec, pts)]
    from .geometry.charts import boundary_charts
    try:
        charts = boundary_charts(spec)
        rng = np.random.default_rng(seed)
        for chart in charts:
            S = chart.rect[:, 0] + (chart.rect[:, 1] - chart.rect[:, 0]) \
                * rng.uniform(0.02, 0.98, size=(n // 4, chart.dim))
            pts = np.vstack([pts, chart.embed(S)])
    except ValueError:
        pass
    vals = np.hypot(np.abs(form.eval1(pts)), np.abs(form.eval2(pts)))
    return float(np.max(vals))
