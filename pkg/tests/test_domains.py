import math

import numpy as np
import pytest

from dbar2.errors import AuditFailure, UnsupportedSmoothOperation
from dbar2.fdiff import fd_gradient
from dbar2.geometry import (
    CPoint2, ball, bidisc, example1, example2, omega1, omega2,
    rho, grad_rho, membership, choose_patch_constant, hessian_min_eigenvalue,
)
from dbar2.geometry import domains as dm


def test_cpoint2_round_trip_exact():
    p = CPoint2(0.125, -2.5, 3.0, 1e-9)
    q = CPoint2.from_complex(p.z1, p.z2)
    assert q == p
    assert np.array_equal(q.to_array(), np.array([0.125, -2.5, 3.0, 1e-9]))


def test_rho_pinned_values():
    e1 = example1(0.5)
    assert rho(e1, CPoint2(0, 0, 0, 0)) == pytest.approx(-3.0, abs=1e-15)
    assert rho(e1, CPoint2(0, 0, math.sqrt(3.0), 0)) == pytest.approx(0.0, abs=1e-12)
    assert rho(ball(2.0), CPoint2(2, 0, 0, 0)) == pytest.approx(0.0, abs=1e-15)


def test_bidisc_rho_is_max_norm():
    b = bidisc()
    assert rho(b, CPoint2(0.5, 0, 0, -0.25)) == pytest.approx(-0.5)
    assert rho(b, CPoint2(0, 0.5, 0.9, 0)) == pytest.approx(-0.1)
    with pytest.raises(UnsupportedSmoothOperation):
        grad_rho(b, CPoint2(0.5, 0, 0, 0))


def test_grad_rho_ball_closed_form():
    g1, g2 = grad_rho(ball(2.0), CPoint2(0.3, -0.4, 1.0, 0.2))
    assert g1 == pytest.approx(complex(0.3, 0.4), abs=1e-15)
    assert g2 == pytest.approx(complex(1.0, -0.2), abs=1e-15)


def test_grad_rho_example1_flat_zone():
    e1 = example1(0.5)
    g1, g2 = grad_rho(e1, CPoint2(0.5, 0.2, 1.0, -0.7))
    assert g1 == 0.0
    assert g2 == pytest.approx(complex(1.0, 0.7), abs=1e-15)


def _wirtinger_from_fd(spec, P):
    g = fd_gradient(lambda Q: np.atleast_1d(rho(spec, Q)), P, h=1e-6)
    return (0.5 * (g[:, 0] - 1j * g[:, 1]), 0.5 * (g[:, 2] - 1j * g[:, 3]))


@pytest.mark.parametrize("spec,scale", [
    (ball(2.0), 1.2),
    (omega1(0.5), 0.12),
    (omega2(0.5), 0.12),
    (example1(0.5), 1.0),
    (example2(0.5), 0.55),
])
def test_grad_rho_matches_finite_differences(spec, scale):
    rng = np.random.default_rng(5)
    P = rng.uniform(-scale, scale, size=(1000, 4))
    if spec.kind == "omega1" or spec.kind == "omega2":
        P[:, 2] -= 0.15  # keep points in the patched blob's neighborhood
    if spec.kind == "example1":
        # stay >= 1e-3 away from the profile junctions in t = |z1|^2
        t = P[:, 0] ** 2 + P[:, 1] ** 2
        keep = (np.abs(t - 1.0) > 2e-3) & (np.abs(t - (1.0 + 0.1)) > 2e-3)
        P = P[keep]
    if spec.kind == "example2":
        r1 = np.hypot(P[:, 0], P[:, 1])
        r2 = np.hypot(P[:, 2], P[:, 3])
        keep = (np.abs(r1 - 0.9) > 2e-3) & (np.abs(r2 - 0.9) > 2e-3) & (r1 > 0.05) & (r2 > 0.05)
        P = P[keep]
    g1, g2 = grad_rho(spec, P)
    f1, f2 = _wirtinger_from_fd(spec, P)
    scale_ref = np.abs(g1) + np.abs(g2) + 1e-9
    assert np.max(np.abs(g1 - f1) / scale_ref) < 1e-6
    assert np.max(np.abs(g2 - f2) / scale_ref) < 1e-6


def test_hessian_min_eigenvalue_pinned():
    assert hessian_min_eigenvalue(ball(2.0), np.array([[0.3, 0.1, -0.5, 0.9]])) == pytest.approx(2.0, abs=1e-6)
    e1 = example1(0.5)
    val = hessian_min_eigenvalue(e1, np.array([[0.4, 0.1, 0.3, -0.2]]))
    assert val == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(UnsupportedSmoothOperation):
        hessian_min_eigenvalue(bidisc(), np.zeros((1, 4)))


def test_choose_patch_constant_already_convex():
    M = choose_patch_constant(lambda P: np.sum(P * P, axis=1) - 1.0, 0.1,
                              interior_point=np.zeros(4), n_samples=2048)
    assert M == 1.0


def test_choose_patch_constant_half_space():
    M = choose_patch_constant(lambda P: P[:, 2], 0.1, n_samples=2048)
    assert 1.0 <= M <= 2.0**30
    assert math.log2(M) == int(math.log2(M))


def test_choose_patch_constant_flat_profile():
    from dbar2.geometry.profiles import phi
    loc = lambda P: P[:, 2] + phi(P[:, 0] ** 2 + P[:, 1] ** 2, 0.5)
    # raw exponential profile is non-convex beyond its inflection: audit rejects
    with pytest.raises(AuditFailure):
        choose_patch_constant(loc, 0.1, n_samples=1024, max_exponent=18)


def test_omega1_resolved_boundary_strongly_convex_off_flat_ball():
    spec = dm.omega1(0.5)
    info = dm.domain_info(spec)
    assert info["M"] >= 1.0
    from dbar2.geometry.patch import radial_boundary_solve
    from dbar2.sampling import sphere_directions
    dirs = sphere_directions(256, 99)
    anchor = dm.interior_anchor(spec)
    radii = radial_boundary_solve(lambda P: np.atleast_1d(rho(spec, P)), anchor, dirs)
    pts = anchor + radii[:, None] * dirs
    pts = pts[np.linalg.norm(pts, axis=1) > 2 * spec.eps_patch]
    eigs = hessian_min_eigenvalue(spec, pts)
    assert np.min(eigs) >= 1e-6


def test_example2_scaling_constant():
    spec = example2(0.5, a=0.1)
    assert spec.k == pytest.approx(0.1 * math.exp((0.2 - 0.01) ** -0.25), rel=1e-14)
    # chi2(1) = 1 makes rho vanish at (e^{i t}, 0)
    assert rho(spec, CPoint2(1.0, 0.0, 0.0, 0.0)) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        example2(0.5, a=0.1, k=1.2345)


def test_membership_and_bounding_box():
    for spec in (ball(2.0), bidisc(), example1(0.5), omega1(0.5)):
        lo, hi = dm.bounding_box(spec)
        rng = np.random.default_rng(1)
        P = rng.uniform(lo, hi, size=(4000, 4))
        inside = membership(spec, P)
        assert inside.any()
        pts = P[inside]
        assert np.all(pts >= lo) and np.all(pts <= hi)


def test_flat_ladder_distances():
    spec = ball(2.0)
    lad = dm.flat_ladder(spec, [1e-1, 1e-2, 1e-3, 1e-4])
    d = [dm.dist_to_boundary(spec, p) for p in lad]
    assert d == pytest.approx([1e-1, 1e-2, 1e-3, 1e-4], rel=1e-9)

    e1 = example1(0.5)
    lad = dm.flat_ladder(e1, [1e-1, 1e-2, 1e-3])
    assert np.all(membership(e1, lad))
    # walking in from the corner circle: distance to the boundary is ~ d
    d0 = dm.dist_to_boundary(e1, lad[0])
    assert 0.03 < d0 <= 0.11


def test_invalid_specs_rejected():
    with pytest.raises(ValueError):
        dm.DomainSpec(kind="cube")
    with pytest.raises(ValueError):
        dm.DomainSpec(kind="ball", radius=-1.0)
    with pytest.raises(ValueError):
        dm.DomainSpec(kind="omega1", alpha=0.0)
