import numpy as np
import pytest

from dbar2.geometry import ball, bidisc, boundary_charts, disc_chart, example1, omega1, rho


def cross4(u, v, w):
    """Generalized cross product in R^4 (oracle for chart densities/normals)."""
    n = np.empty(u.shape[:-1] + (4,))
    idx = [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)]
    sign = [1.0, -1.0, 1.0, -1.0]
    for i, (a, b, c) in enumerate(idx):
        det = (u[..., a] * (v[..., b] * w[..., c] - v[..., c] * w[..., b])
               - u[..., b] * (v[..., a] * w[..., c] - v[..., c] * w[..., a])
               + u[..., c] * (v[..., a] * w[..., b] - v[..., b] * w[..., a]))
        n[..., i] = sign[i] * det
    return n


def fd_chart_frame(chart, S, h=1e-6):
    cols = []
    for k in range(chart.dim):
        e = np.zeros(chart.dim)
        e[k] = h
        cols.append((chart.embed(S + e) - chart.embed(S - e)) / (2 * h))
    return cols


def interior_params(chart, n, seed=0):
    rng = np.random.default_rng(seed)
    lo, hi = chart.rect[:, 0], chart.rect[:, 1]
    span = hi - lo
    return lo + span * rng.uniform(0.05, 0.95, size=(n, chart.dim))


def test_chart_inventory():
    assert [c.label for c in boundary_charts(bidisc())] == ["Face1", "Face2"]
    assert [c.label for c in boundary_charts(example1(0.5))] == ["P1", "P2", "P3"]
    assert [c.label for c in boundary_charts(ball(2.0))] == ["Sphere"]
    assert [c.label for c in boundary_charts(omega1(0.5))] == ["Sphere"]


@pytest.mark.parametrize("spec", [ball(2.0), example1(0.5), omega1(0.5)])
def test_chart_points_lie_on_boundary(spec):
    for chart in boundary_charts(spec):
        S = interior_params(chart, 200, seed=3)
        P = chart.embed(S)
        assert np.max(np.abs(rho(spec, P))) < 1e-10


@pytest.mark.parametrize("spec", [ball(2.0), bidisc(), example1(0.5), omega1(0.5)])
def test_chart_jacobian_positive_and_matches_cross_product(spec):
    for chart in boundary_charts(spec):
        S = interior_params(chart, 64, seed=7)
        jac = chart.jacobian(S)
        assert np.all(jac > 0)
        u, v, w = fd_chart_frame(chart, S)
        dens = np.linalg.norm(cross4(u, v, w), axis=-1)
        assert np.allclose(jac, dens, rtol=5e-5)


@pytest.mark.parametrize("spec", [ball(2.0), example1(0.5), omega1(0.5)])
def test_chart_normals_outward_unit(spec):
    for chart in boundary_charts(spec):
        S = interior_params(chart, 64, seed=11)
        nrm = chart.normal(S)
        assert np.allclose(np.linalg.norm(nrm, axis=1), 1.0, atol=1e-12)
        P = chart.embed(S)
        step = 1e-6
        outside = rho(spec, P + step * nrm)
        inside = rho(spec, P - step * nrm)
        assert np.all(outside > 0) and np.all(inside < 0)
        # normal is orthogonal to the tangent frame
        for column in fd_chart_frame(chart, S):
            tangent_scale = np.linalg.norm(column, axis=1) + 1e-30
            assert np.max(np.abs(np.sum(column * nrm, axis=1)) / tangent_scale) < 1e-4


def test_bidisc_face_normals():
    f1, f2 = boundary_charts(bidisc())
    S = interior_params(f1, 32, seed=1)
    n1 = f1.normal(S)
    assert np.allclose(n1[:, 2:], 0.0)
    P = f1.embed(S)
    assert np.allclose(np.abs(P[:, 0] + 1j * P[:, 1]), 1.0, atol=1e-14)
    n2 = f2.normal(S)
    assert np.allclose(n2[:, :2], 0.0)


def test_disc_chart_geometry():
    ch = disc_chart(center=0.3 + 0.1j, radius=0.7, plane=2, other=(0.5, -0.5))
    S = interior_params(ch, 50, seed=2)
    P = ch.embed(S)
    assert np.allclose(P[:, 0], 0.5) and np.allclose(P[:, 1], -0.5)
    assert np.all(np.abs(P[:, 2] + 1j * P[:, 3] - (0.3 + 0.1j)) <= 0.7)
    assert np.allclose(ch.jacobian(S), S[:, 0])


def test_example1_p2_breakpoint_matches_profile_junction():
    spec = example1(0.5)
    p2 = boundary_charts(spec)[1]
    from dbar2.geometry.domains import _model
    assert p2.breakpoints[0] == (_model(spec).chi.eps,)
