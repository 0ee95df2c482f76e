import math

import numpy as np
import pytest

from dbar2.fdiff import fd_hessian
from dbar2.geometry import profiles as pr


def test_phi_pinned_values():
    assert pr.phi(0.0, 0.5) == 0.0
    assert pr.phi(1.0, 2.0) == pytest.approx(math.exp(-1.0), rel=1e-15)
    assert pr.phi(0.25, 1.0) == pytest.approx(math.exp(-2.0), rel=1e-15)


def test_phi_monotone_continuous_at_zero():
    t = np.logspace(-300, 0, 200)
    v = pr.phi(t, 0.5)
    assert np.all(np.diff(v) >= 0)
    pos = v > 0
    assert np.all(np.diff(v[pos]) > 0)
    assert pr.phi(1e-300, 0.5) == 0.0  # underflows to the limit value


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.5])
def test_phi_derivatives_match_finite_differences(alpha):
    ts = np.array([3e-4, 1e-3, 6e-3, 0.04, 0.2, 0.9])
    for t in ts:
        h = t * 1e-6
        fd1 = (pr.phi(t + h, alpha) - pr.phi(t - h, alpha)) / (2 * h)
        assert pr.phi_d1(t, alpha) == pytest.approx(fd1, rel=1e-7)
        h2 = t * 1e-4
        fd2 = (pr.phi(t + h2, alpha) - 2 * pr.phi(t, alpha) + pr.phi(t - h2, alpha)) / h2**2
        assert pr.phi_d2(t, alpha) == pytest.approx(fd2, rel=1e-5, abs=1e-12)
        h3 = t * 2e-3
        fd3 = (pr.phi(t + 2 * h3, alpha) - 2 * pr.phi(t + h3, alpha)
               + 2 * pr.phi(t - h3, alpha) - pr.phi(t - 2 * h3, alpha)) / (2 * h3**3)
        assert pr.phi_d3(t, alpha) == pytest.approx(fd3, rel=5e-3, abs=1e-10)


def test_phi_derivative_thresholds():
    for alpha in (0.25, 0.5, 0.75):
        t2 = pr.phi_convex_threshold(alpha)
        assert abs(pr.phi_d2(t2, alpha)) < 1e-12
        assert pr.phi_d2(0.99 * t2, alpha) > 0 > pr.phi_d2(1.01 * t2, alpha)
        t3 = pr.phi_lemma_threshold(alpha)
        assert t3 < t2
        assert pr.phi_d3(0.99 * t3, alpha) > 0 > pr.phi_d3(1.01 * t3, alpha)


def test_psi_bump_pinned_values():
    eps = 0.1
    assert pr.psi_bump(eps**2 / 2, eps) == 0.0
    assert pr.psi_bump(eps**2, eps) == 0.0
    expected = math.exp(-1.0) * ((eps**2 + 1.0) ** 2 - eps**4)
    assert pr.psi_bump(eps**2 + 1.0, eps) == pytest.approx(expected, rel=1e-15)


def test_psi_bump_increasing_convex_beyond_flat_part():
    eps = 0.1
    t = np.linspace(eps**2 + 2e-3, 9.0, 500)  # exp(-1/s) representable from s ~ 1.4e-3
    assert np.all(pr.psi_bump_d1(t, eps) > 0)
    assert np.all(pr.psi_bump_d2(t, eps) > 0)
    for tt in [0.03, 0.2, 1.7]:
        h = 1e-6
        fd1 = (pr.psi_bump(tt + h, eps) - pr.psi_bump(tt - h, eps)) / (2 * h)
        fd2 = (pr.psi_bump(tt + h, eps) - 2 * pr.psi_bump(tt, eps)
               + pr.psi_bump(tt - h, eps)) / h**2
        assert pr.psi_bump_d1(tt, eps) == pytest.approx(fd1, rel=1e-6)
        assert pr.psi_bump_d2(tt, eps) == pytest.approx(fd2, rel=1e-3)


def test_lemma2_composition_with_norm_squared_is_convex():
    # psi(|x|^2) on R^4: sampled finite-difference Hessians stay PSD
    eps = 0.1
    rng = np.random.default_rng(42)
    x = rng.uniform(-1, 1, size=(10_000, 4))
    x *= (3.0 * rng.uniform(0, 1, size=(10_000, 1)) ** 0.25) / np.linalg.norm(x, axis=1, keepdims=True)

    def comp(P):
        return pr.psi_bump(np.sum(P * P, axis=1), eps)

    H = fd_hessian(comp, x, h=1e-4)
    eigs = np.linalg.eigvalsh(H)
    assert eigs[:, 0].min() >= -1e-8


# ---------------------------------------------------------------------------
# convexity lemma for the flatness profile (restricted to its hypothesis set)
# ---------------------------------------------------------------------------

def lemma_sample_region(alpha):
    return min(0.25, pr.phi_lemma_threshold(alpha))


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_lemma3_inequalities(alpha):
    hi = lemma_sample_region(alpha)
    rng = np.random.default_rng(7)
    pq = rng.uniform(0.0, hi, size=(100_000, 2))
    p = pq.min(axis=1)
    q = pq.max(axis=1)
    # the hypotheses hold on the sampled region
    mids = 0.5 * (p + q)
    assert np.all(pr.phi_d2(mids, alpha) >= 0)
    assert np.all(pr.phi_d3(mids, alpha) >= 0)

    # inequality A: 0 <= p <= q
    slack_a = (pr.phi(q, alpha) - pr.phi(p, alpha)
               - pr.phi_d1(p, alpha) * (q - p) - pr.phi(q - p, alpha))
    assert slack_a.min() >= -1e-12

    # inequality B: 0 <= q < p  (swap roles)
    pb, qb = q, p
    bound = pr.phi_d2(0.5 * (pb + qb), alpha) * (0.5 * (pb - qb)) ** 2
    slack_b = (pr.phi(qb, alpha) - pr.phi(pb, alpha)
               - pr.phi_d1(pb, alpha) * (qb - pb) - bound)
    assert slack_b.min() >= -1e-12


def test_lemma3_fails_for_concave_probe():
    # sanity inversion: sqrt(t) is concave, inequality A must break
    rng = np.random.default_rng(3)
    pq = rng.uniform(0.0, 0.25, size=(1000, 2))
    p, q = pq.min(axis=1), pq.max(axis=1)
    f = np.sqrt
    fp = lambda t: 0.5 / np.sqrt(np.maximum(t, 1e-300))
    slack = f(q) - f(p) - fp(p) * (q - p) - f(q - p)
    assert slack.min() < -1e-6


# ---------------------------------------------------------------------------
# chi profile for the rounded corner
# ---------------------------------------------------------------------------

def test_chi_flat_branch():
    spec = pr.build_chi(0.5)
    assert pr.chi(0.5, spec) == 1.0
    assert pr.chi(0.0, spec) == 1.0
    assert pr.chi_d1(0.5, spec) == 0.0


def test_chi_exp_branch_pinned_value():
    # an instance whose exponential zone covers t = 1 + 1e-4
    spec = pr.build_chi(0.5, a=0.1, eps=5e-4, eta=0.01)
    delta = 1e-4
    assert pr.chi(1.0 + delta, spec) == pytest.approx(1.0 + math.exp(-10.0), rel=1e-12)


def test_chi_far_branch_with_explicit_eta():
    spec = pr.build_chi(0.5, a=0.1, eps=5e-4, eta=0.01)
    assert pr.chi(1.0 + 0.1 + 0.1, spec) == pytest.approx(1.0 + 0.1 + 0.09, rel=1e-14)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.5])
def test_chi_default_is_c2_and_convex(alpha):
    spec = pr.build_chi(alpha)
    assert spec.convex
    assert 0.0 < spec.eta < spec.a
    # junction matching is built in: compare branch limits analytically
    L, R = spec.left, spec.right
    eps = spec.eps
    assert pr.chi_d1(L, spec) == pytest.approx(float(pr.phi_d1(eps, alpha)), rel=1e-12)
    assert pr.chi_d2(L, spec) == pytest.approx(float(pr.phi_d2(eps, alpha)), rel=1e-9)
    assert pr.chi_d1(np.nextafter(R, 0.0), spec) == pytest.approx(1.0, rel=1e-9)
    assert abs(pr.chi_d2(np.nextafter(R, 0.0), spec)) < 1e-6
    assert pr.chi(np.nextafter(R, 0.0), spec) == pytest.approx(R - spec.eta, rel=1e-12)
    # chi'' >= 0 and chi' in [0, 1] throughout
    t = np.concatenate([
        np.linspace(0, 1, 101),
        1.0 + spec.eps * np.linspace(1e-6, 1, 201),
        np.linspace(spec.left, spec.right, 501),
        np.linspace(spec.right, spec.right + 2, 51),
    ])
    assert pr.chi_d2(t, spec).min() >= -1e-10
    d1 = pr.chi_d1(t, spec)
    assert d1.min() >= 0.0 and d1.max() <= 1.0 + 1e-12


def test_chi_finite_difference_continuity_spot_checks():
    spec = pr.build_chi(0.5)
    # value continuity across every junction, at float resolution
    for tj in (1.0, spec.left, spec.right):
        below = pr.chi(np.nextafter(tj, 0.0), spec)
        above = pr.chi(np.nextafter(tj, 2.0), spec)
        assert above == pytest.approx(below, rel=1e-12)
    # centered differences reproduce chi' inside each branch
    probes = [0.5, 1.0 + 0.5 * spec.eps, 0.5 * (spec.left + spec.right), spec.right + 0.3]
    for t0 in probes:
        h = max(abs(t0 - 1.0) * 1e-4, 1e-8) if t0 < spec.left else 1e-7
        fd = (pr.chi(t0 + h, spec) - pr.chi(t0 - h, spec)) / (2 * h)
        assert fd == pytest.approx(pr.chi_d1(t0, spec), rel=1e-4, abs=1e-9)


def test_chi_explicit_quintic_bridge_value_continuity():
    spec = pr.build_chi(0.5, a=0.1, eps=5e-4, eta=0.01)
    assert not spec.convex
    L, R = spec.left, spec.right
    assert pr.chi(L - 1e-12, spec) == pytest.approx(pr.chi(L + 1e-12, spec), abs=1e-9)
    assert pr.chi(R - 1e-12, spec) == pytest.approx(pr.chi(R + 1e-12, spec), abs=1e-9)
    assert pr.chi_d1(L - 1e-10, spec) == pytest.approx(pr.chi_d1(L + 1e-10, spec), rel=1e-5)
    assert pr.chi_d1(R - 1e-10, spec) == pytest.approx(pr.chi_d1(R + 1e-10, spec), abs=1e-5)


def test_build_chi_rejects_bad_parameters():
    with pytest.raises(ValueError):
        pr.build_chi(0.5, a=0.01, eps=0.02)  # a <= eps
    with pytest.raises(ValueError):
        pr.build_chi(-1.0)
