import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import drfrontier as drf
from drfrontier.errors import DimensionMismatchError, ZeroVarianceError

from .oracles import (
    circle_scan,
    grid_max_half_quad,
    random_universe,
    simplex_grid,
)


def _d_eta_elementwise(eta):
    n = len(eta)
    root = np.sqrt(eta)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            D[i, j] = 0.5 * (root[i] - root[j]) ** 2
    return D


def test_build_d_eta_three_asset(ex3):
    D = drf.build_d_eta(ex3)
    np.testing.assert_allclose(D, _d_eta_elementwise(ex3.variances), atol=1e-14)
    # only two distinct volatilities, so one positive distance
    assert D[0, 1] == pytest.approx((17.0 - np.sqrt(253.0)) / 9.0, rel=1e-12)
    assert D[1, 2] == pytest.approx(0.0, abs=1e-15)


def test_build_d_eta_zero_for_equal_variances(identity3):
    np.testing.assert_allclose(drf.build_d_eta(identity3), 0.0, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(1e-4, 1e2), min_size=2, max_size=10),
)
def test_d_eta_is_always_a_distance_matrix(variances):
    eta = np.asarray(variances)
    u = drf.validate_universe(np.diag(eta))
    D = drf.build_d_eta(u)
    np.testing.assert_allclose(D, _d_eta_elementwise(eta), rtol=1e-12, atol=1e-14)
    assert drf.assert_edm(D).is_edm


def test_diversification_ratio_three_asset(ex3):
    w = np.full(3, 1.0 / 3.0)
    expected = (np.sqrt(11.0) + 2.0 * np.sqrt(23.0)) / 9.0
    assert drf.diversification_ratio(ex3, w) == pytest.approx(expected, rel=1e-12)


def test_diversification_ratio_single_asset_is_one(ex3):
    for i in range(3):
        w = np.zeros(3)
        w[i] = 1.0
        assert drf.diversification_ratio(ex3, w) == pytest.approx(1.0, rel=1e-12)


def test_diversification_ratio_zero_variance(degenerate3):
    with pytest.raises(ZeroVarianceError):
        drf.diversification_ratio(degenerate3, np.array([1.0, 0.0, 0.0]))


def test_mdp_global_identity(identity3):
    p = drf.mdp_global(identity3)
    np.testing.assert_allclose(p.weights, np.full(3, 1.0 / 3.0), atol=1e-12)
    assert drf.diversification_ratio(identity3, p.weights) == pytest.approx(
        np.sqrt(3.0), rel=1e-12
    )


def test_mdp_global_diagonal():
    # for any diagonal covariance the max ratio is sqrt(n)
    u = drf.validate_universe(np.diag([1.0, 4.0, 9.0]))
    p = drf.mdp_global(u)
    np.testing.assert_allclose(p.weights, [6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0], atol=1e-12)
    assert drf.diversification_ratio(u, p.weights) == pytest.approx(
        np.sqrt(3.0), rel=1e-12
    )


def test_mdp_global_three_asset(ex3):
    p = drf.mdp_global(ex3)
    root = np.sqrt(ex3.variances)
    # direction check against a plain linear solve
    x = np.linalg.solve(ex3.cov, root)
    np.testing.assert_allclose(p.weights, x / x.sum(), atol=1e-10)
    # ratio value from the quadratic form
    ratio = drf.diversification_ratio(ex3, p.weights)
    assert ratio**2 == pytest.approx(float(root @ x), rel=1e-10)


def test_mdp_global_beats_sampling(ex3):
    p = drf.mdp_global(ex3)
    best = drf.diversification_ratio(ex3, p.weights)
    rng = np.random.default_rng(113)
    for _ in range(5_000):
        v = rng.normal(0.0, 1.0, 3)
        w = np.full(3, 1.0 / 3.0) + (v - v.mean())
        assert drf.diversification_ratio(ex3, w) <= best + 1e-12


def test_mdp_global_requires_positive_variances(degenerate3):
    with pytest.raises(ZeroVarianceError):
        drf.mdp_global(degenerate3)


def test_mdp_at_sigma_snaps_to_mvp(ex3):
    sol = drf.mdp_at_sigma(ex3, 1.0)
    np.testing.assert_allclose(sol.weights, np.full(3, 1.0 / 3.0), atol=1e-12)


def test_mdp_at_sigma_degenerate(identity3):
    sol = drf.mdp_at_sigma(identity3, 1.0)
    assert sol.degenerate


def test_mdp_at_sigma_matches_circle_scan(ex3):
    root = np.sqrt(ex3.variances)
    for sigma in (1.1, 1.5, 2.0):
        sol = drf.mdp_at_sigma(ex3, sigma)
        val = float(root @ sol.weights)
        _, ref = circle_scan(np.array(ex3.cov), lambda w: float(root @ w), sigma)
        assert val == pytest.approx(ref, abs=1e-7)
        assert val >= ref - 1e-7


def test_mdp_at_global_risk_recovers_global(ex3):
    p = drf.mdp_global(ex3)
    sol = drf.mdp_at_sigma(ex3, p.sigma)
    np.testing.assert_allclose(sol.weights, p.weights, atol=1e-9)


def test_d_max_bounds_zero_matrix():
    b = drf.d_max_bounds(np.zeros((3, 3)), starts=4)
    assert b.lower == 0.0
    assert b.upper == 0.0
    assert b.argmax_weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert b.converged


def test_d_max_bounds_equilateral():
    # all pairwise distances equal: the maximum is interior, at the uniform
    # weights, strictly above every pair midpoint
    d = 2.0
    A = d * (np.ones((3, 3)) - np.eye(3))
    b = drf.d_max_bounds(A, starts=8)
    assert b.lower == pytest.approx(d / 3.0, rel=1e-9)
    assert b.lower > d / 4.0
    np.testing.assert_allclose(b.argmax_weights, np.full(3, 1.0 / 3.0), atol=1e-6)
    W = simplex_grid(3, 999)
    assert grid_max_half_quad(A, W) == pytest.approx(d / 3.0, rel=1e-9)


def test_d_max_bounds_volatility_distance_closed_form():
    # for D_eta the optimum is the half-half mix of the extreme volatilities:
    # d_max = (r_max - r_min)^2 / 8 and the upper bound is exactly twice it
    rng = np.random.default_rng(127)
    for n in (2, 3, 5, 8):
        eta = rng.uniform(0.01, 2.0, n)
        u = drf.validate_universe(np.diag(eta))
        D = drf.build_d_eta(u)
        b = drf.d_max_bounds(D, starts=16)
        root = np.sqrt(eta)
        span = float(root.max() - root.min())
        assert b.lower == pytest.approx(span**2 / 8.0, rel=1e-9)
        assert b.upper == pytest.approx(2.0 * b.lower, rel=1e-9)
        assert b.converged


def test_d_max_bounds_match_simplex_grid():
    rng = np.random.default_rng(131)
    for n, m in ((2, 400), (3, 200), (4, 60), (5, 36), (6, 24)):
        eta = rng.uniform(0.01, 3.0, n)
        D = drf.build_d_eta(drf.validate_universe(np.diag(eta)))
        b = drf.d_max_bounds(D, starts=16)
        ref = grid_max_half_quad(D, simplex_grid(n, m))
        # even m puts the optimal pair midpoint on the grid
        assert b.lower == pytest.approx(ref, rel=1e-9)


def test_d_max_bounds_planar_point_cloud():
    # a generic embedded distance matrix, optimum not necessarily two-point
    rng = np.random.default_rng(137)
    pts = rng.normal(0.0, 1.0, (4, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    D = np.einsum("ijk,ijk->ij", diff, diff)
    b = drf.d_max_bounds(D, starts=16)
    ref = grid_max_half_quad(D, simplex_grid(4, 80))
    assert b.lower >= ref - 1e-9
    assert b.lower <= b.upper + 1e-12
    assert 0.5 * float(
        b.argmax_weights @ D @ b.argmax_weights
    ) == pytest.approx(b.lower, abs=1e-12)


def test_d_max_bounds_monotone_in_starts():
    rng = np.random.default_rng(139)
    eta = rng.uniform(0.01, 2.0, 6)
    D = drf.build_d_eta(drf.validate_universe(np.diag(eta)))
    few = drf.d_max_bounds(D, starts=2, seed=5)
    many = drf.d_max_bounds(D, starts=12, seed=5)
    assert many.lower >= few.lower - 1e-15
    assert many.starts_used > few.starts_used


def test_d_max_bounds_rejects_non_square():
    with pytest.raises(DimensionMismatchError):
        drf.d_max_bounds(np.ones((2, 3)))


def test_analyze_mdp_bundle(ex3):
    a = drf.analyze_mdp(ex3, starts=8, seed=1)
    assert a.ratio == pytest.approx(
        drf.diversification_ratio(ex3, a.portfolio.weights), rel=1e-12
    )
    assert a.d_max_lower <= a.d_max_upper + 1e-12
    assert a.d_max_lower == pytest.approx((17.0 - np.sqrt(253.0)) / 36.0, rel=1e-9)
    assert a.converged
    np.testing.assert_allclose(a.d_eta, drf.build_d_eta(ex3), atol=0.0)


def test_sandwich_holds_three_asset(ex3):
    rep = drf.sandwich_check(ex3, sigma=1.2, samples=20_000, seed=3)
    assert not rep.empty
    assert rep.accepted >= 20_000
    assert rep.holds
    assert rep.gap >= -1e-12
    assert rep.gap <= 2.0 * rep.d_max_upper + 1e-12
    assert rep.max_avg_variance >= rep.max_avg_volatility_sq - 1e-12


def test_sandwich_gap_zero_for_equal_variances(identity3):
    rep = drf.sandwich_check(identity3, sigma=0.7, samples=20_000, seed=4)
    assert not rep.empty
    assert rep.gap == pytest.approx(0.0, abs=1e-12)
    assert rep.holds


def test_sandwich_empty_when_shell_unreachable(ex3):
    # long-only risk on this universe never drops below the uniform port
    rep = drf.sandwich_check(ex3, sigma=0.5, samples=1_000, seed=5, max_batches=3)
    assert rep.empty
    assert rep.accepted == 0
    assert rep.holds is None


def test_sandwich_deterministic(ex3):
    a = drf.sandwich_check(ex3, sigma=1.3, samples=20_000, seed=11)
    b = drf.sandwich_check(ex3, sigma=1.3, samples=20_000, seed=11)
    assert a.gap == b.gap
    assert a.accepted == b.accepted


def test_ratio_audit_on_random_universes():
    # the closed form must survive its internal sigma-sweep audit
    rng = np.random.default_rng(149)
    for _ in range(5):
        u = random_universe(rng, int(rng.integers(2, 12)))
        p = drf.mdp_global(u)
        assert drf.diversification_ratio(u, p.weights) > 1.0
