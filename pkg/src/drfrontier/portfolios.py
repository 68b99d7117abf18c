"""Closed-form special portfolios of a nonsingular universe.

All V^-1 applications go through a cached Cholesky factorization; no inverse
is ever formed explicitly.  Throughout, for a universe with covariance V,
variance vector eta and expected returns rbar:

    a = 1' V^-1 1          (inverse of the minimum-variance variance)
    b = 1' V^-1 rbar
    rho^2 = eta' V^-1 eta - (1' V^-1 eta)^2 / a

rho measures how far eta is from being proportional to the ones vector in
the V^-1 metric; it controls the spread between the minimum-variance and
maximum-DR portfolios and the height of the DR frontier.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import embedding as _embedding
from .errors import (
    DegenerateReturnsError,
    DimensionMismatchError,
    DrFrontierError,
    MissingReturnsError,
    SingularCovarianceError,
    TangencyInfeasibleError,
)
from .model import AssetUniverse, Portfolio, portfolio_stats

# Relative residual below which a vector counts as proportional to ones.
PROPORTIONALITY_RTOL = 1e-12
# |eta' w_o| <= ZERO_BAND_RTOL * rho is reported as the knife-edge zero case.
ZERO_BAND_RTOL = 1e-12
# Agreement required between the two independent max-DR formulas.
MDRP_AGREEMENT_ATOL = 1e-8


def proportional_to_ones(vec: np.ndarray, rtol: float = PROPORTIONALITY_RTOL) -> bool:
    """True when vec is (numerically) a multiple of the ones vector."""
    v = np.asarray(vec, dtype=float)
    resid = v - v.mean()
    return float(np.abs(resid).max()) <= rtol * max(float(np.abs(v).max()), 1e-300)


class CovarianceSolver:
    """Cached Cholesky factorization of a universe covariance.

    Precomputes the handful of V^-1 images and scalars every closed form
    needs.  Build once per universe through :func:`solver_for`.
    """

    def __init__(self, universe: AssetUniverse):
        if not universe.nonsingular:
            raise SingularCovarianceError(
                "universe covariance is singular; closed forms need strict PD"
            )
        try:
            self._factor = cho_factor(np.array(universe.cov), lower=True)
        except LinAlgError as exc:
            raise SingularCovarianceError(f"Cholesky failed: {exc}") from exc
        self.universe = universe
        n = universe.n
        ones = np.ones(n)
        self.inv_ones = self.solve(ones)            # V^-1 1
        self.a = float(ones @ self.inv_ones)
        self.sigma2_mvp = 1.0 / self.a
        self.w_mvp = self.inv_ones * self.sigma2_mvp
        self.inv_eta = self.solve(universe.variances)   # V^-1 eta
        self.ones_inv_eta = float(ones @ self.inv_eta)  # 1' V^-1 eta
        self.eta_inv_eta = float(universe.variances @ self.inv_eta)
        if proportional_to_ones(universe.variances):
            self.rho = 0.0
        else:
            self.rho = float(
                np.sqrt(max(self.eta_inv_eta - self.ones_inv_eta**2 / self.a, 0.0))
            )

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve(self._factor, np.asarray(rhs, dtype=float))


_SOLVERS: dict = {}


def solver_for(universe: AssetUniverse) -> CovarianceSolver:
    """Per-universe solver cache, keyed by the covariance fingerprint."""
    key = universe.fingerprint
    solver = _SOLVERS.get(key)
    if solver is None:
        solver = CovarianceSolver(universe)
        _SOLVERS[key] = solver
    return solver


def min_variance_portfolio(universe: AssetUniverse) -> Portfolio:
    """Minimum-variance budget portfolio w = V^-1 1 / (1' V^-1 1)."""
    s = solver_for(universe)
    dr = 0.5 * (s.ones_inv_eta - 1.0) * s.sigma2_mvp
    expected_return = None
    if universe.expected_returns is not None:
        expected_return = float(universe.expected_returns @ s.w_mvp)
    return Portfolio(
        weights=s.w_mvp,
        variance=s.sigma2_mvp,
        dr=dr,
        expected_return=expected_return,
    )


def max_dr_portfolio(universe: AssetUniverse) -> Portfolio:
    """Maximum-DR budget portfolio, cross-checked through two routes.

    The covariance route is

        w = (1 - 1' V^-1 eta / 2) * w_mvp + 0.5 * V^-1 eta

    and the distance-matrix route normalizes D^-1 1.  Both must agree to
    MDRP_AGREEMENT_ATOL; the DR of the result is q_max = 1 / (2 * 1' D^-1 1).
    """
    s = solver_for(universe)
    w_v = (1.0 - 0.5 * s.ones_inv_eta) * s.w_mvp + 0.5 * s.inv_eta

    emb = _embedding.embed(universe)
    w_d = emb.mdrp_weights
    gap = float(np.abs(w_v - w_d).max())
    if gap > MDRP_AGREEMENT_ATOL * max(1.0, float(np.abs(w_v).max())):
        raise DrFrontierError(
            f"max-DR routes disagree by {gap:.3e}; universe is numerically unstable"
        )

    expected_return = None
    if universe.expected_returns is not None:
        expected_return = float(universe.expected_returns @ w_v)
    return Portfolio(
        weights=w_v,
        variance=float(w_v @ universe.cov @ w_v),
        dr=emb.q_max,
        expected_return=expected_return,
    )


def _require_returns(universe: AssetUniverse) -> np.ndarray:
    if universe.expected_returns is None:
        raise MissingReturnsError("universe has no expected returns")
    return universe.expected_returns


def self_financing_direction(universe: AssetUniverse) -> np.ndarray:
    """Unit-variance, zero-budget direction spanning the mean-variance frontier.

    w_o = V^-1 (rbar - (b/a) 1), normalized so that w_o' V w_o = 1.  Satisfies
    1' w_o = 0; every mean-variance efficient portfolio is
    w_mvp + sqrt(sigma^2 - sigma_mvp^2) * w_o.
    """
    rbar = _require_returns(universe)
    if proportional_to_ones(rbar):
        raise DegenerateReturnsError(
            "expected returns are proportional to ones; frontier direction undefined"
        )
    s = solver_for(universe)
    inv_r = s.solve(rbar)
    b = float(np.ones(universe.n) @ inv_r)
    x = inv_r - (b / s.a) * s.inv_ones
    norm_sq = float(rbar @ inv_r) - b * b / s.a
    if norm_sq <= 0.0:
        raise DegenerateReturnsError(
            "projected return direction has nonpositive V^-1 norm"
        )
    return x / np.sqrt(norm_sq)


def eta_wo(universe: AssetUniverse) -> float:
    """The slope coefficient eta' w_o of weighted-average variance along the frontier."""
    return float(universe.variances @ self_financing_direction(universe))


def eta_wo_sign(universe: AssetUniverse) -> str:
    """Tri-state sign of eta' w_o: 'positive', 'zero', or 'negative'.

    The zero band has half-width ZERO_BAND_RTOL * rho, so the knife-edge
    case is reported explicitly rather than resolved by rounding noise.
    """
    m = eta_wo(universe)
    rho = solver_for(universe).rho
    if abs(m) <= ZERO_BAND_RTOL * rho:
        return "zero"
    return "positive" if m > 0.0 else "negative"


def q_portfolio(universe: AssetUniverse, embedding=None) -> Portfolio:
    """The mean-variance efficient portfolio with the highest DR.

    w_Q = w_mvp + (eta' w_o / 2) * w_o.  When eta' w_o >= 0 this sits on the
    efficient branch with sigma_Q^2 = sigma_mvp^2 + (eta' w_o)^2 / 4; when
    eta' w_o < 0 the formula lands on the inefficient branch and the best
    efficient choice is the minimum-variance portfolio itself (the zero band
    collapses w_Q onto it).
    """
    s = solver_for(universe)
    w_o = self_financing_direction(universe)
    m = float(universe.variances @ w_o)
    if abs(m) <= ZERO_BAND_RTOL * s.rho:
        m = 0.0
    w_q = s.w_mvp + 0.5 * m * w_o
    return portfolio_stats(universe, w_q, embedding=embedding)


def tangent_portfolio(universe: AssetUniverse) -> Portfolio:
    """Tangency portfolio of the risk-free capital-market line.

    w_T = V^-1 (rbar - r0 1) / (b - r0 a); requires the minimum-variance
    portfolio return b / a to exceed the risk-free rate r0.
    """
    rbar = _require_returns(universe)
    if universe.risk_free_rate is None:
        raise MissingReturnsError("universe has no risk-free rate")
    r0 = universe.risk_free_rate
    s = solver_for(universe)
    inv_r = s.solve(rbar)
    b = float(np.ones(universe.n) @ inv_r)
    denom = b - r0 * s.a
    if denom <= 1e-12 * abs(b):
        raise TangencyInfeasibleError(
            f"b - r0 a = {denom:.3e}; risk-free rate must sit below the "
            "minimum-variance portfolio return"
        )
    w_t = (inv_r - r0 * s.inv_ones) / denom
    return portfolio_stats(universe, w_t)


@dataclass(frozen=True)
class SpecialPortfolios:
    """The named portfolios of a universe, plus the scalars tying them together.

    d = mdrp.weights - mvp.weights satisfies 1' d = 0, d' V w_mvp = 0 and
    d' V d = rho^2 / 4.  Fields needing expected returns (or a feasible
    risk-free rate) are None when the inputs are absent or degenerate.
    """

    mvp: Portfolio
    mdrp: Portfolio
    d: np.ndarray
    a: float
    rho: float
    b: Optional[float] = None
    w_o: Optional[np.ndarray] = None
    eta_wo: Optional[float] = None
    eta_wo_sign: Optional[str] = None
    q_pf: Optional[Portfolio] = None
    tangent: Optional[Portfolio] = None


def special_portfolios(universe: AssetUniverse, embedding=None) -> SpecialPortfolios:
    """Assemble every closed-form portfolio the inputs support."""
    s = solver_for(universe)
    mvp = min_variance_portfolio(universe)
    mdrp = max_dr_portfolio(universe)
    if embedding is not None:
        mvp = portfolio_stats(universe, mvp.weights, embedding=embedding)
        mdrp = portfolio_stats(universe, mdrp.weights, embedding=embedding)

    b = None
    w_o = None
    m = None
    sign = None
    q_pf = None
    tangent = None
    if universe.expected_returns is not None:
        b = float(np.ones(universe.n) @ s.solve(universe.expected_returns))
        try:
            w_o = self_financing_direction(universe)
        except DegenerateReturnsError:
            w_o = None
        if w_o is not None:
            m = float(universe.variances @ w_o)
            sign = eta_wo_sign(universe)
            q_pf = q_portfolio(universe, embedding=embedding)
            if universe.risk_free_rate is not None:
                try:
                    tangent = tangent_portfolio(universe)
                except TangencyInfeasibleError:
                    tangent = None
                if tangent is not None and embedding is not None:
                    tangent = portfolio_stats(
                        universe, tangent.weights, embedding=embedding
                    )

    return SpecialPortfolios(
        mvp=mvp,
        mdrp=mdrp,
        d=mdrp.weights - mvp.weights,
        a=s.a,
        rho=s.rho,
        b=b,
        w_o=w_o,
        eta_wo=m,
        eta_wo_sign=sign,
        q_pf=q_pf,
        tangent=tangent,
    )
