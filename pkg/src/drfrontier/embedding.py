"""Distance-matrix geometry of a covariance universe.

The matrix D with entries

    D[i, j] = 0.5 * (eta[i] + eta[j]) - V[i, j]

is a Euclidean squared-distance matrix whenever V is PSD, and the
diversification return becomes the quadratic form q(w) = 0.5 * w' D w on the
budget hyperplane.  Centering D at the weight vector s proportional to
D^-1 1 (the maximum-DR portfolio) yields a PSD Gram matrix

    B = -0.5 * Js' D Js,      Js = I - s 1'

whose factorization B = X' X places every asset on a sphere of radius
sqrt(q_max) around the origin; the origin itself is the image of s.  The
distance of a portfolio's image from the origin, c(w) = ||X w||, satisfies

    c(w)^2 + q(w) = q_max

for every budget portfolio, so DR maximization is a nearest-point problem in
this geometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import (
    AsymmetricError,
    BudgetViolationError,
    DimensionMismatchError,
    NonPositiveQmaxError,
    NonZeroDiagonalError,
    NotSPDError,
    SingularDistanceError,
)
from .model import AssetUniverse, check_budget

# Eigenvalues of B below EIG_RTOL * lambda_1 are treated as zero.
EIG_RTOL = 1e-10
# Off-diagonal D entries in [-DIST_CLAMP_TOL, 0) are rounding debris: clamp.
DIST_CLAMP_TOL = 1e-12
# max-norm residual allowed for D @ (D^+ 1) = 1 on the generalized-inverse path
GINV_RESIDUAL_ATOL = 1e-8


@dataclass(frozen=True)
class EdmCertificate:
    """Outcome of the Euclidean-distance-matrix test.

    min_eigenvalue is the smallest eigenvalue of the doubly centered Gram
    form -0.5 * J D J; nonnegative (within tolerance) certifies an EDM.
    """

    is_edm: bool
    min_eigenvalue: float
    reason: Optional[str] = None


@dataclass(frozen=True)
class EdmEmbedding:
    """Spherical embedding of an asset universe.

    Attributes:
        dist: the squared-distance matrix D.
        mdrp_weights: the centering weights s (the maximum-DR portfolio).
        gram: B = X' X, PSD of rank <= n - 1.
        eigvals: positive eigenvalues of B, descending.
        coords: k x n array X; column i is the image of asset i.
        q_max: top of the DR frontier, 1 / (2 * 1' D^-1 1).
        universe_fingerprint: hash of the source universe.
    """

    dist: np.ndarray
    mdrp_weights: np.ndarray
    gram: np.ndarray
    eigvals: np.ndarray
    coords: np.ndarray
    q_max: float
    universe_fingerprint: str

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


def build_distance_matrix(universe: AssetUniverse) -> np.ndarray:
    """Squared-distance matrix D[i, j] = 0.5 * (eta[i] + eta[j]) - V[i, j]."""
    eta = universe.variances
    D = 0.5 * (eta[:, None] + eta[None, :]) - universe.cov
    np.fill_diagonal(D, 0.0)
    tol = DIST_CLAMP_TOL * max(1.0, float(np.abs(D).max()))
    low = float(D.min())
    if low < -tol:
        raise NotSPDError(
            f"distance entry {low:.3e} below clamp tolerance; covariance and "
            "variances are inconsistent"
        )
    np.clip(D, 0.0, None, out=D)
    return D


def assert_edm(dist, atol_scale: float = 1e-10) -> EdmCertificate:
    """Certify that a matrix is a Euclidean squared-distance matrix.

    Preconditions (zero diagonal, symmetry) raise; a negative entry or a
    negative eigenvalue of the centered Gram form yields a failing
    certificate instead.
    """
    D = np.asarray(dist, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DimensionMismatchError(f"distance matrix must be square, got {D.shape}")
    scale = max(float(np.abs(D).max()), np.finfo(float).tiny)
    if float(np.abs(np.diag(D)).max()) > atol_scale * scale:
        raise NonZeroDiagonalError("distance matrix has a nonzero diagonal")
    if float(np.abs(D - D.T).max()) > atol_scale * scale:
        raise AsymmetricError("distance matrix is asymmetric")

    if float(D.min()) < -atol_scale * scale:
        return EdmCertificate(False, float("nan"), "negative entries")

    n = D.shape[0]
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    G = -0.5 * (J @ D @ J)
    G = 0.5 * (G + G.T)
    evals = np.linalg.eigvalsh(G)
    lam_min = float(evals[0])
    lam_top = max(float(evals[-1]), 0.0)
    ok = lam_min >= -EIG_RTOL * max(lam_top, scale)
    return EdmCertificate(ok, lam_min, None if ok else "centered form not PSD")


def _solve_ones(D: np.ndarray, nonsingular_hint: bool) -> np.ndarray:
    """Solve D y = 1, falling back to the pseudoinverse for singular D."""
    n = D.shape[0]
    ones = np.ones(n)
    y = None
    if nonsingular_hint:
        try:
            y = scipy.linalg.solve(D, ones, assume_a="sym")
        except (scipy.linalg.LinAlgError, ValueError):
            y = None
        if y is not None and not np.all(np.isfinite(y)):
            y = None
    if y is None:
        # rank-revealing fallback; cutoff relative to the top singular value
        y = np.linalg.pinv(D, rcond=1e-10) @ ones
    resid = float(np.abs(D @ y - ones).max())
    if not np.isfinite(resid) or resid > GINV_RESIDUAL_ATOL:
        raise SingularDistanceError(
            f"D y = 1 unsolved, residual {resid:.3e}"
        )
    return y


def embed(universe: AssetUniverse) -> EdmEmbedding:
    """Build the spherical embedding of a universe.

    Solves D y = 1 (directly when the covariance is nonsingular, through a
    rank-revealing pseudoinverse otherwise), normalizes s = y / (1' y),
    and factorizes the recentred Gram matrix.  Eigenvalues below
    EIG_RTOL times the leading one are dropped.
    """
    D = build_distance_matrix(universe)
    n = universe.n
    ones = np.ones(n)

    y = _solve_ones(D, universe.nonsingular)
    total = float(ones @ y)
    if abs(total) < np.finfo(float).tiny:
        raise SingularDistanceError("1' D^-1 1 is numerically zero")
    q_max = 1.0 / (2.0 * total)
    if q_max <= 0.0:
        raise NonPositiveQmaxError(
            f"q_max = {q_max:.3e} <= 0; universe admits no positive DR peak"
        )
    s = y / total

    Js = np.eye(n) - np.outer(s, ones)
    B = -0.5 * (Js.T @ D @ Js)
    B = 0.5 * (B + B.T)

    evals, evecs = np.linalg.eigh(B)
    lam_top = max(float(evals[-1]), 0.0)
    keep = evals > EIG_RTOL * lam_top
    lam = evals[keep][::-1]
    P = evecs[:, keep][:, ::-1]
    X = np.sqrt(lam)[:, None] * P.T

    return EdmEmbedding(
        dist=D,
        mdrp_weights=s,
        gram=B,
        eigvals=lam,
        coords=X,
        q_max=q_max,
        universe_fingerprint=universe.fingerprint,
    )


def centrality(embedding: EdmEmbedding, weights) -> float:
    """Distance c(w) = ||X w|| of a budget portfolio from the sphere centre."""
    w = check_budget(weights)
    if w.shape[0] != embedding.n:
        raise DimensionMismatchError(
            f"weights length {w.shape[0]} vs embedding of {embedding.n} assets"
        )
    return float(np.sqrt(max(w @ embedding.gram @ w, 0.0)))


def norm_dr_bound(embedding: EdmEmbedding, norm_matrix, tau: float) -> float:
    """Lower bound on DR from a norm budget ||w||_A <= tau.

    With beta = sqrt(lambda_min(A) / lambda_max(B)) the A-ball of radius tau
    maps into the centrality ball of radius tau / beta, hence

        q(w) >= q_max - (tau / beta)^2.

    A must be symmetric positive definite.  The bound is valid but can be
    weak when A is ill conditioned relative to B.
    """
    A = np.asarray(norm_matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSPDError(f"norm matrix must be square, got {A.shape}")
    if A.shape[0] != embedding.n:
        raise DimensionMismatchError(
            f"norm matrix of size {A.shape[0]} vs embedding of {embedding.n} assets"
        )
    scale = max(float(np.abs(A).max()), np.finfo(float).tiny)
    if float(np.abs(A - A.T).max()) > 1e-10 * scale:
        raise NotSPDError("norm matrix is asymmetric")
    evals = np.linalg.eigvalsh(A)
    lam_min = float(evals[0])
    if lam_min <= 1e-12 * max(float(evals[-1]), 0.0) or lam_min <= 0.0:
        raise NotSPDError(
            f"norm matrix smallest eigenvalue {lam_min:.3e} is not strictly positive"
        )
    if tau < 0.0:
        raise BudgetViolationError("norm budget tau must be nonnegative")
    lam_b = float(embedding.eigvals[0]) if embedding.eigvals.size else 0.0
    if lam_b <= 0.0:
        return embedding.q_max
    beta_sq = lam_min / lam_b
    return embedding.q_max - tau * tau / beta_sq


def coords_table(embedding: EdmEmbedding, names) -> list:
    """Rows (name, x_1, ..., x_k) for export of the asset coordinates."""
    names = tuple(names)
    if len(names) != embedding.n:
        raise DimensionMismatchError(
            f"{len(names)} names for {embedding.n} embedded assets"
        )
    rows = []
    for i, name in enumerate(names):
        rows.append((name, *[float(v) for v in embedding.coords[:, i]]))
    return rows
