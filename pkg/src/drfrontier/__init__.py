"""Diversification-return portfolio analytics.

A covariance universe induces a squared-distance matrix between assets whose
geometry makes the diversification return of a budget portfolio a distance
to a fixed center.  This package validates universes, builds the embedding,
computes the closed-form special portfolios and risk frontiers, brackets the
gap to diversification-ratio maximization, and ingests return panels.
"""

from .embedding import (
    EdmCertificate,
    EdmEmbedding,
    assert_edm,
    build_distance_matrix,
    centrality,
    coords_table,
    embed,
    norm_dr_bound,
)
from .errors import DrFrontierError
from .frontiers import (
    EfShape,
    FrontierCurve,
    FrontierKind,
    FrontierParams,
    cml_curve,
    default_sigma_grid,
    dr_gap_at,
    efficient_dr_portfolio,
    frontier_params,
    inflection_report,
    locate_inflection,
    max_linear_over_ellipsoid,
    q_cml_at,
    q_dr_at,
    q_dr_riskfree_at,
    q_ef_at,
    riskfree_dr_curve,
    sweep,
)
from .ingest import ReturnPanel, annualization_step, annualize, load_panel
from .mdp import (
    DmaxBounds,
    MdpAnalysis,
    SandwichReport,
    analyze_mdp,
    build_d_eta,
    d_max_bounds,
    diversification_ratio,
    mdp_at_sigma,
    mdp_global,
    sandwich_check,
)
from .model import (
    AssetUniverse,
    Portfolio,
    check_budget,
    diversification_return,
    portfolio_stats,
    validate_universe,
)
from .portfolios import (
    SpecialPortfolios,
    eta_wo,
    eta_wo_sign,
    max_dr_portfolio,
    min_variance_portfolio,
    q_portfolio,
    self_financing_direction,
    special_portfolios,
    tangent_portfolio,
)

__version__ = "0.1.0"

__all__ = [
    "AssetUniverse",
    "DmaxBounds",
    "DrFrontierError",
    "EdmCertificate",
    "EdmEmbedding",
    "EfShape",
    "FrontierCurve",
    "FrontierKind",
    "FrontierParams",
    "MdpAnalysis",
    "Portfolio",
    "ReturnPanel",
    "SandwichReport",
    "SpecialPortfolios",
    "analyze_mdp",
    "annualization_step",
    "annualize",
    "assert_edm",
    "build_d_eta",
    "build_distance_matrix",
    "centrality",
    "check_budget",
    "cml_curve",
    "coords_table",
    "d_max_bounds",
    "default_sigma_grid",
    "diversification_ratio",
    "diversification_return",
    "dr_gap_at",
    "efficient_dr_portfolio",
    "embed",
    "eta_wo",
    "eta_wo_sign",
    "frontier_params",
    "inflection_report",
    "load_panel",
    "locate_inflection",
    "max_dr_portfolio",
    "max_linear_over_ellipsoid",
    "mdp_at_sigma",
    "mdp_global",
    "min_variance_portfolio",
    "norm_dr_bound",
    "portfolio_stats",
    "q_cml_at",
    "q_dr_at",
    "q_dr_riskfree_at",
    "q_ef_at",
    "q_portfolio",
    "riskfree_dr_curve",
    "sandwich_check",
    "self_financing_direction",
    "special_portfolios",
    "sweep",
    "tangent_portfolio",
    "validate_universe",
]
