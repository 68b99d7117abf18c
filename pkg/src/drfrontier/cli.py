"""Command line interface.

Subcommands:
    portfolios    closed-form special portfolios as JSON
    frontier      frontier curves as CSV (optionally SVG charts)
    mdp           diversification-ratio analysis and sandwich checks as JSON
    embed         asset coordinates and embedding summary
    ingest-check  parse a panel and emit provenance only

Inputs are either a CSV panel of prices/returns (see ingest) or a direct
covariance JSON {"names": [...], "V": [[...]], "rbar": [...], "r0": x} with
the last two optional.  Validation failures exit with status 2 and a single
machine-readable JSON object on stderr.  For equal inputs, flags and seed,
every output file is byte identical; floats are serialized with 12
significant digits.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
from typing import Optional

import numpy as np

from . import embedding as emb_mod
from . import frontiers, ingest, mdp, portfolios
from .errors import DrFrontierError, MissingReturnsError, ParseError
from .model import validate_universe

log = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


@dataclasses.dataclass
class RunConfig:
    command: str
    input_path: str
    input_format: Optional[str]
    log_returns: bool
    grid: Optional[str]
    riskfree: Optional[float]
    out_dir: str
    seed: int
    emit_svg: bool
    require_returns: bool


def _round12(x: float) -> float:
    return float(f"{float(x):.{SIGNIFICANT_DIGITS}g}")


def _jsonable(obj):
    if obj is None or isinstance(obj, (str, bool, int)):
        return obj
    if isinstance(obj, float):
        return _round12(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return _round12(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _write_json(path: str, obj) -> None:
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _portfolio_dict(p) -> dict:
    if p is None:
        return None
    d = {
        "weights": p.weights,
        "sigma": p.sigma,
        "variance": p.variance,
        "q": p.dr,
    }
    d["centrality"] = (
        None if p.centrality_sq is None else float(np.sqrt(max(p.centrality_sq, 0.0)))
    )
    d["expected_return"] = p.expected_return
    return d


def _load_universe(config: RunConfig):
    """Build the universe plus (for panel input) a provenance record."""
    path = config.input_path
    fmt = config.input_format
    if fmt is None:
        fmt = "json" if path.lower().endswith(".json") else "prices"

    provenance = None
    if fmt == "json":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from None
        if "V" not in data:
            raise ParseError(f"{path}: missing key 'V'")
        universe = validate_universe(
            data["V"],
            expected_returns=data.get("rbar"),
            risk_free_rate=data.get("r0"),
            names=data.get("names"),
        )
    else:
        panel = ingest.load_panel(path, format=fmt, log_returns=config.log_returns)
        universe = ingest.annualize(panel)
        with open(path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        provenance = {
            "input": os.path.basename(path),
            "input_sha256": digest,
            "calendar_days": panel.calendar_days,
            "periods": panel.periods,
            "delta": ingest.annualization_step(panel),
            "assets": len(panel.assets),
            "dropped_rows": panel.dropped_rows,
        }

    if config.riskfree is not None:
        universe = validate_universe(
            universe.cov,
            expected_returns=universe.expected_returns,
            risk_free_rate=config.riskfree,
            names=universe.names,
        )
    if config.require_returns and universe.expected_returns is None:
        raise MissingReturnsError(
            "input carries no expected returns (--require-returns)"
        )
    return universe, provenance


def _parse_grid_spec(spec: str):
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ParseError(f"grid spec {spec!r}; expected min:max:points[:log]")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        points = int(parts[2])
    except ValueError:
        raise ParseError(f"grid spec {spec!r}: non-numeric field") from None
    if points < 2 or hi <= lo or lo < 0.0:
        raise ParseError(f"grid spec {spec!r}: need 0 <= min < max and points >= 2")
    if len(parts) == 4:
        if parts[3] != "log":
            raise ParseError(f"grid spec {spec!r}: trailing field must be 'log'")
        if lo <= 0.0:
            raise ParseError(f"grid spec {spec!r}: log spacing needs min > 0")
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


def _sigma_grid(config: RunConfig, params) -> np.ndarray:
    if config.grid:
        return _parse_grid_spec(config.grid)
    return frontiers.default_sigma_grid(params)


def _maybe_write_provenance(out_dir: str, provenance) -> None:
    if provenance is not None:
        _write_json(os.path.join(out_dir, "provenance.json"), provenance)


# ---------------------------------------------------------------------------
# subcommands


def cmd_portfolios(config: RunConfig) -> int:
    universe, provenance = _load_universe(config)
    embedding = emb_mod.embed(universe)
    sp = portfolios.special_portfolios(universe, embedding=embedding)
    params = frontiers.frontier_params(universe)
    payload = {
        "names": list(universe.names),
        "scalars": {
            "a": sp.a,
            "b": sp.b,
            "rho": sp.rho,
            "sigma_mvp": params.sigma_mvp,
            "sigma_mdrp": params.sigma_mdrp,
            "q_mvp": params.q_mvp,
            "q_max": embedding.q_max,
            "eta_wo": sp.eta_wo,
            "eta_wo_sign": sp.eta_wo_sign,
            "ef_shape": params.ef_shape.value,
        },
        "mvp": _portfolio_dict(sp.mvp),
        "mdrp": _portfolio_dict(sp.mdrp),
        "q_portfolio": _portfolio_dict(sp.q_pf),
        "tangent": _portfolio_dict(sp.tangent),
    }
    os.makedirs(config.out_dir, exist_ok=True)
    _write_json(os.path.join(config.out_dir, "portfolios.json"), payload)
    _maybe_write_provenance(config.out_dir, provenance)
    return 0


def _applicable_kinds(universe, params) -> list:
    kinds = [frontiers.FrontierKind.EFFICIENT_DR, frontiers.FrontierKind.MDP_AT_SIGMA]
    if params.eta_wo is not None:
        kinds += [
            frontiers.FrontierKind.MV_EFFICIENT_DR,
            frontiers.FrontierKind.MV_MEAN_RETURN,
        ]
        if universe.risk_free_rate is not None:
            kinds += [
                frontiers.FrontierKind.CML,
                frontiers.FrontierKind.EFFICIENT_DR_RISKFREE,
            ]
    return kinds


def _svg_charts(out_dir, universe, params, embedding, curves) -> None:
    from . import svg

    def ok_rows(curve):
        return [r for r in curve.rows if r.status == "ok"]

    q_series = []
    c_series = []
    r_series = []
    for curve in curves:
        rows = ok_rows(curve)
        if not rows:
            continue
        label = curve.kind.value
        q_series.append(
            svg.Series(label, [r.sigma for r in rows], [r.q for r in rows])
        )
        if any(r.centrality is not None for r in rows):
            with_c = [r for r in rows if r.centrality is not None]
            c_series.append(
                svg.Series(
                    label, [r.sigma for r in with_c], [r.centrality for r in with_c]
                )
            )
        if any(r.ret is not None for r in rows):
            with_r = [r for r in rows if r.ret is not None]
            r_series.append(
                svg.Series(label, [r.sigma for r in with_r], [r.ret for r in with_r])
            )

    markers = [
        svg.Marker("MVP", params.sigma_mvp, params.q_mvp),
        svg.Marker("MDRP", params.sigma_mdrp, params.q_mdrp),
    ]
    if params.eta_wo is not None and params.eta_wo >= 0.0:
        m = params.eta_wo
        markers.append(
            svg.Marker(
                "Q",
                float(np.sqrt(params.sigma2_mvp + 0.25 * m * m)),
                params.q_mvp + m * m / 8.0,
            )
        )
    _write_text(
        os.path.join(out_dir, "sigma_q.svg"),
        svg.render(
            svg.Chart(
                title="diversification return vs risk",
                xlabel="sigma",
                ylabel="q",
                series=q_series,
                markers=markers,
            )
        ),
    )
    if c_series:
        _write_text(
            os.path.join(out_dir, "sigma_c.svg"),
            svg.render(
                svg.Chart(
                    title="centrality vs risk",
                    xlabel="sigma",
                    ylabel="c",
                    series=c_series,
                    hlines=[("sqrt(q_max)", float(np.sqrt(embedding.q_max)))],
                )
            ),
        )
    if r_series:
        _write_text(
            os.path.join(out_dir, "sigma_R.svg"),
            svg.render(
                svg.Chart(
                    title="expected return vs risk",
                    xlabel="sigma",
                    ylabel="R",
                    series=r_series,
                )
            ),
        )


def cmd_frontier(config: RunConfig, kinds=None) -> int:
    universe, provenance = _load_universe(config)
    params = frontiers.frontier_params(universe)
    embedding = emb_mod.embed(universe)
    grid = _sigma_grid(config, params)
    if kinds:
        kinds = [frontiers.FrontierKind(k) for k in kinds]
    else:
        kinds = _applicable_kinds(universe, params)

    os.makedirs(config.out_dir, exist_ok=True)
    curves = []
    for kind in kinds:
        curve = frontiers.sweep(universe, kind, grid, embedding=embedding)
        curves.append(curve)
        _write_text(
            os.path.join(config.out_dir, f"frontier_{kind.value}.csv"),
            curve.to_csv_text(),
        )
    if config.emit_svg:
        _svg_charts(config.out_dir, universe, params, embedding, curves)
    _maybe_write_provenance(config.out_dir, provenance)
    return 0


def cmd_mdp(config: RunConfig, sigmas=None, samples: int = 20_000, starts: int = 32) -> int:
    universe, provenance = _load_universe(config)
    analysis = mdp.analyze_mdp(universe, starts=starts, seed=config.seed)
    params = frontiers.frontier_params(universe)
    if not sigmas:
        sigmas = [params.sigma_mvp * f for f in (1.05, 1.15, 1.3)]
    reports = [
        mdp.sandwich_check(universe, s, samples=samples, seed=config.seed)
        for s in sigmas
    ]
    payload = {
        "weights": analysis.portfolio.weights,
        "ratio": analysis.ratio,
        "variance": analysis.portfolio.variance,
        "q": analysis.portfolio.dr,
        "d_max_lower": analysis.d_max_lower,
        "d_max_upper": analysis.d_max_upper,
        "starts_used": analysis.starts_used,
        "converged": analysis.converged,
        "seed": config.seed,
        "sandwich": [dataclasses.asdict(r) for r in reports],
    }
    os.makedirs(config.out_dir, exist_ok=True)
    _write_json(os.path.join(config.out_dir, "mdp.json"), payload)
    _maybe_write_provenance(config.out_dir, provenance)
    return 0


def cmd_embed(config: RunConfig) -> int:
    universe, provenance = _load_universe(config)
    embedding = emb_mod.embed(universe)
    rows = emb_mod.coords_table(embedding, universe.names)
    header = ["asset"] + [f"dim{k + 1}" for k in range(embedding.dim)]
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join([str(row[0])] + [f"{v:.12g}" for v in row[1:]])
        )
    os.makedirs(config.out_dir, exist_ok=True)
    _write_text(
        os.path.join(config.out_dir, "embedding.csv"), "\n".join(lines) + "\n"
    )
    _write_json(
        os.path.join(config.out_dir, "embedding.json"),
        {
            "q_max": embedding.q_max,
            "eigvals": embedding.eigvals,
            "mdrp_weights": embedding.mdrp_weights,
        },
    )
    _maybe_write_provenance(config.out_dir, provenance)
    return 0


def cmd_ingest_check(config: RunConfig) -> int:
    fmt = config.input_format or "prices"
    if fmt == "json":
        raise ParseError("ingest-check works on CSV panels, not covariance JSON")
    panel = ingest.load_panel(
        config.input_path, format=fmt, log_returns=config.log_returns
    )
    with open(config.input_path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    provenance = {
        "input": os.path.basename(config.input_path),
        "input_sha256": digest,
        "calendar_days": panel.calendar_days,
        "periods": panel.periods,
        "delta": ingest.annualization_step(panel),
        "assets": len(panel.assets),
        "dropped_rows": panel.dropped_rows,
    }
    os.makedirs(config.out_dir, exist_ok=True)
    _write_json(os.path.join(config.out_dir, "provenance.json"), provenance)
    sys.stdout.write(json.dumps(_jsonable(provenance), sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="CSV panel or covariance JSON")
    p.add_argument(
        "--format",
        choices=["prices", "returns", "json"],
        default=None,
        help="input interpretation (default: by file extension)",
    )
    p.add_argument(
        "--log-returns",
        action="store_true",
        help="use log returns when converting prices",
    )
    p.add_argument("--riskfree", type=float, default=None, help="risk-free rate override")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="seed for stochastic pieces")
    p.add_argument(
        "--require-returns",
        action="store_true",
        help="fail when the input has no expected returns",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drfrontier",
        description="Diversification-return portfolio analytics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("portfolios", help="closed-form special portfolios")
    _add_common(p)

    p = sub.add_parser("frontier", help="frontier curves as CSV (and SVG)")
    _add_common(p)
    p.add_argument(
        "--grid",
        default=None,
        help="sigma grid min:max:points[:log] (default: geometric in excess variance)",
    )
    p.add_argument(
        "--kind",
        action="append",
        choices=[k.value for k in frontiers.FrontierKind],
        help="curve kind (repeatable; default: all applicable)",
    )
    p.add_argument("--svg", action="store_true", help="also write SVG charts")

    p = sub.add_parser("mdp", help="diversification-ratio analysis")
    _add_common(p)
    p.add_argument(
        "--sigma",
        action="append",
        type=float,
        help="risk level for the sandwich check (repeatable)",
    )
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--starts", type=int, default=32)

    p = sub.add_parser("embed", help="asset coordinates and embedding summary")
    _add_common(p)

    p = sub.add_parser("ingest-check", help="parse a panel, emit provenance only")
    _add_common(p)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        input_path=args.input,
        input_format=args.format,
        log_returns=getattr(args, "log_returns", False),
        grid=getattr(args, "grid", None),
        riskfree=args.riskfree,
        out_dir=args.out,
        seed=args.seed,
        emit_svg=getattr(args, "svg", False),
        require_returns=args.require_returns,
    )


def main(argv=None) -> int:
    level = os.environ.get("DRFRONTIER_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    args = build_parser().parse_args(argv)
    config = _config_from_args(args)
    try:
        if args.command == "portfolios":
            return cmd_portfolios(config)
        if args.command == "frontier":
            return cmd_frontier(config, kinds=args.kind)
        if args.command == "mdp":
            return cmd_mdp(
                config, sigmas=args.sigma, samples=args.samples, starts=args.starts
            )
        if args.command == "embed":
            return cmd_embed(config)
        if args.command == "ingest-check":
            return cmd_ingest_check(config)
        raise AssertionError(f"unhandled command {args.command!r}")
    except DrFrontierError as exc:
        sys.stderr.write(
            json.dumps(
                {"error": type(exc).__name__, "message": str(exc)}, sort_keys=True
            )
            + "\n"
        )
        return 2
    except OSError as exc:
        sys.stderr.write(
            json.dumps({"error": "OSError", "message": str(exc)}, sort_keys=True) + "\n"
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
