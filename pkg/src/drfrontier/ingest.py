"""CSV ingestion and annualization of return panels.

Input files carry a `date` column (ISO dates, strictly increasing) followed
by one column per asset, holding either prices or per-period returns.  The
per-period sample moments are scaled to annual units by the average period
length in years,

    delta = N / (365 * n_obs)

where N is the number of calendar days covered by the panel and n_obs the
number of return observations: mu = mu_hat / delta, V = V_hat / delta.
Annualization is a positive rescaling, so it preserves positive
semidefiniteness, and adding a constant to every date leaves delta (and the
universe) unchanged.
"""

from __future__ import annotations

import csv
import datetime
import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    NonMonotoneDatesError,
    ParseError,
    TooFewRowsError,
)
from .model import AssetUniverse, validate_universe

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReturnPanel:
    """Cleaned per-period return observations.

    dates has one entry per return row; for price input these are the dates
    of the later price in each ratio.  calendar_days spans the raw file
    (first to last row), so for price input it includes the initial price
    date that seeds the first return.
    """

    assets: tuple
    dates: tuple
    returns: np.ndarray
    calendar_days: int
    periods: int
    dropped_rows: int = 0


def _parse_rows(path: str):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[0].lower() != "date":
            raise ParseError(f"{path}: first column must be 'date', got {header[:1]}")
        assets = tuple(header[1:])
        if not assets:
            raise ParseError(f"{path}: no asset columns")

        dates = []
        values = []
        dropped = 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}:{lineno}: {len(row)} cells, expected {len(header)}"
                )
            if any(not c.strip() for c in row):
                dropped += 1
                continue
            try:
                day = datetime.date.fromisoformat(row[0].strip())
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: column 'date': {exc}") from None
            vals = np.empty(len(assets))
            for j, cell in enumerate(row[1:], start=1):
                try:
                    vals[j - 1] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}:{lineno}: column '{header[j]}': "
                        f"not a number: {cell.strip()!r}"
                    ) from None
            dates.append(day)
            values.append(vals)
    return assets, dates, np.array(values, dtype=float), dropped


def load_panel(path: str, format: str = "prices", log_returns: bool = False) -> ReturnPanel:
    """Load a CSV of prices or returns into a :class:`ReturnPanel`.

    format='prices' converts to simple returns p_t / p_{t-1} - 1 (or log
    returns when log_returns is set); format='returns' takes the numbers as
    given.  Rows with missing cells are dropped (counted, warned); dates
    must end up strictly increasing.
    """
    if format not in ("prices", "returns"):
        raise ParseError(f"unknown format {format!r}")
    assets, dates, values, dropped = _parse_rows(path)
    if dropped:
        log.warning("%s: dropped %d rows with missing cells", path, dropped)

    if len(dates) < 2:
        raise TooFewRowsError(f"{path}: {len(dates)} usable rows, need at least 2")
    for prev, cur in zip(dates, dates[1:]):
        if cur <= prev:
            raise NonMonotoneDatesError(
                f"{path}: dates not strictly increasing at {cur.isoformat()}"
            )
    calendar_days = (dates[-1] - dates[0]).days

    if format == "prices":
        if np.any(values <= 0.0):
            i, j = np.argwhere(values <= 0.0)[0]
            raise ParseError(
                f"{path}: nonpositive price for {assets[j]} on {dates[i].isoformat()}"
            )
        ratios = values[1:] / values[:-1]
        returns = np.log(ratios) if log_returns else ratios - 1.0
        ret_dates = dates[1:]
    else:
        returns = values
        ret_dates = dates

    if returns.shape[0] < 2:
        raise TooFewRowsError(
            f"{path}: {returns.shape[0]} return rows, need at least 2"
        )
    return ReturnPanel(
        assets=assets,
        dates=tuple(ret_dates),
        returns=returns,
        calendar_days=calendar_days,
        periods=returns.shape[0],
        dropped_rows=dropped,
    )


def annualization_step(panel: ReturnPanel) -> float:
    """Average period length in years, delta = N / (365 * n_obs)."""
    if panel.periods < 1 or panel.calendar_days <= 0:
        raise TooFewRowsError("panel spans no calendar time")
    return panel.calendar_days / (365.0 * panel.periods)


def annualize(panel: ReturnPanel) -> AssetUniverse:
    """Annualized universe from a panel: sample moments scaled by 1 / delta.

    A sample covariance of deficient rank is legal; the universe simply
    comes back flagged singular (warned here) and the closed forms that
    need strict positive definiteness will refuse it downstream.
    """
    delta = annualization_step(panel)
    mu = panel.returns.mean(axis=0) / delta
    if panel.returns.shape[1] == 1:
        v_hat = np.array([[float(np.var(panel.returns[:, 0], ddof=1))]])
    else:
        v_hat = np.cov(panel.returns, rowvar=False, ddof=1)
    universe = validate_universe(
        v_hat / delta, expected_returns=mu, names=panel.assets
    )
    if not universe.nonsingular:
        log.warning(
            "sample covariance is rank deficient (%d assets, %d observations)",
            len(panel.assets),
            panel.periods,
        )
    return universe
