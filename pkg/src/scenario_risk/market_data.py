"""Price ingestion, returns, detrending and scenario construction from market data."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.linear_model import LinearRegression

from .basel import PortfolioPanel
from .errors import (
    AlignmentError,
    CsvParseError,
    DuplicateDateError,
    InsufficientDataError,
    InvalidInputError,
    NonPositivePriceError,
    NotFoundError,
)
from .measure_core import OutcomeTable, ScenarioSet, dist_from_samples, es
from .scenario_measures import ScenarioDistributions, imes, mes, rmes

logger = logging.getLogger(__name__)

# label -> (volatility regime, economy)
SCENARIO_LABELS = {
    1: ("high_vol", "good_economy"),
    2: ("high_vol", "bad_economy"),
    3: ("low_vol", "good_economy"),
    4: ("low_vol", "bad_economy"),
}


@dataclass(frozen=True, eq=False)
class PriceSeries:
    name: str
    series: pd.Series

    def __post_init__(self):
        s = self.series
        if not isinstance(s.index, pd.DatetimeIndex):
            raise InvalidInputError("price series needs a date index")
        if not s.index.is_monotonic_increasing or not s.index.is_unique:
            raise InvalidInputError("price dates must be strictly increasing")
        if s.isna().any() or (s <= 0).any():
            raise InvalidInputError(f"{self.name}: prices must be positive and present")

    def __len__(self):
        return len(self.series)

    @property
    def dates(self):
        return self.series.index

    @property
    def prices(self) -> np.ndarray:
        return self.series.to_numpy(dtype=float)


def _to_float(text: str) -> float:
    # float() parses shortest repr strings exactly
    try:
        return float(text)
    except ValueError:
        return np.nan


def load_csv(path, date_column: str = "date", value_column: str = "close", name: Optional[str] = None) -> PriceSeries:
    """Read one dated column from a CSV; rows are reported by file line number."""
    path = Path(path)
    if not path.exists():
        raise NotFoundError(f"data file not found: {path}")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise CsvParseError(f"{path.name}: {exc}", file=str(path)) from exc
    missing = [c for c in (date_column, value_column) if c not in df.columns]
    if missing:
        raise CsvParseError(f"{path.name}: missing columns {missing}", file=str(path), columns=list(df.columns))
    if df.empty:
        raise CsvParseError(f"{path.name}: no data rows", file=str(path))

    dates = pd.to_datetime(df[date_column].str.strip(), format="ISO8601", errors="coerce")
    values = df[value_column].str.strip().map(_to_float)
    # header is line 1
    line = df.index.to_numpy() + 2
    bad = dates.isna().to_numpy() | values.isna().to_numpy() | ~np.isfinite(values.to_numpy(dtype=float))
    if bad.any():
        i = int(np.argmax(bad))
        raise CsvParseError(f"{path.name} line {line[i]}: cannot parse {df.iloc[i].to_dict()}",
                            file=str(path), line=int(line[i]))
    dup = dates.duplicated(keep="first").to_numpy()
    if dup.any():
        i = int(np.argmax(dup))
        raise DuplicateDateError(f"{path.name} line {line[i]}: duplicate date {dates.iloc[i].date()}",
                                 file=str(path), line=int(line[i]), date=dates.iloc[i])
    nonpos = (values <= 0).to_numpy()
    if nonpos.any():
        i = int(np.argmax(nonpos))
        raise NonPositivePriceError(f"{path.name} line {line[i]}: non-positive price {values.iloc[i]}",
                                    file=str(path), line=int(line[i]))
    series = pd.Series(values.to_numpy(dtype=float), index=pd.DatetimeIndex(dates), name=name or path.stem)
    series = series.sort_index()
    series.index.name = date_column
    logger.info(f"Loaded {path.name}: {len(series)} rows, {series.index[0].date()}..{series.index[-1].date()}")
    return PriceSeries(series.name, series)


def write_csv(series: pd.Series, path, date_column: str = "date", value_column: str = "close"):
    """Write a dated column; floats keep their shortest round-trip representation."""
    directory = os.path.dirname(str(path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame = pd.DataFrame({date_column: series.index.strftime("%Y-%m-%d"),
                          value_column: [repr(float(v)) for v in series.to_numpy()]})
    frame.to_csv(path, index=False)


def negative_returns(s: PriceSeries) -> pd.Series:
    """X_d = -(P_d / P_{d-1} - 1), computed as (P_{d-1} - P_d) / P_{d-1}; losses are positive."""
    if len(s) < 2:
        raise InvalidInputError(f"{s.name}: need at least two prices for returns")
    prices = s.prices
    losses = (prices[:-1] - prices[1:]) / prices[:-1]
    return pd.Series(losses, index=s.dates[1:], name=s.name)


def log_linear_detrend(s: PriceSeries) -> pd.Series:
    """Residuals of the least-squares fit of log price against the day index."""
    if len(s) < 2:
        raise InvalidInputError(f"{s.name}: need at least two prices to detrend")
    index = np.arange(len(s), dtype=float).reshape(-1, 1)
    log_price = np.log(s.prices)
    model = LinearRegression().fit(index, log_price)
    return pd.Series(log_price - model.predict(index), index=s.dates, name=s.name)


def align_series(series: dict[str, pd.Series]) -> tuple[pd.DataFrame, dict[str, list]]:
    """Inner join on dates; returns the frame and the dates each input lost."""
    frame = pd.concat(series, axis=1, join="inner").sort_index()
    dropped = {name: list(s.index.difference(frame.index)) for name, s in series.items()}
    total = sum(len(v) for v in dropped.values())
    if total:
        detail = ", ".join(f"{name}: {len(v)}" for name, v in dropped.items() if v)
        logger.warning(f"Alignment dropped {total} dated rows ({detail})")
    return frame, dropped


def load_panel_dir(directory, date_column: str = "date", value_column: str = "close") -> pd.DataFrame:
    """One price CSV per factor (factor name = file stem), aligned on common dates."""
    directory = Path(directory)
    files = sorted(directory.glob("*.csv"))
    if not files:
        raise NotFoundError(f"no CSV files in {directory}")
    loaded = {f.stem: load_csv(f, date_column, value_column).series for f in files}
    frame, _ = align_series(loaded)
    if len(frame) < 2:
        raise AlignmentError(f"factor files in {directory} share fewer than two dates",
                             files=[f.name for f in files])
    return frame


@dataclass(frozen=True, eq=False)
class ScenarioAssignment:
    """Regime label per window day with the cut points used."""

    dates: pd.DatetimeIndex
    labels: np.ndarray
    vix_median: float
    residual_medians: dict

    @property
    def group_sizes(self) -> dict[int, int]:
        return {label: int(np.sum(self.labels == label)) for label in SCENARIO_LABELS}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "date": self.dates.strftime("%Y-%m-%d"),
            "label": self.labels,
            "volatility": [SCENARIO_LABELS[k][0] for k in self.labels],
            "economy": [SCENARIO_LABELS[k][1] for k in self.labels],
        })

    def to_dict(self):
        return {"vix_median": self.vix_median, "residual_medians": self.residual_medians,
                "group_sizes": {str(k): v for k, v in self.group_sizes.items()},
                "first_date": self.dates[0].date().isoformat(), "last_date": self.dates[-1].date().isoformat()}


def _stable_order(values: np.ndarray, dates: np.ndarray) -> np.ndarray:
    # sort by value, then by date
    return np.lexsort((dates, values))


def _check_window(w: int):
    if w < 4 or w % 2:
        raise InvalidInputError(f"window length w={w} must be an even number >= 4")


def _window_before(frame: pd.DataFrame, t0: pd.Timestamp, w: int, dropped=None) -> pd.DataFrame:
    before = frame.loc[frame.index < t0]
    if len(before) < w:
        raise AlignmentError(
            f"only {len(before)} aligned days before {t0.date()}, window needs {w}",
            available=len(before), required=w,
            first_aligned=frame.index[0] if len(frame) else None,
            dropped={k: len(v) for k, v in (dropped or {}).items()})
    return before.iloc[-w:]


def _regime_scenarios(window: pd.DataFrame, variable: str) -> tuple[OutcomeTable, ScenarioSet, ScenarioAssignment]:
    w = len(window)
    dates = window.index.to_numpy()
    vix_values = window["vix"].to_numpy(dtype=float)
    resid_values = window["residuals"].to_numpy(dtype=float)

    order = _stable_order(vix_values, dates)
    halves = {"low": order[: w // 2], "high": order[w // 2:]}
    labels = np.zeros(w, dtype=int)
    medians = {}
    for regime, members in halves.items():
        ranked = members[_stable_order(resid_values[members], dates[members])]
        cut = len(ranked) // 2
        bad, good = ranked[:cut], ranked[cut:]
        labels[good] = 1 if regime == "high" else 3
        labels[bad] = 2 if regime == "high" else 4
        medians[regime] = float(np.median(resid_values[members]))

    supports = [np.flatnonzero(labels == k) for k in SCENARIO_LABELS]
    table = OutcomeTable(w, {variable: window["returns"].to_numpy(dtype=float)})
    scenarios = ScenarioSet.uniform_on([f"Q{k}" for k in SCENARIO_LABELS], supports, w)
    assignment = ScenarioAssignment(window.index, labels, float(np.median(vix_values)), medians)
    return table, scenarios, assignment


def economic_scenarios(returns: pd.Series, vix: pd.Series, residuals: pd.Series, t0, w: int,
                       variable: str = "X") -> tuple[OutcomeTable, ScenarioSet, ScenarioAssignment]:
    """Four regime scenarios on the w aligned days before t0.

    Days are split at w/2 by (VIX, date) into low and high volatility, and
    each half is split at its middle by (residual, date) into bad and good
    economy. Scenario k is uniform on the days labelled k.
    """
    _check_window(w)
    frame, dropped = align_series({"returns": returns, "vix": vix, "residuals": residuals})
    window = _window_before(frame, pd.Timestamp(t0), w, dropped)
    table, scenarios, assignment = _regime_scenarios(window, variable)
    logger.info(f"Economic scenarios on {window.index[0].date()}..{window.index[-1].date()}: "
                f"group sizes {assignment.group_sizes}")
    return table, scenarios, assignment


ECONOMIC_COLUMNS = ["date", "es", "mes", "imes", "rmes"]


def _economic_row(frame, day, w, p):
    try:
        window = _window_before(frame, day, w)
    except AlignmentError as exc:
        logger.warning(f"economic series: {exc.message}")
        return [day, np.nan, np.nan, np.nan, np.nan]
    table, scenarios, _ = _regime_scenarios(window, "X")
    sd = ScenarioDistributions.from_table(table, scenarios, "X")
    base = es(dist_from_samples(window["returns"].to_numpy(dtype=float)), p)
    return [day, base, mes(sd, p), imes(sd, p), rmes(sd, p)]


def economic_scenario_series(returns: pd.Series, vix: pd.Series, residuals: pd.Series, start, end, w: int,
                             p: float, n_jobs: int = 1) -> pd.DataFrame:
    """ES under the window-uniform law and MES, iMES, rMES over the regime scenarios, per aligned day.

    Each day in [start, end] plays t0: its scenarios are built on the w
    aligned days strictly before it. Days with a shorter history get NaN.
    """
    _check_window(w)
    if not 0.0 < p < 1.0:
        raise InvalidInputError(f"p={p} must lie in (0, 1)")
    frame, _ = align_series({"returns": returns, "vix": vix, "residuals": residuals})
    days = frame.index[(frame.index >= pd.Timestamp(start)) & (frame.index <= pd.Timestamp(end))]
    if len(days) == 0:
        raise InvalidInputError(f"no aligned dates between {start} and {end}")
    rows = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(_economic_row)(frame, day, w, p) for day in days)
    logger.info(f"Economic scenario series: {len(days)} days, w={w}, p={p}")
    return pd.DataFrame(rows, columns=ECONOMIC_COLUMNS)


def base_scenario(outcome_count: int) -> np.ndarray:
    """Uniform measure over the window days."""
    return np.full(outcome_count, 1.0 / outcome_count)


def rolling_scenarios(panel: PortfolioPanel, as_of, window_len: int, count: int,
                      exposures: Optional[pd.Series] = None) -> tuple[OutcomeTable, ScenarioSet]:
    """Scenario j uniform over the window_len days ending j days before as_of, on pooled history days.

    The table holds one variable per factor plus ``portfolio``, the
    exposure-weighted loss using the positions held into as_of.
    """
    if window_len < 1 or count < 1:
        raise InvalidInputError("window_len and count must be positive")
    pos = panel.position(as_of)
    days = window_len + count - 1
    if pos < days:
        earliest = panel.dates[days] if days < len(panel.dates) else None
        raise InsufficientDataError(f"{days} days of history needed before {pd.Timestamp(as_of).date()}, found {pos}",
                                    required=days, available=pos, earliest_feasible_date=earliest)
    block = panel.returns.iloc[pos - days:pos]
    weights = panel.exposures.iloc[pos] if exposures is None else exposures.reindex(panel.factors)
    columns = {name: block[name].to_numpy() for name in panel.factors}
    columns["portfolio"] = block.to_numpy() @ weights.to_numpy(dtype=float)
    table = OutcomeTable(days, columns)
    rows = np.zeros((count, days))
    for j in range(1, count + 1):
        end = days - j + 1
        rows[j - 1, end - window_len:end] = 1.0 / window_len
    return table, ScenarioSet(tuple(f"W{j}" for j in range(1, count + 1)), rows)
