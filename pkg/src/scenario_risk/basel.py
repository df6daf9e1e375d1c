"""Internal-model market-risk charge from a panel of factor returns.

Losses are X_d = -(P_d / P_{d-1} - 1) per factor and the position held into
day d is alpha * P_{d-1}. For an as-of date t the history is every return
strictly before t; window j (j = 1..N) is the ``current_window`` days ending
j days before t, so window 1 is the current window.

Steps:
  theta          max(ES_full / ES_reduced, 1) over the current window
  stressed_es    max over the N windows of the reduced-portfolio ES
  es_tilde       stressed_es * theta
  es_c           sum of es_tilde over risk classes
  imcc           lambda * es_tilde + (1 - lambda) * es_c
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from numpy.lib.stride_tricks import sliding_window_view

from .config import BaselConfig
from .errors import (
    DegenerateDenominatorError,
    InsufficientDataError,
    InvalidInputError,
    NotFoundError,
)
from .measure_core import EmpiricalDistribution, dist_from_samples, es, tail_weights_uniform

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PortfolioPanel:
    """Per-day factor losses and the monetary positions held into each day, on one date index."""

    returns: pd.DataFrame
    exposures: pd.DataFrame

    def __post_init__(self):
        returns, exposures = self.returns, self.exposures
        if returns.empty or returns.shape[1] == 0:
            raise InvalidInputError("panel needs at least one day and one factor")
        if not returns.index.equals(exposures.index) or list(returns.columns) != list(exposures.columns):
            raise InvalidInputError("returns and exposures must share dates and factors")
        if not returns.index.is_monotonic_increasing or not returns.index.is_unique:
            raise InvalidInputError("panel dates must be strictly increasing")
        if not np.all(np.isfinite(returns.to_numpy())) or not np.all(np.isfinite(exposures.to_numpy())):
            raise InvalidInputError("panel returns and exposures must be finite")

    @classmethod
    def from_prices(cls, prices: pd.DataFrame, units: Optional[Mapping[str, float]] = None):
        """Build from aligned prices; by default each position starts at one currency unit."""
        if len(prices) < 2:
            raise InvalidInputError("need at least two price rows")
        prices = prices.sort_index().astype(float)
        if (prices <= 0).any().any():
            raise InvalidInputError("prices must be positive")
        if units is None:
            alpha = 1.0 / prices.iloc[0]
        else:
            missing = set(prices.columns) - set(units)
            if missing:
                raise InvalidInputError(f"units missing for factors {sorted(missing)}")
            alpha = pd.Series({name: float(units[name]) for name in prices.columns})
        previous = prices.shift(1).iloc[1:]
        current = prices.iloc[1:]
        returns = (previous - current) / previous
        exposures = previous * alpha
        return cls(returns, exposures)

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.returns.index

    @property
    def factors(self) -> list[str]:
        return list(self.returns.columns)

    def scaled(self, factor: float) -> "PortfolioPanel":
        return PortfolioPanel(self.returns, self.exposures * factor)

    def check_factors(self, factors: Sequence[str]) -> list[str]:
        factors = list(factors)
        if not factors:
            raise InvalidInputError("factor subset must be non-empty")
        unknown = set(factors) - set(self.factors)
        if unknown:
            raise NotFoundError(f"unknown factors {sorted(unknown)}", known=self.factors)
        return factors

    def position(self, as_of) -> int:
        as_of = pd.Timestamp(as_of)
        try:
            return int(self.dates.get_loc(as_of))
        except KeyError:
            raise NotFoundError(f"{as_of.date()} is not a panel date",
                                first=self.dates[0], last=self.dates[-1]) from None


def portfolio_loss_series(panel: PortfolioPanel, factors: Sequence[str], window,
                          exposures: Optional[Mapping[str, float]] = None) -> EmpiricalDistribution:
    """Uniform empirical law of sum_i X_d^i * exposure_i over the dates of ``window`` (inclusive).

    Exposures default to the positions held into the last window day.
    """
    factors = panel.check_factors(factors)
    start, end = (pd.Timestamp(d) for d in window)
    rows = panel.returns.loc[start:end, factors]
    if rows.empty:
        raise InvalidInputError(f"window {start.date()}..{end.date()} holds no panel dates")
    if exposures is None:
        weights = panel.exposures.loc[rows.index[-1], factors].to_numpy()
    else:
        weights = np.array([float(exposures[f]) for f in factors])
    return dist_from_samples(rows.to_numpy() @ weights)


def exposure_at(panel: PortfolioPanel, cfg: BaselConfig, as_of) -> pd.Series:
    if cfg.exposure_mode == "frozen":
        return pd.Series({f: float(cfg.frozen_exposures[f]) for f in panel.factors})
    return panel.exposures.iloc[panel.position(as_of)]


def required_history(cfg: BaselConfig) -> int:
    return cfg.current_window + cfg.lookback_windows - 1


def history_losses(panel: PortfolioPanel, cfg: BaselConfig, as_of, days: int) -> tuple[pd.DatetimeIndex, np.ndarray]:
    """The last ``days`` dates before as_of and the per-factor losses on them, times the as-of exposure."""
    pos = panel.position(as_of)
    if pos < days:
        earliest = panel.dates[days] if days < len(panel.dates) else None
        raise InsufficientDataError(
            f"{days} days of history needed before {pd.Timestamp(as_of).date()}, found {pos}",
            required=days, available=pos, earliest_feasible_date=earliest)
    weights = exposure_at(panel, cfg, as_of)
    block = panel.returns.iloc[pos - days:pos]
    return block.index, block.to_numpy() * weights.to_numpy()[None, :]


def window_es(losses: np.ndarray, window: int, p: float) -> np.ndarray:
    """ES of every contiguous ``window``-day block of ``losses``, in calendar order of block start."""
    blocks = np.sort(sliding_window_view(losses, window), axis=1)
    return blocks @ tail_weights_uniform(window, p)


def _columns(panel: PortfolioPanel, factors) -> np.ndarray:
    index = {name: i for i, name in enumerate(panel.factors)}
    return np.array([index[f] for f in factors], dtype=int)


@dataclass(frozen=True)
class ThetaResult:
    theta: float
    es_full: float
    es_reduced: float
    cap_exceeded: bool
    computed_on: pd.Timestamp

    def to_dict(self):
        return {"theta": self.theta, "es_full": self.es_full, "es_reduced": self.es_reduced,
                "cap_exceeded": self.cap_exceeded, "computed_on": self.computed_on.date().isoformat()}


def theta_date(panel: PortfolioPanel, cfg: BaselConfig, as_of) -> pd.Timestamp:
    """as_of itself, or the first panel date of its ISO week in weekly mode."""
    as_of = panel.dates[panel.position(as_of)]
    if cfg.theta_refresh == "daily":
        return as_of
    week = as_of.isocalendar()[:2]
    same_week = [d for d in panel.dates[max(0, panel.position(as_of) - 7):panel.position(as_of) + 1]
                 if d.isocalendar()[:2] == week]
    return same_week[0]


def _theta(panel, cfg, as_of, full, reduced) -> ThetaResult:
    on = theta_date(panel, cfg, as_of)
    _, losses = history_losses(panel, cfg, on, cfg.current_window)
    es_full = es(dist_from_samples(losses[:, _columns(panel, full)].sum(axis=1)), cfg.p)
    if set(reduced) == set(full):
        es_reduced = es_full
        value = 1.0
    else:
        es_reduced = es(dist_from_samples(losses[:, _columns(panel, reduced)].sum(axis=1)), cfg.p)
        if es_reduced <= 0:
            raise DegenerateDenominatorError(
                f"reduced-set ES is {es_reduced:.6g} on the window before {on.date()}",
                es_reduced=es_reduced, reduced=list(reduced))
        value = max(es_full / es_reduced, 1.0)
    exceeded = value >= cfg.theta_cap
    if exceeded:
        logger.warning(f"theta {value:.4f} reaches the cap {cfg.theta_cap:.4f} on {on.date()}")
    return ThetaResult(float(value), float(es_full), float(es_reduced), bool(exceeded), on)


def theta(panel: PortfolioPanel, cfg: BaselConfig, as_of) -> ThetaResult:
    factors = panel.factors
    return _theta(panel, cfg, as_of, factors, cfg.reduced_factors(factors))


@dataclass(frozen=True)
class StressedES:
    es_rs: float
    window_start: pd.Timestamp
    window_end: pd.Timestamp
    lag: int
    es_current: float

    def to_dict(self):
        return {"es_rs": self.es_rs, "argmax_window": [self.window_start.date().isoformat(),
                                                       self.window_end.date().isoformat()],
                "lag": self.lag, "es_current": self.es_current}


def _stressed(panel, cfg, as_of, factors) -> StressedES:
    days = required_history(cfg)
    dates, losses = history_losses(panel, cfg, as_of, days)
    series = losses[:, _columns(panel, factors)].sum(axis=1)
    values = window_es(series, cfg.current_window, cfg.p)
    # argmax returns the first maximum, i.e. the earliest window
    k = int(np.argmax(values))
    lag = len(values) - k
    logger.info(f"stress window {dates[k].date()}..{dates[k + cfg.current_window - 1].date()} "
                f"(lag {lag}) ES {values[k]:.6g}")
    return StressedES(float(values[k]), dates[k], dates[k + cfg.current_window - 1], lag, float(values[-1]))


def stressed_es(panel: PortfolioPanel, cfg: BaselConfig, as_of) -> StressedES:
    return _stressed(panel, cfg, as_of, cfg.reduced_factors(panel.factors))


@dataclass(frozen=True)
class StressAdjusted:
    es_tilde: float
    theta: ThetaResult
    stressed: StressedES

    def to_dict(self):
        return {"es_tilde": self.es_tilde, **self.theta.to_dict(), **self.stressed.to_dict()}


def _stress_adjusted(panel, cfg, as_of, full, reduced) -> StressAdjusted:
    # stressed scan first: it needs the longest history
    st = _stressed(panel, cfg, as_of, reduced)
    th = _theta(panel, cfg, as_of, full, reduced)
    return StressAdjusted(st.es_rs * th.theta, th, st)


def stress_adjusted_es(panel: PortfolioPanel, cfg: BaselConfig, as_of) -> StressAdjusted:
    factors = panel.factors
    return _stress_adjusted(panel, cfg, as_of, factors, cfg.reduced_factors(factors))


@dataclass(frozen=True)
class DependenceAdjusted:
    es_c: float
    per_class: dict
    dominates_total: Optional[bool] = None

    def to_dict(self):
        payload = {"es_c": self.es_c, "per_class": {k: v.to_dict() for k, v in self.per_class.items()}}
        if self.dominates_total is not None:
            payload["dominates_total"] = self.dominates_total
        return payload


def dependence_adjusted_es(panel: PortfolioPanel, cfg: BaselConfig, as_of,
                           total: Optional[StressAdjusted] = None) -> DependenceAdjusted:
    """Sum of class-wise stress-adjusted ES, each class reduced to its members in the reduced set."""
    cfg.validate_for(panel.factors)
    reduced = set(cfg.reduced_factors(panel.factors))
    per_class = {}
    for name, members in cfg.classes(panel.factors).items():
        class_reduced = [f for f in members if f in reduced]
        if not class_reduced:
            logger.warning(f"risk class {name!r} has no reduced-set factor; using the whole class")
            class_reduced = list(members)
        per_class[name] = _stress_adjusted(panel, cfg, as_of, list(members), class_reduced)
    es_c = float(sum(part.es_tilde for part in per_class.values()))
    dominates = None
    if total is not None:
        dominates = es_c >= total.es_tilde - 1e-9 * max(1.0, abs(total.es_tilde))
        if not dominates:
            logger.warning(f"class sum {es_c:.6g} is below the stress-adjusted total {total.es_tilde:.6g}")
    return DependenceAdjusted(es_c, per_class, dominates)


@dataclass(frozen=True)
class ImccResult:
    imcc: float
    lambda_: float
    total: StressAdjusted
    dependence: DependenceAdjusted
    as_of: pd.Timestamp = field(default=None)

    def to_dict(self):
        return {
            "as_of": self.as_of.date().isoformat() if self.as_of is not None else None,
            "imcc": self.imcc,
            "lambda": self.lambda_,
            "components": {
                "es_tilde": self.total.es_tilde,
                "es_c": self.dependence.es_c,
                "theta": self.total.theta.theta,
                "theta_cap_exceeded": self.total.theta.cap_exceeded,
                "argmax_window": self.total.stressed.to_dict()["argmax_window"],
                "es_rs": self.total.stressed.es_rs,
                "es_current_reduced": self.total.stressed.es_current,
                "dominates_total": self.dependence.dominates_total,
            },
            "per_class": self.dependence.to_dict()["per_class"],
        }


def imcc(panel: PortfolioPanel, cfg: BaselConfig, as_of) -> ImccResult:
    cfg.validate_for(panel.factors)
    total = stress_adjusted_es(panel, cfg, as_of)
    dependence = dependence_adjusted_es(panel, cfg, as_of, total=total)
    value = cfg.lambda_ * total.es_tilde + (1.0 - cfg.lambda_) * dependence.es_c
    return ImccResult(float(value), cfg.lambda_, total, dependence, panel.dates[panel.position(as_of)])


def current_es(panel: PortfolioPanel, cfg: BaselConfig, as_of) -> float:
    """ES of the full portfolio over the current window."""
    _, losses = history_losses(panel, cfg, as_of, cfg.current_window)
    return es(dist_from_samples(losses.sum(axis=1)), cfg.p)


ROLLING_COLUMNS = ["date", "es", "mes", "pct_es", "pct_mes"]


def _rolling_row(panel, cfg, day):
    try:
        _, losses = history_losses(panel, cfg, day, required_history(cfg))
    except InsufficientDataError as exc:
        logger.warning(f"rolling series: {exc.message}")
        return [day, np.nan, np.nan, np.nan, np.nan]
    values = window_es(losses.sum(axis=1), cfg.current_window, cfg.p)
    current, worst = float(values[-1]), float(values.max())
    value = float(exposure_at(panel, cfg, day).sum())
    pct = (lambda x: x / value) if value != 0 else (lambda x: np.nan)
    return [day, current, worst, pct(current), pct(worst)]


def rolling_series(panel: PortfolioPanel, cfg: BaselConfig, start, end, n_jobs: Optional[int] = None) -> pd.DataFrame:
    """Per-day full-portfolio ES, MES over the lookback windows, and both as a share of portfolio value."""
    days = panel.dates[(panel.dates >= pd.Timestamp(start)) & (panel.dates <= pd.Timestamp(end))]
    if len(days) == 0:
        raise InvalidInputError(f"no panel dates between {start} and {end}")
    rows = Parallel(n_jobs=n_jobs or cfg.n_jobs, prefer="threads")(
        delayed(_rolling_row)(panel, cfg, day) for day in days)
    return pd.DataFrame(rows, columns=ROLLING_COLUMNS)
