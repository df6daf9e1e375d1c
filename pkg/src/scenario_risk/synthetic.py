"""Seeded synthetic market data for tests, demos and the pipeline smoke run."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
import pandas as pd


def business_days(count: int, start: str = "2010-01-04") -> pd.DatetimeIndex:
    return pd.bdate_range(start=start, periods=count, name="date")


def synthetic_prices(count: int, factors: Sequence[str], seed: int = 0, vol: float = 0.01,
                     stress: Optional[tuple[int, int]] = None, stress_vol: float = 0.04,
                     start: str = "2010-01-04") -> pd.DataFrame:
    """Correlated geometric random walks starting at 100.

    ``stress`` = (first_row, last_row) scales the volatility of those rows to
    ``stress_vol``.
    """
    rng = np.random.default_rng(seed)
    k = len(factors)
    common = rng.normal(size=(count - 1, 1))
    own = rng.normal(size=(count - 1, k))
    shocks = 0.6 * common + 0.8 * own
    scale = np.full((count - 1, 1), vol)
    if stress is not None:
        scale[stress[0]:stress[1]] = stress_vol
    log_steps = shocks * scale
    levels = 100.0 * np.exp(np.vstack([np.zeros((1, k)), np.cumsum(log_steps, axis=0)]))
    return pd.DataFrame(levels, index=business_days(count, start), columns=list(factors))


def synthetic_market(count: int, seed: int = 0, start: str = "2010-01-04") -> dict[str, pd.Series]:
    """A target asset, a volatility index and a trending equity index on shared business days."""
    rng = np.random.default_rng(seed)
    dates = business_days(count, start)
    vol_regime = 0.01 + 0.02 * (np.sin(np.arange(count) / 40.0) > 0.3)
    index_steps = 0.0003 + vol_regime * rng.normal(size=count)
    index = 1000.0 * np.exp(np.cumsum(index_steps))
    target = 50.0 * np.exp(np.cumsum(0.8 * index_steps + 0.005 * rng.normal(size=count)))
    vix = 100.0 * vol_regime * np.exp(0.1 * rng.normal(size=count))
    return {
        "target": pd.Series(target, index=dates, name="target"),
        "vix": pd.Series(vix, index=dates, name="vix"),
        "index": pd.Series(index, index=dates, name="index"),
    }
