#!/usr/bin/env python3
"""
Synthetic Market Data Script

Writes a seeded data bundle the CLI can run on:
  data/panel/<factor>.csv   factor prices for `scenario_risk basel`
  data/market/*.csv         target, vix and index series for `scenario_risk scenarios`
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "src"))

from scenario_risk.market_data import write_csv  # noqa: E402
from scenario_risk.synthetic import synthetic_market, synthetic_prices  # noqa: E402

FACTORS = ["equity", "fx", "rates"]


def make_panel(out_dir, days, seed):
    # one stressed year in the middle of the history
    stress = (days // 3, days // 3 + 250)
    prices = synthetic_prices(days, FACTORS, seed=seed, stress=stress)
    for name in FACTORS:
        write_csv(prices[name], os.path.join(out_dir, "panel", f"{name}.csv"))
    print(f"✅ Wrote {len(FACTORS)} factor files with {days} days to {out_dir}/panel "
          f"(stress rows {stress[0]}..{stress[1]})")
    return prices


def make_market(out_dir, days, seed):
    market = synthetic_market(days, seed=seed)
    for name, series in market.items():
        write_csv(series, os.path.join(out_dir, "market", f"{name}.csv"))
    print(f"✅ Wrote target, vix and index series to {out_dir}/market")
    return market


def main():
    parser = argparse.ArgumentParser(description="Write seeded synthetic market data")
    parser.add_argument("--out", default="data")
    parser.add_argument("--days", type=int, default=1200)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    print("📊 Generating synthetic market data...")
    prices = make_panel(args.out, args.days, args.seed)
    make_market(args.out, args.days, args.seed + 1)
    print(f"SUCCESS: data bundle ready, first date {prices.index[0].date()}, last date {prices.index[-1].date()}")


if __name__ == "__main__":
    main()
