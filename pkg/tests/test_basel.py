import logging
import time

import numpy as np
import pandas as pd
import pytest

from scenario_risk.basel import (
    ROLLING_COLUMNS,
    PortfolioPanel,
    current_es,
    dependence_adjusted_es,
    history_losses,
    imcc,
    portfolio_loss_series,
    required_history,
    rolling_series,
    stress_adjusted_es,
    stressed_es,
    theta,
    window_es,
)
from scenario_risk.config import BaselConfig
from scenario_risk.errors import (
    DegenerateDenominatorError,
    InsufficientDataError,
    InvalidInputError,
    NotFoundError,
)
from scenario_risk.measure_core import dist_from_samples, es
from scenario_risk.synthetic import synthetic_prices

DAYS = pd.bdate_range("2021-01-04", periods=10, name="date")


def hand_panel():
    """Three factors with unit exposures; C never moves."""
    returns = pd.DataFrame({
        "A": [1.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        "B": [0.5, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        "C": [0.0] * 10,
    }, index=DAYS)
    return PortfolioPanel(returns, pd.DataFrame(1.0, index=DAYS, columns=returns.columns))


def small_cfg(**overrides):
    values = {"p": 0.5, "current_window": 4, "lookback_windows": 1}
    values.update(overrides)
    return BaselConfig(**values)


@pytest.fixture(scope="module")
def stressed_panel(stressed_prices):
    return PortfolioPanel.from_prices(stressed_prices)


STRESS_CFG = dict(p=0.975, current_window=60, lookback_windows=400)


class TestPanel:
    def test_from_prices_losses_and_default_units(self):
        prices = pd.DataFrame({"A": [100.0, 110.0, 99.0]}, index=DAYS[:3])
        panel = PortfolioPanel.from_prices(prices)
        assert panel.returns["A"].tolist() == pytest.approx([-0.1, 0.1])
        assert panel.exposures["A"].tolist() == pytest.approx([1.0, 1.1])

    def test_explicit_units(self):
        prices = pd.DataFrame({"A": [100.0, 110.0]}, index=DAYS[:2])
        panel = PortfolioPanel.from_prices(prices, units={"A": 3.0})
        assert panel.exposures["A"].iloc[0] == pytest.approx(300.0)

    def test_rejects_non_positive_prices(self):
        with pytest.raises(InvalidInputError):
            PortfolioPanel.from_prices(pd.DataFrame({"A": [1.0, 0.0]}, index=DAYS[:2]))

    def test_as_of_must_be_panel_date(self):
        with pytest.raises(NotFoundError):
            hand_panel().position("2021-01-09")

    def test_unknown_factor(self):
        with pytest.raises(NotFoundError):
            portfolio_loss_series(hand_panel(), ["Z"], (DAYS[0], DAYS[3]))

    def test_portfolio_loss_series(self):
        law = portfolio_loss_series(hand_panel(), ["A", "B"], (DAYS[0], DAYS[3]))
        assert law.values.tolist() == [0.5, 1.5, 2.0]
        assert es(law, 0.5) == pytest.approx(1.75)


class TestHistory:
    def test_strictly_before_as_of(self):
        dates, losses = history_losses(hand_panel(), small_cfg(), DAYS[4], 4)
        assert list(dates) == list(DAYS[:4])
        assert losses[:, 0].tolist() == [1.0, 0.0, 2.0, 1.0]

    def test_required_history(self):
        assert required_history(BaselConfig()) == 250 + 2251 - 1

    def test_insufficient_history_names_earliest_date(self):
        with pytest.raises(InsufficientDataError) as info:
            history_losses(hand_panel(), small_cfg(), DAYS[2], 4)
        assert info.value.details["earliest_feasible_date"] == DAYS[4]
        assert info.value.exit_code == 4

    def test_window_es_matches_direct(self, rng):
        losses = rng.normal(size=120)
        values = window_es(losses, 30, 0.9)
        assert len(values) == 91
        for k in (0, 45, 90):
            assert values[k] == pytest.approx(es(dist_from_samples(losses[k:k + 30]), 0.9), abs=1e-12)


class TestTheta:
    def test_hand_example(self):
        result = theta(hand_panel(), small_cfg(reduced_set=["A"]), DAYS[4])
        assert result.es_full == pytest.approx(1.75)
        assert result.es_reduced == pytest.approx(1.5)
        assert result.theta == pytest.approx(7 / 6)
        assert not result.cap_exceeded

    def test_floor_at_one(self):
        result = theta(hand_panel(), small_cfg(reduced_set=["A", "B"]), DAYS[4])
        assert result.theta == 1.0

    def test_full_reduced_set_is_one(self):
        assert theta(hand_panel(), small_cfg(), DAYS[4]).theta == 1.0

    def test_full_set_on_flat_prices_skips_division(self):
        flat = pd.DataFrame({"A": [0.0] * 10}, index=DAYS)
        panel = PortfolioPanel(flat, pd.DataFrame(1.0, index=DAYS, columns=["A"]))
        assert theta(panel, small_cfg(), DAYS[4]).theta == 1.0

    def test_degenerate_reduced_set(self):
        with pytest.raises(DegenerateDenominatorError):
            theta(hand_panel(), small_cfg(reduced_set=["C"]), DAYS[4])

    def test_cap_breach_is_flagged(self, caplog):
        cfg = small_cfg(reduced_set=["A"], theta_cap=1.1)
        with caplog.at_level(logging.WARNING, logger="scenario_risk.basel"):
            result = theta(hand_panel(), cfg, DAYS[4])
        assert result.cap_exceeded
        assert "reaches the cap" in caplog.text

    def test_weekly_refresh_uses_first_day_of_week(self, stressed_panel):
        cfg = BaselConfig(**STRESS_CFG, theta_refresh="weekly", reduced_set=["eq", "fx"])
        daily = BaselConfig(**STRESS_CFG, reduced_set=["eq", "fx"])
        dates = stressed_panel.dates
        monday = next(d for d in dates[500:] if d.dayofweek == 0)
        wednesday = monday + pd.Timedelta(days=2)
        weekly_result = theta(stressed_panel, cfg, wednesday)
        assert weekly_result.computed_on == monday
        assert weekly_result.theta == theta(stressed_panel, daily, monday).theta


class TestStressedES:
    def test_argmax_lies_in_stress_period(self, stressed_panel):
        cfg = BaselConfig(**STRESS_CFG)
        as_of = stressed_panel.dates[700]
        result = stressed_es(stressed_panel, cfg, as_of)
        dates = stressed_panel.dates
        assert dates[200] <= result.window_start
        assert result.window_end <= dates[449]

    def test_matches_full_scan(self, stressed_panel):
        cfg = BaselConfig(**STRESS_CFG)
        as_of = stressed_panel.dates[700]
        _, losses = history_losses(stressed_panel, cfg, as_of, required_history(cfg))
        series = losses.sum(axis=1)
        scan = [es(dist_from_samples(series[k:k + 60]), 0.975) for k in range(len(series) - 59)]
        result = stressed_es(stressed_panel, cfg, as_of)
        assert result.es_rs == pytest.approx(max(scan), abs=1e-12)
        assert result.es_current == pytest.approx(scan[-1], abs=1e-12)

    def test_monotone_in_lookback(self, stressed_panel):
        as_of = stressed_panel.dates[700]
        values = [stressed_es(stressed_panel, BaselConfig(p=0.975, current_window=60, lookback_windows=n),
                              as_of).es_rs for n in (1, 50, 200, 400)]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_single_window_is_current(self, stressed_panel):
        cfg = BaselConfig(p=0.975, current_window=60, lookback_windows=1)
        as_of = stressed_panel.dates[700]
        result = stressed_es(stressed_panel, cfg, as_of)
        assert result.lag == 1
        assert result.es_rs == pytest.approx(current_es(stressed_panel, cfg, as_of), abs=1e-12)

    def test_ties_take_earliest_window(self):
        returns = pd.DataFrame({"A": [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]}, index=DAYS[:7])
        panel = PortfolioPanel(returns, pd.DataFrame(1.0, index=DAYS[:7], columns=["A"]))
        result = stressed_es(panel, small_cfg(current_window=1, lookback_windows=6), DAYS[6])
        assert result.window_start == DAYS[0]
        assert result.lag == 6


class TestCharge:
    def class_cfg(self, **overrides):
        values = dict(STRESS_CFG, reduced_set=["eq", "fx"],
                      risk_classes={"equity": ["eq"], "macro": ["fx", "rates"]})
        values.update(overrides)
        return BaselConfig(**values)

    def test_stress_adjusted_is_product(self, stressed_panel):
        cfg = self.class_cfg()
        as_of = stressed_panel.dates[700]
        result = stress_adjusted_es(stressed_panel, cfg, as_of)
        assert result.es_tilde == pytest.approx(result.stressed.es_rs * result.theta.theta)
        assert result.theta.theta >= 1.0

    def test_imcc_blend(self, stressed_panel):
        cfg = self.class_cfg(lambda_=0.3)
        result = imcc(stressed_panel, cfg, stressed_panel.dates[700])
        es_tilde, es_c = result.total.es_tilde, result.dependence.es_c
        assert result.imcc == pytest.approx(0.3 * es_tilde + 0.7 * es_c)
        assert min(es_tilde, es_c) - 1e-12 <= result.imcc <= max(es_tilde, es_c) + 1e-12
        assert isinstance(result.dependence.dominates_total, bool)
        payload = result.to_dict()
        assert set(payload["per_class"]) == {"equity", "macro"}
        assert payload["components"]["theta"] == result.total.theta.theta

    def test_lambda_one_is_stress_adjusted(self, stressed_panel):
        result = imcc(stressed_panel, self.class_cfg(lambda_=1.0), stressed_panel.dates[700])
        assert result.imcc == pytest.approx(result.total.es_tilde)

    def test_scaling_exposures_scales_charge(self, stressed_panel):
        cfg = self.class_cfg()
        as_of = stressed_panel.dates[700]
        base = imcc(stressed_panel, cfg, as_of).imcc
        assert imcc(stressed_panel.scaled(2.0), cfg, as_of).imcc == pytest.approx(2.0 * base, rel=1e-12)

    def test_class_without_reduced_factor_falls_back(self, stressed_panel, caplog):
        cfg = self.class_cfg(reduced_set=["eq"])
        with caplog.at_level(logging.WARNING, logger="scenario_risk.basel"):
            result = dependence_adjusted_es(stressed_panel, cfg, stressed_panel.dates[700])
        assert "no reduced-set factor" in caplog.text
        assert result.per_class["macro"].theta.theta == 1.0

    def test_classes_must_partition(self, stressed_panel):
        cfg = self.class_cfg(risk_classes={"equity": ["eq"], "macro": ["fx"]})
        with pytest.raises(InvalidInputError):
            imcc(stressed_panel, cfg, stressed_panel.dates[700])

    def test_frozen_exposures(self, stressed_panel):
        frozen = {"eq": 1.0, "fx": 1.0, "rates": 1.0}
        cfg = self.class_cfg(exposure_mode="frozen", frozen_exposures=frozen)
        as_of = stressed_panel.dates[700]
        _, losses = history_losses(stressed_panel, cfg, as_of, 5)
        np.testing.assert_array_equal(losses, stressed_panel.returns.iloc[695:700].to_numpy())


def full_scan_charge(prices, k, p, window, lookback, reduced, classes, lam):
    """Stress-adjusted charge recomputed from raw prices, one ES per window."""
    returns = (1.0 - prices / prices.shift(1)).iloc[1:]
    exposure = prices.iloc[k] / prices.iloc[0]
    days = window + lookback - 1
    history = returns.iloc[k - days:k] * exposure

    def window_value(factors, first):
        return es(dist_from_samples(history[factors].iloc[first:first + window].sum(axis=1).to_numpy()), p)

    def stress_adjusted(full, part):
        scan = max(window_value(part, j) for j in range(lookback))
        if set(part) == set(full):
            return scan
        return scan * max(window_value(full, lookback - 1) / window_value(part, lookback - 1), 1.0)

    total = stress_adjusted(list(prices.columns), reduced)
    by_class = sum(stress_adjusted(members, [f for f in members if f in reduced] or members)
                   for members in classes.values())
    return lam * total + (1.0 - lam) * by_class, total, by_class


class TestGoldenCharge:
    CLASSES = {"equity": ["eq"], "macro": ["fx", "rates"]}

    @pytest.mark.parametrize("k", [500, 700, 850])
    def test_golden_imcc_on_synthetic_fixture(self, stressed_prices, stressed_panel, k):
        cfg = BaselConfig(**STRESS_CFG, lambda_=0.4, reduced_set=["eq", "fx"], risk_classes=self.CLASSES)
        expected, total, by_class = full_scan_charge(stressed_prices, k, 0.975, 60, 400, ["eq", "fx"],
                                                     self.CLASSES, 0.4)
        result = imcc(stressed_panel, cfg, stressed_panel.dates[k])
        assert result.total.es_tilde == pytest.approx(total, rel=1e-9)
        assert result.dependence.es_c == pytest.approx(by_class, rel=1e-9)
        assert result.imcc == pytest.approx(expected, rel=1e-9)

    def test_full_lookback_scan_is_fast(self):
        prices = synthetic_prices(2600, ["eq", "fx"], seed=11, stress=(600, 900))
        panel = PortfolioPanel.from_prices(prices)
        cfg = BaselConfig(p=0.975, current_window=250, lookback_windows=2251)
        as_of = panel.dates[-1]
        started = time.perf_counter()
        result = stressed_es(panel, cfg, as_of)
        elapsed = time.perf_counter() - started
        assert elapsed < 10.0
        _, losses = history_losses(panel, cfg, as_of, required_history(cfg))
        series = losses.sum(axis=1)
        first = 2251 - result.lag
        assert result.es_rs == pytest.approx(es(dist_from_samples(series[first:first + 250]), 0.975), abs=1e-12)
        for j in range(0, 2251, 150):
            assert es(dist_from_samples(series[j:j + 250]), 0.975) <= result.es_rs + 1e-12


class TestRollingSeries:
    def test_mes_dominates_es(self, stressed_panel):
        cfg = BaselConfig(p=0.975, current_window=60, lookback_windows=100)
        dates = stressed_panel.dates
        frame = rolling_series(stressed_panel, cfg, dates[300], dates[340], n_jobs=2)
        assert list(frame.columns) == ROLLING_COLUMNS
        assert len(frame) == 41
        assert (frame["mes"] >= frame["es"] - 1e-12).all()
        assert (frame["pct_mes"] >= frame["pct_es"] - 1e-12).all()

    def test_rows_without_history_are_nan(self, stressed_panel):
        cfg = BaselConfig(p=0.975, current_window=60, lookback_windows=100)
        dates = stressed_panel.dates
        frame = rolling_series(stressed_panel, cfg, dates[150], dates[165])
        needed = required_history(cfg)
        early = frame["date"] < dates[needed]
        assert frame.loc[early, "es"].isna().all()
        assert frame.loc[~early, "es"].notna().all()

    def test_constant_prices_give_zero(self):
        dates = pd.bdate_range("2022-01-03", periods=40)
        prices = pd.DataFrame({"A": [50.0] * 40, "B": [20.0] * 40}, index=dates)
        panel = PortfolioPanel.from_prices(prices)
        cfg = BaselConfig(p=0.975, current_window=10, lookback_windows=5)
        frame = rolling_series(panel, cfg, panel.dates[20], panel.dates[-1])
        assert (frame[["es", "mes", "pct_es", "pct_mes"]] == 0.0).all().all()

    def test_empty_range(self, stressed_panel):
        with pytest.raises(InvalidInputError):
            rolling_series(stressed_panel, BaselConfig(), "1990-01-01", "1990-02-01")
