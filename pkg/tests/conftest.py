import json
import logging

import numpy as np
import pytest

from scenario_risk.fixtures import comonotonic_gap_example, two_regime_uniform_example
from scenario_risk.market_data import write_csv
from scenario_risk.synthetic import synthetic_market, synthetic_prices


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture
def two_regime():
    return two_regime_uniform_example()


@pytest.fixture
def comonotonic_gap():
    return comonotonic_gap_example()


@pytest.fixture(scope="session")
def stressed_prices():
    """Three factors over 900 days with a high-volatility year in rows 200..450."""
    return synthetic_prices(900, ["eq", "fx", "rates"], seed=7, stress=(200, 450))


@pytest.fixture
def panel_dir(tmp_path, stressed_prices):
    directory = tmp_path / "panel"
    for name in stressed_prices.columns:
        write_csv(stressed_prices[name], directory / f"{name}.csv")
    return directory


@pytest.fixture
def market_dir(tmp_path):
    directory = tmp_path / "market"
    for name, series in synthetic_market(400, seed=3).items():
        write_csv(series, directory / f"{name}.csv")
    return directory


@pytest.fixture
def write_json_file(tmp_path):
    def write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return path
    return write


@pytest.fixture(autouse=True)
def drop_cli_log_handlers():
    # main() reconfigures the root logger with a handler bound to the captured stderr
    before = list(logging.getLogger().handlers)
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if handler not in before and type(handler) in (logging.StreamHandler, logging.FileHandler):
            root.removeHandler(handler)
            handler.close()
