"""Small hand-checkable instances shared by the tests and the CLI."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .choquet import DistortionSpec
from .measure_core import OutcomeTable, ScenarioSet


@dataclass(frozen=True, eq=False)
class Fixture:
    table: OutcomeTable
    scenarios: ScenarioSet
    variable: str
    p: float
    base: Optional[np.ndarray] = None


def two_regime_uniform_example() -> Fixture:
    """Eight equally likely outcomes split into two uniform scenarios.

    X is 1 on the first four outcomes and 2 on the last. At p = 0.5:
    ES under the uniform base 1.25, MES 1, AES 1, iMES 1.5, rMES 1.5, MVaR 1.
    """
    x = np.array([1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 2.0])
    table = OutcomeTable(8, {"X": x})
    scenarios = ScenarioSet.uniform_on(["Q1", "Q2"], [range(0, 4), range(4, 8)], 8)
    return Fixture(table, scenarios, "X", 0.5, np.full(8, 1.0 / 8))


def comonotonic_gap_example() -> Fixture:
    """X = 1{Z >= 2} and Y = 1{Z >= 1} are comonotonic, yet MES(X + Y) = 1.0 < MES(X) + MES(Y) = 1.2 at p = 0.5."""
    table = OutcomeTable(3, {
        "X": [1.0, 0.0, 0.0],
        "Y": [1.0, 1.0, 0.0],
        "Z": [2.0, 1.0, 0.0],
    })
    scenarios = ScenarioSet(("Q1", "Q2"), np.array([[0.2, 0.0, 0.8], [0.1, 0.3, 0.6]]))
    return Fixture(table, scenarios, "Z", 0.5)


def density_ratio_atomization(cells_per_half: int = 2) -> ScenarioSet:
    """Two scenarios on 2j cells with densities 1/(3j), 2/(3j) and the mirror image."""
    j = int(cells_per_half)
    low, high = 1.0 / (3 * j), 2.0 / (3 * j)
    q1 = np.array([low] * j + [high] * j)
    return ScenarioSet(("Q1", "Q2"), np.vstack([q1, q1[::-1]]))


def two_s_minus_t() -> DistortionSpec:
    """psi(s, t) = 2s - t: decreasing in t, but increasing on the range of the atomized pair."""
    return DistortionSpec.custom(2, lambda x: 2.0 * x[..., 0] - x[..., 1], vectorized=True,
                                 check_range=False, name="two_s_minus_t")


FIXTURES = {
    "two-regime": two_regime_uniform_example,
    "comonotonic-gap": comonotonic_gap_example,
}
