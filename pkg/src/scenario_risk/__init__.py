"""Scenario-based risk measures: ES families over scenario collections, Choquet
representations and an internal-model market-risk pipeline."""

__version__ = "0.1.0"

from .measure_core import EmpiricalDistribution, OutcomeTable, ScenarioSet, es, quantile, var
from .scenario_measures import ScenarioDistributions, aes, imes, mes, minvar, mvar, rmes

__all__ = [
    "__version__",
    "EmpiricalDistribution", "OutcomeTable", "ScenarioSet", "ScenarioDistributions",
    "quantile", "var", "es", "mes", "mvar", "aes", "imes", "rmes", "minvar",
]
