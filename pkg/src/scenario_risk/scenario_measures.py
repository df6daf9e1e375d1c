"""Scenario-based ES family over a finite collection of scenarios.

All measures take the per-scenario laws of one risk (``ScenarioDistributions``)
and are evaluated exactly: iMES integrates the pointwise maximum of the step
quantile functions over the union of their breakpoints, and rMES builds the
law of the maximum of independent copies through the product of the CDFs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import InvalidInputError
from .measure_core import (
    WEIGHT_TOL,
    EmpiricalDistribution,
    OutcomeTable,
    ScenarioSet,
    _check_level,
    canonical,
    check_simplex,
    es,
    quantiles,
    scenario_distribution,
    var,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ScenarioDistributions:
    """Per-scenario laws F_{X,Q_1}, ..., F_{X,Q_n} of one risk, in scenario order."""

    entries: tuple
    mutually_singular: Optional[bool] = None

    def __post_init__(self):
        entries = tuple((str(name), dist) for name, dist in self.entries)
        if not entries:
            raise InvalidInputError("at least one scenario distribution is required")
        names = [name for name, _ in entries]
        if len(set(names)) != len(names):
            raise InvalidInputError("scenario names must be unique")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    @property
    def names(self):
        return [name for name, _ in self.entries]

    @property
    def dists(self):
        return [dist for _, dist in self.entries]

    @classmethod
    def from_table(cls, t: OutcomeTable, s: ScenarioSet, variable: str):
        entries = [(name, scenario_distribution(t, s, variable, name)) for name in s.names]
        return cls(tuple(entries), mutually_singular=s.mutually_singular)

    @classmethod
    def single(cls, d: EmpiricalDistribution, name="P"):
        return cls(((name, d),), mutually_singular=True)

    def map(self, fn):
        return ScenarioDistributions(tuple((n, d.map(fn)) for n, d in self.entries), self.mutually_singular)

    def to_dict(self):
        payload = {"scenarios": [{"name": n, **d.to_dict()} for n, d in self.entries]}
        if self.mutually_singular is not None:
            payload["mutually_singular"] = self.mutually_singular
        return payload

    @classmethod
    def from_dict(cls, data: Mapping):
        try:
            items = data["scenarios"]
        except KeyError as exc:
            raise InvalidInputError("scenario JSON needs a 'scenarios' array") from exc
        entries = [(item.get("name", f"Q{i + 1}"), EmpiricalDistribution.from_dict(item))
                   for i, item in enumerate(items)]
        return cls(tuple(entries), mutually_singular=data.get("mutually_singular"))


def _open_level(p):
    return _check_level(p, "p", allow_one=False)


def mes(sd: ScenarioDistributions, p: float) -> float:
    p = _open_level(p)
    return max(es(d, p) for d in sd.dists)


def mvar(sd: ScenarioDistributions, p: float) -> float:
    p = _check_level(p, "p")
    return max(var(d, p) for d in sd.dists)


def aes(sd: ScenarioDistributions, p: float, weights: Optional[Sequence[float]] = None) -> float:
    p = _open_level(p)
    n = len(sd)
    w = np.full(n, 1.0 / n) if weights is None else check_simplex(weights, n)
    values = np.array([es(d, p) for d in sd.dists])
    return float(np.dot(w, values))


def _breakpoints(dists, above=0.0):
    levels = np.unique(np.concatenate([d.cumulative for d in dists]))
    levels = levels[levels > above]
    if levels.size == 0 or levels[-1] != 1.0:
        levels = np.append(levels, 1.0)
    return levels


def max_quantile_steps(sd: ScenarioDistributions, above=0.0):
    """Edges and values of q -> max_i F_i^{-1}(q) on (above, 1].

    The maximum is constant on each interval (edges[k], edges[k + 1]] and
    equals its value at the right end because every quantile function is
    left-continuous.
    """
    levels = _breakpoints(sd.dists, above)
    edges = np.concatenate(([above], levels))
    top = np.max(np.vstack([quantiles(d, levels) for d in sd.dists]), axis=0)
    return edges, top


def imes(sd: ScenarioDistributions, p: float) -> float:
    p = _open_level(p)
    edges, top = max_quantile_steps(sd, p)
    return float(np.dot(np.diff(edges), top) / (1.0 - p))


def max_quantile_law(sd: ScenarioDistributions) -> EmpiricalDistribution:
    """Law of max_i F_i^{-1}(U) for U uniform on (0, 1]."""
    edges, top = max_quantile_steps(sd, 0.0)
    mass = np.diff(edges)
    keep = mass > 0
    return canonical(top[keep], mass[keep])


def es_of_max_quantile(sd: ScenarioDistributions, p: float) -> float:
    """iMES computed as ES of the max-quantile law; independent of ``imes``."""
    return es(max_quantile_law(sd), _open_level(p))


def max_law(dists: Sequence[EmpiricalDistribution]) -> EmpiricalDistribution:
    """Law of max(X_1, ..., X_n) for independent X_i with the given laws."""
    if not dists:
        raise InvalidInputError("max_law needs at least one distribution")
    support = np.unique(np.concatenate([d.values for d in dists]))
    joint = np.ones(support.size)
    for d in dists:
        idx = np.searchsorted(d.values, support, side="right") - 1
        joint *= np.where(idx >= 0, d.cumulative[np.maximum(idx, 0)], 0.0)
    joint[-1] = 1.0
    mass = np.clip(np.diff(np.concatenate(([0.0], joint))), 0.0, None)
    keep = mass > 0
    return canonical(support[keep], mass[keep])


def rmes(sd: ScenarioDistributions, p: float) -> float:
    p = _open_level(p)
    return es(max_law(sd.dists), p)


def minvar(d: EmpiricalDistribution, n: int, p: float = 0.0) -> float:
    """ES of the maximum of n iid copies; p = 0 gives the plain expectation."""
    if int(n) != n or n < 1:
        raise InvalidInputError(f"n={n} must be a positive integer")
    law = max_law([d] * int(n))
    if p == 0:
        return law.mean()
    return es(law, _check_level(p, "p"))


@dataclass(frozen=True)
class DominanceReport:
    p: float
    mvar: float
    var_base: float
    imes: float
    es_base: float
    mvar_dominates: bool
    imes_dominates: bool

    def to_dict(self):
        return dict(self.__dict__)


def _check_partition(partition: ScenarioSet, base: np.ndarray):
    support = partition.weights > 0
    if np.any(support.sum(axis=0) > 1):
        raise InvalidInputError("partition scenarios must have disjoint supports")
    base_support = base > 0
    if np.any(base_support & ~support.any(axis=0)):
        raise InvalidInputError("partition cells must cover the support of the base measure")
    for name, row, cell in zip(partition.names, partition.weights, support):
        mass = base[cell].sum()
        if mass <= 0:
            raise InvalidInputError(f"scenario {name!r} lives outside the base support")
        expected = np.where(cell, base / mass, 0.0)
        if not np.allclose(row, expected, rtol=0.0, atol=WEIGHT_TOL):
            raise InvalidInputError(f"scenario {name!r} is not the base conditional on its support")


def conditional_dominance_check(t: OutcomeTable, partition: ScenarioSet, base, variable: str,
                                p: float) -> DominanceReport:
    """MVaR against VaR and iMES against ES under the base measure, for a conditional family."""
    p = _open_level(p)
    base = np.asarray(base, dtype=float)
    if base.size != t.outcome_count or abs(base.sum() - 1.0) > WEIGHT_TOL or np.any(base < 0):
        raise InvalidInputError("base must be a probability vector over the table's outcomes")
    _check_partition(partition, base)
    sd = ScenarioDistributions.from_table(t, partition, variable)
    column = t.variable(variable)
    keep = base > 0
    base_law = canonical(column[keep], base[keep])
    upper_var, base_var = mvar(sd, p), var(base_law, p)
    upper_es, base_es = imes(sd, p), es(base_law, p)
    # iMES and ES sum over different breakpoint sets; allow rounding only
    tol = 1e-12 * max(1.0, abs(base_es))
    return DominanceReport(p=p, mvar=upper_var, var_base=base_var, imes=upper_es, es_base=base_es,
                           mvar_dominates=upper_var >= base_var,
                           imes_dominates=upper_es >= base_es - tol)


def vector_measure(measure, s: ScenarioSet, **kwargs):
    """Turn a measure on scenario laws into a function of a loss vector over the outcomes of ``s``.

    Used by the axiom probes, which perturb loss vectors directly.
    """
    singular = s.mutually_singular

    def evaluate(x):
        x = np.asarray(x, dtype=float).ravel()
        if x.size != s.outcome_count:
            raise InvalidInputError(f"loss vector has {x.size} outcomes, scenarios {s.outcome_count}")
        entries = []
        for name, row in zip(s.names, s.weights):
            keep = row > 0
            entries.append((name, canonical(x[keep], row[keep])))
        return measure(ScenarioDistributions(tuple(entries), mutually_singular=singular), **kwargs)
    return evaluate
