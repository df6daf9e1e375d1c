"""Finite probability spaces, empirical laws and single-scenario VaR / ES.

Losses are positive numbers. An ``EmpiricalDistribution`` is the law of one
risk under one scenario; ES is the exact integral of its step quantile
function, so no sampling or interpolation error enters any value computed
here.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, NotFoundError

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-12
DROP_TOL = 1e-15
# cumulative weights within this distance below a level count as reaching it
LEVEL_TOL = 1e-12


def _readonly(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Atomic law: strictly increasing support with positive weights summing to one."""

    values: np.ndarray
    weights: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        values = _readonly(self.values).ravel()
        weights = _readonly(self.weights).ravel()
        if values.size == 0:
            raise InvalidInputError("distribution needs at least one support point")
        if values.shape != weights.shape:
            raise InvalidInputError("values and weights differ in length")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("support values must be finite")
        if values.size > 1 and not np.all(np.diff(values) > 0):
            raise InvalidInputError("support values must be strictly increasing")
        if not np.all(weights > 0):
            raise InvalidInputError("weights must be strictly positive")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise InvalidInputError(f"weights sum to {weights.sum():.17g}, expected 1")
        cum = np.cumsum(weights)
        cum[-1] = 1.0
        cum.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_cum", cum)

    @property
    def size(self):
        return self.values.size

    @property
    def cumulative(self):
        return self._cum

    def mean(self):
        return float(np.dot(self.values, self.weights))

    def cdf(self, x):
        idx = np.searchsorted(self.values, x, side="right")
        return float(self._cum[idx - 1]) if idx > 0 else 0.0

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "EmpiricalDistribution":
        """Law of fn(X); fn acts on the support pointwise."""
        return canonical(fn(self.values), self.weights)

    def to_dict(self):
        return {"values": self.values.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping):
        try:
            return dist_from_samples(data["values"], data.get("weights"))
        except KeyError as exc:
            raise InvalidInputError("distribution JSON needs a 'values' array") from exc

    @classmethod
    def point_mass(cls, c: float):
        return cls(np.array([float(c)]), np.array([1.0]))


def canonical(values, weights) -> EmpiricalDistribution:
    """Merge duplicate atoms, sort, normalise and drop negligible mass."""
    values = np.asarray(values, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    support, inverse = np.unique(values, return_inverse=True)
    merged = np.bincount(inverse, weights=weights, minlength=support.size)
    merged = merged / merged.sum()
    keep = merged >= DROP_TOL
    support, merged = support[keep], merged[keep]
    return EmpiricalDistribution(support, merged / merged.sum())


def dist_from_samples(samples: Sequence[float], weights: Optional[Sequence[float]] = None) -> EmpiricalDistribution:
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise InvalidInputError("samples must be non-empty")
    if not np.all(np.isfinite(samples)):
        raise InvalidInputError("samples must be finite")
    if weights is None:
        weights = np.full(samples.size, 1.0 / samples.size)
    else:
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.shape != samples.shape:
            raise InvalidInputError("weights must match samples in length")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvalidInputError("weights must be finite and non-negative")
        if weights.sum() <= 0:
            raise InvalidInputError("weights must have a positive sum")
    return canonical(samples, weights)


def mixture(dists: Sequence[EmpiricalDistribution], weights: Optional[Sequence[float]] = None) -> EmpiricalDistribution:
    """Law of X under the mixture sum_i w_i Q_i given the laws under each Q_i."""
    if not dists:
        raise InvalidInputError("mixture needs at least one component")
    w = check_simplex(weights, len(dists)) if weights is not None else np.full(len(dists), 1.0 / len(dists))
    values = np.concatenate([d.values for d in dists])
    masses = np.concatenate([wi * d.weights for wi, d in zip(w, dists)])
    return canonical(values[masses > 0], masses[masses > 0])


def check_simplex(weights, n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != n:
        raise InvalidInputError(f"weight vector has length {w.size}, expected {n}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InvalidInputError("weight vector must be non-negative")
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise InvalidInputError(f"weight vector sums to {w.sum():.17g}, expected 1")
    return w / w.sum()


def _check_level(t, name="t", allow_one=True):
    t = float(t)
    upper_ok = t <= 1.0 if allow_one else t < 1.0
    if not (t > 0.0 and upper_ok):
        raise InvalidInputError(f"{name}={t} must lie in (0, 1{']' if allow_one else ')'}")
    return t


def quantile(d: EmpiricalDistribution, t: float) -> float:
    """Left-continuous generalised inverse F^{-1}(t) = inf{x : F(x) >= t}.

    F(x) >= t is tested as F(x) >= t - LEVEL_TOL, so a level less than
    LEVEL_TOL above a cumulative weight resolves to the atom ending there
    rather than the next one.
    """
    t = _check_level(t)
    idx = int(np.searchsorted(d.cumulative, t - LEVEL_TOL, side="left"))
    return float(d.values[min(idx, d.size - 1)])


def quantiles(d: EmpiricalDistribution, levels) -> np.ndarray:
    """Vectorised quantile for levels already known to lie in (0, 1]."""
    idx = np.searchsorted(d.cumulative, np.asarray(levels, dtype=float) - LEVEL_TOL, side="left")
    return d.values[np.minimum(idx, d.size - 1)]


def var(d: EmpiricalDistribution, p: float) -> float:
    return quantile(d, p)


def es(d: EmpiricalDistribution, p: float) -> float:
    """Exact ES: integral of the step quantile function over (p, 1] divided by 1 - p."""
    p = _check_level(p, "p")
    if p == 1.0:
        return float(d.values[-1])
    cum = d.cumulative
    prev = np.concatenate(([0.0], cum[:-1]))
    overlap = np.clip(cum - np.maximum(prev, p), 0.0, None)
    return float(np.dot(d.values, overlap) / (1.0 - p))


def tail_weights_uniform(m: int, p: float) -> np.ndarray:
    """Per-order-statistic weights of ES_p for m equally likely samples."""
    p = _check_level(p, "p")
    k = np.arange(m, dtype=float)
    if p == 1.0:
        w = np.zeros(m)
        w[-1] = 1.0
        return w
    overlap = np.clip((k + 1) / m - np.maximum(k / m, p), 0.0, None)
    return overlap / (1.0 - p)


def es_sorted_uniform(sorted_rows: np.ndarray, p: float) -> np.ndarray:
    """ES_p of each row of equally weighted samples; rows must be sorted ascending."""
    rows = np.atleast_2d(sorted_rows)
    return rows @ tail_weights_uniform(rows.shape[1], p)


@dataclass(frozen=True, eq=False)
class OutcomeTable:
    """Finite outcome space with named real-valued risks, one value per outcome."""

    outcome_count: int
    variables: Mapping[str, np.ndarray]

    def __post_init__(self):
        if int(self.outcome_count) < 1:
            raise InvalidInputError("outcome_count must be positive")
        frozen = {}
        for name, column in dict(self.variables).items():
            column = _readonly(column).ravel()
            if column.size != self.outcome_count:
                raise InvalidInputError(
                    f"variable {name!r} has {column.size} outcomes, expected {self.outcome_count}")
            frozen[name] = column
        object.__setattr__(self, "outcome_count", int(self.outcome_count))
        object.__setattr__(self, "variables", frozen)

    @classmethod
    def from_columns(cls, columns: Iterable[tuple[str, Sequence[float]]]):
        columns = list(columns)
        names = [name for name, _ in columns]
        if len(set(names)) != len(names):
            raise InvalidInputError("variable names must be unique")
        if not columns:
            raise InvalidInputError("table needs at least one variable")
        return cls(len(columns[0][1]), dict(columns))

    @property
    def names(self):
        return list(self.variables)

    def variable(self, name: str) -> np.ndarray:
        try:
            return self.variables[name]
        except KeyError:
            raise NotFoundError(f"unknown variable {name!r}", known=self.names) from None

    def add_variable(self, name: str, values) -> "OutcomeTable":
        if name in self.variables:
            raise InvalidInputError(f"variable {name!r} already exists")
        return OutcomeTable(self.outcome_count, {**self.variables, name: values})

    def to_dict(self):
        return {"outcome_count": self.outcome_count,
                "variables": {k: v.tolist() for k, v in self.variables.items()}}

    @classmethod
    def from_dict(cls, data: Mapping):
        return cls(int(data["outcome_count"]), dict(data["variables"]))


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    """Ordered named scenarios as probability vectors over a shared outcome index."""

    names: tuple
    weights: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != len(names) or not names:
            raise InvalidInputError("need one weight vector per scenario name")
        if len(set(names)) != len(names):
            raise InvalidInputError("scenario names must be unique")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidInputError("scenario weights must be non-negative")
        sums = w.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > WEIGHT_TOL)
        if bad.size:
            raise InvalidInputError(f"scenario {names[bad[0]]!r} weights sum to {sums[bad[0]]:.17g}")
        w = w / sums[:, None]
        w.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "weights", w)

    @property
    def outcome_count(self):
        return self.weights.shape[1]

    @property
    def size(self):
        return len(self.names)

    @property
    def mutually_singular(self) -> bool:
        return check_mutually_singular(self)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise NotFoundError(f"unknown scenario {name!r}", known=list(self.names)) from None

    def scenario(self, name: str) -> np.ndarray:
        return self.weights[self.index(name)]

    def mixture(self, weights=None) -> np.ndarray:
        w = np.full(self.size, 1.0 / self.size) if weights is None else check_simplex(weights, self.size)
        return w @ self.weights

    @classmethod
    def uniform_on(cls, names, supports, outcome_count: int):
        """Scenario i uniform on the outcome indices supports[i]."""
        rows = np.zeros((len(names), outcome_count))
        for row, cells in zip(rows, supports):
            cells = list(cells)
            if not cells:
                raise InvalidInputError("a uniform scenario needs a non-empty support")
            row[cells] = 1.0 / len(cells)
        return cls(tuple(names), rows)

    @classmethod
    def from_partition(cls, base, cells, names=None):
        """Conditionals of the base measure on each cell of a partition."""
        base = np.asarray(base, dtype=float)
        rows = []
        for cell in cells:
            row = np.zeros_like(base)
            idx = list(cell)
            row[idx] = base[idx]
            mass = row.sum()
            if mass <= 0:
                raise InvalidInputError("partition cell has zero base probability")
            rows.append(row / mass)
        names = names or [f"Q{i + 1}" for i in range(len(rows))]
        return cls(tuple(names), np.vstack(rows))

    def to_dict(self):
        return {"names": list(self.names), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping):
        return cls(tuple(data["names"]), np.asarray(data["weights"], dtype=float))


def scenario_distribution(t: OutcomeTable, s: ScenarioSet, variable: str, scenario: str) -> EmpiricalDistribution:
    column = t.variable(variable)
    w = s.scenario(scenario)
    if s.outcome_count != t.outcome_count:
        raise InvalidInputError("scenario set and outcome table disagree on the outcome count")
    keep = w > 0
    return canonical(column[keep], w[keep])


def check_mutually_singular(s: ScenarioSet) -> bool:
    """Supports pairwise disjoint (which also rules out identical scenarios)."""
    if s.size == 1:
        return True
    support = s.weights > 0
    return bool(np.all(support.sum(axis=0) <= 1))
