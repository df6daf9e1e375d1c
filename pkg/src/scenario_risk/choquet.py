"""Set functions on finite outcome spaces, Choquet integrals and axiom checks.

Subsets of an m-outcome space are boolean membership vectors; tabulated set
functions index subsets by bitmask, bit j standing for outcome j. Checkers
enumerate the subset lattice exhaustively and refuse spaces above their caps.
Counterexamples report outcomes 1-based.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .errors import AxiomViolationError, CapExceededError, InvalidInputError
from .measure_core import EmpiricalDistribution, OutcomeTable, ScenarioSet, check_simplex

logger = logging.getLogger(__name__)

STANDARD_TOL = 1e-12
MONOTONE_CAP = 12
SUBMODULAR_CAP = 10
TABULATE_CAP = 20
DEFAULT_GRID_K = 20
GRID_POINT_CAP = 2_000_000


def subset_matrix(m: int) -> np.ndarray:
    """Row b is the membership vector of the subset with bitmask b."""
    masks = np.arange(1 << m, dtype=np.int64)
    return ((masks[:, None] >> np.arange(m)) & 1).astype(bool)


def mask_to_outcomes(mask: int) -> list[int]:
    return [j + 1 for j in range(int(mask).bit_length()) if (int(mask) >> j) & 1]


class SetFunction:
    """A set function c on the subsets of {1, ..., m}.

    Either a dense table of 2**m values or a batch evaluator mapping a
    (k, m) boolean matrix of subsets to k values.
    """

    def __init__(self, space_size: int, batch: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 table: Optional[np.ndarray] = None):
        if space_size < 1:
            raise InvalidInputError("set function needs a non-empty space")
        if batch is None and table is None:
            raise InvalidInputError("set function needs an evaluator or a table")
        self.space_size = int(space_size)
        self._batch = batch
        self._table = None
        if table is not None:
            table = np.asarray(table, dtype=float).ravel()
            if table.size != 1 << self.space_size:
                raise InvalidInputError(f"table must hold 2**{space_size} values")
            table.setflags(write=False)
            self._table = table

    @classmethod
    def from_table(cls, table):
        table = np.asarray(table, dtype=float).ravel()
        m = int(table.size).bit_length() - 1
        if m < 1 or table.size != 1 << m:
            raise InvalidInputError("table length must be a power of two")
        return cls(m, table=table)

    @classmethod
    def from_callable(cls, space_size: int, fn: Callable[[np.ndarray], float]):
        """Wrap a scalar evaluator taking one membership vector."""
        return cls(space_size, batch=lambda members: np.array([fn(row) for row in members], dtype=float))

    @classmethod
    def from_measure(cls, q):
        q = np.asarray(q, dtype=float)
        return cls(q.size, batch=lambda members: members @ q)

    def evaluate(self, members: np.ndarray) -> np.ndarray:
        members = np.atleast_2d(np.asarray(members, dtype=bool))
        if members.shape[1] != self.space_size:
            raise InvalidInputError("membership vectors must have one entry per outcome")
        if self._table is not None:
            masks = members.astype(np.int64) @ (np.int64(1) << np.arange(self.space_size, dtype=np.int64))
            return self._table[masks]
        return np.asarray(self._batch(members), dtype=float)

    def __call__(self, members) -> float:
        return float(self.evaluate(members)[0])

    def tabulate(self, cap: int = TABULATE_CAP) -> np.ndarray:
        if self._table is None:
            if self.space_size > cap:
                raise CapExceededError(f"cannot tabulate 2**{self.space_size} subsets (cap {cap})",
                                       space_size=self.space_size, cap=cap)
            table = self.evaluate(subset_matrix(self.space_size))
            table.setflags(write=False)
            self._table = table
        return self._table


@dataclass(frozen=True)
class AxiomVerdict:
    property: str
    holds: bool
    certified: str = "exhaustive"
    witness_sets: Optional[list] = None
    witness_points: Optional[list] = None
    values: Optional[list] = None
    note: Optional[str] = None

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict[str, Any]:
        payload = {"type": self.property, "holds": self.holds, "certified": self.certified}
        for key in ("witness_sets", "witness_points", "values", "note"):
            value = getattr(self, key)
            if value is not None:
                payload[key] = value
        return payload


# -- distortions -------------------------------------------------------------

def _apply_rowwise(fn):
    def vectorised(x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, x.shape[-1])
        out = np.array([fn(row) for row in flat], dtype=float)
        return out.reshape(x.shape[:-1])
    return vectorised


@dataclass(frozen=True, eq=False)
class DistortionSpec:
    """A distortion psi: [0, 1]^n -> [0, 1] acting on scenario probabilities.

    ``fn`` is vectorised over the last axis: an array of shape (..., n)
    maps to shape (...).
    """

    arity: int
    family: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    params: dict = field(default_factory=dict)
    check_range: bool = True

    def __post_init__(self):
        if self.arity < 1:
            raise InvalidInputError("distortion arity must be positive")
        zero, one = self(np.zeros(self.arity)), self(np.ones(self.arity))
        if abs(zero) > STANDARD_TOL or abs(one - 1.0) > STANDARD_TOL:
            raise InvalidInputError(f"{self.family} distortion needs psi(0)=0 and psi(1)=1, "
                                    f"got {zero:.6g} and {one:.6g}")
        if self.check_range:
            values = self.fn(_range_sample(self.arity))
            if np.any(values < -STANDARD_TOL) or np.any(values > 1 + STANDARD_TOL):
                raise InvalidInputError(f"{self.family} distortion leaves [0, 1] on the sample grid")

    def __call__(self, x) -> float:
        return float(self.fn(np.asarray(x, dtype=float).reshape(1, self.arity))[0])

    @classmethod
    def mvar_type(cls, n: int, p: float):
        level = 1.0 - p
        return cls(n, "mvar_type", lambda x: np.any(x > level + STANDARD_TOL, axis=-1).astype(float), {"p": p})

    @classmethod
    def imes_type(cls, n: int, p: float):
        return cls(n, "imes_type", lambda x: np.minimum(np.max(x, axis=-1) / (1.0 - p), 1.0), {"p": p})

    @classmethod
    def minvar_type(cls, n: int):
        return cls(n, "minvar_type", lambda x: 1.0 - np.prod(1.0 - x, axis=-1))

    @classmethod
    def aes_type(cls, p: float, a: Sequence[float]):
        a = check_simplex(a, len(a))
        return cls(len(a), "aes_type",
                   lambda x: np.minimum(x, 1.0 - p) @ a / (1.0 - p), {"p": p, "a": a.tolist()})

    @classmethod
    def single_g(cls, g: Optional[Callable] = None, grid=None, values=None, name="single_g"):
        """One-scenario distortion from a vectorised g or a tabulation on a grid."""
        if g is None:
            grid = np.asarray(grid, dtype=float)
            values = np.asarray(values, dtype=float)
            if grid.shape != values.shape or grid[0] != 0.0 or grid[-1] != 1.0:
                raise InvalidInputError("tabulated g needs matching arrays on a grid from 0 to 1")
            return cls(1, name, lambda x: np.interp(x[..., 0], grid, values),
                       {"grid": grid.tolist(), "values": values.tolist()})
        return cls(1, name, lambda x: np.asarray(g(x[..., 0]), dtype=float))

    @classmethod
    def es_distortion(cls, p: float):
        return cls.single_g(lambda t: np.minimum(t, 1.0 - p) / (1.0 - p), name="es_distortion")

    @classmethod
    def var_distortion(cls, p: float):
        return cls.single_g(lambda t: (t > 1.0 - p + STANDARD_TOL).astype(float), name="var_distortion")

    @classmethod
    def custom(cls, n: int, fn: Callable, vectorized=False, check_range=True, name="custom"):
        return cls(n, name, fn if vectorized else _apply_rowwise(fn), check_range=check_range)

    @classmethod
    def from_dict(cls, data: dict):
        family = data.get("family")
        if family == "mvar_type":
            return cls.mvar_type(int(data["n"]), float(data["p"]))
        if family == "imes_type":
            return cls.imes_type(int(data["n"]), float(data["p"]))
        if family == "minvar_type":
            return cls.minvar_type(int(data["n"]))
        if family == "aes_type":
            n = int(data["n"]) if "n" in data else len(data["a"])
            a = data.get("a") or [1.0 / n] * n
            return cls.aes_type(float(data["p"]), a)
        if family == "single_g":
            return cls.single_g(grid=data["grid"], values=data["values"])
        if family == "linear":
            coef = np.asarray(data["coefficients"], dtype=float)
            return cls(coef.size, "linear", lambda x: x @ coef, {"coefficients": coef.tolist()},
                       check_range=bool(data.get("check_range", True)))
        raise InvalidInputError(f"unknown distortion family {family!r}")


def distorted_set_function(psi: DistortionSpec, s: ScenarioSet) -> SetFunction:
    """A -> psi(Q_1(A), ..., Q_n(A))."""
    if psi.arity != s.size:
        raise InvalidInputError(f"distortion arity {psi.arity} does not match {s.size} scenarios")
    weights_t = np.array(s.weights.T)
    return SetFunction(s.outcome_count, batch=lambda members: psi.fn(members @ weights_t))


# -- Choquet integral --------------------------------------------------------

def choquet_integral(x, c: SetFunction, verify: bool = False) -> float:
    """Layered integral v_K + sum_k (v_k - v_{k+1}) c({x >= v_k}) over distinct values v_1 > ... > v_K."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != c.space_size:
        raise InvalidInputError(f"loss vector has {x.size} outcomes, set function {c.space_size}")
    if verify:
        verdict = check_standard(c)
        if not verdict.holds:
            raise AxiomViolationError("set function is not standard", counterexample=verdict.to_dict())
    levels = np.unique(x)[::-1]
    if levels.size == 1:
        return float(levels[0])
    upper_sets = x[None, :] >= levels[:-1, None]
    capacities = c.evaluate(upper_sets)
    return float(levels[-1] + np.dot(levels[:-1] - levels[1:], capacities))


def lebesgue_distortion_integral(d: EmpiricalDistribution, g: Callable[[np.ndarray], np.ndarray],
                                 grid) -> float:
    """Stieltjes sum of VaR_u against gbar(u) = 1 - g(1 - u), gbar linear between grid nodes."""
    grid = np.asarray(grid, dtype=float)
    gbar = 1.0 - np.asarray(g(1.0 - grid), dtype=float)
    cum = d.cumulative
    prev = np.concatenate(([0.0], cum[:-1]))
    # integrated quantile function at every grid node
    iq = np.clip(np.minimum(cum[None, :], grid[:, None]) - prev[None, :], 0.0, None) @ d.values
    width = np.diff(grid)
    slope = np.divide(np.diff(gbar), width, out=np.zeros_like(width), where=width > 0)
    return float(np.dot(slope, np.diff(iq)))


# -- exhaustive checks on the subset lattice -----------------------------------

def _require_cap(c: SetFunction, cap: int):
    if c.space_size > cap:
        raise CapExceededError(
            f"space of {c.space_size} outcomes exceeds the brute-force cap {cap}",
            space_size=c.space_size, cap=cap,
            advice="coarsen the outcome space or raise the cap in the [axioms] config section")


def check_standard(c: SetFunction, cap: int = MONOTONE_CAP, tol: float = STANDARD_TOL) -> AxiomVerdict:
    """c(empty)=0, c(Omega)=1 and c(B minus one element) <= c(B) for every B."""
    _require_cap(c, cap)
    table = c.tabulate()
    m = c.space_size
    masks = np.arange(1 << m, dtype=np.int64)
    bits = np.arange(m, dtype=np.int64)[:, None]
    has_bit = ((masks[None, :] >> bits) & 1).astype(bool)
    dropped = masks[None, :] ^ (np.int64(1) << bits)
    # drop-one subsets worth more than the full set
    bad = has_bit & (table[dropped] > table[None, :] + tol)
    columns = np.flatnonzero(bad.any(axis=0))
    if columns.size:
        b = int(columns[0])
        a = int(dropped[int(np.argmax(bad[:, b])), b])
        return AxiomVerdict("increasing", False, witness_sets=[mask_to_outcomes(a), mask_to_outcomes(b)],
                            values=[float(table[a]), float(table[b])])
    if abs(table[0]) > tol:
        return AxiomVerdict("standard", False, witness_sets=[[]], values=[float(table[0])],
                            note="c(empty set) must be 0")
    if abs(table[-1] - 1.0) > tol:
        return AxiomVerdict("standard", False, witness_sets=[mask_to_outcomes(masks[-1])],
                            values=[float(table[-1])], note="c(Omega) must be 1")
    return AxiomVerdict("standard", True)


def _submodular_block(table, rows, masks, tol):
    a = rows[:, None]
    lhs = table[a | masks[None, :]] + table[a & masks[None, :]]
    rhs = table[a] + table[masks][None, :]
    bad = np.argwhere(lhs > rhs + tol)
    if bad.size == 0:
        return None
    i, j = bad[0]
    return int(rows[i]), int(masks[j])


def check_submodular(c: SetFunction, cap: int = SUBMODULAR_CAP, tol: float = STANDARD_TOL,
                     n_jobs: int = 1) -> AxiomVerdict:
    """c(A u B) + c(A n B) <= c(A) + c(B) over all pairs, split by leading subsets across workers.

    For c = psi(Q_1(A), ..., Q_n(A)) with mutually singular scenarios this
    verdict matches componentwise concavity and submodularity of psi only on
    a fine atomization: every outcome must carry little mass under its
    scenario compared with the spacing of psi's kinks. On coarse outcome
    spaces the set function can pass while psi is not concave (see
    ``submodular_criterion``).
    """
    _require_cap(c, cap)
    table = c.tabulate()
    masks = np.arange(1 << c.space_size, dtype=np.int64)
    blocks = np.array_split(masks, max(1, min(len(masks), 4 * max(1, n_jobs))))
    found = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_submodular_block)(table, rows, masks, tol) for rows in blocks)
    for hit in found:
        if hit is not None:
            a, b = hit
            return AxiomVerdict(
                "submodular", False,
                witness_sets=[mask_to_outcomes(a), mask_to_outcomes(b)],
                values=[float(table[a | b]), float(table[a & b]), float(table[a]), float(table[b])],
                note="values are c(A u B), c(A n B), c(A), c(B)")
    return AxiomVerdict("submodular", True)


def submodular_criterion(s: ScenarioSet) -> dict:
    """How far a set-function submodularity verdict on ``s`` speaks for psi itself."""
    return {
        "mutually_singular": bool(s.mutually_singular),
        "max_atom_mass": float(np.max(s.weights)),
        "note": "psi-level conclusions need mutually singular scenarios with atoms small against psi's kinks",
    }


# -- grid checks on psi ----------------------------------------------------------

def _grid_points(n: int, k: int) -> np.ndarray:
    axes = np.linspace(0.0, 1.0, k + 1)
    mesh = np.meshgrid(*([axes] * n), indexing="ij")
    return np.stack(mesh, axis=-1)


def _range_sample(n: int) -> np.ndarray:
    """The 10-step grid for small arity, else its corners plus seeded uniform points."""
    if 11 ** n <= 20_000:
        return _grid_points(n, 10)
    rng = np.random.default_rng(0)
    corners = subset_matrix(n).astype(float) if n <= 12 else np.empty((0, n))
    return np.vstack([corners, rng.random((4096, n))])


def _index_point(idx, k):
    return [round(i / k, 12) for i in idx]


@dataclass(frozen=True)
class ComponentwiseReport:
    increasing: AxiomVerdict
    concave: AxiomVerdict
    submodular: AxiomVerdict
    two_point: AxiomVerdict

    def to_dict(self):
        return {name: getattr(self, name).to_dict() for name in ("increasing", "concave", "submodular", "two_point")}


def _first(mask):
    hits = np.argwhere(mask)
    return None if hits.size == 0 else tuple(int(i) for i in hits[0])


def _check_increasing(values, n, k, tol):
    for axis in range(n):
        hit = _first(np.diff(values, axis=axis) < -tol)
        if hit is not None:
            upper = list(hit)
            upper[axis] += 1
            return AxiomVerdict("increasing", False, "grid",
                                witness_points=[_index_point(hit, k), _index_point(upper, k)],
                                values=[float(values[hit]), float(values[tuple(upper)])])
    return AxiomVerdict("increasing", True, "grid")


def _check_concave(values, n, k, tol):
    for axis in range(n):
        second = np.diff(values, n=2, axis=axis)
        hit = _first(second > tol)
        if hit is not None:
            pts = []
            for step in range(3):
                idx = list(hit)
                idx[axis] += step
                pts.append(idx)
            return AxiomVerdict("concave", False, "grid", witness_points=[_index_point(q, k) for q in pts],
                                values=[float(values[tuple(q)]) for q in pts])
    return AxiomVerdict("concave", True, "grid")


def _check_lattice_submodular(values, n, k, tol):
    for i in range(n):
        for j in range(i + 1, n):
            mixed = np.diff(np.diff(values, axis=i), axis=j)
            hit = _first(mixed > tol)
            if hit is not None:
                base = list(hit)
                up_i, up_j, up_ij = list(base), list(base), list(base)
                up_i[i] += 1
                up_j[j] += 1
                up_ij[i] += 1
                up_ij[j] += 1
                pts = [up_ij, base, up_i, up_j]
                return AxiomVerdict("submodular", False, "grid", witness_points=[_index_point(q, k) for q in pts],
                                    values=[float(values[tuple(q)]) for q in pts],
                                    note="psi(x v y) + psi(x ^ y) > psi(x) + psi(y)")
    return AxiomVerdict("submodular", True, "grid")


def _two_point_triples(k):
    a, b, c = np.meshgrid(np.arange(k + 1), np.arange(k + 1), np.arange(k + 1), indexing="ij")
    d = b + c - a
    keep = (a <= b) & (a <= c) & (d <= k)
    return a[keep], b[keep], c[keep], d[keep]


def _check_two_point(values, n, k, tol):
    """f(x) + f(y) >= f(w) + f(z) for w <= x, y <= z and w + z = x + y, along every axis."""
    a, b, c, d = _two_point_triples(k)
    for axis in range(n):
        lines = np.moveaxis(values, axis, -1).reshape(-1, k + 1)
        gap = lines[:, a] + lines[:, d] - lines[:, b] - lines[:, c]
        hit = _first(gap > tol)
        if hit is not None:
            line, t = hit
            fixed = list(np.unravel_index(line, [k + 1] * (n - 1))) if n > 1 else []
            pts = []
            for pos in (b[t], c[t], a[t], d[t]):
                idx = fixed[:axis] + [int(pos)] + fixed[axis:]
                pts.append(idx)
            return AxiomVerdict("two_point", False, "grid", witness_points=[_index_point(q, k) for q in pts],
                                values=[float(lines[line, pos]) for pos in (b[t], c[t], a[t], d[t])],
                                note="points are x, y, w, z")
    return AxiomVerdict("two_point", True, "grid")


def check_componentwise(psi: DistortionSpec, grid_k: int = DEFAULT_GRID_K,
                        tol: float = STANDARD_TOL) -> ComponentwiseReport:
    """Grid-certified componentwise monotonicity, concavity, submodularity and the two-point criterion."""
    if grid_k < 2:
        raise InvalidInputError("grid_k must be at least 2")
    n, k = psi.arity, int(grid_k)
    if (k + 1) ** n > GRID_POINT_CAP:
        raise CapExceededError(f"grid of {k + 1}**{n} points exceeds the cap {GRID_POINT_CAP}",
                               arity=n, grid_k=k, cap=GRID_POINT_CAP,
                               advice="lower grid_k in the [axioms] config section")
    values = psi.fn(_grid_points(n, k))
    return ComponentwiseReport(
        increasing=_check_increasing(values, n, k, tol),
        concave=_check_concave(values, n, k, tol),
        submodular=_check_lattice_submodular(values, n, k, tol),
        two_point=_check_two_point(values, n, k, tol),
    )


# -- probes for measures on outcome tables -------------------------------------

def _random_step(rng, levels):
    count = int(rng.integers(1, min(len(levels), 6) + 1))
    thresholds = np.sort(rng.choice(levels, size=count, replace=False))
    jumps = rng.exponential(1.0, size=count)
    offset = float(rng.normal())

    def step(z):
        return offset + (z[:, None] >= thresholds[None, :]).astype(float) @ jumps
    return step


def _level_pairs(z, limit=8):
    levels = np.unique(z)
    if levels.size > limit:
        levels = levels[np.linspace(0, levels.size - 1, limit).round().astype(int)]
    for a in levels:
        for b in levels:
            if a < b:
                yield (z >= b).astype(float), (z >= a).astype(float)


def comonotonic_additivity_probe(measure: Callable[[np.ndarray], float], t: OutcomeTable, trials: int = 200,
                                 seed: int = 0, tol: float = 1e-9) -> AxiomVerdict:
    """Search comonotonic pairs (f(Z), g(Z)) for an additivity gap above tol.

    Each table variable Z first contributes the indicator pairs of its upper
    level sets; then ``trials`` pairs with random increasing step functions
    f and g are drawn from a seeded generator.
    """
    rng = np.random.default_rng(seed)
    names = t.names

    def verdict_for(x, y):
        lhs = measure(x + y)
        parts = (measure(x), measure(y))
        if abs(lhs - sum(parts)) > tol:
            return AxiomVerdict("comonotonic_additive", False, "probabilistic",
                                witness_points=[x.tolist(), y.tolist()], values=[float(lhs), *map(float, parts)],
                                note="values are rho(X+Y), rho(X), rho(Y)")
        return None

    for name in names:
        for x, y in _level_pairs(t.variable(name)):
            found = verdict_for(x, y)
            if found is not None:
                return found
    for _ in range(int(trials)):
        z = t.variable(names[int(rng.integers(len(names)))])
        levels = np.unique(z)
        f, g = _random_step(rng, levels), _random_step(rng, levels)
        found = verdict_for(f(z), g(z))
        if found is not None:
            return found
    return AxiomVerdict("comonotonic_additive", True, "probabilistic")


@dataclass(frozen=True)
class CoherenceReport:
    subadditive: AxiomVerdict
    monotone: AxiomVerdict
    cash_invariant: AxiomVerdict
    positively_homogeneous: AxiomVerdict

    @property
    def holds(self):
        return all(v.holds for v in (self.subadditive, self.monotone, self.cash_invariant, self.positively_homogeneous))

    def to_dict(self):
        return {name: getattr(self, name).to_dict()
                for name in ("subadditive", "monotone", "cash_invariant", "positively_homogeneous")}


def coherence_probe(measure: Callable[[np.ndarray], float], outcome_count: int, trials: int = 200, seed: int = 0,
                    tol: float = 1e-9) -> CoherenceReport:
    """Random-pair probe of the coherence axioms, preceded by all pairs of single-outcome indicators."""
    rng = np.random.default_rng(seed)
    m = int(outcome_count)
    found = {}

    def note(key, x, y, values):
        if key not in found:
            found[key] = AxiomVerdict(key, False, "probabilistic", witness_points=[x.tolist(), y.tolist()],
                                      values=[float(v) for v in values])

    def probe(x, y):
        sx, sy, sxy = measure(x), measure(y), measure(x + y)
        if sxy > sx + sy + tol * max(1.0, abs(sx) + abs(sy)):
            note("subadditive", x, y, (sxy, sx, sy))

    eye = np.eye(m)
    for i in range(min(m, 10)):
        for j in range(i + 1, min(m, 10)):
            probe(eye[i], eye[j])
    for _ in range(int(trials)):
        x = np.round(rng.normal(size=m) * rng.choice([1.0, 10.0]), int(rng.integers(0, 4)))
        y = np.round(rng.normal(size=m) * rng.choice([1.0, 10.0]), int(rng.integers(0, 4)))
        probe(x, y)
        sx = measure(x)
        bigger = x + np.abs(rng.normal(size=m)) * (rng.random(m) < 0.5)
        if measure(bigger) < sx - tol * max(1.0, abs(sx)):
            note("monotone", x, bigger, (measure(bigger), sx))
        shift = float(rng.normal() * 5)
        if abs(measure(x + shift) - (sx + shift)) > tol * max(1.0, abs(sx) + abs(shift)):
            note("cash_invariant", x, x + shift, (measure(x + shift), sx, shift))
        scale = float(rng.uniform(0.1, 10.0))
        if abs(measure(scale * x) - scale * sx) > tol * max(1.0, scale * abs(sx)):
            note("positively_homogeneous", x, scale * x, (measure(scale * x), sx, scale))
    return CoherenceReport(
        **{key: found.get(key, AxiomVerdict(key, True, "probabilistic"))
           for key in ("subadditive", "monotone", "cash_invariant", "positively_homogeneous")})
