"""Integral representations of scenario-based risk measures.

``rho_psi`` integrates the pointwise maximum of per-scenario quantiles
against a distribution psibar on [0, 1]^n; ``es_mixture_eval`` and
``sup_mixture_eval`` evaluate mixtures of per-scenario ES and their suprema.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable, Literal, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .choquet import DistortionSpec
from .config import parse_model
from .errors import CapExceededError, InvalidInputError
from .measure_core import LEVEL_TOL, WEIGHT_TOL, es, quantiles
from .scenario_measures import ScenarioDistributions, imes, max_law

logger = logging.getLogger(__name__)

MC_BLOCK = 1 << 16
CELL_CAP = 2_000_000

Sampler = Callable[[np.random.Generator, int], np.ndarray]


def _uniform_open_closed(rng, shape):
    # levels live in (0, 1]
    return 1.0 - rng.random(shape)


def product_uniform_sampler(n: int) -> Sampler:
    return lambda rng, size: _uniform_open_closed(rng, (size, n))


def diagonal_uniform_sampler(n: int, p: float) -> Sampler:
    def sample(rng, size):
        s = p + (1.0 - p) * _uniform_open_closed(rng, size)
        return np.repeat(s[:, None], n, axis=1)
    return sample


def beta_sampler(n: int, a: float, b: float) -> Sampler:
    """Independent Beta(a, b) margins."""
    return lambda rng, size: np.clip(rng.beta(a, b, size=(size, n)), np.finfo(float).tiny, 1.0)


class PsiBarSpec(BaseModel):
    """Distribution psibar of the quantile levels, psibar(u) = 1 - psi(1 - u)."""

    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    form: Literal["point_masses", "diagonal_uniform", "product_uniform", "custom_sampler"]
    n: int = Field(ge=1)
    points: Optional[list[list[float]]] = None
    masses: Optional[list[float]] = None
    p: Optional[float] = None
    sampler: Optional[str] = None
    sampler_params: dict[str, float] = Field(default_factory=dict)
    sampler_fn: Optional[Any] = Field(default=None, exclude=True)

    @model_validator(mode="after")
    def _form_fields(self):
        if self.form == "point_masses":
            if not self.points or self.masses is None or len(self.points) != len(self.masses):
                raise ValueError("point_masses needs matching points and masses")
            if any(len(pt) != self.n for pt in self.points):
                raise ValueError(f"every point needs {self.n} coordinates")
            if any(not 0.0 < u <= 1.0 for pt in self.points for u in pt):
                raise ValueError("point coordinates must lie in (0, 1]")
            if any(m <= 0 for m in self.masses) or abs(sum(self.masses) - 1.0) > WEIGHT_TOL:
                raise ValueError("masses must be positive and sum to 1")
        elif self.form == "diagonal_uniform":
            if self.p is None or not 0.0 < self.p < 1.0:
                raise ValueError("diagonal_uniform needs p in (0, 1)")
        elif self.form == "custom_sampler":
            if self.sampler_fn is None and self.sampler not in ("product_uniform", "diagonal_uniform", "beta"):
                raise ValueError("custom_sampler needs a sampler callable or a known sampler name")
        return self

    @classmethod
    def point_mass(cls, point: Sequence[float]):
        return cls(form="point_masses", n=len(point), points=[list(point)], masses=[1.0])

    @classmethod
    def diagonal(cls, n: int, p: float):
        return cls(form="diagonal_uniform", n=n, p=p)

    @classmethod
    def product(cls, n: int):
        return cls(form="product_uniform", n=n)

    @classmethod
    def custom(cls, n: int, sampler: Sampler):
        return cls(form="custom_sampler", n=n, sampler_fn=sampler)

    @classmethod
    def parse(cls, data: dict):
        return parse_model(cls, data)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.sampler_fn is not None:
            fn = self.sampler_fn
        elif self.form == "product_uniform" or self.sampler == "product_uniform":
            fn = product_uniform_sampler(self.n)
        elif self.form == "diagonal_uniform" or self.sampler == "diagonal_uniform":
            fn = diagonal_uniform_sampler(self.n, float(self.p if self.p is not None else self.sampler_params["p"]))
        elif self.sampler == "beta":
            fn = beta_sampler(self.n, self.sampler_params.get("a", 1.0), self.sampler_params.get("b", 1.0))
        else:
            raise InvalidInputError(f"cannot sample psibar of form {self.form!r}")
        u = np.asarray(fn(rng, size), dtype=float)
        if u.shape != (size, self.n):
            raise InvalidInputError(f"sampler returned shape {u.shape}, expected {(size, self.n)}")
        return u


@dataclass(frozen=True)
class RhoResult:
    value: float
    std_error: float
    method: str

    def to_dict(self):
        return {"value": self.value, "std_error": self.std_error, "method": self.method}


def _max_quantiles(sd: ScenarioDistributions, u: np.ndarray) -> np.ndarray:
    return np.max(np.column_stack([quantiles(d, u[:, i]) for i, d in enumerate(sd.dists)]), axis=1)


def expected_max_by_cells(sd: ScenarioDistributions, cap: int = CELL_CAP) -> float:
    """E[max_i F_i^{-1}(U_i)] for independent uniform U_i, summed over every product cell of atoms."""
    sizes = [d.size for d in sd.dists]
    if int(np.prod(sizes, dtype=float)) > cap:
        raise CapExceededError(f"{int(np.prod(sizes, dtype=float))} product cells exceed the cap {cap}", cap=cap)
    value_grids = np.meshgrid(*[d.values for d in sd.dists], indexing="ij")
    mass_grids = np.meshgrid(*[d.weights for d in sd.dists], indexing="ij")
    top = np.max(np.stack(value_grids), axis=0)
    mass = np.prod(np.stack(mass_grids), axis=0)
    return float(np.sum(top * mass))


def _mc_block(sd, psibar, seed, block, size):
    rng = np.random.Generator(np.random.Philox(seed).jumped(block))
    values = _max_quantiles(sd, psibar.draw(rng, size))
    return values.sum(), np.square(values).sum()


def rho_psi(sd: ScenarioDistributions, psibar: PsiBarSpec, mc_samples: Optional[int] = None, seed: int = 0,
            n_jobs: int = 1) -> RhoResult:
    """Integral of max_i VaR_{u_i}^{Q_i}(X) against psibar.

    Point masses, the uniform diagonal and the uniform product are exact;
    custom samplers are estimated by Monte Carlo in fixed-size blocks, block b
    drawing from Philox(seed) jumped b times, so estimates do not depend on
    ``n_jobs``.
    """
    if psibar.n != len(sd):
        raise InvalidInputError(f"psibar has arity {psibar.n}, got {len(sd)} scenarios")
    if psibar.form == "point_masses":
        points = np.asarray(psibar.points, dtype=float)
        masses = np.asarray(psibar.masses, dtype=float)
        return RhoResult(float(np.dot(masses, _max_quantiles(sd, points))), 0.0, "exact")
    if psibar.form == "diagonal_uniform":
        return RhoResult(imes(sd, psibar.p), 0.0, "exact")
    if psibar.form == "product_uniform":
        return RhoResult(max_law(sd.dists).mean(), 0.0, "exact")
    if not mc_samples or mc_samples < 2:
        raise InvalidInputError("custom_sampler needs mc_samples >= 2")
    sizes = [MC_BLOCK] * (mc_samples // MC_BLOCK)
    if mc_samples % MC_BLOCK:
        sizes.append(mc_samples % MC_BLOCK)
    parts = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_mc_block)(sd, psibar, seed, b, size) for b, size in enumerate(sizes))
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / mc_samples
    variance = max(total_sq / mc_samples - mean * mean, 0.0) * mc_samples / (mc_samples - 1)
    return RhoResult(float(mean), float(np.sqrt(variance / mc_samples)), "monte_carlo")


def psi_from_psibar(psibar: PsiBarSpec) -> DistortionSpec:
    """psi(x) = 1 - psibar(1 - x), for the forms with a closed-form distribution function."""
    if psibar.form == "point_masses":
        points = np.asarray(psibar.points, dtype=float)
        masses = np.asarray(psibar.masses, dtype=float)

        def psi(x):
            # point k contributes when some coordinate exceeds 1 - u_k
            hit = np.any(x[..., None, :] > 1.0 - points + LEVEL_TOL, axis=-1)
            return hit.astype(float) @ masses
        return DistortionSpec(psibar.n, "from_point_masses", psi)
    if psibar.form == "diagonal_uniform":
        return DistortionSpec.imes_type(psibar.n, psibar.p)
    if psibar.form == "product_uniform":
        return DistortionSpec.minvar_type(psibar.n)
    raise InvalidInputError("psi has no closed form for a custom sampler")


class EsMixture(BaseModel):
    """Weights w on the scenarios and, per scenario, a discrete law h_i of ES levels as (p, mass) atoms."""

    model_config = ConfigDict(extra="forbid")

    w: list[float]
    h: list[list[tuple[float, float]]]

    @model_validator(mode="before")
    @classmethod
    def _broadcast_h(cls, data):
        # a single list of atoms applies to every scenario
        if isinstance(data, dict) and "h" in data and "w" in data:
            h = data["h"]
            if h and all(isinstance(atom, (list, tuple)) and len(atom) == 2
                         and all(isinstance(v, (int, float)) for v in atom) for atom in h):
                data = {**data, "h": [list(h) for _ in data["w"]]}
        return data

    @field_validator("w")
    @classmethod
    def _simplex(cls, w):
        if not w or any(v < 0 for v in w) or abs(sum(w) - 1.0) > WEIGHT_TOL:
            raise ValueError("w must lie on the simplex")
        return w

    @model_validator(mode="after")
    def _levels(self):
        if len(self.h) != len(self.w):
            raise ValueError(f"h needs one level law per scenario ({len(self.w)})")
        for atoms in self.h:
            if not atoms:
                raise ValueError("every level law needs at least one atom")
            if any(not 0.0 < p <= 1.0 for p, _ in atoms):
                raise ValueError("ES levels must lie in (0, 1]")
            if any(m < 0 for _, m in atoms) or abs(sum(m for _, m in atoms) - 1.0) > WEIGHT_TOL:
                raise ValueError("level masses must be non-negative and sum to 1")
        return self

    @classmethod
    def parse(cls, data: dict):
        return parse_model(cls, data)

    @classmethod
    def point(cls, w: Sequence[float], p: float):
        return cls(w=list(w), h=[[(p, 1.0)] for _ in w])


def es_mixture_eval(sd: ScenarioDistributions, mix: EsMixture) -> float:
    if len(mix.w) != len(sd):
        raise InvalidInputError(f"mixture has {len(mix.w)} weights, got {len(sd)} scenarios")
    total = 0.0
    for wi, atoms, d in zip(mix.w, mix.h, sd.dists):
        if wi == 0:
            continue
        total += wi * sum(mass * es(d, p) for p, mass in atoms if mass > 0)
    return float(total)


@dataclass(frozen=True)
class SupResult:
    value: float
    index: int

    def to_dict(self):
        return {"value": self.value, "index": self.index}


def sup_mixture_eval(sd: ScenarioDistributions, mixes: Sequence[EsMixture],
                     non_singular: str = "warn", n_jobs: int = 1) -> SupResult:
    """Largest mixture value; ties go to the lowest index."""
    if not mixes:
        raise InvalidInputError("sup_mixture_eval needs at least one mixture")
    if sd.mutually_singular is False:
        message = "scenario laws are not mutually singular; sup-of-mixtures representation may not apply"
        if non_singular == "error":
            raise InvalidInputError(message)
        if non_singular == "warn":
            logger.warning(message)
    values = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(es_mixture_eval)(sd, m) for m in mixes)
    index = int(np.argmax(values))
    return SupResult(float(values[index]), index)


def vertex_mixtures(n: int, p: float) -> list[EsMixture]:
    """The n simplex vertices, each with a point-mass level law at p."""
    return [EsMixture.point(np.eye(n)[i].tolist(), p) for i in range(n)]


__all__ = [
    "PsiBarSpec", "RhoResult", "EsMixture", "SupResult", "rho_psi", "expected_max_by_cells",
    "psi_from_psibar", "es_mixture_eval", "sup_mixture_eval", "vertex_mixtures",
    "product_uniform_sampler", "diagonal_uniform_sampler", "beta_sampler",
]
