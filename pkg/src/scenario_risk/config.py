"""Run configuration models.

Configuration files are TOML or JSON; each section maps onto one of the
pydantic models below and command-line flags override file values.
"""

from __future__ import annotations

import json
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import InvalidInputError

TRACKING_URI_ENV = "SCENARIO_RISK_TRACKING_URI"


class BaselConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    p: float = 0.975
    lambda_: float = Field(0.5, alias="lambda")
    current_window: int = Field(250, ge=1)
    lookback_windows: int = Field(2251, ge=1)
    reduced_set: Optional[list[str]] = None
    risk_classes: Optional[dict[str, list[str]]] = None
    theta_cap: float = 4.0 / 3.0
    theta_refresh: Literal["daily", "weekly"] = "daily"
    exposure_mode: Literal["daily", "frozen"] = "daily"
    frozen_exposures: Optional[dict[str, float]] = None
    units: Optional[dict[str, float]] = None
    n_jobs: int = 1

    @field_validator("p")
    @classmethod
    def _p_open_unit(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("p must lie in (0, 1)")
        return v

    @field_validator("lambda_")
    @classmethod
    def _lambda_closed_unit(cls, v):
        if not 0.0 <= v <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        return v

    @model_validator(mode="after")
    def _classes_disjoint(self):
        if self.risk_classes:
            seen = set()
            for name, members in self.risk_classes.items():
                if not members:
                    raise ValueError(f"risk class {name!r} is empty")
                overlap = seen.intersection(members)
                if overlap:
                    raise ValueError(f"factors {sorted(overlap)} appear in more than one risk class")
                seen.update(members)
        if self.exposure_mode == "frozen" and not self.frozen_exposures:
            raise ValueError("exposure_mode 'frozen' requires frozen_exposures")
        return self

    def reduced_factors(self, factors):
        return list(self.reduced_set) if self.reduced_set else list(factors)

    def classes(self, factors):
        if self.risk_classes:
            return {name: list(members) for name, members in self.risk_classes.items()}
        return {"all": list(factors)}

    def validate_for(self, factors):
        """Check set memberships against the factors of a concrete panel."""
        factors = list(factors)
        known = set(factors)
        missing = set(self.reduced_factors(factors)) - known
        if missing:
            raise InvalidInputError(f"reduced_set names unknown factors: {sorted(missing)}")
        if self.risk_classes:
            covered = set()
            for members in self.risk_classes.values():
                covered.update(members)
            if covered != known:
                raise InvalidInputError(
                    "risk_classes must partition the factor set",
                    unknown=sorted(covered - known),
                    uncovered=sorted(known - covered),
                )
        if self.exposure_mode == "frozen":
            absent = known - set(self.frozen_exposures)
            if absent:
                raise InvalidInputError(f"frozen_exposures lacks factors: {sorted(absent)}")
        return self


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    w: int = 250
    p: float = 0.9
    date_column: str = "date"
    value_column: str = "close"

    @field_validator("w")
    @classmethod
    def _w_even(cls, v):
        if v < 4 or v % 2:
            raise ValueError("window length w must be an even number >= 4")
        return v


class AxiomConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid_k: int = Field(20, ge=2)
    monotone_cap: int = 12
    submodular_cap: int = 10
    trials: int = 200
    verify_standard: bool = False


class RepresentationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    non_singular: Literal["warn", "error", "ignore"] = "warn"
    mc_samples: int = 100_000


class TrackingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    enabled: bool = False
    tracking_uri: str = "file:./mlruns"
    experiment: str = "scenario-risk"

    def resolved_uri(self):
        return os.getenv(TRACKING_URI_ENV) or self.tracking_uri


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    basel: BaselConfig = Field(default_factory=BaselConfig)
    scenarios: ScenarioConfig = Field(default_factory=ScenarioConfig)
    axioms: AxiomConfig = Field(default_factory=AxiomConfig)
    representation: RepresentationConfig = Field(default_factory=RepresentationConfig)
    tracking: TrackingConfig = Field(default_factory=TrackingConfig)


def read_config_file(path):
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"config file not found: {path}")
    suffix = path.suffix.lower()
    if suffix == ".toml":
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    if suffix == ".json":
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    raise InvalidInputError(f"config file must be .toml or .json, got {path.name}")


def parse_model(model, data):
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise InvalidInputError(f"invalid {model.__name__}: {exc.errors()[0]['msg']}",
                                fields=[".".join(map(str, e["loc"])) for e in exc.errors()]) from exc


def load_run_config(path=None):
    if path is None:
        return RunConfig()
    return parse_model(RunConfig, read_config_file(path))


def load_basel_config(path):
    """Accept either a whole run config or a bare basel section."""
    data = read_config_file(path)
    if "basel" in data:
        data = data["basel"]
    return parse_model(BaselConfig, data)
