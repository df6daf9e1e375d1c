"""JSON and CSV input/output shared by the CLI and scripts."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

from .errors import InvalidInputError, NotFoundError
from .measure_core import OutcomeTable, ScenarioSet

CSV_FLOAT_FORMAT = "%.10g"


def _default(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (pd.Timestamp,)) or hasattr(value, "isoformat"):
        return value.isoformat()
    if hasattr(value, "to_dict"):
        return value.to_dict()
    raise TypeError(f"cannot serialise {type(value).__name__}")


def to_json(payload: Any) -> str:
    return json.dumps(payload, default=_default, indent=2, allow_nan=True)


def _open_target(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    directory = os.path.dirname(str(path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline=""), True


def write_json(payload: Any, path: Optional[str] = None):
    handle, close = _open_target(path)
    try:
        handle.write(to_json(payload) + "\n")
    finally:
        if close:
            handle.close()


def write_table_csv(frame: pd.DataFrame, path: Optional[str] = None):
    """Floats at 10 significant digits, dates as YYYY-MM-DD."""
    frame = frame.copy()
    for column in frame.columns:
        if pd.api.types.is_datetime64_any_dtype(frame[column]):
            frame[column] = frame[column].dt.strftime("%Y-%m-%d")
    handle, close = _open_target(path)
    try:
        frame.to_csv(handle, index=False, float_format=CSV_FLOAT_FORMAT)
    finally:
        if close:
            handle.close()


def read_json(path) -> Any:
    path = Path(path)
    if not path.exists():
        raise NotFoundError(f"input file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path.name} is not valid JSON: {exc}") from exc


def bundle_to_dict(table: OutcomeTable, scenarios: ScenarioSet, variable: str,
                   base: Optional[np.ndarray] = None, **extra) -> dict:
    payload = {"variable": variable, "table": table.to_dict(), "scenario_set": scenarios.to_dict()}
    if base is not None:
        payload["base"] = np.asarray(base, dtype=float).tolist()
    payload.update(extra)
    return payload


def bundle_from_dict(data: dict) -> tuple[OutcomeTable, ScenarioSet, str, Optional[np.ndarray]]:
    try:
        table = OutcomeTable.from_dict(data["table"])
        scenarios = ScenarioSet.from_dict(data["scenario_set"])
    except KeyError as exc:
        raise InvalidInputError(f"scenario bundle lacks {exc.args[0]!r}") from exc
    base = data.get("base")
    return table, scenarios, data.get("variable") or table.names[0], (
        None if base is None else np.asarray(base, dtype=float))


def is_bundle(data: dict) -> bool:
    return isinstance(data, dict) and "table" in data and "scenario_set" in data
