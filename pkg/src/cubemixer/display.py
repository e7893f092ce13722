"""Writes result rows as CSV, the JSON sidecar and column descriptions."""
from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import IO
from typing import Any
from typing import Mapping
from typing import Sequence

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import ConfigError
from .experiments import COLUMNS
from .experiments import ResultRow
from .experiments import columns
from .numerics import SignedLogReal


def format_value(value: Any) -> str:
    """Renders a cell: exact rationals as ``a/b``, floats by repr.

    >>> format_value(Fraction(3, 5)), format_value(0.1), format_value(float("inf"))
    ('3/5', '0.1', 'inf')
    """
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, SignedLogReal):
        value = float(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return "nan"
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return repr(number)
    return str(value)


def write_csv(scenario: str, rows: Sequence[ResultRow], stream: IO[str]) -> None:
    """Writes a header row and one line per result row."""
    names = columns(scenario)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        writer.writerow([format_value(row[name]) for name in names])


def _json_ready(value: Any) -> Any:
    """Replaces values json cannot hold."""
    if isinstance(value, Mapping):
        return {str(key): _json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)) and math.isfinite(float(value)):
        return float(value)
    if value is None or isinstance(value, str):
        return value
    return format_value(value)


def sidecar(config: ExperimentConfig, summary: Mapping[str, Any]) -> dict[str, Any]:
    """Resolved config, version and scenario summary."""
    return {
        "version": __version__,
        "config": _json_ready(config.to_dict()),
        "columns": list(columns(config.scenario)),
        "summary": _json_ready(summary),
    }


def sidecar_path(output_path: Path) -> Path:
    """``results.csv`` -> ``results.json``."""
    return output_path.with_suffix(".json")


def write_results(
    config: ExperimentConfig, rows: Sequence[ResultRow], summary: Mapping[str, Any]
) -> Path:
    """Writes the CSV to the config's output path and the sidecar next to it."""
    if config.output_path is None:
        raise ConfigError("output", "no output path given")
    path = Path(config.output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as stream:
        write_csv(config.scenario, rows, stream)
    metadata = sidecar_path(path)
    metadata.write_text(json.dumps(sidecar(config, summary), indent=2, sort_keys=True) + "\n")
    return metadata


def describe(scenario: str) -> str:
    """Column manifest of a scenario."""
    width = max(len(column.name) for column in COLUMNS[scenario])
    lines = [f"{scenario} columns:"]
    lines += [
        f"  {column.name:<{width}}  {column.description}" for column in COLUMNS[scenario]
    ]
    return "\n".join(lines)
