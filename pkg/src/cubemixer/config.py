"""Experiment configuration: per-scenario defaults, JSON documents and overrides."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Any
from typing import Mapping
from typing import Optional

from .errors import ConfigError
from .numerics import ScalarMode
from .parser import parse_int
from .parser import parse_mode
from .simulate import SEED_LIMIT


logger = logging.getLogger(__name__)

P_DEFAULT = "3/5"

DEFAULTS: dict[str, dict[str, Any]] = {
    "verify": {
        "N_max": 8,
        "p_grid": ["1/2", "3/5", "3/4"],
        "t_max": 4,
        "explicit_laws": 20,
        "orthogonality_N": 12,
    },
    "kernel": {
        "N": 3,
        "p": P_DEFAULT,
        "law": {"kind": "subset", "z": 1},
        "t": 1,
        "hamming": False,
    },
    "spectrum": {"N": 10, "p": P_DEFAULT, "law": {"kind": "subset", "z": 1}},
    "chi2-curve": {
        "N": 64,
        "p": P_DEFAULT,
        "law": {"kind": "subset", "z": 1},
        "start": 0,
        "metric": "chi2_hamming",
        "t_grid": "0..200:10",
    },
    "tv-curve": {
        "N": 8,
        "p": P_DEFAULT,
        "law": {"kind": "subset", "z": 1},
        "start": 0,
        "metric": "tv_hamming",
        "t_grid": "0..40",
    },
    "mixing-time": {
        "N_grid": "16..256*2",
        "p": P_DEFAULT,
        "law": {"kind": "subset", "z": 1},
        "epsilon": ["1/4"],
        "metric": "chi2_full",
        "start": 0,
    },
    "cutoff-scan": {"N": 4096, "p": P_DEFAULT, "z": 1, "C_grid": [-2, 0, 2, 4]},
    "almost-perfect": {
        "N_grid": "16..1024*2",
        "p": P_DEFAULT,
        "z_rule": "round(pN)",
        "t_grid": [1, 2, 3],
        "fit_t": 2,
        "tv_grid": "4..10",
    },
    "critical-start": {
        "N_grid": [100, 1000],
        "p": P_DEFAULT,
        "w": "3/10",
        "t_max": 10,
        "epsilon": "1/10",
    },
    "definetti-slow": {"N_grid": [128, 512, 2048], "p": P_DEFAULT, "a": "1/5"},
    "contingency": {
        "N": 4096,
        "p": P_DEFAULT,
        "rho": "1/2",
        "epsilon": ["1/10", "1/4", 1],
    },
    "simulate": {
        "N": 100,
        "p": P_DEFAULT,
        "law": {"kind": "subset", "z": 10},
        "start": 0,
        "horizon": 50,
        "trajectories": 100000,
    },
}

SCENARIOS = tuple(DEFAULTS)
DOCUMENT_KEYS = ("scenario", "parameters", "output", "workers", "mode", "seed")


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment."""

    scenario: str
    parameters: Mapping[str, Any] = field(default_factory=dict)
    output_path: Optional[Path] = None
    workers: int = 1
    mode: ScalarMode = ScalarMode()
    seed: int = 0

    def __post_init__(self) -> None:
        """Validates the scalar fields; parameters are checked by the scenario."""
        if self.scenario not in DEFAULTS:
            raise ConfigError("scenario", f"unknown scenario {self.scenario!r}")
        unknown = sorted(set(self.parameters) - set(DEFAULTS[self.scenario]))
        if unknown:
            raise ConfigError(f"parameters.{unknown[0]}", f"not a parameter of {self.scenario}")
        if self.workers < 1:
            raise ConfigError("workers", f"must be >= 1, got {self.workers}")
        if not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError("seed", f"must be an unsigned 64-bit integer, got {self.seed}")

    def to_dict(self) -> dict[str, Any]:
        """Representation written next to the results."""
        return {
            "scenario": self.scenario,
            "parameters": dict(self.parameters),
            "output": str(self.output_path) if self.output_path else None,
            "workers": self.workers,
            "mode": str(self.mode),
            "seed": self.seed,
        }


def read_document(path: Path) -> dict[str, Any]:
    """Reads a JSON config document."""
    try:
        document = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(document, dict):
        raise ConfigError("config", "the document must be a JSON object")
    return document


def load_config(
    scenario: str,
    document: Mapping[str, Any] | None = None,
    output_path: Path | None = None,
    workers: int | None = None,
    mode: str | None = None,
    seed: int | None = None,
) -> ExperimentConfig:
    """Merges a config document over the scenario defaults.

    Keyword arguments come from the command line and win over the document.
    """
    if scenario not in DEFAULTS:
        raise ConfigError("scenario", f"unknown scenario {scenario!r}")
    document = dict(document or {})
    unknown = sorted(set(document) - set(DOCUMENT_KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown top-level key")
    if document.get("scenario", scenario) != scenario:
        raise ConfigError("scenario", f"document is for {document['scenario']!r}, not {scenario!r}")
    overrides = document.get("parameters", {})
    if not isinstance(overrides, Mapping):
        raise ConfigError("parameters", "expected a JSON object")
    parameters = {**DEFAULTS[scenario], **overrides}

    if output_path is None and document.get("output"):
        output_path = Path(document["output"])
    resolved_workers = parse_int(
        workers if workers is not None else document.get("workers", 1), "workers", 1
    )
    resolved_mode = parse_mode(mode if mode is not None else document.get("mode", "logfloat"))
    resolved_seed = parse_int(seed if seed is not None else document.get("seed", 0), "seed", 0)
    config = ExperimentConfig(
        scenario, parameters, output_path, resolved_workers, resolved_mode, resolved_seed
    )
    logger.info(
        "Resolved %s: mode=%s workers=%d seed=%d", scenario, config.mode, config.workers, config.seed
    )
    return config
