"""Command-line interface."""
from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Any
from typing import Callable

import click

from .config import SCENARIOS
from .config import load_config
from .config import read_document
from .display import describe
from .display import write_csv
from .display import write_results
from .errors import CubeMixerError
from .experiments import check_verification
from .experiments import run_scenario
from .experiments import summarize


logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(name)s] %(levelname)s %(message)s"
LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


def configure_logging(verbose: int) -> None:
    """Logs to stderr so stdout stays machine-readable."""
    level = LOG_LEVELS[min(verbose, len(LOG_LEVELS) - 1)]
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def scenario_options(function: Callable[..., Any]) -> Callable[..., Any]:
    """Options shared by every scenario command."""
    options = [
        click.option(
            "--config",
            "-c",
            "config_path",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            help="JSON document with scenario parameters",
        ),
        click.option(
            "--out",
            "-o",
            type=click.Path(dir_okay=False, path_type=Path),
            help="write CSV here and the JSON sidecar next to it",
        ),
        click.option(
            "--workers",
            "-w",
            type=int,
            envvar="CUBE_MIXER_WORKERS",
            help="worker processes for grid cells",
        ),
        click.option(
            "--mode",
            "-m",
            envvar="CUBE_MIXER_MODE",
            help="scalar mode: exact, logfloat or logfloat:64",
        ),
        click.option("--seed", "-s", type=int, help="unsigned 64-bit seed"),
        click.option("--verbose", "-v", count=True, help="-v for INFO, -vv for DEBUG"),
        click.option(
            "--describe",
            "show_columns",
            is_flag=True,
            default=False,
            help="print the CSV columns and exit",
        ),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def execute(
    scenario: str,
    config_path: Path | None,
    out: Path | None,
    workers: int | None,
    mode: str | None,
    seed: int | None,
) -> None:
    """Runs a scenario and writes its results."""
    document = read_document(config_path) if config_path else None
    config = load_config(scenario, document, out, workers, mode, seed)
    rows = run_scenario(config)
    summary = summarize(config, rows)
    if config.output_path is None:
        write_csv(scenario, rows, click.get_text_stream("stdout"))
        logger.info("Summary: %s", json.dumps(summary, default=str, sort_keys=True))
    else:
        metadata = write_results(config, rows, summary)
        logger.info("Wrote %s and %s", config.output_path, metadata)
    if scenario == "verify":
        check_verification(rows)


def scenario_command(scenario: str, summary: str) -> click.Command:
    """Builds the sub-command of one scenario."""

    @scenario_options
    def command(
        config_path: Path | None,
        out: Path | None,
        workers: int | None,
        mode: str | None,
        seed: int | None,
        verbose: int,
        show_columns: bool,
    ) -> None:
        configure_logging(verbose)
        if show_columns:
            click.echo(describe(scenario))
            return
        try:
            execute(scenario, config_path, out, workers, mode, seed)
        except CubeMixerError as exc:
            click.echo(f"Error: {exc}", err=True)
            sys.exit(exc.exit_code)

    command.__doc__ = summary
    return click.command(name=scenario)(command)


SUMMARIES = {
    "verify": "Run the exact oracle suite; exit 3 on any mismatch.",
    "kernel": "Print t-step kernel entries on states or weights.",
    "spectrum": "Print eigenvalues by degree or by coordinate subset.",
    "chi2-curve": "Chi-squared distance along a grid of times.",
    "tv-curve": "Total variation distance along a grid of times.",
    "mixing-time": "Mixing times over an N-grid and thresholds.",
    "cutoff-scan": "Chi-squared distance across the cutoff window.",
    "almost-perfect": "Sup chi-squared at fixed small t over an N-grid.",
    "critical-start": "Chi-squared from the critical start weight round(Np).",
    "definetti-slow": "Slow mixing of the uniform De Finetti walk.",
    "contingency": "Measured and predicted crossings of the iid walk.",
    "simulate": "Monte Carlo tally of final weights against the exact law.",
}


@click.group()
@click.version_option(package_name="cube-mixer")
def main() -> None:
    """Cube Mixer. Mixing of reversible random walks on the N-cube."""


for _scenario in SCENARIOS:
    main.add_command(scenario_command(_scenario, SUMMARIES[_scenario]))


if __name__ == "__main__":
    main(prog_name="cube-mixer")  # pragma: no cover
