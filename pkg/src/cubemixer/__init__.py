"""Cube Mixer: reversible random walks on the hypercube."""
from importlib.metadata import PackageNotFoundError
from importlib.metadata import version


try:
    __version__ = version("cube-mixer")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "unknown"

from cubemixer.experiments import run_scenario  # noqa: E402
from cubemixer.process import ProcessSpec  # noqa: E402


__all__ = ["ProcessSpec", "run_scenario"]
