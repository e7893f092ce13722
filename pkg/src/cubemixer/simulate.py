"""Monte Carlo simulation of the walk, tallied by Hamming weight."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import NamedTuple
from typing import Optional
from typing import Sequence

import numpy as np
from scipy.stats import binom

from .errors import CapacityError
from .errors import DomainError
from .laws import state_index
from .numerics import ScalarMode
from .process import ProcessSpec
from .process import block_generator
from .process import kernel_hamming
from .process import kernel_spectral
from .process import step_batch


logger = logging.getLogger(__name__)

BLOCK_SIZE = 1024
FULL_HISTOGRAM_LIMIT = 12
SEED_LIMIT = 2**64
FLOAT_MODE = ScalarMode.logfloat()


@dataclass(frozen=True)
class SimConfig:
    """A batch of independent trajectories.

    ``start=None`` draws every trajectory's start from pi.
    """

    spec: ProcessSpec
    start: Optional[tuple[int, ...]]
    horizon: int
    n_trajectories: int
    seed: int = 0
    full_histogram: bool = False

    def __post_init__(self) -> None:
        """Validates the batch."""
        if self.start is not None:
            start = tuple(int(bit) for bit in self.start)
            if len(start) != self.spec.N or set(start) - {0, 1}:
                raise DomainError(f"start must be a binary {self.spec.N}-vector")
            object.__setattr__(self, "start", start)
        if self.horizon < 0:
            raise DomainError(f"horizon must be >= 0, got {self.horizon}")
        if self.n_trajectories < 1:
            raise DomainError(f"n_trajectories must be >= 1, got {self.n_trajectories}")
        if not 0 <= self.seed < SEED_LIMIT:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.full_histogram and self.spec.N > FULL_HISTOGRAM_LIMIT:
            raise CapacityError(
                f"full histograms need N <= {FULL_HISTOGRAM_LIMIT}, got {self.spec.N}"
            )

    @property
    def blocks(self) -> int:
        """Number of RNG blocks."""
        return math.ceil(self.n_trajectories / BLOCK_SIZE)


@dataclass(frozen=True)
class EmpiricalHamming:
    """Counts of the final Hamming weight."""

    counts: np.ndarray
    n: int
    full: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        """Checks the tally."""
        if int(self.counts.sum()) != self.n:
            raise DomainError(f"counts sum to {int(self.counts.sum())}, expected {self.n}")

    @property
    def N(self) -> int:
        """Dimension."""
        return len(self.counts) - 1

    @property
    def pmf(self) -> np.ndarray:
        """Empirical weight law."""
        return self.counts / self.n

    def merge(self, other: EmpiricalHamming) -> EmpiricalHamming:
        """Tally of both batches."""
        if other.N != self.N:
            raise DomainError("cannot merge tallies of different dimensions")
        full = None
        if self.full is not None and other.full is not None:
            full = self.full + other.full
        return EmpiricalHamming(self.counts + other.counts, self.n + other.n, full)


def stationary_start(spec: ProcessSpec, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Draws ``size`` states from pi as a boolean array."""
    return rng.random((size, spec.N)) < float(spec.p)


def run_block(config: SimConfig, block: int) -> EmpiricalHamming:
    """Simulates one block of trajectories."""
    N = config.spec.N
    size = min(BLOCK_SIZE, config.n_trajectories - block * BLOCK_SIZE)
    rng = block_generator(config.seed, block)
    if config.start is None:
        states = stationary_start(config.spec, rng, size)
    else:
        states = np.tile(np.asarray(config.start, dtype=bool), (size, 1))
    for _ in range(config.horizon):
        states = step_batch(config.spec, states, rng)
    counts = np.bincount(states.sum(axis=1), minlength=N + 1).astype(np.int64)
    full = None
    if config.full_histogram:
        weights = 1 << np.arange(N - 1, -1, -1)
        full = np.bincount(states.astype(np.int64) @ weights, minlength=2**N).astype(np.int64)
    return EmpiricalHamming(counts, size, full)


def run(config: SimConfig, workers: int = 1) -> EmpiricalHamming:
    """Simulates every trajectory and tallies the final weight.

    Blocks of ``BLOCK_SIZE`` trajectories each own an RNG stream, so the
    tally is identical for every worker count.
    """
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    logger.info(
        "Simulating %d trajectories of %s for %d steps (%d blocks, %d workers)",
        config.n_trajectories,
        config.spec.label,
        config.horizon,
        config.blocks,
        workers,
    )
    task = partial(run_block, config)
    if workers == 1 or config.blocks == 1:
        tallies = list(map(task, range(config.blocks)))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(task, range(config.blocks)))
    total = tallies[0]
    for tally in tallies[1:]:
        total = total.merge(tally)
    return total


class Comparison(NamedTuple):
    """Empirical-vs-exact total variation and its acceptance threshold."""

    tv: float
    threshold: float
    passed: bool


def acceptance_threshold(N: int, n: int) -> float:
    """3 sqrt((N + 1) / (4n)), a conservative multinomial TV bound."""
    return 3 * math.sqrt((N + 1) / (4 * n))


def compare_exact(emp: EmpiricalHamming, exact: Sequence[float]) -> Comparison:
    """Total variation between the empirical and an exact weight law."""
    reference = np.asarray([float(value) for value in exact])
    if reference.shape != emp.counts.shape:
        raise DomainError(
            f"exact law has {len(reference)} entries, expected {len(emp.counts)}"
        )
    tv = float(np.abs(emp.pmf - reference).sum() / 2)
    threshold = acceptance_threshold(emp.N, emp.n)
    return Comparison(tv, threshold, tv <= threshold)


def exact_weight_law(spec: ProcessSpec, start: Optional[Sequence[int]], t: int) -> np.ndarray:
    """Weight law after t steps, from the Hamming kernel or Binomial(N, p)."""
    if start is None:
        return binom.pmf(np.arange(spec.N + 1), spec.N, float(spec.p))
    kernel = kernel_hamming(spec.with_mode(FLOAT_MODE))
    return np.asarray(kernel.row(int(sum(start)), t), dtype=np.float64)


def exact_state_law(spec: ProcessSpec, start: Sequence[int], t: int) -> np.ndarray:
    """Full-cube law after t steps (N <= 12), for full-histogram checks."""
    kernel = kernel_spectral(spec.with_mode(FLOAT_MODE), t)
    return np.asarray(kernel.matrix[state_index(start)], dtype=np.float64)
