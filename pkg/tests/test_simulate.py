"""Test cases for the simulate module."""
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import binom

from cubemixer.errors import CapacityError
from cubemixer.errors import DomainError
from cubemixer.laws import IidBernoulli
from cubemixer.laws import SubsetUniform
from cubemixer.process import ProcessSpec
from cubemixer.process import block_generator
from cubemixer.simulate import EmpiricalHamming
from cubemixer.simulate import SimConfig
from cubemixer.simulate import acceptance_threshold
from cubemixer.simulate import compare_exact
from cubemixer.simulate import exact_state_law
from cubemixer.simulate import exact_weight_law
from cubemixer.simulate import run
from cubemixer.simulate import stationary_start

P = Fraction(3, 5)


def test_horizon_zero_keeps_start() -> None:
    """It should put all mass on the start's weight."""
    spec = ProcessSpec(6, P, SubsetUniform(2))
    result = run(SimConfig(spec, (1, 1, 0, 1, 0, 0), 0, 500, seed=3))
    assert result.counts.tolist() == [0, 0, 0, 500, 0, 0, 0]


def test_one_step_iid_walk_is_stationary() -> None:
    """It should reach Binomial(N, p) after one step when alpha = p."""
    spec = ProcessSpec(50, P, IidBernoulli(P))
    result = run(SimConfig(spec, (0,) * 50, 1, 10**5, seed=11))
    reference = binom.pmf(np.arange(51), 50, 0.6)
    assert compare_exact(result, reference).tv <= 0.01


def test_matches_hamming_kernel_power() -> None:
    """It should match the exact weight law after 50 steps within TV 0.01."""
    spec = ProcessSpec(100, P, SubsetUniform(10))
    start = (0,) * 100
    result = run(SimConfig(spec, start, 50, 10**5, seed=2024))
    comparison = compare_exact(result, exact_weight_law(spec, start, 50))
    assert comparison.tv <= 0.01
    assert comparison.passed


def test_worker_count_does_not_change_results() -> None:
    """It should give identical tallies for one and two workers."""
    spec = ProcessSpec(12, P, SubsetUniform(3))
    config = SimConfig(spec, (0,) * 12, 7, 3000, seed=99)
    assert config.blocks == 3
    single = run(config, workers=1)
    double = run(config, workers=2)
    assert single.counts.tolist() == double.counts.tolist()
    assert run(config).counts.tolist() == single.counts.tolist()


def test_seed_changes_results() -> None:
    """It should draw different trajectories for different seeds."""
    spec = ProcessSpec(12, P, SubsetUniform(3))
    first = run(SimConfig(spec, (0,) * 12, 3, 2000, seed=1))
    second = run(SimConfig(spec, (0,) * 12, 3, 2000, seed=2))
    assert first.counts.tolist() != second.counts.tolist()


def test_stationary_start_stays_stationary() -> None:
    """It should keep the weight law Binomial(N, p) from stationary starts."""
    spec = ProcessSpec(20, P, SubsetUniform(3))
    for horizon in (0, 5):
        result = run(SimConfig(spec, None, horizon, 20000, seed=5))
        assert compare_exact(result, exact_weight_law(spec, None, horizon)).passed


def test_stationary_start_draws() -> None:
    """It should draw coordinates with frequency p."""
    spec = ProcessSpec(8, P, SubsetUniform(1))
    draws = stationary_start(spec, np.random.default_rng(0), 5000)
    assert draws.shape == (5000, 8)
    assert draws.mean() == pytest.approx(0.6, abs=0.01)


def test_full_histogram_matches_dense_kernel() -> None:
    """It should tally every state and agree with the dense kernel row."""
    spec = ProcessSpec(3, P, SubsetUniform(1))
    start = (1, 0, 0)
    result = run(SimConfig(spec, start, 2, 20000, seed=8, full_histogram=True))
    assert result.full is not None
    assert int(result.full.sum()) == 20000
    exact = exact_state_law(spec, start, 2)
    tv = float(np.abs(result.full / 20000 - exact).sum() / 2)
    assert tv <= 3 * math.sqrt(8 / (4 * 20000))


def test_block_generator_is_deterministic() -> None:
    """It should reproduce a stream from (seed, block) alone."""
    first = block_generator(7, 3).random(5)
    second = block_generator(7, 3).random(5)
    other = block_generator(7, 4).random(5)
    assert first.tolist() == second.tolist()
    assert first.tolist() != other.tolist()


def test_compare_exact_examples() -> None:
    """It should reproduce the documented comparisons."""
    exact = binom.pmf(np.arange(11), 10, 0.6)
    proportional = EmpiricalHamming(np.full(11, 7, dtype=np.int64), 77)
    uniform = np.full(11, 1 / 11)
    assert compare_exact(proportional, uniform).tv == pytest.approx(0.0, abs=1e-15)
    assert compare_exact(proportional, uniform).passed
    corner = EmpiricalHamming(np.array([100] + [0] * 10, dtype=np.int64), 100)
    comparison = compare_exact(corner, exact)
    assert comparison.tv == pytest.approx(1 - 0.4**10)
    assert not comparison.passed
    assert acceptance_threshold(100, 10**5) == pytest.approx(0.0477, abs=1e-4)
    with pytest.raises(DomainError):
        compare_exact(corner, exact[:5])


def test_merge_adds_counts() -> None:
    """It should merge tallies of the same dimension."""
    first = EmpiricalHamming(np.array([1, 2, 3]), 6)
    second = EmpiricalHamming(np.array([0, 1, 0]), 1)
    merged = first.merge(second)
    assert merged.counts.tolist() == [1, 3, 3] and merged.n == 7
    with pytest.raises(DomainError):
        first.merge(EmpiricalHamming(np.array([1]), 1))
    with pytest.raises(DomainError):
        EmpiricalHamming(np.array([1, 1]), 3)


@pytest.mark.parametrize(
    "kwargs, error",
    [
        ({"start": (0, 1)}, DomainError),
        ({"horizon": -1}, DomainError),
        ({"n_trajectories": 0}, DomainError),
        ({"seed": -1}, DomainError),
        ({"seed": 2**64}, DomainError),
    ],
)
def test_config_validation(kwargs: dict, error: type) -> None:
    """It should reject malformed batches."""
    values = {"start": (0, 0, 0), "horizon": 1, "n_trajectories": 10, "seed": 0}
    values.update(kwargs)
    with pytest.raises(error):
        SimConfig(ProcessSpec(3, P, SubsetUniform(1)), **values)


def test_full_histogram_capacity() -> None:
    """It should refuse full histograms beyond N = 12."""
    spec = ProcessSpec(13, P, SubsetUniform(1))
    with pytest.raises(CapacityError):
        SimConfig(spec, None, 1, 10, full_histogram=True)


def test_run_needs_a_worker() -> None:
    """It should reject a pool without workers."""
    config = SimConfig(ProcessSpec(3, P, SubsetUniform(1)), (0, 0, 0), 1, 10)
    with pytest.raises(DomainError, match="workers"):
        run(config, workers=0)
