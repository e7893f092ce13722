"""Test cases for the laws module."""
from fractions import Fraction

import numpy as np
import pytest

from cubemixer.errors import CapacityError
from cubemixer.errors import DomainError
from cubemixer.laws import BlockUpdate
from cubemixer.laws import DeFinettiDiscrete
from cubemixer.laws import DeFinettiLebesgue
from cubemixer.laws import Explicit
from cubemixer.laws import IidBernoulli
from cubemixer.laws import SubsetUniform
from cubemixer.laws import UpdateLaw
from cubemixer.laws import hypercube_states
from cubemixer.laws import state_index
from cubemixer.numerics import ScalarMode
from cubemixer.numerics import SignedLogReal
from cubemixer.orthopoly import KrawtchoukBasis

LAWS = [
    SubsetUniform(2),
    IidBernoulli(Fraction(3, 10)),
    DeFinettiDiscrete(((Fraction(1, 5), Fraction(1, 2)), (Fraction(4, 5), Fraction(1, 2)))),
    DeFinettiLebesgue(),
    BlockUpdate(2),
    Explicit.from_mapping({"1100": "1/3", "0011": "1/3", "0000": "1/3"}),
]


def test_hypercube_states_order() -> None:
    """It should list states with the first coordinate most significant."""
    states = hypercube_states(3)
    assert states[3].tolist() == [0, 1, 1]
    assert states[4].tolist() == [1, 0, 0]
    assert all(state_index(state) == i for i, state in enumerate(states))


@pytest.mark.parametrize("law", LAWS)
def test_pmf_vector_is_a_probability(law: UpdateLaw) -> None:
    """It should put total mass one on binary 4-vectors, exactly and in floats."""
    exact = law.pmf_vector(4, True)
    assert sum(exact) == 1
    assert all(value >= 0 for value in exact)
    assert law.pmf_vector(4, False).sum() == pytest.approx(1.0)


@pytest.mark.parametrize("law", LAWS)
def test_coordinate_marginals_match_pmf(law: UpdateLaw) -> None:
    """It should compute P(Z[j] = 1) consistently with the pmf vector."""
    pmf = law.pmf_vector(4, True)
    states = hypercube_states(4)
    for j, marginal in enumerate(law.coordinate_marginals(4)):
        assert marginal == sum(pmf[states[:, j] == 1])


@pytest.mark.parametrize("law", LAWS)
def test_sampling_frequencies(law: UpdateLaw) -> None:
    """It should sample coordinates with the right marginal frequencies."""
    rng = np.random.default_rng(11)
    draws = law.sample(4, 20000, rng)
    assert draws.shape == (20000, 4)
    expected = [float(value) for value in law.coordinate_marginals(4)]
    assert draws.mean(axis=0) == pytest.approx(expected, abs=0.02)


def test_subset_sample_has_exact_size() -> None:
    """It should pick exactly z coordinates per draw."""
    draws = SubsetUniform(3).sample(7, 500, np.random.default_rng(1))
    assert set(draws.sum(axis=1).tolist()) == {3}


def test_block_sample_picks_whole_blocks() -> None:
    """It should pick one full block of consecutive coordinates."""
    draws = BlockUpdate(3).sample(6, 200, np.random.default_rng(2))
    assert {tuple(row) for row in draws.astype(int).tolist()} <= {
        (1, 1, 1, 0, 0, 0),
        (0, 0, 0, 1, 1, 1),
    }


def test_weight_pmf_forms() -> None:
    """It should give the law of |Z| for each exchangeable family."""
    assert DeFinettiLebesgue().weight_pmf(4) == [Fraction(1, 5)] * 5
    assert SubsetUniform(2).weight_pmf(3) == [0, 0, 1, 0]
    iid = IidBernoulli(Fraction(1, 2)).weight_pmf(2)
    assert list(iid) == [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)]
    floats = IidBernoulli(Fraction(1, 2)).weight_pmf(2, exact=False)
    assert list(floats) == pytest.approx([0.25, 0.5, 0.25])


def test_lebesgue_pmf_vector_mass_per_weight() -> None:
    """It should give |Z| a uniform law on 0..N."""
    pmf = DeFinettiLebesgue().pmf_vector(3, True)
    weights = hypercube_states(3).sum(axis=1)
    assert [sum(pmf[weights == w]) for w in range(4)] == [Fraction(1, 4)] * 4


@pytest.mark.parametrize(
    "law, N, message",
    [
        (SubsetUniform(0), 4, "subset size"),
        (SubsetUniform(5), 4, "subset size"),
        (IidBernoulli(Fraction(0)), 4, "alpha"),
        (DeFinettiDiscrete(((Fraction(1, 2), Fraction(1, 2)),)), 4, "sum to 1"),
        (DeFinettiDiscrete(((Fraction(3, 2), Fraction(1)),)), 4, "rate"),
        (BlockUpdate(3), 4, "divide"),
        (Explicit.from_mapping({"01": 1}), 3, "binary 3-vector"),
        (Explicit.from_mapping({"01": "1/2"}), 2, "sum to 1"),
        (DeFinettiDiscrete(()), 4, "at least one atom"),
        (
            DeFinettiDiscrete(((Fraction(1, 2), Fraction(3, 2)), (Fraction(1, 4), Fraction(-1, 2)))),
            4,
            "nonnegative",
        ),
        (Explicit(()), 2, "at least one state"),
        (Explicit((((0, 1), Fraction(1, 2)), ((0, 1), Fraction(1, 2)))), 2, "listed twice"),
        (Explicit.from_mapping({"01": "3/2", "10": "-1/2"}), 2, "negative"),
    ],
)
def test_validation_errors(law: UpdateLaw, N: int, message: str) -> None:
    """It should reject parameters outside their domain."""
    with pytest.raises(DomainError, match=message):
        law.validate(N)


def test_explicit_size_limit() -> None:
    """It should refuse explicit tables beyond N = 20."""
    law = Explicit.from_mapping({"0" * 21: 1})
    with pytest.raises(CapacityError):
        law.validate(21)


def test_explicit_normalizes_table() -> None:
    """It should store probabilities exactly and compare by content."""
    first = Explicit.from_mapping({"10": 0.25, "01": "3/4"})
    second = Explicit.from_mapping({(0, 1): Fraction(3, 4), (1, 0): Fraction(1, 4)})
    assert first == second
    assert hash(first) == hash(second)


def test_block_subset_eigenvalue_examples() -> None:
    """It should evaluate the block closed form on whole and split subsets."""
    basis = KrawtchoukBasis(4, Fraction(1, 2), ScalarMode.exact())
    law = BlockUpdate(2)
    assert law.subset_eigenvalue(basis, [0, 1]) == 1
    assert law.subset_eigenvalue(basis, [0, 2]) == -1
    assert law.subset_eigenvalue(basis, []) == 1


def test_never_updating_law_has_unit_eigenvalues() -> None:
    """It should give rho_A = 1 when Z is always empty."""
    basis = KrawtchoukBasis(3, Fraction(3, 5), ScalarMode.exact())
    law = Explicit.from_mapping({"000": 1})
    assert all(law.subset_eigenvalue(basis, subset) == 1 for subset in ([], [0], [0, 1, 2]))


def test_eigenvalue_closed_forms() -> None:
    """It should produce the documented eigenvalue examples."""
    exact = KrawtchoukBasis(4, Fraction(3, 5), ScalarMode.exact())
    assert DeFinettiLebesgue().eigenvalues(exact)[1] == Fraction(1, 6)
    assert IidBernoulli(Fraction(3, 5)).eigenvalues(exact)[1:] == (0, 0, 0, 0)
    half = KrawtchoukBasis(4, Fraction(1, 2), ScalarMode.exact())
    assert SubsetUniform(2).eigenvalues(half) == (1, 0, Fraction(-1, 3), 0, 1)


@pytest.mark.parametrize(
    "law",
    [
        IidBernoulli(Fraction(3, 10)),
        DeFinettiDiscrete(((Fraction(1, 5), Fraction(1, 3)), (Fraction(9, 10), Fraction(2, 3)))),
        DeFinettiLebesgue(),
    ],
)
def test_logfloat_eigenvalues_match_exact(law: UpdateLaw) -> None:
    """It should agree with the rational eigenvalues in log-domain mode."""
    exact = KrawtchoukBasis(30, Fraction(3, 5), ScalarMode.exact())
    logged = exact.with_mode(ScalarMode.logfloat())
    for reference, value in zip(law.eigenvalues(exact), law.eigenvalues(logged)):  # type: ignore[attr-defined]
        assert float(value) == pytest.approx(float(reference), rel=1e-12, abs=1e-300)


def test_labels() -> None:
    """It should describe laws compactly."""
    assert SubsetUniform(3).label == "subset(z=3)"
    assert IidBernoulli(0.3).label == "iid(alpha=3/10)"
    assert DeFinettiLebesgue().label == "lebesgue()"
    assert BlockUpdate(2).to_dict() == {"kind": "block", "beta": 2}


def test_lebesgue_logfloat_eigenvalues_at_half() -> None:
    """It should give exact zeros for odd degrees when p = 1/2."""
    exact = KrawtchoukBasis(6, Fraction(1, 2), ScalarMode.exact())
    logged = exact.with_mode(ScalarMode.logfloat())
    values = DeFinettiLebesgue().eigenvalues(logged)
    reference = DeFinettiLebesgue().eigenvalues(exact)
    zeros = [isinstance(value, SignedLogReal) and value.is_zero for value in values]
    assert zeros == [n % 2 == 1 for n in range(7)]
    for expected, value in zip(reference, values):
        assert float(value) == pytest.approx(float(expected), rel=1e-12)
