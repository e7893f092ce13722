"""Defines update laws, the law of the set Z of coordinates refreshed per step."""
from __future__ import annotations

import math
from abc import ABCMeta
from abc import abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any
from typing import Iterable
from typing import Mapping
from typing import Sequence

import numpy as np

from .errors import CapacityError
from .errors import DomainError
from .numerics import RationalLike
from .numerics import Scalar
from .numerics import SignedLogReal
from .numerics import as_fraction
from .numerics import binomial_pmf
from .numerics import log_abs_ratio
from .numerics import stable_sum
from .orthopoly import KrawtchoukBasis
from .orthopoly import krawtchouk_row


EXPLICIT_LIMIT = 20


@lru_cache(maxsize=32)
def hypercube_states(N: int) -> np.ndarray:
    """All binary N-vectors in lexicographic order (first coordinate most significant)."""
    index = np.arange(2**N)
    shifts = np.arange(N - 1, -1, -1)
    states = ((index[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    states.setflags(write=False)
    return states


def state_index(x: Sequence[int]) -> int:
    """Position of a binary vector in lexicographic order."""
    index = 0
    for bit in x:
        index = 2 * index + int(bit)
    return index


def _random_subsets(weights: np.ndarray, N: int, rng: np.random.Generator) -> np.ndarray:
    """Rows of uniformly random subsets with the given sizes."""
    keys = rng.random((len(weights), N))
    ranks = keys.argsort(axis=1).argsort(axis=1)
    return ranks < np.asarray(weights)[:, None]


def _format(value: Fraction) -> str:
    """Fraction as a config string."""
    return str(value)


class UpdateLaw(metaclass=ABCMeta):
    """Law of the update vector Z."""

    kind = ""

    @property
    def exchangeable(self) -> bool:
        """True when the law is invariant under coordinate permutations."""
        return False

    @abstractmethod
    def validate(self, N: int) -> None:
        """Raises DomainError when the law does not fit dimension N."""

    @abstractmethod
    def pmf_vector(self, N: int, exact: bool = True) -> np.ndarray:
        """P(Z = z) for every z in lexicographic order."""

    @abstractmethod
    def coordinate_marginals(self, N: int) -> list[Fraction]:
        """P(Z[j] = 1) for every coordinate j."""

    @abstractmethod
    def sample(self, N: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draws ``size`` independent copies of Z as a boolean array."""

    @abstractmethod
    def subset_eigenvalue(self, basis: KrawtchoukBasis, subset: Iterable[int]) -> Scalar:
        """Returns rho_A = E[prod_{j in A} (1 - Z[j] / p)]."""

    @abstractmethod
    def to_dict(self) -> dict[str, Any]:
        """Config representation."""

    @property
    def label(self) -> str:
        """Short description used in result rows."""
        params = ",".join(f"{key}={value}" for key, value in self.to_dict().items() if key != "kind")
        return f"{self.kind}({params})"


class ExchangeableLaw(UpdateLaw):
    """Update law invariant under coordinate permutations."""

    @property
    def exchangeable(self) -> bool:
        """True."""
        return True

    @abstractmethod
    def weight_pmf(self, N: int, exact: bool = True) -> Sequence[Any]:
        """Law of |Z| on 0..N."""

    @abstractmethod
    def eigenvalues(self, basis: KrawtchoukBasis) -> tuple[Scalar, ...]:
        """rho_0..rho_N in the basis scalar mode (rho_0 = 1)."""

    def pmf_vector(self, N: int, exact: bool = True) -> np.ndarray:
        """P(Z = z), uniform within each weight class."""
        weights = hypercube_states(N).sum(axis=1)
        law = self.weight_pmf(N, exact)
        if exact:
            per_state = np.array(
                [Fraction(law[w]) / math.comb(N, w) for w in range(N + 1)], dtype=object
            )
        else:
            per_state = np.array(
                [float(law[w]) / math.comb(N, w) for w in range(N + 1)]
            )
        return per_state[weights]

    def coordinate_marginals(self, N: int) -> list[Fraction]:
        """E|Z| / N for every coordinate."""
        law = self.weight_pmf(N, True)
        mean = sum((w * Fraction(law[w]) for w in range(N + 1)), Fraction(0))
        return [mean / N] * N

    def subset_eigenvalue(self, basis: KrawtchoukBasis, subset: Iterable[int]) -> Scalar:
        """rho_|A|."""
        return self.eigenvalues(basis)[len(set(subset))]

    def sample(self, N: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draws |Z| then a uniform subset of that size."""
        law = np.asarray(self.weight_pmf(N, False), dtype=np.float64)
        weights = rng.choice(N + 1, size=size, p=law / law.sum())
        return _random_subsets(weights, N, rng)


def _power_list(base: Fraction, N: int) -> list[Fraction]:
    """base**0..base**N."""
    values = [Fraction(1)]
    for _ in range(N):
        values.append(values[-1] * base)
    return values


def _binomial_law(N: int, alpha: Fraction, exact: bool) -> list[Any]:
    """Binomial(N, alpha) pmf."""
    if exact:
        return [
            math.comb(N, w) * alpha**w * (1 - alpha) ** (N - w) for w in range(N + 1)
        ]
    return list(binomial_pmf(N, float(alpha)))


@dataclass(frozen=True)
class SubsetUniform(ExchangeableLaw):
    """Z is a uniformly chosen subset of exactly z coordinates."""

    z: int
    kind = "subset"

    def validate(self, N: int) -> None:
        """Requires 1 <= z <= N."""
        if not 1 <= self.z <= N:
            raise DomainError(f"subset size z must lie in [1, {N}], got {self.z}")

    def weight_pmf(self, N: int, exact: bool = True) -> Sequence[Any]:
        """Point mass at z."""
        zero = Fraction(0) if exact else 0.0
        law = [zero] * (N + 1)
        law[self.z] = Fraction(1) if exact else 1.0
        return law

    def eigenvalues(self, basis: KrawtchoukBasis) -> tuple[Scalar, ...]:
        """rho_n = Q_n(z)."""
        return krawtchouk_row(basis, self.z)

    def coordinate_marginals(self, N: int) -> list[Fraction]:
        """z / N."""
        return [Fraction(self.z, N)] * N

    def sample(self, N: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform z-subsets."""
        return _random_subsets(np.full(size, self.z), N, rng)

    def to_dict(self) -> dict[str, Any]:
        """Config representation."""
        return {"kind": self.kind, "z": self.z}


@dataclass(frozen=True)
class IidBernoulli(ExchangeableLaw):
    """Every coordinate is picked independently with probability alpha."""

    alpha: Fraction
    kind = "iid"

    def __post_init__(self) -> None:
        """Stores alpha exactly."""
        object.__setattr__(self, "alpha", as_fraction(self.alpha))

    def validate(self, N: int) -> None:
        """Requires 0 < alpha <= 1."""
        if not 0 < self.alpha <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")

    def weight_pmf(self, N: int, exact: bool = True) -> Sequence[Any]:
        """Binomial(N, alpha)."""
        return _binomial_law(N, self.alpha, exact)

    def eigenvalues(self, basis: KrawtchoukBasis) -> tuple[Scalar, ...]:
        """rho_n = (1 - alpha / p)**n."""
        base = 1 - self.alpha / basis.p
        if basis.mode.is_exact:
            return tuple(_power_list(base, basis.N))
        log_base = SignedLogReal.from_value(base)
        return tuple(log_base**n for n in range(basis.N + 1))

    def coordinate_marginals(self, N: int) -> list[Fraction]:
        """alpha."""
        return [self.alpha] * N

    def sample(self, N: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """Independent Bernoulli coordinates."""
        return rng.random((size, N)) < float(self.alpha)

    def to_dict(self) -> dict[str, Any]:
        """Config representation."""
        return {"kind": self.kind, "alpha": _format(self.alpha)}


@dataclass(frozen=True)
class DeFinettiDiscrete(ExchangeableLaw):
    """Each step draws a rate alpha_k with probability weight_k, then picks iid."""

    atoms: tuple[tuple[Fraction, Fraction], ...]
    kind = "definetti"

    def __post_init__(self) -> None:
        """Stores atoms exactly."""
        atoms = tuple((as_fraction(alpha), as_fraction(weight)) for alpha, weight in self.atoms)
        object.__setattr__(self, "atoms", atoms)

    def validate(self, N: int) -> None:
        """Requires rates in [0, 1] and weights forming a probability vector."""
        if not self.atoms:
            raise DomainError("De Finetti mixture needs at least one atom")
        for alpha, weight in self.atoms:
            if not 0 <= alpha <= 1:
                raise DomainError(f"atom rate must lie in [0, 1], got {alpha}")
            if weight < 0:
                raise DomainError(f"atom weight must be nonnegative, got {weight}")
        total = sum(weight for _, weight in self.atoms)
        if total != 1:
            raise DomainError(f"atom weights must sum to 1, got {total}")

    def weight_pmf(self, N: int, exact: bool = True) -> Sequence[Any]:
        """Mixture of Binomial(N, alpha_k)."""
        law: list[Any] = [Fraction(0) if exact else 0.0] * (N + 1)
        for alpha, weight in self.atoms:
            part = _binomial_law(N, alpha, exact)
            for w in range(N + 1):
                law[w] += (weight if exact else float(weight)) * part[w]
        return law

    def eigenvalues(self, basis: KrawtchoukBasis) -> tuple[Scalar, ...]:
        """rho_n = sum_k weight_k (1 - alpha_k / p)**n."""
        bases = [(1 - alpha / basis.p, weight) for alpha, weight in self.atoms]
        if basis.mode.is_exact:
            powers = [_power_list(base, basis.N) for base, _ in bases]
            return tuple(
                sum(
                    (weight * power[n] for (_, weight), power in zip(bases, powers)),
                    Fraction(0),
                )
                for n in range(basis.N + 1)
            )
        logs = [
            (SignedLogReal.from_value(base), SignedLogReal.from_value(weight))
            for base, weight in bases
        ]
        return tuple(
            stable_sum(weight * base**n for base, weight in logs)
            for n in range(basis.N + 1)
        )

    def coordinate_marginals(self, N: int) -> list[Fraction]:
        """Mean rate."""
        mean = sum((alpha * weight for alpha, weight in self.atoms), Fraction(0))
        return [mean] * N

    def sample(self, N: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draws a rate per copy, then iid coordinates."""
        rates = np.array([float(alpha) for alpha, _ in self.atoms])
        weights = np.array([float(weight) for _, weight in self.atoms])
        chosen = rng.choice(len(rates), size=size, p=weights / weights.sum())
        return rng.random((size, N)) < rates[chosen][:, None]

    def to_dict(self) -> dict[str, Any]:
        """Config representation."""
        return {
            "kind": self.kind,
            "atoms": [[_format(alpha), _format(weight)] for alpha, weight in self.atoms],
        }


@dataclass(frozen=True)
class DeFinettiLebesgue(ExchangeableLaw):
    """De Finetti mixture with a uniform rate on (0, 1)."""

    kind = "lebesgue"

    def validate(self, N: int) -> None:
        """Always valid."""

    def weight_pmf(self, N: int, exact: bool = True) -> Sequence[Any]:
        """Uniform on 0..N."""
        return [Fraction(1, N + 1) if exact else 1.0 / (N + 1)] * (N + 1)

    def eigenvalues(self, basis: KrawtchoukBasis) -> tuple[Scalar, ...]:
        """rho_n = (p / (n + 1)) (1 - (-q/p)**(n + 1))."""
        p, ratio = basis.p, basis.ratio
        if basis.mode.is_exact:
            powers = _power_list(-ratio, basis.N + 1)
            return tuple(
                p / (n + 1) * (1 - powers[n + 1]) for n in range(basis.N + 1)
            )
        log_p = log_abs_ratio(p.numerator, p.denominator)
        log_ratio = basis.log_ratio
        values = []
        for n in range(basis.N + 1):
            exponent = (n + 1) * log_ratio
            if (n + 1) % 2:
                log_factor = math.log1p(math.exp(exponent))
            elif exponent == 0:
                values.append(SignedLogReal.zero())
                continue
            else:
                log_factor = math.log(-math.expm1(exponent))
            values.append(SignedLogReal(1, log_p - math.log(n + 1) + log_factor))
        return tuple(values)

    def coordinate_marginals(self, N: int) -> list[Fraction]:
        """1/2."""
        return [Fraction(1, 2)] * N

    def sample(self, N: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draws a uniform rate per copy, then iid coordinates."""
        rates = rng.random(size)
        return rng.random((size, N)) < rates[:, None]

    def to_dict(self) -> dict[str, Any]:
        """Config representation."""
        return {"kind": self.kind}


@dataclass(frozen=True)
class BlockUpdate(UpdateLaw):
    """Coordinates are split into N/beta consecutive blocks; one block is picked."""

    beta: int
    kind = "block"

    def validate(self, N: int) -> None:
        """Requires beta to divide N."""
        if not 1 <= self.beta <= N or N % self.beta:
            raise DomainError(f"block size beta must divide N={N}, got {self.beta}")

    def blocks(self, N: int) -> list[range]:
        """The partition {1..beta}, {beta+1..2 beta}, ... as 0-based ranges."""
        return [range(start, start + self.beta) for start in range(0, N, self.beta)]

    def pmf_vector(self, N: int, exact: bool = True) -> np.ndarray:
        """beta / N on each block indicator."""
        mass: Any = Fraction(self.beta, N) if exact else self.beta / N
        vector = np.zeros(2**N, dtype=object if exact else np.float64)
        if exact:
            vector[:] = Fraction(0)
        for block in self.blocks(N):
            indicator = [1 if j in block else 0 for j in range(N)]
            vector[state_index(indicator)] = mass
        return vector

    def coordinate_marginals(self, N: int) -> list[Fraction]:
        """beta / N."""
        return [Fraction(self.beta, N)] * N

    def sample(self, N: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """Picks one block per copy."""
        chosen = rng.integers(N // self.beta, size=size)
        membership = np.arange(N) // self.beta
        return membership[None, :] == chosen[:, None]

    def subset_eigenvalue(self, basis: KrawtchoukBasis, subset: Iterable[int]) -> Scalar:
        """rho_A = (beta / N) sum over blocks of (-q/p)**|A & block|."""
        members = set(subset)
        ratio = -basis.ratio
        value = Fraction(self.beta, basis.N) * sum(
            (ratio ** len(members.intersection(block)) for block in self.blocks(basis.N)),
            Fraction(0),
        )
        return value if basis.mode.is_exact else SignedLogReal.from_value(value)

    def to_dict(self) -> dict[str, Any]:
        """Config representation."""
        return {"kind": self.kind, "beta": self.beta}


@dataclass(frozen=True)
class Explicit(UpdateLaw):
    """Arbitrary law of Z given as a table over binary vectors."""

    pmf: tuple[tuple[tuple[int, ...], Fraction], ...]
    kind = "explicit"

    def __post_init__(self) -> None:
        """Stores the table sorted, with exact probabilities."""
        table = tuple(
            sorted(
                (tuple(int(bit) for bit in state), as_fraction(prob))
                for state, prob in self.pmf
            )
        )
        object.__setattr__(self, "pmf", table)

    @classmethod
    def from_mapping(cls, table: Mapping[Any, RationalLike]) -> Explicit:
        """Builds the law from ``{"0101": "1/2", ...}`` or tuple keys."""
        pairs = []
        for state, prob in table.items():
            bits = tuple(int(bit) for bit in state)
            pairs.append((bits, as_fraction(prob)))
        return cls(tuple(pairs))

    def validate(self, N: int) -> None:
        """Requires N-bit states and a probability vector."""
        if N > EXPLICIT_LIMIT:
            raise CapacityError(f"Explicit laws support N <= {EXPLICIT_LIMIT}, got {N}")
        if not self.pmf:
            raise DomainError("Explicit law needs at least one state")
        seen = set()
        for state, prob in self.pmf:
            if len(state) != N or any(bit not in (0, 1) for bit in state):
                raise DomainError(f"state {state} is not a binary {N}-vector")
            if state in seen:
                raise DomainError(f"state {state} listed twice")
            if prob < 0:
                raise DomainError(f"probability of {state} is negative")
            seen.add(state)
        total = sum(prob for _, prob in self.pmf)
        if total != 1:
            raise DomainError(f"probabilities must sum to 1, got {total}")

    def pmf_vector(self, N: int, exact: bool = True) -> np.ndarray:
        """The table as a dense vector."""
        vector = np.zeros(2**N, dtype=object if exact else np.float64)
        if exact:
            vector[:] = Fraction(0)
        for state, prob in self.pmf:
            vector[state_index(state)] = prob if exact else float(prob)
        return vector

    def coordinate_marginals(self, N: int) -> list[Fraction]:
        """P(Z[j] = 1) from the table."""
        return [
            sum((prob for state, prob in self.pmf if state[j]), Fraction(0))
            for j in range(N)
        ]

    def sample(self, N: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draws rows of the table."""
        states = np.array([state for state, _ in self.pmf], dtype=bool)
        probs = np.array([float(prob) for _, prob in self.pmf])
        chosen = rng.choice(len(states), size=size, p=probs / probs.sum())
        return states[chosen]

    def subset_eigenvalue(self, basis: KrawtchoukBasis, subset: Iterable[int]) -> Scalar:
        """E[prod_{j in A} (1 - Z[j] / p)] over the table."""
        members = sorted(set(subset))
        factor = 1 - 1 / basis.p
        value = sum(
            (prob * factor ** sum(state[j] for j in members) for state, prob in self.pmf),
            Fraction(0),
        )
        return value if basis.mode.is_exact else SignedLogReal.from_value(value)

    def to_dict(self) -> dict[str, Any]:
        """Config representation."""
        return {
            "kind": self.kind,
            "pmf": {"".join(map(str, state)): _format(prob) for state, prob in self.pmf},
        }
