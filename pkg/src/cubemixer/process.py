"""Transition kernels of reversible walks on the hypercube.

A step refreshes the coordinates picked by the update vector Z: a picked 0
becomes 1 and a picked 1 flips to 0 with probability q/p. Every kernel here
is reversible for the product measure ``pi(y) = p**|y| q**(N - |y|)``.

States are indexed lexicographically with the first coordinate as the most
significant bit, so ``(0, 1, 1)`` is state 3.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from functools import lru_cache
from typing import Any
from typing import Iterable
from typing import Sequence

import numpy as np

from .errors import CapacityError
from .errors import DomainError
from .errors import NotExchangeableError
from .laws import ExchangeableLaw
from .laws import UpdateLaw
from .laws import hypercube_states
from .numerics import Scalar
from .numerics import ScalarMode
from .numerics import SignedLogArray
from .numerics import SignedLogReal
from .numerics import as_fraction
from .numerics import binomial_pmf
from .numerics import log_binomial_table
from .numerics import stable_sum
from .orthopoly import KrawtchoukBasis
from .orthopoly import h_weight
from .orthopoly import krawtchouk_row
from .orthopoly import rn_coefficient


logger = logging.getLogger(__name__)

DENSE_LIMIT = 14
BRUTEFORCE_LIMIT = 12
HAMMING_EXACT_LIMIT = 128
HAMMING_ROUNDED_LIMIT = 64
RW_STEP_LIMIT = 4
RW_BUDGET = 1 << 16

#: Sign in ``1 + RW_SIGN * (-q/p)**S`` of the random-walk representation.
RW_SIGN = -1


@dataclass(frozen=True)
class ProcessSpec:
    """Dimension, stationarity parameter, update law and scalar mode."""

    N: int
    p: Fraction
    law: UpdateLaw
    mode: ScalarMode = ScalarMode()

    def __post_init__(self) -> None:
        """Validates the process."""
        object.__setattr__(self, "p", as_fraction(self.p))
        if self.N < 1:
            raise DomainError(f"N must be positive, got {self.N}")
        if not Fraction(1, 2) <= self.p < 1:
            raise DomainError(f"p must lie in [1/2, 1), got {self.p}")
        self.law.validate(self.N)

    @property
    def q(self) -> Fraction:
        """1 - p."""
        return 1 - self.p

    @property
    def basis(self) -> KrawtchoukBasis:
        """Krawtchouk basis for (N, p) in the process's scalar mode."""
        return KrawtchoukBasis(self.N, self.p, self.mode)

    @property
    def label(self) -> str:
        """Identifier used in result rows."""
        return f"N={self.N},p={self.p},{self.law.label}"

    def with_mode(self, mode: ScalarMode) -> ProcessSpec:
        """Same process in another scalar mode."""
        return ProcessSpec(self.N, self.p, self.law, mode)

    def stationary_vector(self, exact: bool | None = None) -> np.ndarray:
        """pi(y) for every state y."""
        exact = self.mode.is_exact if exact is None else exact
        weights = hypercube_states(self.N).sum(axis=1)
        return self.stationary_weights(exact)[weights] / _class_sizes(self.N, exact)[
            weights
        ]

    def stationary_weights(self, exact: bool | None = None) -> np.ndarray:
        """Binomial(N, p) law of the Hamming weight under pi."""
        exact = self.mode.is_exact if exact is None else exact
        if exact:
            p, q = self.p, self.q
            return np.array(
                [math.comb(self.N, j) * p**j * q ** (self.N - j) for j in range(self.N + 1)],
                dtype=object,
            )
        return binomial_pmf(self.N, float(self.p))


def _class_sizes(N: int, exact: bool) -> np.ndarray:
    """C(N, j) for j = 0..N."""
    sizes = [math.comb(N, j) for j in range(N + 1)]
    return np.array(sizes, dtype=object) if exact else np.array(sizes, dtype=np.float64)


@dataclass(frozen=True)
class HammingSpectrum:
    """Eigenvalues rho_0..rho_N of an exchangeable walk (rho_0 = 1)."""

    values: tuple[Scalar, ...]
    basis: KrawtchoukBasis

    @property
    def rho(self) -> tuple[Scalar, ...]:
        """rho_1..rho_N."""
        return self.values[1:]

    @cached_property
    def logs(self) -> SignedLogArray:
        """Values in signed log form."""
        return SignedLogArray.from_scalars(_to_signed(value) for value in self.values)

    def is_periodic(self) -> bool:
        """True when some rho_n, n >= 1, has modulus one."""
        return any(
            sign != 0 and abs(float(log)) < 1e-12
            for sign, log in zip(self.logs.signs[1:], self.logs.logs[1:])
        )


def _to_signed(value: Scalar) -> SignedLogReal:
    """Scalar as SignedLogReal."""
    if isinstance(value, SignedLogReal):
        return value
    return SignedLogReal.from_value(value)


def _require_exchangeable(spec: ProcessSpec) -> ExchangeableLaw:
    """The law of spec, or NotExchangeableError."""
    if not isinstance(spec.law, ExchangeableLaw):
        raise NotExchangeableError(
            f"{spec.law.label} is not exchangeable; use eigenvalues_general"
        )
    return spec.law


@lru_cache(maxsize=256)
def eigenvalues_hamming(spec: ProcessSpec) -> HammingSpectrum:
    """Degree-indexed eigenvalues of an exchangeable walk."""
    law = _require_exchangeable(spec)
    return HammingSpectrum(law.eigenvalues(spec.basis), spec.basis)


def eigenvalues_general(spec: ProcessSpec, subset: Iterable[int]) -> Scalar:
    """Returns rho_A for a 0-based coordinate subset A."""
    members = sorted(set(subset))
    if any(not 0 <= j < spec.N for j in members):
        raise DomainError(f"subset {members} is not inside [0, {spec.N})")
    return spec.law.subset_eigenvalue(spec.basis, members)


@dataclass(frozen=True)
class KernelDense:
    """One- or multi-step kernel on all 2**N states."""

    N: int
    matrix: np.ndarray
    exact: bool
    provenance: str = ""

    def row_sums(self) -> np.ndarray:
        """Row sums."""
        return self.matrix.sum(axis=1)

    def is_stochastic(self, tolerance: float = 1e-12) -> bool:
        """Rows sum to one (exactly in exact mode)."""
        sums = self.row_sums()
        if self.exact:
            return all(total == 1 for total in sums)
        return bool(np.all(np.abs(sums.astype(np.float64) - 1) <= tolerance))

    def is_reversible(self, pi: np.ndarray, tolerance: float = 1e-12) -> bool:
        """Detailed balance pi(x) K(x, y) = pi(y) K(y, x)."""
        flow = pi[:, None] * self.matrix
        if self.exact:
            return bool(np.all(flow == flow.T))
        return bool(np.max(np.abs(flow - flow.T)) <= tolerance)

    def power(self, t: int) -> KernelDense:
        """t-step kernel by repeated squaring."""
        if t < 0:
            raise DomainError(f"t must be >= 0, got {t}")
        result = _identity(2**self.N, self.exact)
        base = self.matrix
        while t:
            if t & 1:
                result = result @ base
            t >>= 1
            if t:
                base = base @ base
        return KernelDense(self.N, result, self.exact, self.provenance + "^t")

    def max_difference(self, other: KernelDense) -> float:
        """Largest absolute entry difference."""
        diff = self.matrix - other.matrix
        return float(np.max(np.abs(diff.astype(np.float64))))

    def lump(self, check: bool = True, tolerance: float = 1e-12) -> KernelHamming:
        """Aggregates columns by Hamming weight and keeps one row per weight class.

        With ``check``, raises NotExchangeableError when rows within a weight
        class disagree, i.e. the weight process is not Markov.
        """
        weights = hypercube_states(self.N).sum(axis=1)
        columns = [self.matrix[:, weights == j].sum(axis=1) for j in range(self.N + 1)]
        aggregated = np.stack(columns, axis=1)
        rows = []
        for i in range(self.N + 1):
            block = aggregated[weights == i]
            if check:
                spread = block - block[:1]
                if self.exact:
                    consistent = bool(np.all(spread == 0))
                else:
                    consistent = float(np.max(np.abs(spread))) <= tolerance
                if not consistent:
                    raise NotExchangeableError(
                        f"Weight class {i} is not lumpable in {self.provenance}"
                    )
            rows.append(block[0])
        return KernelHamming(self.N, np.stack(rows), self.exact, self.provenance + "/lumped")

    def marginal(self, coordinates: Sequence[int]) -> np.ndarray:
        """Law of the coordinates in B for each start row, shape (2**N, 2**|B|)."""
        states = hypercube_states(self.N)
        patterns = np.zeros(2**self.N, dtype=np.int64)
        for j in coordinates:
            patterns = 2 * patterns + states[:, j]
        size = 2 ** len(coordinates)
        return np.stack(
            [self.matrix[:, patterns == b].sum(axis=1) for b in range(size)], axis=1
        )

    def restriction_holds(self, coordinates: Sequence[int], tolerance: float = 1e-12) -> bool:
        """The marginal on B depends on the start x only through x(B)."""
        states = hypercube_states(self.N)
        marginal = self.marginal(coordinates)
        keys = [tuple(row) for row in states[:, list(coordinates)]]
        reference: dict[tuple[int, ...], np.ndarray] = {}
        for key, row in zip(keys, marginal):
            first = reference.setdefault(key, row)
            if self.exact:
                if not np.all(row == first):
                    return False
            elif float(np.max(np.abs(row - first))) > tolerance:
                return False
        return True


@dataclass(frozen=True)
class KernelHamming:
    """Kernel of the Hamming-weight process, shape (N+1, N+1)."""

    N: int
    matrix: np.ndarray
    exact: bool
    provenance: str = ""

    def row_sums(self) -> np.ndarray:
        """Row sums."""
        return self.matrix.sum(axis=1)

    def is_stochastic(self, tolerance: float = 1e-12) -> bool:
        """Rows sum to one."""
        sums = self.row_sums()
        if self.exact:
            return all(total == 1 for total in sums)
        return bool(np.all(np.abs(sums.astype(np.float64) - 1) <= tolerance))

    def power(self, t: int) -> KernelHamming:
        """t-step Hamming kernel."""
        if t < 0:
            raise DomainError(f"t must be >= 0, got {t}")
        result = _identity(self.N + 1, self.exact)
        base = self.matrix
        while t:
            if t & 1:
                result = result @ base
            base = base @ base
            t >>= 1
        return KernelHamming(self.N, result, self.exact, self.provenance + "^t")

    def row(self, i: int, t: int = 1) -> np.ndarray:
        """Law of the weight after t steps from weight i."""
        if not 0 <= i <= self.N:
            raise DomainError(f"weight must lie in [0, {self.N}], got {i}")
        vector = _identity(self.N + 1, self.exact)[i]
        for _ in range(t):
            vector = vector @ self.matrix
        return vector

    def max_difference(self, other: KernelHamming) -> float:
        """Largest absolute entry difference."""
        diff = self.matrix - other.matrix
        return float(np.max(np.abs(diff.astype(np.float64))))


def _identity(size: int, exact: bool) -> np.ndarray:
    """Identity matrix of Fractions or floats."""
    if not exact:
        return np.eye(size)
    matrix = np.full((size, size), Fraction(0), dtype=object)
    for i in range(size):
        matrix[i, i] = Fraction(1)
    return matrix


def kron_apply(factor: np.ndarray, vector: np.ndarray, N: int) -> np.ndarray:
    """Applies ``factor`` (m x k) along each of the N axes of a k**N vector.

    Equivalent to multiplying by the N-fold Kronecker power of ``factor``.
    Works on float and Fraction (object) arrays alike.
    """
    rows, cols = factor.shape
    tensor = np.asarray(vector).reshape((cols,) * N)
    for axis in range(N):
        moved = np.moveaxis(tensor, axis, 0)
        slices = []
        for r in range(rows):
            acc = factor[r, 0] * moved[0]
            for c in range(1, cols):
                acc = acc + factor[r, c] * moved[c]
            slices.append(acc)
        tensor = np.moveaxis(np.stack(slices), 0, axis)
    return tensor.reshape(-1)


def _pairs_to_matrix(vector: np.ndarray, N: int) -> np.ndarray:
    """Reorders a vector indexed by (x1, y1, ..., xN, yN) into a (x, y) matrix."""
    tensor = vector.reshape((2, 2) * N)
    order = list(range(0, 2 * N, 2)) + list(range(1, 2 * N, 2))
    return tensor.transpose(order).reshape(2**N, 2**N)


def _scalar_array(values: Sequence[Sequence[Any]], exact: bool) -> np.ndarray:
    """Matrix of Fractions (object) or floats."""
    if exact:
        return np.array([[Fraction(v) for v in row] for row in values], dtype=object)
    return np.array([[float(v) for v in row] for row in values], dtype=np.float64)


def subset_eigenvalues(spec: ProcessSpec, exact: bool | None = None) -> np.ndarray:
    """rho_A for every subset A, indexed like states (bit j set when j is in A)."""
    exact = spec.mode.is_exact if exact is None else exact
    _check_size(spec.N, DENSE_LIMIT, "subset eigenvalues")
    factor = _scalar_array([[1, 1], [1, 1 - 1 / spec.p]], exact)
    return kron_apply(factor, spec.law.pmf_vector(spec.N, exact), spec.N)


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Philox stream for one block of draws.

    The stream depends on (seed, block) only, so results do not depend on
    how blocks are spread over workers.
    """
    sequence = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(sequence))


def _check_size(N: int, limit: int, what: str) -> None:
    """Raises CapacityError when N exceeds limit."""
    if N > limit:
        raise CapacityError(f"{what} supports N <= {limit}, got N={N}")


def kernel_spectral(spec: ProcessSpec, t: int = 1) -> KernelDense:
    """t-step kernel from the spectral representation over all subsets."""
    _check_size(spec.N, DENSE_LIMIT, "kernel_spectral")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    exact = spec.mode.is_exact
    N, p, q = spec.N, spec.p, spec.q
    rho = subset_eigenvalues(spec, exact)
    sizes = hypercube_states(N).sum(axis=1)
    ratio_powers = _scalar_array([[(p / q) ** k for k in range(N + 1)]], exact)[0]
    diagonal = rho**t * ratio_powers[sizes]
    one_site = [q, p]
    factor = _scalar_array(
        [
            [one_site[y], (1 - Fraction(x) / p) * (1 - Fraction(y) / p) * one_site[y]]
            for x in (0, 1)
            for y in (0, 1)
        ],
        exact,
    )
    matrix = _pairs_to_matrix(kron_apply(factor, diagonal, N), N)
    logger.debug("Spectral kernel N=%d t=%d (%s)", N, t, spec.mode)
    return KernelDense(N, matrix, exact, "spectral")


def kernel_bruteforce(spec: ProcessSpec) -> KernelDense:
    """One-step kernel summed over every value of Z with the step rules.

    For a fixed Z the step acts coordinatewise: an unpicked coordinate keeps
    its value, a picked one moves by ``[[0, 1], [q/p, 1 - q/p]]``.
    """
    _check_size(spec.N, BRUTEFORCE_LIMIT, "kernel_bruteforce")
    exact = spec.mode.is_exact
    N, ratio = spec.N, spec.q / spec.p
    keep = [[1, 0], [0, 1]]
    picked = [[0, 1], [ratio, 1 - ratio]]
    factor = _scalar_array(
        [[keep[x][y], picked[x][y]] for x in (0, 1) for y in (0, 1)], exact
    )
    pmf = spec.law.pmf_vector(N, exact)
    matrix = _pairs_to_matrix(kron_apply(factor, pmf, N), N)
    return KernelDense(N, matrix, exact, "bruteforce")


def kernel_hamming(spec: ProcessSpec) -> KernelHamming:
    """One-step kernel of the Hamming weight from the Krawtchouk expansion.

    Exact mode sums the expansion in rationals. LogFloat mode sums it
    exactly and rounds for N up to HAMMING_ROUNDED_LIMIT; beyond that it
    uses :func:`kernel_hamming_direct`, whose terms are all nonnegative.
    """
    _require_exchangeable(spec)
    N = spec.N
    if spec.mode.is_exact:
        _check_size(N, HAMMING_EXACT_LIMIT, "exact kernel_hamming")
        return KernelHamming(N, _hamming_exact(spec), True, "hamming")
    if N > HAMMING_ROUNDED_LIMIT:
        logger.info("kernel_hamming N=%d uses the direct construction", N)
        return kernel_hamming_direct(spec)
    rounded = _hamming_exact(spec.with_mode(ScalarMode.exact())).astype(np.float64)
    return KernelHamming(N, rounded, False, "hamming")


def _hamming_exact(spec: ProcessSpec) -> np.ndarray:
    """Exact Hamming kernel as an object array."""
    N = spec.N
    basis = spec.basis
    rho = eigenvalues_hamming(spec).values
    rows = np.array([krawtchouk_row(basis, x) for x in range(N + 1)], dtype=object)
    weights = np.array([rho[n] * h_weight(basis, n) for n in range(N + 1)], dtype=object)
    inner = (rows * weights[None, :]) @ rows.T
    return inner * spec.stationary_weights(True)[None, :]


def kernel_hamming_direct(spec: ProcessSpec) -> KernelHamming:
    """Hamming kernel built from the step rules on weight classes (float).

    From weight i, Z picks m ones and r zeros with probability
    ``P(|Z| = m + r) C(i, m) C(N - i, r) / C(N, m + r)``; the r zeros become
    ones and each picked one stays with probability 1 - q/p.
    """
    law = _require_exchangeable(spec)
    N = spec.N
    weight_law = np.asarray(law.weight_pmf(N, False), dtype=np.float64)
    keep = 1 - float(spec.q / spec.p)
    log_total = log_binomial_table(N)
    matrix = np.zeros((N + 1, N + 1))
    support = np.flatnonzero(weight_law > 0)
    with np.errstate(divide="ignore"):
        log_law = np.log(weight_law)
    for i in range(N + 1):
        log_ones = log_binomial_table(i)
        log_zeros = log_binomial_table(N - i)
        for m in range(i + 1):
            r = support - m
            r = r[(r >= 0) & (r <= N - i)]
            if r.size == 0:
                continue
            log_mass = log_law[m + r] + log_ones[m] + log_zeros[r] - log_total[m + r]
            mass = np.exp(log_mass)
            survivors = binomial_pmf(m, keep)
            target = np.zeros(N + 1)
            target[i - m + r] = mass
            matrix[i] += np.convolve(target, survivors)[: N + 1]
    return KernelHamming(N, matrix, False, "hamming-direct")


def kernel_entry(spec: ProcessSpec, x: Sequence[int], y: Sequence[int], t: int) -> Scalar:
    """P_t(y | x) from the degree expansion with R_n, for exchangeable laws."""
    _require_exchangeable(spec)
    x_vec, y_vec = _binary(x, spec.N), _binary(y, spec.N)
    hx, hy = int(x_vec.sum()), int(y_vec.sum())
    inner = int((x_vec & y_vec).sum())
    basis = spec.basis
    rho = eigenvalues_hamming(spec).values
    pi_y = spec.p**hy * spec.q ** (spec.N - hy)
    if spec.mode.is_exact:
        total = sum(
            (
                rho[n] ** t * h_weight(basis, n) * rn_coefficient(basis, n, hx, hy, inner)
                for n in range(spec.N + 1)
            ),
            Fraction(0),
        )
        return pi_y * total
    terms = [
        _to_signed(rho[n]) ** t
        * _to_signed(h_weight(basis, n))
        * _to_signed(rn_coefficient(basis, n, hx, hy, inner))
        for n in range(spec.N + 1)
    ]
    return stable_sum(terms) * SignedLogReal.from_value(pi_y)


def _binary(x: Sequence[int], N: int) -> np.ndarray:
    """Validated binary vector."""
    vector = np.asarray(x, dtype=np.int64)
    if vector.shape != (N,) or np.any((vector != 0) & (vector != 1)):
        raise DomainError(f"expected a binary vector of length {N}, got {list(x)}")
    return vector


@dataclass(frozen=True)
class RwRepresentation:
    """Row of P_t from the random-walk representation."""

    pmf: np.ndarray
    standard_error: np.ndarray | None = None
    exact: bool = True
    samples: int = 0

    @property
    def total(self) -> Any:
        """Sum of the row."""
        return self.pmf.sum()


def _rw_factors(spec: ProcessSpec, t: int, exact: bool) -> np.ndarray:
    """1 + RW_SIGN (-q/p)**s for s = -1..t+1, indexed by s + 1."""
    base = -(spec.q / spec.p)
    values = [1 + RW_SIGN * base**s for s in range(-1, t + 2)]
    if exact:
        return np.array(values, dtype=object)
    return np.array([float(value) for value in values])


def kernel_rw_representation(
    spec: ProcessSpec,
    x: Sequence[int],
    t: int,
    budget: int = RW_BUDGET,
    fallback: bool = False,
    samples: int = 20000,
    rng: np.random.Generator | None = None,
    seed: int = 0,
) -> RwRepresentation:
    """P_t(. | x) as pi(y) E[prod_j (1 + RW_SIGN (-q/p)**S_j)].

    ``S_j = x[j] + y[j] - 1 + sum_k Z_k[j]``. The expectation over
    (Z_1..Z_t) is exact when the joint support has at most ``budget``
    elements; otherwise it is estimated by Monte Carlo when ``fallback`` is
    set and rejected with CapacityError when not. Without ``rng`` the
    estimate draws from the Philox stream of ``seed``.
    """
    _check_size(spec.N, DENSE_LIMIT, "kernel_rw_representation")
    if not 0 <= t <= RW_STEP_LIMIT:
        raise DomainError(f"t must lie in [0, {RW_STEP_LIMIT}], got {t}")
    N = spec.N
    start = _binary(x, N)
    states = hypercube_states(N).astype(np.int64)
    base = start[None, :] + states - 1
    exact = spec.mode.is_exact
    pi = spec.stationary_vector(exact)
    factors = _rw_factors(spec, t, exact)
    pmf = spec.law.pmf_vector(N, exact)
    support = np.flatnonzero(pmf != 0)
    if len(support) ** t <= budget:
        counts: dict[tuple[int, ...], Any] = {tuple([0] * N): Fraction(1) if exact else 1.0}
        for _ in range(t):
            advanced: dict[tuple[int, ...], Any] = {}
            for key, weight in counts.items():
                for index in support:
                    step = tuple(k + int(b) for k, b in zip(key, states[index]))
                    advanced[step] = advanced.get(step, 0) + weight * pmf[index]
            counts = advanced
        expectation = sum(
            weight * np.prod(factors[base + np.array(key) + 1], axis=1)
            for key, weight in counts.items()
        )
        return RwRepresentation(pi * expectation, None, True, 0)
    if not fallback:
        raise CapacityError(
            f"Update support {len(support)}**{t} exceeds the budget {budget}"
        )
    logger.warning(
        "Random-walk representation N=%d t=%d estimated from %d samples", N, t, samples
    )
    rng = rng if rng is not None else block_generator(seed, 0)
    factors = np.asarray(factors, dtype=np.float64)
    total = np.zeros(2**N)
    total_sq = np.zeros(2**N)
    remaining = samples
    while remaining:
        chunk = min(remaining, max(1, (1 << 22) // (N * 2**N)))
        count = np.zeros((chunk, N), dtype=np.int64)
        for _ in range(t):
            count += spec.law.sample(N, chunk, rng)
        values = np.prod(factors[base[None, :, :] + count[:, None, :] + 1], axis=2)
        total += values.sum(axis=0)
        total_sq += (values**2).sum(axis=0)
        remaining -= chunk
    mean = total / samples
    variance = np.maximum(total_sq / samples - mean**2, 0.0)
    pi_float = np.asarray(pi, dtype=np.float64)
    return RwRepresentation(
        pi_float * mean, pi_float * np.sqrt(variance / samples), False, samples
    )


def step_batch(spec: ProcessSpec, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One step for each row of a boolean state array."""
    size, N = states.shape
    picked = spec.law.sample(N, size, rng)
    flip = rng.random((size, N)) < float(spec.q / spec.p)
    return np.where(picked, ~(states & flip), states)


def step_sample(spec: ProcessSpec, x: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """One step of the walk from x."""
    state = _binary(x, spec.N).astype(bool)[None, :]
    return step_batch(spec, state, rng)[0].astype(np.int64)


def all_subsets(N: int) -> Iterable[tuple[int, ...]]:
    """Every coordinate subset in order of size."""
    return itertools.chain.from_iterable(
        itertools.combinations(range(N), k) for k in range(N + 1)
    )
