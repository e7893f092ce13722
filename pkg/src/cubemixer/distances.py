"""Chi-squared and total-variation distances to stationarity, and their bounds.

Spectral sums are evaluated term by term in the process's scalar mode. Every
term of a chi-squared sum is nonnegative, so LogFloat sums are
well-conditioned even when individual Krawtchouk values are not.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from typing import Any
from typing import Callable
from typing import NamedTuple
from typing import Sequence
from typing import Union

import numpy as np
from scipy.special import logsumexp

from .errors import CapacityError
from .errors import DivergenceError
from .errors import DomainError
from .errors import RegimeError
from .laws import DeFinettiLebesgue
from .laws import SubsetUniform
from .laws import state_index
from .numerics import RationalLike
from .numerics import Scalar
from .numerics import SignedLogReal
from .numerics import as_fraction
from .numerics import log_binomial
from .numerics import log_binomial_table
from .orthopoly import HermiteEval
from .orthopoly import h_weight
from .orthopoly import krawtchouk_row
from .orthopoly import krawtchouk_row_logs
from .orthopoly import log_h_weights
from .process import BRUTEFORCE_LIMIT
from .process import ProcessSpec
from .process import _require_exchangeable
from .process import eigenvalues_hamming
from .process import kernel_hamming
from .process import kernel_rw_representation
from .process import kernel_spectral


logger = logging.getLogger(__name__)

MAX_STEPS = 10**9
METRICS = ("chi2_full", "chi2_hamming", "tv_full", "tv_hamming", "tv_upper_bound")

Start = Union[int, str, Sequence[int]]


@dataclass(frozen=True)
class CurveSample:
    """Distance at one time, with the formula that produced it."""

    t: int
    value: Any
    formula: str


@dataclass
class DistanceCurve:
    """Distance to stationarity along a grid of times."""

    spec_id: str
    metric: str
    start: str
    samples: list[CurveSample] = field(default_factory=list)

    def values(self) -> list[float]:
        """Sample values as floats."""
        return [float(sample.value) for sample in self.samples]

    def is_nonincreasing(self, rel_tol: float = 1e-12) -> bool:
        """True when no sample exceeds its predecessor beyond rounding."""
        values = self.values()
        return all(
            later <= earlier + rel_tol * abs(earlier)
            for earlier, later in zip(values, values[1:])
        )


def _check_weight(spec: ProcessSpec, k: int) -> None:
    """Raises DomainError unless 0 <= k <= N."""
    if not 0 <= k <= spec.N:
        raise DomainError(f"Hamming weight must lie in [0, {spec.N}], got {k}")


def _check_time(t: int) -> None:
    """Raises DomainError for negative times."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")


class HammingChi2:
    """Evaluates t -> chi2_H(k, t) with the t-independent parts precomputed."""

    def __init__(self, spec: ProcessSpec, k: int) -> None:
        """Prepares weights h_n Q_n(k)**2 and the spectrum of the process."""
        _require_exchangeable(spec)
        _check_weight(spec, k)
        self.spec = spec
        self.k = k
        basis = spec.basis
        spectrum = eigenvalues_hamming(spec)
        if spec.mode.is_exact:
            row = krawtchouk_row(basis, k)
            self.weights = [h_weight(basis, n) * row[n] ** 2 for n in range(spec.N + 1)]
            self.rho = spectrum.values
            return
        dtype = spec.mode.dtype
        row_logs = krawtchouk_row_logs(basis, k)
        self.weight_logs = (
            log_h_weights(basis).astype(dtype) + 2 * row_logs.logs.astype(dtype)
        )[1:]
        self.weight_alive = row_logs.signs[1:] != 0
        self.rho_logs = spectrum.logs.logs.astype(dtype)[1:]
        self.rho_alive = spectrum.logs.signs[1:] != 0

    def log_terms(self, t: int) -> np.ndarray:
        """Logs of h_n rho_n**(2t) Q_n(k)**2 for n = 1..N (-inf for zero terms)."""
        _check_time(t)
        alive = self.weight_alive if t == 0 else self.weight_alive & self.rho_alive
        with np.errstate(invalid="ignore"):
            logs = self.weight_logs + (2 * t) * self.rho_logs if t else self.weight_logs
        return np.where(alive, logs, -np.inf)

    def __call__(self, t: int) -> Scalar:
        """chi2_H(k, t)."""
        _check_time(t)
        if self.spec.mode.is_exact:
            return sum(
                (self.weights[n] * self.rho[n] ** (2 * t) for n in range(1, self.spec.N + 1)),
                Fraction(0),
            )
        terms = self.log_terms(t)
        if not np.isfinite(terms).any():
            return SignedLogReal.zero()
        return SignedLogReal(1, logsumexp(terms[np.isfinite(terms)]))


def chi2_hamming(spec: ProcessSpec, k: int, t: int) -> Scalar:
    """Returns sum_{n >= 1} h_n rho_n**(2t) Q_n(k)**2."""
    return HammingChi2(spec, k)(t)


def chi2_full_sup(spec: ProcessSpec, t: int) -> Scalar:
    """sup over starts of the chi-squared distance, attained at the 0-vector."""
    return chi2_hamming(spec, 0, t)


def _binary(x: Sequence[int], N: int) -> np.ndarray:
    """Validated binary vector."""
    vector = np.asarray(x, dtype=np.int64)
    if vector.shape != (N,) or np.any((vector != 0) & (vector != 1)):
        raise DomainError(f"expected a binary vector of length {N}, got {list(x)}")
    return vector


def _overlap_sums(spec: ProcessSpec, ones: int) -> Any:
    """C(N, n)**-1 sum_{|A| = n} (q/p)**(2 |A & x|) for n = 0..N.

    The inner sum is the coefficient of s**n in
    ``(1 + (q/p)**2 s)**ones (1 + s)**(N - ones)``.
    """
    N = spec.N
    if spec.mode.is_exact:
        square = (spec.q / spec.p) ** 2
        left = [math.comb(ones, i) * square**i for i in range(ones + 1)]
        right = [math.comb(N - ones, j) for j in range(N - ones + 1)]
        coefficients = [Fraction(0)] * (N + 1)
        for i, a in enumerate(left):
            for j, b in enumerate(right):
                coefficients[i + j] += a * b
        return [coefficients[n] / math.comb(N, n) for n in range(N + 1)]
    log_square = 2 * spec.basis.log_ratio
    left = log_binomial_table(ones) + np.arange(ones + 1) * log_square
    right = log_binomial_table(N - ones)
    sums = np.full(N + 1, -np.inf)
    for n in range(N + 1):
        i = np.arange(max(0, n - (N - ones)), min(ones, n) + 1)
        sums[n] = logsumexp(left[i] + right[n - i])
    return sums - log_binomial_table(N)


def chi2_full_pointwise(spec: ProcessSpec, x: Sequence[int], t: int) -> Scalar:
    """chi-squared distance of P_t(. | x) from pi on the full cube.

    Exchangeable laws use the degree expansion at any N; other laws use the
    dense kernel (N <= 12).
    """
    _check_time(t)
    vector = _binary(x, spec.N)
    if not spec.law.exchangeable:
        return chi2_dense(spec, vector, t)
    ones = int(vector.sum())
    spectrum = eigenvalues_hamming(spec)
    basis = spec.basis
    sums = _overlap_sums(spec, ones)
    if spec.mode.is_exact:
        return sum(
            (
                h_weight(basis, n) * spectrum.values[n] ** (2 * t) * sums[n]
                for n in range(1, spec.N + 1)
            ),
            Fraction(0),
        )
    rho = spectrum.logs
    alive = np.ones(spec.N, dtype=bool) if t == 0 else rho.signs[1:] != 0
    with np.errstate(invalid="ignore"):
        logs = log_h_weights(basis)[1:] + sums[1:]
        if t:
            logs = logs + (2 * t) * rho.logs[1:].astype(np.float64)
    logs = np.where(alive, logs, -np.inf)
    if not np.isfinite(logs).any():
        return SignedLogReal.zero()
    return SignedLogReal(1, logsumexp(logs[np.isfinite(logs)]))


def _dense_row(spec: ProcessSpec, x: np.ndarray, t: int) -> np.ndarray:
    """Row of the t-step dense kernel."""
    if spec.N > BRUTEFORCE_LIMIT:
        raise CapacityError(
            f"full-cube distances from an arbitrary start need N <= {BRUTEFORCE_LIMIT}"
        )
    index = state_index(x)
    return kernel_spectral(spec, t).matrix[index]


def chi2_dense(spec: ProcessSpec, x: Sequence[int], t: int) -> Scalar:
    """chi-squared distance from the dense kernel row (N <= 12)."""
    row = _dense_row(spec, _binary(x, spec.N), t)
    pi = spec.stationary_vector()
    value = ((row - pi) ** 2 / pi).sum()
    return value if spec.mode.is_exact else SignedLogReal.from_value(float(value))


def _hamming_row(spec: ProcessSpec, k: int, t: int) -> np.ndarray:
    """Law of the weight after t steps from weight k."""
    _check_weight(spec, k)
    return kernel_hamming(spec).power(t).matrix[k]


def chi2_hamming_bruteforce(spec: ProcessSpec, k: int, t: int) -> Scalar:
    """chi2_H(k, t) from the Hamming kernel power instead of the spectrum."""
    _check_time(t)
    row = _hamming_row(spec, k, t)
    weights = spec.stationary_weights()
    value = ((row - weights) ** 2 / weights).sum()
    return value if spec.mode.is_exact else SignedLogReal.from_value(float(value))


def tv_exact(spec: ProcessSpec, start: Start, t: int) -> Any:
    """Total variation of P_t(. | start) from pi.

    ``start`` is a binary vector or a Hamming weight. Weights and the two
    constant vectors use the Hamming chain, which gives the same value as
    the full cube for those starts; other vectors need N <= 12.
    """
    _check_time(t)
    if isinstance(start, (int, np.integer)):
        _require_exchangeable(spec)
        row = _hamming_row(spec, int(start), t)
        return abs(row - spec.stationary_weights()).sum() / 2
    vector = _binary(start, spec.N)
    ones = int(vector.sum())
    if spec.law.exchangeable and ones in (0, spec.N):
        return tv_exact(spec, ones, t)
    row = _dense_row(spec, vector, t)
    return abs(row - spec.stationary_vector()).sum() / 2


def tv_upper_from_chi2(chi2_value: Scalar | float) -> float:
    """Returns the bound TV <= sqrt(chi2) / 2."""
    if isinstance(chi2_value, SignedLogReal):
        if chi2_value.sign < 0:
            raise DomainError("chi-squared value must be nonnegative")
        if chi2_value.is_zero:
            return 0.0
        return math.exp(0.5 * float(chi2_value.log_mag) - math.log(2))
    if chi2_value < 0:
        raise DomainError(f"chi-squared value must be nonnegative, got {chi2_value}")
    return math.sqrt(chi2_value) / 2


def log_tv_upper_from_chi2(chi2_value: Scalar | float) -> float:
    """ln of :func:`tv_upper_from_chi2`, finite for values below float range."""
    if isinstance(chi2_value, SignedLogReal):
        if chi2_value.sign < 0:
            raise DomainError("chi-squared value must be nonnegative")
        return 0.5 * float(chi2_value.log_mag) - math.log(2)
    if chi2_value < 0:
        raise DomainError(f"chi-squared value must be nonnegative, got {chi2_value}")
    if chi2_value == 0:
        return -math.inf
    return 0.5 * float(SignedLogReal.from_value(chi2_value).log_mag) - math.log(2)


def tv_rw_representation(spec: ProcessSpec, x: Sequence[int], t: int) -> Any:
    """TV from the row given by the random-walk representation."""
    row = kernel_rw_representation(spec, x, t)
    return abs(row.pmf - spec.stationary_vector()).sum() / 2


def distance_function(spec: ProcessSpec, metric: str, start: Start = 0) -> Callable[[int], Any]:
    """Returns t -> distance for a metric and start.

    ``start`` is a Hamming weight, a binary vector or ``"sup"`` (the
    0-vector, where the sup over starts is attained for chi-squared).
    """
    if metric not in METRICS:
        raise DomainError(f"Unknown metric {metric!r}; expected one of {METRICS}")
    if isinstance(start, str):
        if start != "sup":
            raise DomainError(f"Unknown start {start!r}")
        start = 0
    if metric == "chi2_hamming":
        if not isinstance(start, (int, np.integer)):
            start = int(_binary(start, spec.N).sum())
        return HammingChi2(spec, int(start))
    if metric == "chi2_full":
        if isinstance(start, (int, np.integer)):
            if start != 0:
                raise DomainError("chi2_full takes a binary vector or the 0-vector")
            if spec.law.exchangeable:
                return HammingChi2(spec, 0)
            start = (0,) * spec.N
        vector = tuple(_binary(start, spec.N))
        return lambda t: chi2_full_pointwise(spec, vector, t)
    if metric == "tv_upper_bound":
        inner = distance_function(spec, "chi2_full", start)
        return lambda t: tv_upper_from_chi2(inner(t))
    if metric == "tv_hamming" and not isinstance(start, (int, np.integer)):
        start = int(_binary(start, spec.N).sum())
    if isinstance(start, (int, np.integer)) and metric == "tv_full" and start != 0:
        raise DomainError("tv_full takes a binary vector or the 0-vector")
    if isinstance(start, (int, np.integer)) and metric == "tv_full":
        start = (0,) * spec.N
    fixed = start
    return lambda t: tv_exact(spec, fixed, t)


def distance_curve(
    spec: ProcessSpec, metric: str, times: Sequence[int], start: Start = 0
) -> DistanceCurve:
    """Evaluates a metric on a grid of times."""
    evaluate = distance_function(spec, metric, start)
    formula = {
        "chi2_full": "spectral-sum",
        "chi2_hamming": "spectral-sum",
        "tv_full": "kernel-power",
        "tv_hamming": "kernel-power",
        "tv_upper_bound": "half-sqrt-chi2",
    }[metric]
    label = start if isinstance(start, (int, str)) else "".join(map(str, start))
    samples = [CurveSample(t, evaluate(t), formula) for t in times]
    return DistanceCurve(spec.label, metric, str(label), samples)


def _exceeds(value: Any, epsilon: float) -> bool:
    """True when a distance is above epsilon."""
    return float(value) > epsilon


def mixing_time(
    spec: ProcessSpec, epsilon: float, metric: str = "chi2_full", start: Start = 0
) -> int:
    """Smallest t with distance(t) <= epsilon.

    Probes t = 1, 2, 4, ... then bisects. Raises DivergenceError when some
    eigenvalue has modulus one or no probe below MAX_STEPS succeeds.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if spec.law.exchangeable and eigenvalues_hamming(spec).is_periodic():
        raise DivergenceError(
            f"{spec.label} has an eigenvalue of modulus one; distances never vanish"
        )
    evaluate = distance_function(spec, metric, start)
    if not _exceeds(evaluate(0), epsilon):
        return 0
    high = 1
    while _exceeds(evaluate(high), epsilon):
        high *= 2
        if high > MAX_STEPS:
            raise DivergenceError(
                f"{metric} stays above {epsilon} up to t = {MAX_STEPS} for {spec.label}"
            )
    low = high // 2
    while high - low > 1:
        middle = (low + high) // 2
        if _exceeds(evaluate(middle), epsilon):
            low = middle
        else:
            high = middle
    logger.debug("mixing_time %s eps=%g -> %d (%s)", metric, epsilon, high, spec.label)
    return high


class CompaCheck(NamedTuple):
    """TV mixing time against the chi-squared mixing time at 4 eps**2."""

    tv_time: int
    chi2_time: int
    holds: bool


def compa_consistent(spec: ProcessSpec, epsilon: float, start: Start = 0) -> CompaCheck:
    """Checks t_mix(eps) <= t2_mix(4 eps**2) from a common start."""
    by_weight = isinstance(start, (int, np.integer))
    tv_time = mixing_time(spec, epsilon, "tv_hamming" if by_weight else "tv_full", start)
    chi2_metric = "chi2_hamming" if by_weight else "chi2_full"
    chi2_time = mixing_time(spec, 4 * epsilon**2, chi2_metric, start)
    return CompaCheck(tv_time, chi2_time, tv_time <= chi2_time)


@dataclass(frozen=True)
class CutoffEntry:
    """chi2 at t_C next to its bounds.

    ``lower_bound`` is the first spectral term h_1 rho_1**(2 t_C), a valid
    finite-N lower bound; ``limit_lower`` and ``limit_upper`` are the
    large-N window values exp(-C) p/q and exp(exp(-C) p/q) - 1.
    """

    C: float
    t: int
    chi2: float
    log_chi2: float
    lower_bound: float
    limit_lower: float
    limit_upper: float
    note: str = ""


@dataclass
class CutoffReport:
    """chi2 across a window of C values for a uniform-subset walk."""

    N: int
    p: Fraction
    z: int
    entries: list[CutoffEntry] = field(default_factory=list)


def _subset_size(spec: ProcessSpec, operation: str) -> int:
    """z of a SubsetUniform spec."""
    if not isinstance(spec.law, SubsetUniform):
        raise DomainError(f"{operation} needs a uniform-subset update law")
    return spec.law.z


def cutoff_time(spec: ProcessSpec, C: float) -> int:
    """t_C = (Np / (2z)) (ln N + C), rounded half up."""
    z = _subset_size(spec, "cutoff_time")
    scale = float(spec.N * spec.p) / (2 * z)
    return math.floor(scale * (math.log(spec.N) + C) + 0.5)


def predicted_mixing_time(spec: ProcessSpec, epsilon: float) -> float:
    """(Np/(2z))(ln N + C*) with C* = -ln(ln(1 + eps) q/p).

    C* solves the large-N chi-squared closed form exp(exp(-C) p/q) - 1 = eps.
    """
    z = _subset_size(spec, "predicted_mixing_time")
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    c_star = -math.log(math.log1p(epsilon) * float(spec.q / spec.p))
    return float(spec.N * spec.p) / (2 * z) * (math.log(spec.N) + c_star)


def _safe_exp(value: float) -> float:
    """exp without overflow errors."""
    return math.exp(value) if value < 709 else math.inf


def cutoff_window(spec: ProcessSpec, c_grid: Sequence[float]) -> CutoffReport:
    """Evaluates chi2_full_sup at t_C for every C in the grid."""
    z = _subset_size(spec, "cutoff_window")
    ratio = float(spec.p / spec.q)
    evaluate = HammingChi2(spec, 0)
    rho_1 = 1 - z / float(spec.N * spec.p)
    report = CutoffReport(spec.N, spec.p, z)
    for C in c_grid:
        t = cutoff_time(spec, C)
        limit_lower = math.exp(-C) * ratio
        limit_upper = math.expm1(limit_lower) if limit_lower < 709 else math.inf
        if t < 1:
            logger.info("Skipping C=%g: t_C = %d < 1 at N=%d", C, t, spec.N)
            report.entries.append(
                CutoffEntry(
                    C=C,
                    t=t,
                    chi2=math.nan,
                    log_chi2=math.nan,
                    lower_bound=math.nan,
                    limit_lower=limit_lower,
                    limit_upper=limit_upper,
                    note="t_C < 1",
                )
            )
            continue
        log_chi2 = _log_value(evaluate(t))
        log_lower = -math.inf
        if rho_1:
            log_lower = math.log(spec.N * ratio) + 2 * t * math.log(abs(rho_1))
        report.entries.append(
            CutoffEntry(
                C=C,
                t=t,
                chi2=_safe_exp(log_chi2),
                log_chi2=log_chi2,
                lower_bound=_safe_exp(log_lower),
                limit_lower=limit_lower,
                limit_upper=limit_upper,
            )
        )
    return report


def _log_value(value: Scalar) -> float:
    """Natural log of a nonnegative scalar."""
    signed = value if isinstance(value, SignedLogReal) else SignedLogReal.from_value(value)
    return float(signed.log_mag)


def wilson_lower_bound(spec: ProcessSpec, epsilon: float, variant: str = "uniform") -> float:
    """Eigenfunction lower bound on the TV mixing time of a uniform-subset walk.

    Uses the eigenfunction ||x|| - Np with eigenvalue lam = 1 - z/(Np) and
    the start 0. ``variant="uniform"`` takes R = z**2, a bound on the squared
    one-step change from every start; ``variant="expected"`` takes the
    second moment (1 - 1/N) z**2 + z seen from the 0-vector.
    """
    z = _subset_size(spec, "wilson_lower_bound")
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    center = float(spec.N * spec.p)
    lam = 1 - z / center
    if not 0.5 < lam < 1:
        raise RegimeError(f"eigenvalue 1 - z/(Np) = {lam:.4g} must lie in (1/2, 1)")
    if variant == "uniform":
        R = float(z * z)
    elif variant == "expected":
        R = (1 - 1 / spec.N) * z * z + z
    else:
        raise DomainError(f"Unknown Wilson variant {variant!r}")
    start = center**2
    return (
        math.log((1 - lam) * start / (2 * R)) + math.log((1 - epsilon) / epsilon)
    ) / (2 * math.log(1 / lam))


def theta(spec: ProcessSpec) -> Fraction:
    """Smallest probability that a single coordinate is picked."""
    return min(spec.law.coordinate_marginals(spec.N))


def theta_lower_bound(spec: ProcessSpec, epsilon: float) -> float:
    """ln(1 - p/2) / ln(1 - theta), below which TV from 0 exceeds epsilon.

    Holds for epsilon <= p/2: before that time a fixed coordinate has been
    picked with probability below p/2.
    """
    p = float(spec.p)
    if not 0 < epsilon <= p / 2:
        raise RegimeError(f"epsilon must lie in (0, p/2 = {p / 2:.4g}], got {epsilon}")
    smallest = theta(spec)
    if smallest == 0:
        return math.inf
    if smallest == 1:
        return 0.0
    return math.log(1 - p / 2) / math.log(1 - float(smallest))


class DefinettiFloor(NamedTuple):
    """chi2_H(0, t) against its single-term floor, in logs."""

    t: int
    log_chi2: float
    log_floor: float

    @property
    def holds(self) -> bool:
        """True when the floor does not exceed chi2 (up to rounding)."""
        return self.log_floor <= self.log_chi2 + 1e-9


def definetti_floor(spec: ProcessSpec, a: float) -> DefinettiFloor:
    """chi2 at t = floor(aN / ln N) for the uniform De Finetti mixture.

    The floor is the degree m = floor(pN) term of the spectral sum,
    ``q**-N N**(-2t) C(N, m) p**m q**(N-m) (Np/(m+1))**(2t) (1 - (-q/p)**(m+1))**(2t)``.
    """
    if not isinstance(spec.law, DeFinettiLebesgue):
        raise DomainError("definetti_floor needs the uniform De Finetti mixture")
    p, q = float(spec.p), float(spec.q)
    if spec.p == Fraction(1, 2):
        raise RegimeError("definetti_floor needs p > 1/2")
    if not 0 < a < -math.log(q) / 2:
        raise RegimeError(f"a must lie in (0, {-math.log(q) / 2:.4g}), got {a}")
    N = spec.N
    t = math.floor(a * N / math.log(N))
    m = math.floor(N * p)
    log_floor = (
        -N * math.log(q)
        - 2 * t * math.log(N)
        + log_binomial(N, m)
        + m * math.log(p)
        + (N - m) * math.log(q)
        + 2 * t * (math.log(N * p) - math.log(m + 1))
        + 2 * t * math.log1p(-((-q / p) ** (m + 1)))
    )
    log_chi2 = _log_value(chi2_hamming(spec, 0, t))
    return DefinettiFloor(t, log_chi2, log_floor)


def iid_chi2_closed_form(N: int, p: RationalLike, alpha: RationalLike, t: int) -> float:
    """(1 + (p/q)(1 - alpha/p)**(2t))**N - 1, the sup chi2 of the iid walk."""
    p_, alpha_ = as_fraction(p), as_fraction(alpha)
    base = float(1 - alpha_ / p_)
    u = float(p_ / (1 - p_)) * base ** (2 * t)
    exponent = N * math.log1p(u)
    return math.expm1(exponent) if exponent < 709 else math.inf


def contingency_alpha(p: RationalLike, rho: RationalLike) -> Fraction:
    """Rate alpha = p(1 - rho) of the iid walk with eigenvalues rho**n."""
    p_, rho_ = as_fraction(p), as_fraction(rho)
    alpha = p_ * (1 - rho_)
    if not 0 < alpha <= 1:
        raise DomainError(f"rho = {rho_} gives alpha = {alpha} outside (0, 1]")
    return alpha


def contingency_cutoff(N: int, p: RationalLike, rho: RationalLike, C: float) -> float:
    """(ln N + ln(p/q) + C) / (-2 ln|rho|)."""
    p_, rho_ = as_fraction(p), as_fraction(rho)
    if not 0 < abs(rho_) < 1:
        raise DomainError(f"|rho| must lie in (0, 1), got {rho_}")
    return (math.log(N) + math.log(p_ / (1 - p_)) + C) / (-2 * math.log(abs(rho_)))


def contingency_crossing(N: int, p: RationalLike, rho: RationalLike, epsilon: float) -> int:
    """First t with (1 + (p/q) rho**(2t))**N - 1 <= epsilon, from the closed form."""
    p_, rho_ = as_fraction(p), as_fraction(rho)
    target = math.expm1(math.log1p(epsilon) / N) * float((1 - p_) / p_)
    return max(0, math.ceil(math.log(target) / (2 * math.log(abs(float(rho_))))))


def flip_all_cutoff(N: int, p: RationalLike, C: float) -> float:
    """(ln N + C) / (-2 ln(q/p)) for the walk that picks every coordinate."""
    p_ = as_fraction(p)
    if not Fraction(1, 2) < p_ < 1:
        raise DomainError(f"p must lie in (1/2, 1), got {p_}")
    return (math.log(N) + C) / (-2 * math.log((1 - p_) / p_))


def flip_all_chi2(N: int, p: RationalLike, t: int) -> float:
    """(1 + (q/p)**(2t - 1))**N - 1, chi2 from the 0-vector when every coordinate is picked."""
    p_ = as_fraction(p)
    ratio = float((1 - p_) / p_)
    exponent = N * math.log1p(ratio ** (2 * t - 1))
    return math.expm1(exponent) if exponent < 709 else math.inf


def hermite_chi2_approximation(
    N: int, p: RationalLike, t: int, v: float, terms: int = 30
) -> float:
    """sum_{n=1}^{terms} (Np/q)**(-n(t-1)) H_n(v)**(2t) / n!.

    Approximates the sup chi2 of the walk picking z = round(Np + v sqrt(Npq))
    coordinates when t is fixed and N is large.
    """
    p_ = as_fraction(p)
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    values = HermiteEval(terms).values(v)[1:]
    n = np.arange(1, terms + 1)
    alive = values != 0
    with np.errstate(divide="ignore"):
        logs = (
            -n * (t - 1) * math.log(N)
            + n * (t - 1) * math.log((1 - p_) / p_)
            + 2 * t * np.log(np.abs(values))
            - np.array([math.lgamma(k + 1) for k in n])
        )
    if not alive.any():
        return 0.0
    return float(np.exp(logsumexp(logs[alive])))


class CriticalStart(NamedTuple):
    """Chi2 from weight round(Np) against its bound over t = 1..t_max."""

    times: list[int]
    chi2: list[float]
    bound: list[float]
    threshold: int | None


def critical_start(spec: ProcessSpec, w: RationalLike, t_max: int) -> CriticalStart:
    """Compares chi2_H(round(Np), t) with (1/2)(1 - w/p)**(2t) (p/q).

    ``threshold`` is the smallest t from which the bound holds at every later
    t on the grid, or None.
    """
    w_ = as_fraction(w)
    k = math.floor(float(spec.N * spec.p) + 0.5)
    evaluate = HammingChi2(spec, k)
    times = list(range(1, t_max + 1))
    values = [float(evaluate(t)) for t in times]
    base = float(1 - w_ / spec.p)
    ratio = float(spec.p / spec.q)
    bounds = [0.5 * base ** (2 * t) * ratio for t in times]
    threshold = None
    for t, value, bound in reversed(list(zip(times, values, bounds))):
        if value >= bound:
            break
        threshold = t
    return CriticalStart(times, values, bounds, threshold)
