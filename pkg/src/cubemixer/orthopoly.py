"""Krawtchouk and Hermite polynomials.

Krawtchouk polynomials are orthogonal on the Binomial(N, p) weight and
normalized so that ``Q_n(0) = 1``; ``C(N, n) Q_n(x)`` is the coefficient of
``s**n`` in ``(1 - (q/p) s)**x (1 + s)**(N - x)``. Hermite polynomials are
the probabilists' family with generating function ``exp(psi v - psi**2 / 2)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any
from typing import NamedTuple
from typing import Sequence

import numpy as np

from .errors import DomainError
from .numerics import RationalLike
from .numerics import Scalar
from .numerics import ScalarMode
from .numerics import SignedLogArray
from .numerics import SignedLogReal
from .numerics import _signed_logsumexp
from .numerics import as_fraction
from .numerics import log_abs_ratio
from .numerics import log_binomial
from .numerics import log_binomial_table
from .numerics import scalar_from
from .numerics import stable_sum


logger = logging.getLogger(__name__)

REPAIR_TOLERANCE = 1e-11
REPAIR_BUDGET = 2**28
_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class KrawtchoukBasis:
    """Krawtchouk polynomials Q_n(x; N, p) in a scalar mode."""

    N: int
    p: Fraction
    mode: ScalarMode = ScalarMode()

    def __post_init__(self) -> None:
        """Validates dimension and stationarity parameter."""
        object.__setattr__(self, "p", as_fraction(self.p))
        if self.N < 1:
            raise DomainError(f"N must be positive, got {self.N}")
        if not Fraction(1, 2) <= self.p < 1:
            raise DomainError(f"p must lie in [1/2, 1), got {self.p}")

    @property
    def q(self) -> Fraction:
        """1 - p."""
        return 1 - self.p

    @property
    def ratio(self) -> Fraction:
        """q / p."""
        return self.q / self.p

    @property
    def log_ratio(self) -> float:
        """ln(q / p)."""
        return log_abs_ratio(self.ratio.numerator, self.ratio.denominator)

    def with_mode(self, mode: ScalarMode) -> KrawtchoukBasis:
        """Same basis in another scalar mode."""
        return KrawtchoukBasis(self.N, self.p, mode)


def _check_point(basis: KrawtchoukBasis, x: int) -> None:
    """Raises DomainError unless 0 <= x <= N."""
    if not 0 <= x <= basis.N:
        raise DomainError(f"x must lie in [0, {basis.N}], got {x}")


def _degree_limit(basis: KrawtchoukBasis, max_degree: int | None) -> int:
    """Resolves the highest degree of a row."""
    if max_degree is None:
        return basis.N
    if not 0 <= max_degree <= basis.N:
        raise DomainError(f"max_degree must lie in [0, {basis.N}], got {max_degree}")
    return max_degree


@lru_cache(maxsize=1024)
def generating_coefficients(
    N: int, a: int, c: int, x: int, max_degree: int
) -> tuple[int, ...]:
    """Integer coefficients of ``(a - c s)**x (1 + s)**(N - x)`` up to max_degree.

    Uses the first-order recurrence satisfied by the coefficients, which in
    integers is exact. ``a`` and ``c`` are the numerator of p and the
    numerator of q, so dividing by ``a**x`` gives the generating function.

    >>> generating_coefficients(2, 1, 1, 2, 2)
    (1, -2, 1)
    """
    coefficients = [a**x]
    previous = 0
    for k in range(max_degree):
        current = coefficients[k]
        numerator = ((N - x) * a - c * x - (a - c) * k) * current - c * (
            N - k + 1
        ) * previous
        coefficients.append(numerator // (a * (k + 1)))
        previous = current
    return tuple(coefficients)


def _exact_row(basis: KrawtchoukBasis, x: int, degree: int) -> tuple[Fraction, ...]:
    """Exact Q_0(x)..Q_degree(x)."""
    if x == 0:
        return tuple(Fraction(1) for _ in range(degree + 1))
    a, c = basis.p.numerator, basis.p.denominator - basis.p.numerator
    coefficients = generating_coefficients(basis.N, a, c, x, degree)
    scale = a**x
    return tuple(
        Fraction(coefficient, scale * math.comb(basis.N, n))
        for n, coefficient in enumerate(coefficients)
    )


def _repaired_logs(
    basis: KrawtchoukBasis, x: int, degree: int, signs: np.ndarray, logs: np.ndarray
) -> None:
    """Overwrites signs and logs with values rounded from exact coefficients."""
    a, c = basis.p.numerator, basis.p.denominator - basis.p.numerator
    coefficients = generating_coefficients(basis.N, a, c, x, degree)
    scale = a**x
    for n, coefficient in enumerate(coefficients):
        signs[n] = (coefficient > 0) - (coefficient < 0)
        logs[n] = log_abs_ratio(coefficient, scale * math.comb(basis.N, n))


@lru_cache(maxsize=2048)
def krawtchouk_row_logs(
    basis: KrawtchoukBasis, x: int, max_degree: int | None = None
) -> SignedLogArray:
    """Q_0(x)..Q_m(x) as a signed log-domain vector.

    The generating-function convolution is carried out in the log domain.
    Entries whose estimated relative error exceeds ``REPAIR_TOLERANCE``
    are recomputed from exact integer coefficients and rounded.
    """
    _check_point(basis, x)
    degree = _degree_limit(basis, max_degree)
    N = basis.N
    dtype = basis.mode.dtype
    if x == 0:
        return SignedLogArray(
            np.ones(degree + 1, dtype=np.int8), np.zeros(degree + 1, dtype=dtype)
        )
    left_len = min(x, degree) + 1
    index = np.arange(left_len)
    left = log_binomial_table(x)[:left_len].astype(dtype) + index * dtype(
        basis.log_ratio
    )
    left_signs = np.where(index % 2 == 1, -1, 1).astype(np.int8)
    right = log_binomial_table(N - x).astype(dtype)
    log_norms = log_binomial_table(N)

    signs = np.zeros(degree + 1, dtype=np.int8)
    logs = np.full(degree + 1, -np.inf, dtype=dtype)
    errors = np.zeros(degree + 1)
    for n in range(degree + 1):
        low, high = max(0, n - (N - x)), min(x, n)
        i = np.arange(low, high + 1)
        terms = left[i] + right[n - i]
        sign, log_mag, log_total = _signed_logsumexp(terms, left_signs[i])
        if sign == 0:
            errors[n] = np.inf
            continue
        signs[n] = sign
        logs[n] = log_mag - log_norms[n]
        magnitude = float(np.max(np.abs(terms))) + 1.0
        errors[n] = float(np.exp(log_total - log_mag)) * 4 * _EPS * magnitude

    flagged = errors > REPAIR_TOLERANCE
    if flagged.any():
        if N * (degree + 1) <= REPAIR_BUDGET:
            logger.debug(
                "Repairing %d Krawtchouk entries at N=%d, x=%d", flagged.sum(), N, x
            )
            exact_signs = signs.copy()
            exact_logs = logs.copy()
            _repaired_logs(basis, x, degree, exact_signs, exact_logs)
            signs[flagged] = exact_signs[flagged]
            logs[flagged] = exact_logs[flagged]
        else:
            logger.warning(
                "Krawtchouk row N=%d, x=%d has %d ill-conditioned entries",
                N,
                x,
                flagged.sum(),
            )
    signs.setflags(write=False)
    logs.setflags(write=False)
    return SignedLogArray(signs, logs)


@lru_cache(maxsize=2048)
def krawtchouk_row(
    basis: KrawtchoukBasis, x: int, max_degree: int | None = None
) -> tuple[Scalar, ...]:
    """Returns (Q_0(x), ..., Q_m(x)) with m = max_degree or N.

    >>> basis = KrawtchoukBasis(4, Fraction(1, 2), ScalarMode.exact())
    >>> [str(value) for value in krawtchouk_row(basis, 2)]
    ['1', '0', '-1/3', '0', '1']
    """
    _check_point(basis, x)
    degree = _degree_limit(basis, max_degree)
    if basis.mode.is_exact:
        return _exact_row(basis, x, degree)
    return tuple(krawtchouk_row_logs(basis, x, degree))


def log_h_weights(basis: KrawtchoukBasis) -> np.ndarray:
    """ln h_n for n = 0..N."""
    n = np.arange(basis.N + 1)
    return log_binomial_table(basis.N) - n * basis.log_ratio


def h_weight(basis: KrawtchoukBasis, n: int) -> Scalar:
    """Returns h_n = C(N, n) (p/q)**n, the inverse squared norm of Q_n."""
    if not 0 <= n <= basis.N:
        raise DomainError(f"n must lie in [0, {basis.N}], got {n}")
    if basis.mode.is_exact:
        return math.comb(basis.N, n) * (basis.p / basis.q) ** n
    return SignedLogReal(1, log_binomial(basis.N, n) - n * basis.log_ratio)


class CriticalValue(NamedTuple):
    """Value of Q_degree(Np) and whether it is exact or asymptotic."""

    value: Scalar
    form: str


def krawtchouk_at_critical(basis: KrawtchoukBasis, degree: int) -> CriticalValue:
    """Closed form of Q_degree(Np; N, p).

    For p = 1/2 the identity ``Q_2n(N/2) = (-1)**n C(N/2, n) / C(N, 2n)`` is
    exact. Otherwise ``(-q/p)**n (2n)! / (n! (2N)**n)`` is the large-N form.
    Odd degrees are zero (exactly when p = 1/2).
    """
    center = basis.N * basis.p
    if center.denominator != 1:
        raise DomainError(f"Np must be an integer, got {center}")
    if not 0 <= degree <= basis.N:
        raise DomainError(f"degree must lie in [0, {basis.N}], got {degree}")
    mode = basis.mode
    exact_identity = basis.p == Fraction(1, 2)
    form = "exact" if exact_identity or degree == 0 else "asymptotic"
    if degree % 2 == 1:
        return CriticalValue(scalar_from(0, mode), form)
    n = degree // 2
    sign = -1 if n % 2 else 1
    if exact_identity:
        half = basis.N // 2
        if mode.is_exact:
            return CriticalValue(
                Fraction(sign * math.comb(half, n), math.comb(basis.N, degree)), form
            )
        log_value = log_binomial(half, n) - log_binomial(basis.N, degree)
        return CriticalValue(SignedLogReal(sign, log_value), form)
    if mode.is_exact:
        value = (
            (-basis.ratio) ** n
            * math.factorial(degree)
            / (math.factorial(n) * (2 * basis.N) ** n)
        )
        return CriticalValue(Fraction(value), form)
    log_value = (
        n * basis.log_ratio
        + math.lgamma(degree + 1)
        - math.lgamma(n + 1)
        - n * math.log(2 * basis.N)
    )
    return CriticalValue(SignedLogReal(sign, log_value), form)


def krawtchouk_asymptotic(basis: KrawtchoukBasis, n: int, x: float) -> float:
    """Large-N limit (1 - x / (Np))**n of Q_n(x)."""
    return float((1 - x / float(basis.N * basis.p)) ** n)


def symmetric_sum(basis: KrawtchoukBasis, x: Sequence[int], n: int) -> Scalar:
    """Returns the sum over |A| = n of prod_{j in A} (1 - x[j] / p).

    Computed as the coefficient of ``s**n`` in ``prod_j (1 + (1 - x[j]/p) s)``.
    """
    if len(x) != basis.N:
        raise DomainError(f"x must have {basis.N} coordinates, got {len(x)}")
    if not 0 <= n <= basis.N:
        raise DomainError(f"n must lie in [0, {basis.N}], got {n}")
    coefficients = [Fraction(1)] + [Fraction(0)] * n
    for bit in x:
        factor = 1 - Fraction(int(bit)) / basis.p
        for k in range(n, 0, -1):
            coefficients[k] += factor * coefficients[k - 1]
    value = coefficients[n]
    return value if basis.mode.is_exact else SignedLogReal.from_value(value)


def _integer_poly_power(constant: int, linear: int, power: int, upto: int) -> list[int]:
    """Coefficients of (constant + linear s)**power up to s**upto."""
    return [
        math.comb(power, k) * constant ** (power - k) * linear**k if k <= power else 0
        for k in range(upto + 1)
    ]


def _truncated_product(first: list[int], second: list[int], upto: int) -> list[int]:
    """Product of two integer polynomials truncated at s**upto."""
    return [
        sum(first[i] * second[k - i] for i in range(k + 1)) for k in range(upto + 1)
    ]


def rn_coefficient(
    basis: KrawtchoukBasis, n: int, hx: int, hy: int, inner: int
) -> Scalar:
    """Returns R_n(hx, hy, inner).

    ``C(N, n) R_n`` is the coefficient of ``s**n`` in
    ``(1 + s)**N00 (1 - s q/p)**(N01 + N10) (1 + s q**2/p**2)**N11`` where
    ``N00 = N - hx - hy + inner``, ``N01 + N10 = hx + hy - 2 inner`` and
    ``N11 = inner`` count coordinate pairs of x and y.
    """
    N = basis.N
    n00, mixed, n11 = N - hx - hy + inner, hx + hy - 2 * inner, inner
    if min(n00, mixed, n11) < 0 or inner > min(hx, hy):
        raise DomainError(
            f"Inconsistent overlap counts hx={hx}, hy={hy}, inner={inner} for N={N}"
        )
    if not 0 <= n <= N:
        raise DomainError(f"n must lie in [0, {N}], got {n}")
    a, c = basis.p.numerator, basis.p.denominator - basis.p.numerator
    poly = _integer_poly_power(1, 1, n00, n)
    poly = _truncated_product(poly, _integer_poly_power(a, -c, mixed, n), n)
    poly = _truncated_product(poly, _integer_poly_power(a * a, c * c, n11, n), n)
    value = Fraction(poly[n], a ** (mixed + 2 * n11) * math.comb(N, n))
    return value if basis.mode.is_exact else SignedLogReal.from_value(value)


def xxm1_expansion_check(basis: KrawtchoukBasis, x: int) -> tuple[Scalar, Scalar]:
    """Returns x(x-1) and its expansion N(N-1)p**2 (Q_2(x) - 2 Q_1(x) + 1)."""
    _check_point(basis, x)
    mode = basis.mode
    lhs = scalar_from(x * (x - 1), mode)
    scale = basis.N * (basis.N - 1) * basis.p**2
    if basis.N < 2:
        return lhs, scalar_from(0, mode)
    row = krawtchouk_row(basis, x, 2)
    if mode.is_exact:
        return lhs, scale * (row[2] - 2 * row[1] + 1)
    inner = stable_sum([row[2], row[1] * -2, SignedLogReal.one()])
    return lhs, inner * SignedLogReal.from_value(scale)


@dataclass(frozen=True)
class HermiteEval:
    """Evaluates H_0..H_max_degree by the three-term recurrence."""

    max_degree: int

    def __post_init__(self) -> None:
        """Validates degree."""
        if self.max_degree < 0:
            raise DomainError(f"max_degree must be >= 0, got {self.max_degree}")

    def values(self, v: Any) -> np.ndarray:
        """Returns an array with H_n(v) in its last axis."""
        v = np.asarray(v, dtype=np.float64)
        out = np.zeros(v.shape + (self.max_degree + 1,))
        out[..., 0] = 1.0
        if self.max_degree >= 1:
            out[..., 1] = v
        for n in range(1, self.max_degree):
            out[..., n + 1] = v * out[..., n] - n * out[..., n - 1]
        return out


def hermite(n: int, v: float) -> float:
    """Probabilists' Hermite polynomial H_n(v).

    >>> hermite(2, 0.0)
    -1.0
    """
    if n < 0:
        raise DomainError(f"Hermite degree must be >= 0, got {n}")
    return float(HermiteEval(n).values(v)[n])


def hermite_bound(n: int, v: float) -> float:
    """Uniform bound on |H_n(v)|.

    ``e**(v**2/2) (2m)! / (2**m m!)`` for n = 2m and
    ``e**(v**2/2) 2**(2m+1) m! / sqrt(pi)`` for n = 2m + 1.
    """
    if n < 0:
        raise DomainError(f"Hermite degree must be >= 0, got {n}")
    m = n // 2
    if n % 2 == 0:
        log_bound = math.lgamma(2 * m + 1) - m * math.log(2) - math.lgamma(m + 1)
    else:
        log_bound = (
            (2 * m + 1) * math.log(2) + math.lgamma(m + 1) - 0.5 * math.log(math.pi)
        )
    return math.exp(v * v / 2 + log_bound)


def critical_point(basis: KrawtchoukBasis, v: float) -> int:
    """Returns round(Np + v sqrt(Npq)), rounding halves up."""
    center = float(basis.N * basis.p)
    spread = math.sqrt(float(basis.N * basis.p * basis.q))
    return math.floor(center + v * spread + 0.5)


def hermite_limit_check(basis: KrawtchoukBasis, n: int, v: float) -> tuple[float, float]:
    """Returns h_n**(1/2) Q_n(z_N) and its limit (-1)**n H_n(v) / sqrt(n!).

    ``z_N = round(Np + v sqrt(Npq))``.
    """
    z = critical_point(basis, v)
    if not 0 <= z <= basis.N:
        raise DomainError(f"z_N = {z} lies outside [0, {basis.N}]")
    if not 0 <= n <= basis.N:
        raise DomainError(f"n must lie in [0, {basis.N}], got {n}")
    value = _as_signed_log(krawtchouk_row(basis, z, n)[n])
    weight = _as_signed_log(h_weight(basis, n))
    if value.is_zero:
        lhs = 0.0
    else:
        lhs = value.sign * math.exp(0.5 * float(weight.log_mag) + float(value.log_mag))
    rhs = (-1) ** n * hermite(n, v) / math.sqrt(math.factorial(n))
    return lhs, rhs


def _as_signed_log(value: Scalar | RationalLike) -> SignedLogReal:
    """Converts an exact or log-domain scalar to SignedLogReal."""
    if isinstance(value, SignedLogReal):
        return value
    return SignedLogReal.from_value(as_fraction(value))
