"""Scalar backends and combinatorial primitives.

Two backends exist. Exact mode computes with :class:`fractions.Fraction`
and is the reference. LogFloat mode carries every quantity as a sign and a
natural-log magnitude (:class:`SignedLogReal`), so terms such as
``C(N, n) (p/q)**n`` stay representable far beyond the float range.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from functools import total_ordering
from typing import Any
from typing import Iterable
from typing import Iterator
from typing import Tuple
from typing import Union

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .errors import DomainError


logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e6
EXACT_BINOMIAL_LIMIT = 64
_LOG2 = math.log(2.0)

RationalLike = Union[Fraction, int, float, str]


def as_fraction(value: RationalLike) -> Fraction:
    """Converts value to an exact Fraction.

    Floats go through their shortest repr, so ``0.6`` becomes ``3/5``.

    >>> as_fraction("0.6")
    Fraction(3, 5)
    >>> as_fraction(0.75)
    Fraction(3, 4)
    """
    if isinstance(value, bool):
        raise DomainError(f"Expected a rational number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"Expected a finite number, got {value!r}")
        return Fraction(repr(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"Expected a rational number, got {value!r}") from exc


@dataclass(frozen=True)
class ScalarMode:
    """Selects the scalar backend of a computation."""

    kind: str = "logfloat"
    precision: int = 53

    def __post_init__(self) -> None:
        """Validates the mode."""
        if self.kind == "exact":
            object.__setattr__(self, "precision", 0)
        elif self.kind != "logfloat":
            raise DomainError(f"Unknown scalar mode: {self.kind!r}")
        elif self.precision not in (53, 64):
            raise DomainError(
                f"LogFloat precision must be 53 or 64 bits, got {self.precision}"
            )

    @classmethod
    def exact(cls) -> ScalarMode:
        """Exact rational mode."""
        return cls("exact")

    @classmethod
    def logfloat(cls, precision: int = 53) -> ScalarMode:
        """Signed log-domain float mode."""
        return cls("logfloat", precision)

    @classmethod
    def parse(cls, text: str) -> ScalarMode:
        """Parses ``exact``, ``logfloat`` or ``logfloat:<bits>``."""
        kind, _, bits = text.strip().lower().partition(":")
        if kind == "exact" and not bits:
            return cls.exact()
        if kind == "logfloat":
            try:
                return cls.logfloat(int(bits) if bits else 53)
            except ValueError as exc:
                raise DomainError(f"Invalid precision in mode {text!r}") from exc
        raise DomainError(f"Unknown scalar mode: {text!r}")

    @property
    def is_exact(self) -> bool:
        """True for the rational backend."""
        return self.kind == "exact"

    @property
    def dtype(self) -> Any:
        """Numpy float type used for log magnitudes."""
        return np.longdouble if self.precision == 64 else np.float64

    def __str__(self) -> str:
        """Represents mode as accepted by parse."""
        if self.is_exact:
            return "exact"
        return "logfloat" if self.precision == 53 else f"logfloat:{self.precision}"


def log_abs_ratio(numerator: int, denominator: int) -> float:
    """Returns ln|numerator / denominator| for arbitrary-size integers."""
    num, den = abs(numerator), abs(denominator)
    if den == 0:
        raise ZeroDivisionError("log_abs_ratio with zero denominator")
    if num == 0:
        return -math.inf
    if num == den:
        return 0.0
    shift = num.bit_length() - den.bit_length()
    if shift >= 0:
        quotient = (num << 64) // (den << shift)
    else:
        quotient = (num << (64 - shift)) // den
    return math.log(quotient) + (shift - 64) * _LOG2


@total_ordering
@dataclass(frozen=True)
class SignedLogReal:
    """Real number stored as sign and natural-log magnitude."""

    sign: int
    log_mag: Any = -math.inf

    def __post_init__(self) -> None:
        """Normalizes zero."""
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"Sign must be -1, 0 or 1, got {self.sign}")
        if self.sign == 0:
            object.__setattr__(self, "log_mag", -math.inf)
        elif math.isnan(self.log_mag) or self.log_mag == -math.inf:
            raise DomainError("Nonzero SignedLogReal needs a finite magnitude")

    @classmethod
    def zero(cls) -> SignedLogReal:
        """Exact zero."""
        return cls(0)

    @classmethod
    def one(cls) -> SignedLogReal:
        """Exact one."""
        return cls(1, 0.0)

    @classmethod
    def from_value(cls, value: float | int | Fraction) -> SignedLogReal:
        """Converts a real number.

        Rationals are converted from their integer parts, so magnitudes
        beyond the float range survive.
        """
        if isinstance(value, (int, Fraction)):
            value = Fraction(value)
            if value == 0:
                return cls.zero()
            sign = 1 if value > 0 else -1
            return cls(sign, log_abs_ratio(value.numerator, value.denominator))
        if value == 0:
            return cls.zero()
        if not math.isfinite(value):
            raise DomainError(f"Cannot convert {value!r} to SignedLogReal")
        sign = 1 if value > 0 else -1
        return cls(sign, np.log(np.longdouble(abs(value))))

    @property
    def is_zero(self) -> bool:
        """True for exact zero."""
        return self.sign == 0

    def __float__(self) -> float:
        """Converts to float; overflows to infinity."""
        if self.sign == 0:
            return 0.0
        with np.errstate(over="ignore", under="ignore"):
            return float(self.sign * np.exp(np.longdouble(self.log_mag)))

    def __neg__(self) -> SignedLogReal:
        """Negates."""
        return SignedLogReal(-self.sign, self.log_mag)

    def __abs__(self) -> SignedLogReal:
        """Absolute value."""
        return SignedLogReal(abs(self.sign), self.log_mag)

    def __mul__(self, other: object) -> SignedLogReal:
        """Multiplies in log domain."""
        other = _coerce(other)
        if self.sign == 0 or other.sign == 0:
            return SignedLogReal.zero()
        return SignedLogReal(self.sign * other.sign, self.log_mag + other.log_mag)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> SignedLogReal:
        """Divides in log domain."""
        other = _coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("SignedLogReal division by zero")
        if self.sign == 0:
            return SignedLogReal.zero()
        return SignedLogReal(self.sign * other.sign, self.log_mag - other.log_mag)

    def __pow__(self, exponent: int) -> SignedLogReal:
        """Raises to an integer power."""
        if exponent == 0:
            return SignedLogReal.one()
        if self.sign == 0:
            if exponent < 0:
                raise ZeroDivisionError("Zero raised to a negative power")
            return SignedLogReal.zero()
        sign = self.sign if exponent % 2 else 1
        return SignedLogReal(sign, self.log_mag * exponent)

    def __add__(self, other: object) -> SignedLogReal:
        """Adds with stable_sum."""
        return stable_sum([self, _coerce(other)])

    __radd__ = __add__

    def __sub__(self, other: object) -> SignedLogReal:
        """Subtracts with stable_sum."""
        return stable_sum([self, -_coerce(other)])

    def __rsub__(self, other: object) -> SignedLogReal:
        """Subtracts from a number."""
        return stable_sum([_coerce(other), -self])

    def __lt__(self, other: object) -> bool:
        """Orders by real value."""
        other = _coerce(other)
        if self.sign != other.sign:
            return self.sign < other.sign
        if self.sign == 0:
            return False
        if self.sign > 0:
            return bool(self.log_mag < other.log_mag)
        return bool(self.log_mag > other.log_mag)

    def __eq__(self, other: object) -> bool:
        """Compares sign and magnitude."""
        if not isinstance(other, (SignedLogReal, int, float, Fraction)):
            return NotImplemented
        other = _coerce(other)
        return self.sign == other.sign and (
            self.sign == 0 or bool(self.log_mag == other.log_mag)
        )

    def __hash__(self) -> int:
        """Hashes sign and magnitude."""
        return hash((self.sign, float(self.log_mag)))

    def __repr__(self) -> str:
        """Represents value."""
        if self.sign == 0:
            return "SignedLogReal(0)"
        return f"SignedLogReal({'+' if self.sign > 0 else '-'}e^{float(self.log_mag)!r})"


def _coerce(value: object) -> SignedLogReal:
    """Converts operands of SignedLogReal arithmetic."""
    if isinstance(value, SignedLogReal):
        return value
    if isinstance(value, (int, float, Fraction)):
        return SignedLogReal.from_value(value)
    raise TypeError(f"Cannot combine SignedLogReal with {type(value).__name__}")


@dataclass(frozen=True)
class SignedLogArray:
    """Vector of signed log-domain reals."""

    signs: np.ndarray
    logs: np.ndarray

    @classmethod
    def from_scalars(cls, scalars: Iterable[SignedLogReal]) -> SignedLogArray:
        """Packs SignedLogReal values."""
        items = list(scalars)
        signs = np.array([item.sign for item in items], dtype=np.int8)
        logs = np.array([item.log_mag for item in items])
        return cls(signs, logs)

    def __len__(self) -> int:
        """Number of entries."""
        return len(self.signs)

    def __getitem__(self, index: int) -> SignedLogReal:
        """Entry as SignedLogReal."""
        sign = int(self.signs[index])
        return SignedLogReal(sign, self.logs[index]) if sign else SignedLogReal(0)

    def __iter__(self) -> Iterator[SignedLogReal]:
        """Iterates entries."""
        for index in range(len(self)):
            yield self[index]


Scalar = Union[Fraction, SignedLogReal]


def scalar_from(value: Fraction | int, mode: ScalarMode) -> Scalar:
    """Returns an exact value in the scalar type of mode."""
    if mode.is_exact:
        return Fraction(value)
    return SignedLogReal.from_value(value)


def log_binomial(N: int, n: int) -> float:
    """Returns ln C(N, n).

    >>> round(log_binomial(4, 2), 6)
    1.791759
    """
    if N < 0 or n < 0 or n > N:
        raise DomainError(f"log_binomial needs 0 <= n <= N, got N={N}, n={n}")
    small = min(n, N - n)
    if small <= EXACT_BINOMIAL_LIMIT:
        return math.log(math.comb(N, small))
    k = np.arange(1, small + 1, dtype=np.float64)
    return math.fsum(np.log((N - k + 1) / k))


@lru_cache(maxsize=512)
def log_binomial_table(N: int) -> np.ndarray:
    """Returns ln C(N, n) for n = 0..N (cached, read-only)."""
    if N < 0:
        raise DomainError(f"log_binomial_table needs N >= 0, got {N}")
    k = np.arange(1, N + 1, dtype=np.float64)
    table = np.concatenate(([0.0], np.cumsum(np.log((N - k + 1) / k))))
    head = min(EXACT_BINOMIAL_LIMIT, N)
    table[: head + 1] = [math.log(math.comb(N, n)) for n in range(head + 1)]
    half = N // 2
    table[N - half :] = table[half::-1]
    table.setflags(write=False)
    return table


def _signed_logsumexp(logs: np.ndarray, signs: np.ndarray) -> Tuple[int, Any, Any]:
    """Returns sign, log magnitude and log of the absolute total.

    Like-signed addends are summed first, in increasing magnitude, and the
    two groups are merged last.
    """
    nonzero = signs != 0
    logs, signs = logs[nonzero], signs[nonzero]
    if logs.size == 0:
        return 0, -math.inf, -math.inf
    positive = np.sort(logs[signs > 0])
    negative = np.sort(logs[signs < 0])
    log_pos = logsumexp(positive) if positive.size else -math.inf
    log_neg = logsumexp(negative) if negative.size else -math.inf
    log_total = np.logaddexp(log_pos, log_neg)
    if log_pos == log_neg:
        return 0, -math.inf, log_total
    if log_pos > log_neg:
        return 1, log_pos + np.log1p(-np.exp(log_neg - log_pos)), log_total
    return -1, log_neg + np.log1p(-np.exp(log_pos - log_neg)), log_total


def stable_sum_conditioned(
    terms: Iterable[SignedLogReal],
) -> tuple[SignedLogReal, float]:
    """Sums terms and returns the result with its condition number.

    The condition number is ``sum |terms| / |sum terms|``; it is infinite
    when the terms cancel exactly.
    """
    items = list(terms)
    if not items:
        return SignedLogReal.zero(), 1.0
    signs = np.array([item.sign for item in items], dtype=np.int8)
    logs = np.array([item.log_mag for item in items])
    sign, log_mag, log_total = _signed_logsumexp(logs, signs)
    if log_total == -math.inf:
        return SignedLogReal.zero(), 1.0
    if sign == 0:
        return SignedLogReal.zero(), math.inf
    condition = float(np.exp(log_total - log_mag))
    return SignedLogReal(sign, log_mag), condition


def stable_sum(terms: Iterable[SignedLogReal]) -> SignedLogReal:
    """Sums signed log-domain terms without returning the condition number.

    Use stable_sum_conditioned when the caller needs the accuracy flag;
    this wrapper only logs sums whose condition number exceeds
    CONDITION_LIMIT. The empty sum is exact zero.

    >>> stable_sum([SignedLogReal.one(), -SignedLogReal.one()]).is_zero
    True
    """
    value, condition = stable_sum_conditioned(terms)
    if condition > CONDITION_LIMIT:
        logger.debug("stable_sum condition number %.3g", condition)
    return value


def log_expm1(y: float) -> float:
    """Returns ln(e**y - 1) for y > 0."""
    if y <= 0:
        raise DomainError(f"log_expm1 needs y > 0, got {y}")
    if y > 30:
        return y + math.log1p(-math.exp(-y))
    return math.log(math.expm1(y))


def binomial_pmf(n: int, prob: float) -> np.ndarray:
    """Returns the Binomial(n, prob) pmf on 0..n."""
    if prob <= 0:
        pmf = np.zeros(n + 1)
        pmf[0] = 1.0
        return pmf
    if prob >= 1:
        pmf = np.zeros(n + 1)
        pmf[n] = 1.0
        return pmf
    return np.asarray(binom.pmf(np.arange(n + 1), n, prob), dtype=np.float64)
