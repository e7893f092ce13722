"""Parses configuration values: rationals, laws, z-rules, grids and starts."""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any
from typing import Mapping
from typing import Sequence
from typing import Union

from .errors import ConfigError
from .errors import DomainError
from .laws import BlockUpdate
from .laws import DeFinettiDiscrete
from .laws import DeFinettiLebesgue
from .laws import Explicit
from .laws import IidBernoulli
from .laws import SubsetUniform
from .laws import UpdateLaw
from .numerics import ScalarMode
from .numerics import as_fraction


logger = logging.getLogger(__name__)

LAW_KINDS = ("subset", "iid", "definetti", "lebesgue", "block", "explicit")
StartValue = Union[int, str, tuple[int, ...]]

_NUMBER = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:/\d+)?"
_CONST = re.compile(r"(?:const\s+)?(?P<k>\d+)")
_LINEAR = re.compile(rf"round\((?P<alpha>{_NUMBER})\*?N\)")
_CENTRAL = re.compile(
    rf"round\(pN(?:(?P<sign>[+-])(?P<v>{_NUMBER})?\*?sqrt\(Npq\))?\)"
)
_GRID = re.compile(r"(?P<start>\d+)\.\.(?P<stop>\d+)(?:(?P<op>[:*])(?P<step>\d+))?")


def parse_fraction(value: Any, field: str) -> Fraction:
    """Parses an exact rational, naming ``field`` on failure."""
    try:
        return as_fraction(value)
    except (DomainError, TypeError) as exc:
        raise ConfigError(field, f"expected a rational number, got {value!r}") from exc


def parse_int(value: Any, field: str, minimum: int | None = None) -> int:
    """Parses an integer not below ``minimum``."""
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(field, f"expected an integer, got {value!r}")
    try:
        number = int(value)
    except ValueError as exc:
        raise ConfigError(field, f"expected an integer, got {value!r}") from exc
    if minimum is not None and number < minimum:
        raise ConfigError(field, f"must be >= {minimum}, got {number}")
    return number


def parse_float(value: Any, field: str) -> float:
    """Parses a real number given as a number or a rational string."""
    return float(parse_fraction(value, field))


def parse_mode(text: str, field: str = "mode") -> ScalarMode:
    """Parses ``exact``, ``logfloat`` or ``logfloat:64``."""
    try:
        return ScalarMode.parse(str(text))
    except DomainError as exc:
        raise ConfigError(field, str(exc)) from exc


@dataclass(frozen=True)
class ZRule:
    """Subset size as a function of N and p.

    >>> parse_z_rule("round(0.3N)").resolve(100, Fraction(3, 5))
    30
    """

    kind: str
    value: Fraction
    text: str

    def resolve(self, N: int, p: Fraction) -> int:
        """z for dimension N; rule values are clamped to [1, N]."""
        if self.kind == "const":
            return int(self.value)
        if self.kind == "linear":
            z = math.floor(self.value * N + Fraction(1, 2))
        else:
            center = float(p * N) + float(self.value) * math.sqrt(float(N * p * (1 - p)))
            z = math.floor(center + 0.5)
        clamped = min(max(z, 1), N)
        if clamped != z:
            logger.debug("z-rule %r gives %d at N=%d; clamped to %d", self.text, z, N, clamped)
        return clamped


def tokenize(text: str) -> str:
    """Removes whitespace except after ``const``."""
    text = text.strip()
    if text.startswith("const"):
        return "const " + "".join(text[5:].split())
    return "".join(text.split())


def parse_z_rule(value: Any, field: str = "z") -> ZRule:
    """Parses ``"const k"``, an integer, ``"round(aN)"`` or ``"round(pN + v*sqrt(Npq))"``."""
    if isinstance(value, int) and not isinstance(value, bool):
        return ZRule("const", Fraction(parse_int(value, field, 1)), str(value))
    if not isinstance(value, str):
        raise ConfigError(field, f"expected a z-rule, got {value!r}")
    text = tokenize(value)
    if match := _CONST.fullmatch(text):
        return ZRule("const", Fraction(parse_int(match["k"], field, 1)), value)
    if match := _LINEAR.fullmatch(text):
        alpha = parse_fraction(match["alpha"], field)
        if not 0 < alpha <= 1:
            raise ConfigError(field, f"coefficient of N must lie in (0, 1], got {alpha}")
        return ZRule("linear", alpha, value)
    if match := _CENTRAL.fullmatch(text):
        v = Fraction(0)
        if match["sign"]:
            v = parse_fraction(match["v"] or 1, field)
            if match["sign"] == "-":
                v = -v
        return ZRule("central", v, value)
    raise ConfigError(
        field,
        f"unknown z-rule {value!r}; use 'const k', 'round(aN)' or 'round(pN + v*sqrt(Npq))'",
    )


def parse_law(data: Any, N: int, p: Fraction, field: str = "law") -> UpdateLaw:
    """Builds an update law from its config object and validates it for N."""
    if not isinstance(data, Mapping) or "kind" not in data:
        raise ConfigError(field, f"expected an object with a 'kind' key, got {data!r}")
    kind = data["kind"]
    try:
        law = _build_law(kind, data, N, p, field)
        law.validate(N)
    except DomainError as exc:
        raise ConfigError(field, str(exc)) from exc
    return law


def _build_law(kind: str, data: Mapping[str, Any], N: int, p: Fraction, field: str) -> UpdateLaw:
    """Dispatches on the law kind."""
    if kind == "subset":
        return SubsetUniform(parse_z_rule(data.get("z"), f"{field}.z").resolve(N, p))
    if kind == "iid":
        return IidBernoulli(parse_fraction(data.get("alpha"), f"{field}.alpha"))
    if kind == "definetti":
        atoms = data.get("atoms")
        if not isinstance(atoms, Sequence) or isinstance(atoms, str):
            raise ConfigError(f"{field}.atoms", "expected a list of [rate, weight] pairs")
        pairs = []
        for position, atom in enumerate(atoms):
            if not isinstance(atom, Sequence) or len(atom) != 2:
                raise ConfigError(f"{field}.atoms[{position}]", "expected [rate, weight]")
            pairs.append(
                (
                    parse_fraction(atom[0], f"{field}.atoms[{position}]"),
                    parse_fraction(atom[1], f"{field}.atoms[{position}]"),
                )
            )
        return DeFinettiDiscrete(tuple(pairs))
    if kind == "lebesgue":
        return DeFinettiLebesgue()
    if kind == "block":
        return BlockUpdate(parse_int(data.get("beta"), f"{field}.beta", 1))
    if kind == "explicit":
        table = data.get("pmf")
        if not isinstance(table, Mapping):
            raise ConfigError(f"{field}.pmf", "expected a mapping from bit strings to probabilities")
        for state in table:
            if not set(str(state)) <= {"0", "1"}:
                raise ConfigError(f"{field}.pmf", f"{state!r} is not a bit string")
        return Explicit.from_mapping(
            {state: parse_fraction(prob, f"{field}.pmf.{state}") for state, prob in table.items()}
        )
    raise ConfigError(f"{field}.kind", f"unknown law {kind!r}; expected one of {LAW_KINDS}")


def parse_grid(value: Any, field: str, minimum: int = 1) -> list[int]:
    """Parses an integer grid.

    Accepts an integer, a list, ``"a..b"`` (step one), ``"a..b:s"`` (step s)
    or ``"a..b*f"`` (geometric with factor f).

    >>> parse_grid("16..128*2", "N")
    [16, 32, 64, 128]
    """
    if isinstance(value, (int, str)) and not isinstance(value, bool):
        text = "".join(str(value).split())
        match = _GRID.fullmatch(text)
        if match is None:
            return [parse_int(text, field, minimum)]
        start, stop = int(match["start"]), int(match["stop"])
        step = int(match["step"]) if match["step"] else 1
        if start > stop or start < minimum:
            raise ConfigError(field, f"empty or out-of-range grid {value!r}")
        if match["op"] == "*":
            if step < 2 or start == 0:
                raise ConfigError(field, f"geometric grid needs factor >= 2 and start > 0: {value!r}")
            grid = []
            point = start
            while point <= stop:
                grid.append(point)
                point *= step
            return grid
        if step < 1:
            raise ConfigError(field, f"grid step must be positive: {value!r}")
        return list(range(start, stop + 1, step))
    if isinstance(value, Sequence) and value:
        return [parse_int(item, f"{field}[{position}]", minimum) for position, item in enumerate(value)]
    raise ConfigError(field, f"expected an integer grid, got {value!r}")


def parse_real_grid(value: Any, field: str) -> list[float]:
    """Parses a number or a non-empty list of numbers."""
    if isinstance(value, Sequence) and not isinstance(value, str):
        if not value:
            raise ConfigError(field, "grid must not be empty")
        return [parse_float(item, f"{field}[{position}]") for position, item in enumerate(value)]
    return [parse_float(value, field)]


def parse_start(value: Any, N: int, field: str = "start") -> StartValue:
    """Parses a start: a weight, ``"sup"``, ``"zeros"``, ``"ones"`` or a bit string."""
    if isinstance(value, int) and not isinstance(value, bool):
        if not 0 <= value <= N:
            raise ConfigError(field, f"weight must lie in [0, {N}], got {value}")
        return value
    if value == "sup":
        return "sup"
    if value == "zeros":
        return (0,) * N
    if value == "ones":
        return (1,) * N
    if isinstance(value, str) and value and set(value) <= {"0", "1"}:
        if len(value) != N:
            raise ConfigError(field, f"bit string has length {len(value)}, expected {N}")
        return tuple(int(bit) for bit in value)
    raise ConfigError(field, f"expected a weight, 'sup', 'zeros', 'ones' or a bit string, got {value!r}")
