"""Scenario runners: each turns an ExperimentConfig into ordered result rows."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any
from typing import Callable
from typing import Dict
from typing import Iterable
from typing import Mapping
from typing import Sequence
from typing import TypeVar
from typing import cast

import numpy as np

from .config import ExperimentConfig
from .distances import DistanceCurve
from .distances import chi2_full_sup
from .distances import contingency_alpha
from .distances import contingency_crossing
from .distances import critical_start
from .distances import cutoff_window
from .distances import definetti_floor
from .distances import distance_curve
from .distances import hermite_chi2_approximation
from .distances import iid_chi2_closed_form
from .distances import mixing_time
from .distances import predicted_mixing_time
from .distances import tv_exact
from .distances import tv_upper_from_chi2
from .errors import CapacityError
from .errors import ConfigError
from .errors import DivergenceError
from .errors import NotExchangeableError
from .errors import VerificationError
from .laws import BlockUpdate
from .laws import DeFinettiDiscrete
from .laws import DeFinettiLebesgue
from .laws import Explicit
from .laws import IidBernoulli
from .laws import SubsetUniform
from .laws import UpdateLaw
from .laws import hypercube_states
from .numerics import ScalarMode
from .numerics import SignedLogReal
from .orthopoly import KrawtchoukBasis
from .orthopoly import h_weight
from .orthopoly import krawtchouk_row
from .parser import StartValue
from .parser import ZRule
from .parser import parse_float
from .parser import parse_fraction
from .parser import parse_grid
from .parser import parse_int
from .parser import parse_law
from .parser import parse_real_grid
from .parser import parse_start
from .parser import parse_z_rule
from .process import BRUTEFORCE_LIMIT
from .process import RW_STEP_LIMIT
from .process import ProcessSpec
from .process import all_subsets
from .process import block_generator
from .process import eigenvalues_general
from .process import eigenvalues_hamming
from .process import kernel_bruteforce
from .process import kernel_hamming
from .process import kernel_rw_representation
from .process import kernel_spectral
from .simulate import EmpiricalHamming
from .simulate import SimConfig
from .simulate import compare_exact
from .simulate import exact_weight_law
from .simulate import run


logger = logging.getLogger(__name__)

ResultRow = Dict[str, Any]
Cell = TypeVar("Cell")
NOT_APPLICABLE = "n/a"
EXACT = ScalarMode.exact()
LOGFLOAT = ScalarMode.logfloat()
FLOAT_TOLERANCE = 1e-12
RW_SIGN_MAX_N = 4


@dataclass(frozen=True)
class Column:
    """One CSV column of a scenario."""

    name: str
    description: str


def _columns(*pairs: tuple[str, str]) -> tuple[Column, ...]:
    return tuple(Column(name, description) for name, description in pairs)


COLUMNS: dict[str, tuple[Column, ...]] = {
    "verify": _columns(
        ("check", "oracle check name"),
        ("case", "process the check ran on"),
        ("passed", "true when the check holds"),
        ("detail", "measured discrepancy or reason"),
    ),
    "kernel": _columns(
        ("t", "number of steps"),
        ("from", "start state (bit string) or weight"),
        ("to", "end state (bit string) or weight"),
        ("probability", "t-step transition probability"),
    ),
    "spectrum": _columns(
        ("index", "degree n, or the subset A as a bit string"),
        ("size", "n, or |A|"),
        ("rho", "eigenvalue"),
        ("log_abs_rho", "ln|rho| (-inf for zero)"),
        ("h_weight", "multiplicity weight C(N,n)(p/q)^n, or (p/q)^|A|"),
    ),
    "chi2-curve": _columns(
        ("t", "number of steps"),
        ("value", "chi-squared distance"),
        ("log_value", "natural log of the distance"),
        ("formula", "how the value was computed"),
    ),
    "tv-curve": _columns(
        ("t", "number of steps"),
        ("value", "total variation distance or its chi-squared bound"),
        ("log_value", "natural log of the distance"),
        ("formula", "how the value was computed"),
    ),
    "mixing-time": _columns(
        ("N", "dimension"),
        ("law", "update law"),
        ("epsilon", "threshold"),
        ("t_mix", "first t with distance <= epsilon, or 'periodic'"),
        ("prediction", "(Np/(2z))(ln N + C*) for uniform-subset laws, else n/a"),
    ),
    "cutoff-scan": _columns(
        ("N", "dimension"),
        ("z", "subset size"),
        ("C", "window offset"),
        ("t", "t_C = (Np/(2z))(ln N + C), rounded"),
        ("chi2", "sup chi-squared distance at t_C"),
        ("log_chi2", "its natural log"),
        ("lower_bound", "first spectral term h_1 rho_1^(2t)"),
        ("limit_lower", "exp(-C) p/q"),
        ("limit_upper", "exp(exp(-C) p/q) - 1"),
        ("note", "annotation, e.g. 't_C < 1'"),
    ),
    "almost-perfect": _columns(
        ("role", "'fit' for the decay grid, 'tv-check' for the small-N TV check"),
        ("N", "dimension"),
        ("z", "subset size from the z-rule"),
        ("t", "number of steps"),
        ("chi2", "sup chi-squared distance"),
        ("log_chi2", "its natural log"),
        ("tv_bound", "(1/2) sqrt(chi2)"),
        ("hermite_approx", "Hermite-series approximation of chi2"),
        ("tv_exact", "exact TV from the 0-vector on tv-check rows, else n/a"),
    ),
    "critical-start": _columns(
        ("N", "dimension"),
        ("z", "subset size round(wN)"),
        ("k", "start weight round(Np)"),
        ("t", "number of steps"),
        ("chi2", "Hamming chi-squared distance from weight k"),
        ("bound", "(1/2)(1 - w/p)^(2t) p/q"),
        ("holds", "chi2 < bound"),
        ("threshold", "first t from which the bound holds on the grid, or n/a"),
        ("t_mix", "chi-squared mixing time from weight k"),
    ),
    "definetti-slow": _columns(
        ("N", "dimension"),
        ("t", "floor(aN / ln N)"),
        ("log_chi2", "ln chi2 from weight 0"),
        ("log_floor", "ln of the single-term floor"),
        ("holds", "floor <= chi2"),
    ),
    "contingency": _columns(
        ("N", "dimension"),
        ("rho", "eigenvalue ratio"),
        ("alpha", "iid rate p(1 - rho)"),
        ("epsilon", "threshold"),
        ("t_measured", "first t with sup chi2 <= epsilon"),
        ("t_predicted", "first t from the closed form"),
        ("closed_form", "closed-form chi2 at t_measured"),
        ("within_one", "|t_measured - t_predicted| <= 1"),
    ),
    "simulate": _columns(
        ("weight", "Hamming weight"),
        ("count", "trajectories ending at this weight"),
        ("empirical", "empirical probability"),
        ("exact", "exact probability"),
    ),
}


def columns(scenario: str) -> tuple[str, ...]:
    """Column names of a scenario in output order."""
    return tuple(column.name for column in COLUMNS[scenario])


def map_cells(
    function: Callable[[Cell], Any], cells: Sequence[Cell], workers: int = 1
) -> list[Any]:
    """Evaluates grid cells, in a process pool when workers > 1.

    Results come back in grid order whatever the completion order.
    """
    logger.info("Evaluating %d grid cells on %d workers", len(cells), workers)
    if workers == 1 or len(cells) <= 1:
        return [function(cell) for cell in cells]
    with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
        return list(pool.map(function, cells))


def _flatten(groups: Iterable[list[ResultRow]]) -> list[ResultRow]:
    return [row for group in groups for row in group]


def _log(value: Any) -> float:
    """Natural log of a nonnegative distance."""
    if isinstance(value, SignedLogReal):
        return float(value.log_mag)
    number = float(value)
    return math.log(number) if number > 0 else -math.inf


def _p(parameters: Mapping[str, Any]) -> Fraction:
    p = parse_fraction(parameters["p"], "p")
    if not Fraction(1, 2) <= p < 1:
        raise ConfigError("p", f"must lie in [1/2, 1), got {p}")
    return p


def _process(parameters: Mapping[str, Any], N: int, mode: ScalarMode) -> ProcessSpec:
    p = _p(parameters)
    return ProcessSpec(N, p, parse_law(parameters["law"], N, p), mode)


def _bits(state: Sequence[int]) -> str:
    return "".join(str(int(bit)) for bit in state)


# verify


def random_explicit(N: int, rng: np.random.Generator) -> Explicit:
    """Random explicit law on at most six binary N-vectors."""
    size = int(rng.integers(1, min(6, 2**N) + 1))
    indices = rng.choice(2**N, size=size, replace=False)
    weights = rng.integers(1, 10, size=size)
    total = int(weights.sum())
    states = hypercube_states(N)
    return Explicit(
        tuple(
            (tuple(states[i].tolist()), Fraction(int(w), total))
            for i, w in zip(indices, weights)
        )
    )


def oracle_laws(N: int, explicit: int, seed: int) -> list[UpdateLaw]:
    """Update laws of the oracle grid at dimension N."""
    rng = block_generator(seed, N)
    laws: list[UpdateLaw] = [SubsetUniform(z) for z in range(1, N + 1)]
    laws += [IidBernoulli(alpha) for alpha in (Fraction(3, 10), Fraction(3, 5), Fraction(1))]
    laws += [BlockUpdate(beta) for beta in range(1, N + 1) if N % beta == 0]
    laws.append(
        DeFinettiDiscrete(((Fraction(1, 5), Fraction(1, 3)), (Fraction(9, 10), Fraction(2, 3))))
    )
    laws += [random_explicit(N, rng) for _ in range(explicit)]
    return laws


def _check(check: str, case: str, passed: bool, detail: str = "") -> ResultRow:
    return {"check": check, "case": case, "passed": bool(passed), "detail": detail}


def verify_kernels(spec: ProcessSpec, t_max: int) -> list[ResultRow]:
    """Oracle checks on one exact process."""
    rows = []
    brute = kernel_bruteforce(spec)
    steps: list[int] = []
    power = brute.matrix
    for t in range(1, t_max + 1):
        if t > 1:
            power = power @ brute.matrix
        if not np.all(kernel_spectral(spec, t).matrix == power):
            steps.append(t)
    rows.append(
        _check(
            "kernel_equivalence",
            spec.label,
            not steps,
            f"differs at t={steps[0]}" if steps else f"t<={t_max}",
        )
    )
    rounded = kernel_spectral(spec.with_mode(LOGFLOAT), 1).max_difference(brute)
    rows.append(
        _check("logfloat_kernel", spec.label, rounded <= FLOAT_TOLERANCE, f"{rounded:.3g}")
    )
    structural = brute.is_stochastic() and brute.is_reversible(spec.stationary_vector())
    rows.append(_check("reversibility", spec.label, structural))
    failing = [
        subset
        for subset in all_subsets(spec.N)
        if subset and not brute.restriction_holds(subset)
    ]
    rows.append(
        _check(
            "marginals",
            spec.label,
            not failing,
            f"fails on B={failing[0]}" if failing else "",
        )
    )
    if spec.law.exchangeable:
        try:
            lumped = brute.lump()
        except NotExchangeableError as exc:
            rows.append(_check("lumpability", spec.label, False, str(exc)))
        else:
            same = bool(np.all(lumped.matrix == kernel_hamming(spec).matrix))
            rows.append(_check("lumpability", spec.label, same))
    return rows


def verify_rw_sign(spec: ProcessSpec, t_max: int) -> ResultRow:
    """Random-walk representation rows against the spectral kernel."""
    mismatches = 0
    for t in range(min(t_max, RW_STEP_LIMIT) + 1):
        dense = kernel_spectral(spec, t).matrix
        for index, x in enumerate(hypercube_states(spec.N)):
            row = kernel_rw_representation(spec, x.tolist(), t).pmf
            mismatches += int(not np.all(row == dense[index]))
    return _check("rw_sign", spec.label, mismatches == 0, f"{mismatches} rows differ")


def verify_orthogonality(N: int, p: Fraction) -> ResultRow:
    """sum_x pi(x) Q_m(x) Q_n(x) = delta_mn / h_n, exactly."""
    basis = KrawtchoukBasis(N, p, EXACT)
    rows = np.array([krawtchouk_row(basis, x) for x in range(N + 1)], dtype=object)
    weights = np.array(
        [math.comb(N, x) * p**x * (1 - p) ** (N - x) for x in range(N + 1)], dtype=object
    )
    gram = rows.T @ (weights[:, None] * rows)
    wrong = sum(
        gram[m, n] != (1 / h_weight(basis, n) if m == n else 0)
        for m in range(N + 1)
        for n in range(N + 1)
    )
    return _check("orthogonality", f"N={N},p={p}", wrong == 0, f"{wrong} entries differ")


def _verify_cell(cell: tuple[ProcessSpec, int]) -> list[ResultRow]:
    spec, t_max = cell
    logger.debug("Verifying %s", spec.label)
    rows = verify_kernels(spec, t_max)
    if spec.N <= RW_SIGN_MAX_N:
        rows.append(verify_rw_sign(spec, t_max))
    return rows


def run_verify(config: ExperimentConfig) -> list[ResultRow]:
    """Runs the oracle suite in exact arithmetic."""
    parameters = config.parameters
    N_max = parse_int(parameters["N_max"], "N_max", 1)
    if N_max > BRUTEFORCE_LIMIT:
        raise ConfigError("N_max", f"oracle kernels need N <= {BRUTEFORCE_LIMIT}")
    t_max = parse_int(parameters["t_max"], "t_max", 1)
    explicit = parse_int(parameters["explicit_laws"], "explicit_laws", 0)
    orthogonality_N = parse_int(parameters["orthogonality_N"], "orthogonality_N", 1)
    p_grid = parameters["p_grid"]
    if not isinstance(p_grid, Sequence) or isinstance(p_grid, str) or not p_grid:
        raise ConfigError("p_grid", "expected a non-empty list of rationals")
    ps = [parse_fraction(p, f"p_grid[{i}]") for i, p in enumerate(p_grid)]
    for i, p in enumerate(ps):
        if not Fraction(1, 2) <= p < 1:
            raise ConfigError(f"p_grid[{i}]", f"must lie in [1/2, 1), got {p}")
    cells = [
        (ProcessSpec(N, p, law, EXACT), t_max)
        for N in range(1, N_max + 1)
        for p in ps
        for law in oracle_laws(N, explicit, config.seed)
    ]
    rows = _flatten(map_cells(_verify_cell, cells, config.workers))
    rows += [verify_orthogonality(N, p) for N in range(1, orthogonality_N + 1) for p in ps]
    return rows


def check_verification(rows: Sequence[ResultRow]) -> None:
    """Raises VerificationError when a verify row failed."""
    failed = [row for row in rows if not row["passed"]]
    if failed:
        first = failed[0]
        raise VerificationError(
            f"{len(failed)} oracle checks failed; first: {first['check']} on "
            f"{first['case']} ({first['detail']})"
        )


# kernel, spectrum and curves


def run_kernel(config: ExperimentConfig) -> list[ResultRow]:
    """Entries of the t-step kernel, dense or on weights."""
    parameters = config.parameters
    N = parse_int(parameters["N"], "N", 1)
    t = parse_int(parameters["t"], "t", 0)
    spec = _process(parameters, N, config.mode)
    if not isinstance(parameters["hamming"], bool):
        raise ConfigError("hamming", f"expected true or false, got {parameters['hamming']!r}")
    if parameters["hamming"]:
        matrix = kernel_hamming(spec).power(t).matrix
        labels = [str(weight) for weight in range(N + 1)]
    else:
        matrix = kernel_spectral(spec, t).matrix
        labels = [_bits(state) for state in hypercube_states(N)]
    return [
        {"t": t, "from": labels[i], "to": labels[j], "probability": matrix[i, j]}
        for i in range(len(labels))
        for j in range(len(labels))
    ]


def run_spectrum(config: ExperimentConfig) -> list[ResultRow]:
    """Eigenvalues by degree, or by subset for non-exchangeable laws."""
    parameters = config.parameters
    N = parse_int(parameters["N"], "N", 1)
    spec = _process(parameters, N, config.mode)
    if spec.law.exchangeable:
        values = eigenvalues_hamming(spec).values
        return [
            {
                "index": n,
                "size": n,
                "rho": value,
                "log_abs_rho": _log(abs(value)),
                "h_weight": h_weight(spec.basis, n),
            }
            for n, value in enumerate(values)
        ]
    if N > BRUTEFORCE_LIMIT:
        raise CapacityError(f"subset spectra need N <= {BRUTEFORCE_LIMIT}, got {N}")
    ratio = spec.p / spec.q
    rows = []
    for subset in all_subsets(N):
        value = eigenvalues_general(spec, subset)
        indicator = [1 if j in subset else 0 for j in range(N)]
        weight = ratio ** len(subset)
        rows.append(
            {
                "index": _bits(indicator),
                "size": len(subset),
                "rho": value,
                "log_abs_rho": _log(abs(value)),
                "h_weight": weight if spec.mode.is_exact else float(weight),
            }
        )
    return rows


CURVE_METRICS = {
    "chi2-curve": ("chi2_hamming", "chi2_full"),
    "tv-curve": ("tv_hamming", "tv_full", "tv_upper_bound"),
}


def _curve_rows(curve: DistanceCurve) -> list[ResultRow]:
    return [
        {
            "t": sample.t,
            "value": sample.value,
            "log_value": _log(sample.value),
            "formula": sample.formula,
        }
        for sample in curve.samples
    ]


def run_curve(config: ExperimentConfig) -> list[ResultRow]:
    """A distance curve along a grid of times."""
    parameters = config.parameters
    metric = parameters["metric"]
    if metric not in CURVE_METRICS[config.scenario]:
        raise ConfigError(
            "metric", f"{config.scenario} takes one of {CURVE_METRICS[config.scenario]}"
        )
    N = parse_int(parameters["N"], "N", 1)
    spec = _process(parameters, N, config.mode)
    start = parse_start(parameters["start"], N)
    times = parse_grid(parameters["t_grid"], "t_grid", minimum=0)
    return _curve_rows(distance_curve(spec, metric, times, start))


# mixing times and cutoff


def _mixing_cell(cell: tuple[ProcessSpec, float, str, StartValue]) -> ResultRow:
    spec, epsilon, metric, start = cell
    try:
        t_mix: Any = mixing_time(spec, epsilon, metric, start)
    except DivergenceError:
        t_mix = "periodic"
    prediction: Any = NOT_APPLICABLE
    if isinstance(spec.law, SubsetUniform) and metric.startswith("chi2") and start in (0, "sup"):
        prediction = predicted_mixing_time(spec, epsilon)
    logger.debug("t_mix(%g) = %s for %s", epsilon, t_mix, spec.label)
    return {
        "N": spec.N,
        "law": spec.law.label,
        "epsilon": epsilon,
        "t_mix": t_mix,
        "prediction": prediction,
    }


def run_mixing_time(config: ExperimentConfig) -> list[ResultRow]:
    """Mixing times over an N-grid and a list of thresholds."""
    parameters = config.parameters
    metric = parameters["metric"]
    epsilons = parse_real_grid(parameters["epsilon"], "epsilon")
    for i, epsilon in enumerate(epsilons):
        if not epsilon > 0:
            raise ConfigError(f"epsilon[{i}]", f"must be positive, got {epsilon}")
    cells = []
    for N in parse_grid(parameters["N_grid"], "N_grid"):
        spec = _process(parameters, N, config.mode)
        start = parse_start(parameters["start"], N)
        cells += [(spec, epsilon, metric, start) for epsilon in epsilons]
    return map_cells(_mixing_cell, cells, config.workers)


def _cutoff_cell(cell: tuple[ProcessSpec, float]) -> ResultRow:
    spec, C = cell
    (entry,) = cutoff_window(spec, [C]).entries
    return {
        "N": spec.N,
        "z": spec.law.z if isinstance(spec.law, SubsetUniform) else NOT_APPLICABLE,
        "C": entry.C,
        "t": entry.t,
        "chi2": entry.chi2,
        "log_chi2": entry.log_chi2,
        "lower_bound": entry.lower_bound,
        "limit_lower": entry.limit_lower,
        "limit_upper": entry.limit_upper,
        "note": entry.note,
    }


def run_cutoff_scan(config: ExperimentConfig) -> list[ResultRow]:
    """chi2 across the cutoff window of a uniform-subset walk."""
    parameters = config.parameters
    N = parse_int(parameters["N"], "N", 1)
    p = _p(parameters)
    z = parse_z_rule(parameters["z"], "z").resolve(N, p)
    spec = ProcessSpec(N, p, SubsetUniform(z), config.mode)
    cells = [(spec, C) for C in parse_real_grid(parameters["C_grid"], "C_grid")]
    return map_cells(_cutoff_cell, cells, config.workers)


# almost-perfect mixing


def _almost_perfect_cell(cell: tuple[ProcessSpec, tuple[int, ...], str]) -> list[ResultRow]:
    spec, times, role = cell
    N, p = spec.N, spec.p
    z = cast(SubsetUniform, spec.law).z
    v = (z - float(N * p)) / math.sqrt(float(N * p * spec.q))
    rows = []
    for t in times:
        chi2 = chi2_full_sup(spec, t)
        tv: Any = NOT_APPLICABLE
        if role == "tv-check":
            tv = float(tv_exact(spec, 0, t))
        rows.append(
            {
                "role": role,
                "N": N,
                "z": z,
                "t": t,
                "chi2": float(chi2),
                "log_chi2": _log(chi2),
                "tv_bound": tv_upper_from_chi2(chi2),
                "hermite_approx": hermite_chi2_approximation(N, p, t, v),
                "tv_exact": tv,
            }
        )
    logger.debug("Almost-perfect cell N=%d done", N)
    return rows


def run_almost_perfect(config: ExperimentConfig) -> list[ResultRow]:
    """sup chi2 at small fixed t over an N-grid, plus a small-N TV check."""
    parameters = config.parameters
    p = _p(parameters)
    rule: ZRule = parse_z_rule(parameters["z_rule"], "z_rule")
    times = tuple(parse_grid(parameters["t_grid"], "t_grid"))
    fit_t = parse_int(parameters["fit_t"], "fit_t", 1)
    if fit_t not in times:
        raise ConfigError("fit_t", f"must be one of t_grid {list(times)}")
    cells = [
        (ProcessSpec(N, p, SubsetUniform(rule.resolve(N, p)), config.mode), times, "fit")
        for N in parse_grid(parameters["N_grid"], "N_grid")
    ]
    for N in parse_grid(parameters["tv_grid"], "tv_grid"):
        if N > BRUTEFORCE_LIMIT:
            raise ConfigError("tv_grid", f"TV checks need N <= {BRUTEFORCE_LIMIT}, got {N}")
        spec = ProcessSpec(N, p, SubsetUniform(rule.resolve(N, p)), config.mode)
        cells.append((spec, (fit_t,), "tv-check"))
    return _flatten(map_cells(_almost_perfect_cell, cells, config.workers))


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fits of a log distance against N and against ln N."""

    slope: float
    r_squared: float
    loglog_slope: float
    loglog_r_squared: float
    decreasing: bool


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    spread = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 - float((residual**2).sum()) / spread if spread else 1.0
    return float(slope), r_squared


def fit_decay(Ns: Sequence[int], log_values: Sequence[float]) -> DecayFit:
    """Fits log values against N (geometric decay) and ln N (power law).

    >>> fit = fit_decay([16, 32, 64], [-1.0, -2.0, -3.0])
    >>> round(fit.loglog_slope, 6), fit.decreasing
    (-1.442695, True)
    """
    if len(Ns) < 2:
        raise ConfigError("N_grid", "fits need at least two dimensions")
    x = np.asarray(Ns, dtype=np.float64)
    y = np.asarray(log_values, dtype=np.float64)
    slope, r_squared = _linear_fit(x, y)
    loglog_slope, loglog_r_squared = _linear_fit(np.log(x), y)
    decreasing = bool(np.all(np.diff(y) < 0))
    return DecayFit(slope, r_squared, loglog_slope, loglog_r_squared, decreasing)


# critical start, De Finetti and contingency tables


def _critical_cell(cell: tuple[ProcessSpec, Fraction, int, float]) -> list[ResultRow]:
    spec, w, t_max, epsilon = cell
    result = critical_start(spec, w, t_max)
    k = math.floor(float(spec.N * spec.p) + 0.5)
    t_mix = mixing_time(spec, epsilon, "chi2_hamming", k)
    threshold = result.threshold if result.threshold is not None else NOT_APPLICABLE
    z = cast(SubsetUniform, spec.law).z
    return [
        {
            "N": spec.N,
            "z": z,
            "k": k,
            "t": t,
            "chi2": value,
            "bound": bound,
            "holds": value < bound,
            "threshold": threshold,
            "t_mix": t_mix,
        }
        for t, value, bound in zip(result.times, result.chi2, result.bound)
    ]


def run_critical_start(config: ExperimentConfig) -> list[ResultRow]:
    """chi2 from weight round(Np) for z = round(wN) over an N-grid."""
    parameters = config.parameters
    p = _p(parameters)
    w = parse_fraction(parameters["w"], "w")
    if not 0 < w < p:
        raise ConfigError("w", f"must lie in (0, p), got {w}")
    t_max = parse_int(parameters["t_max"], "t_max", 1)
    epsilon = parse_float(parameters["epsilon"], "epsilon")
    if not epsilon > 0:
        raise ConfigError("epsilon", f"must be positive, got {epsilon}")
    cells = []
    for N in parse_grid(parameters["N_grid"], "N_grid"):
        z = max(1, math.floor(w * N + Fraction(1, 2)))
        cells.append((ProcessSpec(N, p, SubsetUniform(z), config.mode), w, t_max, epsilon))
    return _flatten(map_cells(_critical_cell, cells, config.workers))


def _definetti_cell(cell: tuple[ProcessSpec, float]) -> ResultRow:
    spec, a = cell
    floor = definetti_floor(spec, a)
    return {
        "N": spec.N,
        "t": floor.t,
        "log_chi2": floor.log_chi2,
        "log_floor": floor.log_floor,
        "holds": floor.holds,
    }


def run_definetti_slow(config: ExperimentConfig) -> list[ResultRow]:
    """chi2 of the uniform De Finetti walk at t = floor(aN / ln N)."""
    parameters = config.parameters
    p = _p(parameters)
    a = parse_float(parameters["a"], "a")
    cells = [
        (ProcessSpec(N, p, DeFinettiLebesgue(), config.mode), a)
        for N in parse_grid(parameters["N_grid"], "N_grid", minimum=2)
    ]
    return map_cells(_definetti_cell, cells, config.workers)


def run_contingency(config: ExperimentConfig) -> list[ResultRow]:
    """Measured against predicted chi2 crossings of the iid walk with rho_n = rho**n."""
    parameters = config.parameters
    N = parse_int(parameters["N"], "N", 1)
    p = _p(parameters)
    rho = parse_fraction(parameters["rho"], "rho")
    if not 0 < rho < 1:
        raise ConfigError("rho", f"must lie in (0, 1), got {rho}")
    alpha = contingency_alpha(p, rho)
    spec = ProcessSpec(N, p, IidBernoulli(alpha), config.mode)
    rows = []
    for i, epsilon in enumerate(parse_real_grid(parameters["epsilon"], "epsilon")):
        if not epsilon > 0:
            raise ConfigError(f"epsilon[{i}]", f"must be positive, got {epsilon}")
        measured = mixing_time(spec, epsilon, "chi2_full", 0)
        predicted = contingency_crossing(N, p, rho, epsilon)
        rows.append(
            {
                "N": N,
                "rho": rho,
                "alpha": alpha,
                "epsilon": epsilon,
                "t_measured": measured,
                "t_predicted": predicted,
                "closed_form": iid_chi2_closed_form(N, p, alpha, measured),
                "within_one": abs(measured - predicted) <= 1,
            }
        )
    return rows


# simulation


def run_simulate(config: ExperimentConfig) -> list[ResultRow]:
    """Empirical against exact law of the final Hamming weight."""
    parameters = config.parameters
    N = parse_int(parameters["N"], "N", 1)
    spec = _process(parameters, N, config.mode)
    horizon = parse_int(parameters["horizon"], "horizon", 0)
    trajectories = parse_int(parameters["trajectories"], "trajectories", 1)
    start: tuple[int, ...] | None = None
    if parameters["start"] != "stationary":
        parsed = parse_start(parameters["start"], N)
        if parsed == "sup":
            parsed = 0
        if isinstance(parsed, int):
            parsed = (1,) * parsed + (0,) * (N - parsed)
        start = tuple(parsed)
    result: EmpiricalHamming = run(
        SimConfig(spec, start, horizon, trajectories, config.seed), config.workers
    )
    exact = exact_weight_law(spec, start, horizon)
    return [
        {
            "weight": weight,
            "count": int(result.counts[weight]),
            "empirical": float(result.pmf[weight]),
            "exact": float(exact[weight]),
        }
        for weight in range(N + 1)
    ]


RUNNERS: dict[str, Callable[[ExperimentConfig], list[ResultRow]]] = {
    "verify": run_verify,
    "kernel": run_kernel,
    "spectrum": run_spectrum,
    "chi2-curve": run_curve,
    "tv-curve": run_curve,
    "mixing-time": run_mixing_time,
    "cutoff-scan": run_cutoff_scan,
    "almost-perfect": run_almost_perfect,
    "critical-start": run_critical_start,
    "definetti-slow": run_definetti_slow,
    "contingency": run_contingency,
    "simulate": run_simulate,
}


def run_scenario(config: ExperimentConfig) -> list[ResultRow]:
    """Runs a scenario and returns its rows in grid order."""
    logger.info("Running %s in %s mode", config.scenario, config.mode)
    rows = RUNNERS[config.scenario](config)
    logger.info("Finished %s: %d rows", config.scenario, len(rows))
    return rows


def summarize(config: ExperimentConfig, rows: Sequence[ResultRow]) -> dict[str, Any]:
    """Scenario-level findings derived from the rows."""
    scenario = config.scenario
    if scenario == "verify":
        failed = sum(not row["passed"] for row in rows)
        return {"checks": len(rows), "failed": failed}
    if scenario == "almost-perfect":
        fit_t = parse_int(config.parameters["fit_t"], "fit_t", 1)
        fitted = [row for row in rows if row["role"] == "fit" and row["t"] == fit_t]
        fit = fit_decay(
            [row["N"] for row in fitted],
            [_log(row["tv_bound"]) for row in fitted],
        )
        checks = [row for row in rows if row["role"] == "tv-check"]
        return {
            "fit_t": fit_t,
            "slope": fit.slope,
            "r_squared": fit.r_squared,
            "loglog_slope": fit.loglog_slope,
            "loglog_r_squared": fit.loglog_r_squared,
            "decreasing": fit.decreasing,
            "tv_within_bound": all(
                row["tv_exact"] <= row["tv_bound"] * (1 + FLOAT_TOLERANCE) for row in checks
            ),
        }
    if scenario == "critical-start":
        by_N = {row["N"]: (row["threshold"], row["t_mix"]) for row in rows}
        return {
            "thresholds": {str(N): value[0] for N, value in by_N.items()},
            "t_mix": {str(N): value[1] for N, value in by_N.items()},
            "size_free": len({value[1] for value in by_N.values()}) == 1,
        }
    if scenario == "definetti-slow":
        q = 1 - float(_p(config.parameters))
        a = parse_float(config.parameters["a"], "a")
        Ns = np.array([row["N"] for row in rows], dtype=np.float64)
        summary: dict[str, Any] = {
            "expected_slope": -math.log(q) - 2 * a,
            "floor_holds": all(row["holds"] for row in rows),
        }
        if len(rows) > 1:
            summary["chi2_slope"] = float(np.polyfit(Ns, [row["log_chi2"] for row in rows], 1)[0])
            summary["floor_slope"] = float(
                np.polyfit(Ns, [row["log_floor"] for row in rows], 1)[0]
            )
        return summary
    if scenario == "contingency":
        return {"all_within_one": all(row["within_one"] for row in rows)}
    if scenario == "simulate":
        counts = np.array([row["count"] for row in rows], dtype=np.int64)
        comparison = compare_exact(
            EmpiricalHamming(counts, int(counts.sum())), [row["exact"] for row in rows]
        )
        return {
            "tv": comparison.tv,
            "threshold": comparison.threshold,
            "passed": comparison.passed,
        }
    return {}
