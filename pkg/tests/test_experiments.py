"""Test cases for the experiments module."""
import math
from fractions import Fraction
from typing import Any

import pytest

from cubemixer.config import ExperimentConfig
from cubemixer.config import load_config
from cubemixer.errors import CapacityError
from cubemixer.errors import ConfigError
from cubemixer.errors import VerificationError
from cubemixer.experiments import COLUMNS
from cubemixer.experiments import NOT_APPLICABLE
from cubemixer.experiments import check_verification
from cubemixer.experiments import columns
from cubemixer.experiments import fit_decay
from cubemixer.experiments import map_cells
from cubemixer.experiments import oracle_laws
from cubemixer.experiments import run_scenario
from cubemixer.experiments import summarize
from cubemixer.experiments import verify_kernels
from cubemixer.laws import Explicit
from cubemixer.laws import SubsetUniform
from cubemixer.numerics import ScalarMode
from cubemixer.process import KernelDense
from cubemixer.process import ProcessSpec
from cubemixer.process import kernel_spectral


def make_config(scenario: str, mode: str = "logfloat", **parameters: Any) -> ExperimentConfig:
    """Resolves a scenario with parameter overrides."""
    return load_config(scenario, {"parameters": parameters}, mode=mode)


def test_rows_match_columns() -> None:
    """It should describe every column a scenario writes."""
    rows = run_scenario(make_config("kernel", N=2))
    assert all(tuple(row) == columns("kernel") for row in rows)
    assert all(COLUMNS[scenario] for scenario in COLUMNS)


def test_map_cells_keeps_grid_order() -> None:
    """It should return the same ordered results with one or more workers."""
    cells = [-3, 1, -2, 5, -8]
    assert map_cells(abs, cells, 2) == map_cells(abs, cells, 1) == [3, 1, 2, 5, 8]


def test_oracle_laws() -> None:
    """It should draw the same explicit laws for the same seed."""
    laws = oracle_laws(2, 2, seed=4)
    assert laws[:2] == [SubsetUniform(1), SubsetUniform(2)]
    explicit = [law for law in laws if isinstance(law, Explicit)]
    assert len(explicit) == 2
    for law in explicit:
        law.validate(2)
    assert laws == oracle_laws(2, 2, seed=4)


def test_verify_passes() -> None:
    """It should pass every oracle check on a small grid."""
    config = make_config(
        "verify", N_max=2, p_grid=["3/5"], t_max=1, explicit_laws=1, orthogonality_N=4
    )
    rows = run_scenario(config)
    assert all(row["passed"] for row in rows), [row for row in rows if not row["passed"]]
    checks = {row["check"] for row in rows}
    assert {
        "kernel_equivalence",
        "logfloat_kernel",
        "reversibility",
        "marginals",
        "lumpability",
        "rw_sign",
        "orthogonality",
    } <= checks
    check_verification(rows)
    assert summarize(config, rows) == {"checks": len(rows), "failed": 0}


def test_verify_checks_rw_sign_for_every_law_kind() -> None:
    """It should run the random-walk sign check on explicit and De Finetti laws up to t = 3."""
    config = make_config(
        "verify", N_max=3, p_grid=["3/4"], t_max=3, explicit_laws=2, orthogonality_N=1
    )
    rows = run_scenario(config)
    signs = [row for row in rows if row["check"] == "rw_sign"]
    assert all(row["passed"] for row in signs)
    kinds = {row["case"].split(",", 2)[2].split("(")[0] for row in signs}
    assert kinds == {"subset", "iid", "block", "definetti", "explicit"}
    assert sum(row["case"].startswith("N=3,") for row in signs) == len(oracle_laws(3, 2, 0))


def test_check_verification_raises() -> None:
    """It should raise VerificationError naming the first failure."""
    rows = [
        {"check": "marginals", "case": "a", "passed": True, "detail": ""},
        {"check": "rw_sign", "case": "b", "passed": False, "detail": "2 rows differ"},
    ]
    with pytest.raises(VerificationError, match="1 oracle checks failed; first: rw_sign on b"):
        check_verification(rows)


def test_verify_rejects_bad_p() -> None:
    """It should need every p in [1/2, 1)."""
    with pytest.raises(ConfigError, match=r"p_grid\[1\]"):
        run_scenario(make_config("verify", N_max=1, p_grid=["3/5", "1/3"]))


@pytest.mark.parametrize("hamming", [False, True])
def test_kernel_single_coordinate(hamming: bool) -> None:
    """It should move 0 to 1 surely and 1 to 0 with probability q/p."""
    rows = run_scenario(make_config("kernel", "exact", N=1, hamming=hamming))
    table = {(row["from"], row["to"]): row["probability"] for row in rows}
    assert table == {
        ("0", "0"): 0,
        ("0", "1"): 1,
        ("1", "0"): Fraction(2, 3),
        ("1", "1"): Fraction(1, 3),
    }


def test_kernel_rejects_non_boolean_flag() -> None:
    """It should insist on true or false."""
    with pytest.raises(ConfigError, match="hamming"):
        run_scenario(make_config("kernel", hamming="yes"))


def test_spectrum_by_degree() -> None:
    """It should list Krawtchouk eigenvalues with their multiplicity weights."""
    rows = run_scenario(make_config("spectrum", "exact", N=3))
    assert [row["index"] for row in rows] == [0, 1, 2, 3]
    assert rows[0]["rho"] == 1
    assert rows[0]["log_abs_rho"] == 0.0
    assert rows[1]["rho"] == Fraction(4, 9)
    assert rows[1]["h_weight"] == Fraction(9, 2)


def test_spectrum_by_subset() -> None:
    """It should index non-exchangeable spectra by coordinate subsets."""
    rows = run_scenario(make_config("spectrum", "exact", N=2, law={"kind": "block", "beta": 1}))
    assert sorted(row["index"] for row in rows) == ["00", "01", "10", "11"]
    empty = next(row for row in rows if row["size"] == 0)
    assert empty["rho"] == 1
    assert empty["h_weight"] == 1
    with pytest.raises(CapacityError):
        run_scenario(make_config("spectrum", N=13, law={"kind": "block", "beta": 1}))


def test_chi2_curve_starts_at_point_mass() -> None:
    """It should equal 1/pi(0) - 1 at t = 0 and then decrease."""
    rows = run_scenario(make_config("chi2-curve", "exact", N=4, t_grid="0..3"))
    assert [row["t"] for row in rows] == [0, 1, 2, 3]
    assert float(rows[0]["value"]) == pytest.approx(609 / 16)
    values = [float(row["value"]) for row in rows]
    assert values == sorted(values, reverse=True)
    assert rows[0]["log_value"] == pytest.approx(math.log(609 / 16))


def test_tv_curve_full() -> None:
    """It should equal 1 - pi(0) at t = 0."""
    rows = run_scenario(make_config("tv-curve", N=3, metric="tv_full", t_grid="0..2"))
    assert float(rows[0]["value"]) == pytest.approx(1 - (2 / 5) ** 3)
    assert all(row["formula"] for row in rows)


def test_curve_rejects_metric_of_other_curve() -> None:
    """It should name the metric field."""
    with pytest.raises(ConfigError, match="metric"):
        run_scenario(make_config("chi2-curve", metric="tv_full"))


def test_mixing_time_rows() -> None:
    """It should grow with N and carry the cutoff prediction."""
    rows = run_scenario(make_config("mixing-time", N_grid=[8, 32], epsilon=["1/4", "1/10"]))
    assert [(row["N"], row["epsilon"]) for row in rows] == [
        (8, 0.25),
        (8, 0.1),
        (32, 0.25),
        (32, 0.1),
    ]
    assert all(isinstance(row["t_mix"], int) for row in rows)
    assert rows[2]["t_mix"] > rows[0]["t_mix"]
    assert all(isinstance(row["prediction"], float) for row in rows)


def test_mixing_time_marks_periodic_walks() -> None:
    """It should write 'periodic' for the z = 1 walk at p = 1/2."""
    rows = run_scenario(make_config("mixing-time", N_grid=[4], p="1/2"))
    assert rows[0]["t_mix"] == "periodic"


def test_mixing_time_without_prediction() -> None:
    """It should mark the prediction as not applicable for iid laws."""
    config = make_config("mixing-time", N_grid=[8], law={"kind": "iid", "alpha": "3/10"})
    assert run_scenario(config)[0]["prediction"] == NOT_APPLICABLE


def test_cutoff_scan() -> None:
    """It should report the window limits of each offset."""
    rows = run_scenario(make_config("cutoff-scan", N=64, C_grid=[0, 2]))
    assert [row["C"] for row in rows] == [0.0, 2.0]
    assert rows[0]["z"] == 1
    assert rows[0]["limit_lower"] == pytest.approx(1.5)
    assert rows[0]["t"] < rows[1]["t"]
    assert rows[0]["chi2"] > rows[1]["chi2"]


def test_cutoff_scan_workers_agree() -> None:
    """It should give the same rows with two workers."""
    serial = run_scenario(make_config("cutoff-scan", N=64, C_grid=[-1, 0, 1]))
    config = load_config("cutoff-scan", {"parameters": {"N": 64, "C_grid": [-1, 0, 1]}}, workers=2)
    assert run_scenario(config) == serial


def test_almost_perfect() -> None:
    """It should fit the decay and keep exact TV under its bound."""
    config = make_config(
        "almost-perfect", N_grid="16..64*2", t_grid=[1, 2], fit_t=2, tv_grid="4..5"
    )
    rows = run_scenario(config)
    assert [row["role"] for row in rows] == ["fit"] * 6 + ["tv-check"] * 2
    assert [row["z"] for row in rows[::2][:3]] == [10, 19, 38]
    assert all(row["tv_exact"] == NOT_APPLICABLE for row in rows[:6])
    summary = summarize(config, rows)
    assert summary["fit_t"] == 2
    assert summary["tv_within_bound"]
    assert set(summary) >= {"slope", "r_squared", "loglog_slope", "decreasing"}


def test_almost_perfect_checks_fit_time() -> None:
    """It should need fit_t on the time grid."""
    with pytest.raises(ConfigError, match="fit_t"):
        run_scenario(make_config("almost-perfect", N_grid=[16, 32], t_grid=[1], fit_t=2))


def test_fit_decay() -> None:
    """It should recover a geometric rate exactly."""
    fit = fit_decay([10, 20, 30], [-5.0, -10.0, -15.0])
    assert fit.slope == pytest.approx(-0.5)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.decreasing
    with pytest.raises(ConfigError):
        fit_decay([10], [-1.0])


def test_critical_start() -> None:
    """It should start from weight round(Np) with z = round(wN)."""
    config = make_config("critical-start", N_grid=[100], t_max=12)
    rows = run_scenario(config)
    assert len(rows) == 12
    assert {(row["z"], row["k"]) for row in rows} == {(30, 60)}
    threshold = rows[0]["threshold"]
    assert threshold <= 5
    assert all(row["holds"] for row in rows if row["t"] >= threshold)
    summary = summarize(config, rows)
    assert summary["thresholds"] == {"100": threshold}
    assert summary["size_free"]


def test_critical_start_rejects_large_w() -> None:
    """It should need 0 < w < p."""
    with pytest.raises(ConfigError, match="w"):
        run_scenario(make_config("critical-start", w="3/4"))


def test_definetti_slow() -> None:
    """It should keep chi2 above the floor as N grows."""
    config = make_config("definetti-slow", N_grid=[128, 512, 2048])
    rows = run_scenario(config)
    assert [row["t"] for row in rows] == [
        math.floor(0.2 * N / math.log(N)) for N in (128, 512, 2048)
    ]
    summary = summarize(config, rows)
    assert summary["floor_holds"]
    assert summary["expected_slope"] == pytest.approx(-math.log(0.4) - 0.4)
    assert "chi2_slope" in summary


def test_contingency() -> None:
    """It should match the closed-form crossing."""
    config = make_config("contingency", N=1000, epsilon=["1/10"])
    (row,) = run_scenario(config)
    assert row["alpha"] == Fraction(3, 10)
    assert row["t_measured"] == row["t_predicted"]
    assert row["closed_form"] <= 0.1 * (1 + 1e-9)
    assert summarize(config, [row]) == {"all_within_one": True}


def test_simulate() -> None:
    """It should tally every trajectory and stay close to the exact law."""
    config = load_config(
        "simulate",
        {
            "parameters": {
                "N": 10,
                "law": {"kind": "subset", "z": 2},
                "horizon": 5,
                "trajectories": 2000,
            }
        },
        seed=1,
    )
    rows = run_scenario(config)
    assert [row["weight"] for row in rows] == list(range(11))
    assert sum(row["count"] for row in rows) == 2000
    assert sum(row["exact"] for row in rows) == pytest.approx(1.0)
    summary = summarize(config, rows)
    assert summary["passed"]
    assert summary["tv"] <= summary["threshold"]
    assert run_scenario(config) == rows


def test_simulate_from_stationarity() -> None:
    """It should compare against Binomial(N, p) from a stationary start."""
    config = make_config("simulate", N=4, start="stationary", horizon=3, trajectories=500)
    rows = run_scenario(config)
    assert rows[4]["exact"] == pytest.approx(0.6**4)


def test_summarize_other_scenarios() -> None:
    """It should have nothing to add for plain tables."""
    config = make_config("kernel")
    assert summarize(config, run_scenario(config)) == {}


def test_p_outside_range() -> None:
    """It should reject p below 1/2."""
    with pytest.raises(ConfigError, match="Invalid config: p"):
        run_scenario(make_config("kernel", p="1/3"))


class MislabelledExplicit(Explicit):
    """Explicit law that claims exchangeability it does not have."""

    @property
    def exchangeable(self) -> bool:
        """True."""
        return True


def test_verify_kernels_reports_unlumpable_kernels() -> None:
    """It should fail lumpability when weight classes disagree."""
    law = MislabelledExplicit.from_mapping({"10": 1})
    rows = verify_kernels(ProcessSpec(2, Fraction(3, 5), law, ScalarMode.exact()), 1)
    (lumpability,) = [row for row in rows if row["check"] == "lumpability"]
    assert not lumpability["passed"]
    assert "not lumpable" in lumpability["detail"]


def test_verify_kernels_reports_the_first_differing_step(
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    """It should name the first t where the spectral kernel is wrong."""

    def shifted(spec: ProcessSpec, t: int = 1) -> KernelDense:
        return kernel_spectral(spec, t + 1 if spec.mode.is_exact else t)

    monkeypatch.setattr("cubemixer.experiments.kernel_spectral", shifted)
    spec = ProcessSpec(2, Fraction(3, 5), SubsetUniform(1), ScalarMode.exact())
    equivalence = verify_kernels(spec, 2)[0]
    assert equivalence["check"] == "kernel_equivalence"
    assert not equivalence["passed"]
    assert equivalence["detail"] == "differs at t=1"


def test_verify_skips_rw_sign_above_four() -> None:
    """It should run the random-walk sign check only for N <= 4."""
    config = make_config(
        "verify", N_max=5, p_grid=["3/4"], t_max=1, explicit_laws=0, orthogonality_N=1
    )
    rows = run_scenario(config)
    assert all(row["passed"] for row in rows)
    assert any(row["case"].startswith("N=5,") for row in rows)
    signs = [row for row in rows if row["check"] == "rw_sign"]
    assert signs
    assert not any(row["case"].startswith("N=5,") for row in signs)


@pytest.mark.parametrize(
    "parameters, field",
    [
        ({"N_max": 13}, "N_max"),
        ({"p_grid": "3/5"}, "p_grid"),
        ({"p_grid": []}, "p_grid"),
    ],
)
def test_verify_rejects_bad_grids(parameters: dict[str, Any], field: str) -> None:
    """It should name the offending verify parameter."""
    with pytest.raises(ConfigError, match=field):
        run_scenario(make_config("verify", **parameters))


def test_spectrum_of_a_vanishing_eigenvalue() -> None:
    """It should write -inf as the log of a zero eigenvalue."""
    rows = run_scenario(make_config("spectrum", "exact", N=2, p="1/2"))
    assert rows[1]["rho"] == 0
    assert rows[1]["log_abs_rho"] == -math.inf


@pytest.mark.parametrize(
    "scenario, parameters, field",
    [
        ("mixing-time", {"N_grid": [4], "epsilon": [0]}, r"epsilon\[0\]"),
        ("almost-perfect", {"tv_grid": [13]}, "tv_grid"),
        ("critical-start", {"epsilon": 0}, "epsilon"),
        ("contingency", {"rho": "1"}, "rho"),
        ("contingency", {"N": 4, "epsilon": [0]}, r"epsilon\[0\]"),
    ],
)
def test_scenario_parameter_checks(
    scenario: str, parameters: dict[str, Any], field: str
) -> None:
    """It should reject thresholds and grids outside their ranges."""
    with pytest.raises(ConfigError, match=field):
        run_scenario(make_config(scenario, **parameters))


@pytest.mark.parametrize("start", ["sup", "1010"])
def test_simulate_from_named_starts(start: str) -> None:
    """It should start from the zero vector for 'sup' and from bit strings as given."""
    config = make_config("simulate", N=4, start=start, horizon=0, trajectories=20)
    rows = run_scenario(config)
    weight = 0 if start == "sup" else 2
    assert [row["count"] for row in rows] == [20 if w == weight else 0 for w in range(5)]
    assert rows[weight]["exact"] == 1.0


def test_definetti_slow_single_dimension() -> None:
    """It should skip the slope fits with one dimension."""
    config = make_config("definetti-slow", N_grid=[128])
    summary = summarize(config, run_scenario(config))
    assert "chi2_slope" not in summary
    assert summary["floor_holds"]
