import json

import pytest

from towercert.errors import ConfigError
from towercert.groebner import current_budget
from towercert.tower import build_tower
from towercert.verifier.cli import main
from towercert.verifier.config import CHECK_IDS, load_config
from towercert.verifier.registry import ANCHOR_INVENTORY, OUT_OF_SCOPE, REGISTRY, CheckSpec
from towercert.verifier.report import CheckReport, SuiteReport, emit_report, to_json, to_markdown, write_report
from towercert.verifier.suite import SuiteMetrics, run_check, run_suite


FAULT_FAILURES = {
    "retain-ramification": {"C8", "C14"},
    "exclude-plus-lambda": {"C8", "C11", "C14"},
    "keep-origin": {"C7", "C12"},
    "corrupt-rho": {"C3", "C7", "C10", "C14"},
    "repeated-root": {"C1", "C13"},
}


# --- Helpers ---
def quick_config(**overrides):
    values = {"n": 2, "lambdas": ("1", "2", "3"), "degree_bound": 2, "budget": 1_000_000, "workers": 4}
    values.update(overrides)
    return load_config(**values)


def failing(report: SuiteReport) -> set[str]:
    return {c.id for c in report.checks if c.status != "pass" and c.status != "skipped"}


@pytest.fixture(scope="module")
def default_report():
    return run_suite(load_config(n=3, lambdas=("1", "2", "3"), degree_bound=4, budget=1_000_000, breaks=()))


# --- Configuration ---
def test_config_defaults_and_overrides(monkeypatch):
    monkeypatch.setenv("TOWERCERT_N", "2")
    monkeypatch.setenv("TOWERCERT_LAMBDAS", "2, 3, 5")
    config = load_config()
    assert config.n == 2
    assert config.lambdas == ("2", "3", "5")
    assert load_config(n=4).n == 4


def test_config_normalizes_values():
    config = quick_config(lambdas=("2/4", "3", "5"), checks=("C3", "C1", "C3"), breaks=("keep-origin", "corrupt-rho"))
    assert config.lambdas == ("1/2", "3", "5")
    assert config.checks == ("C1", "C3")
    assert config.breaks == ("corrupt-rho", "keep-origin")
    assert "workers" not in config.echo()


@pytest.mark.parametrize(
    "overrides",
    [
        {"lambdas": ("1", "1", "3")},
        {"lambdas": ("0", "1", "3")},
        {"lambdas": ("1.5", "2", "3")},
        {"n": 6},
        {"degree_bound": 0},
        {"checks": ("C15",)},
        {"breaks": ("no-such-fault",)},
        {"modified_parameters": ("0",)},
    ],
)
def test_invalid_config(overrides):
    with pytest.raises(ConfigError):
        quick_config(**overrides)


def test_bad_integer_in_environment(monkeypatch):
    monkeypatch.setenv("TOWERCERT_BUDGET", "lots")
    with pytest.raises(ConfigError):
        load_config()


def test_repeated_root_fault_bypasses_validation():
    config = quick_config(breaks=("repeated-root",))
    assert config.field_spec().lambdas == (1, 1, 3)


# --- Registry ---
def test_registry_order_and_ids():
    assert tuple(spec.id for spec in REGISTRY) == CHECK_IDS


def test_every_anchor_is_covered_or_out_of_scope():
    covered = {spec.anchor for spec in REGISTRY}
    assert covered <= set(ANCHOR_INVENTORY)
    assert OUT_OF_SCOPE <= set(ANCHOR_INVENTORY)
    assert not covered & OUT_OF_SCOPE
    assert covered | OUT_OF_SCOPE == set(ANCHOR_INVENTORY)


def test_anchor_inventory_lists_each_stated_result_once():
    # one entry per numbered item of the construction, in any order
    assert len(ANCHOR_INVENTORY) == 27
    assert len(set(ANCHOR_INVENTORY.values())) == len(ANCHOR_INVENTORY)
    assert {spec.anchor for spec in REGISTRY} == {
        "curve-and-first-level",
        "closed-form-Yn",
        "geometric-description",
        "tower-by-pullback",
        "n-fold-fiber-product",
        "alpha-beta-distinct",
        "elementary-nisnevich-cover",
        "alpha-beta-homotopic",
        "fibers-rigid",
        "modified-homotopies",
    }


# --- Running single checks ---
def test_run_check_turns_exceptions_into_failures(spec):
    def boom(ctx, config):
        raise RuntimeError("boom")

    metrics = SuiteMetrics()
    report = run_check(CheckSpec("C1", "explodes", "curve-and-first-level", boom), build_tower(spec, 1), quick_config(n=1), metrics)
    assert report.status == "fail"
    assert report.witness == "RuntimeError: boom"
    assert metrics.get_stats()["slowest"] == "C1"


def test_run_check_reports_budget_exhaustion(spec):
    def greedy(ctx, config):
        current_budget().charge(10)
        return {"status": "pass"}

    report = run_check(CheckSpec("C1", "greedy", "curve-and-first-level", greedy), build_tower(spec, 1), quick_config(n=1, budget=5))
    assert report.status == "budget"
    assert "5" in report.witness


def test_rigidity_out_of_budget_is_not_a_failure():
    report = run_suite(quick_config(n=1, degree_bound=2, budget=50, checks=("C13",)))
    (check,) = report.checks
    assert check.status == "budget"
    assert "Inconclusive" in check.witness
    assert "exhausted" in check.witness
    assert report.summary["counts"]["fail"] == 0
    assert not report.passed


def test_square_check_is_skipped_at_level_one():
    report = run_suite(quick_config(n=1, checks=("C4",)))
    assert [c.status for c in report.checks] == ["skipped"]
    assert report.passed


# --- Suites ---
def test_default_run_passes(default_report):
    assert [c.id for c in default_report.checks] == list(CHECK_IDS)
    assert default_report.passed, [(c.id, c.witness) for c in default_report.checks if c.status != "pass"]
    assert default_report.summary["all_passed"]
    assert default_report.summary["counts"]["pass"] == 14


def test_default_run_details(default_report):
    by_id = {c.id: c for c in default_report.checks}
    assert by_id["C13"].details["certificates"]["EllipticE"] == "CertifiedNoNonconstant"
    assert by_id["C13"].timings
    assert by_id["C12"].details["phi1^-1(beta0)"] == "NonreducedPuncturedLine"
    assert by_id["C14"].details["cover_witnesses"]


@pytest.mark.parametrize("fault", sorted(FAULT_FAILURES))
def test_fault_injection_fails_exactly_the_expected_checks(fault):
    report = run_suite(quick_config(breaks=(fault,)))
    assert failing(report) == FAULT_FAILURES[fault]
    for check in report.checks:
        if check.status == "fail":
            assert check.witness


def test_runs_are_deterministic_without_timings():
    first = to_json(run_suite(quick_config()), timings=False)
    second = to_json(run_suite(quick_config(workers=1)), timings=False)
    assert first == second
    assert "wall_time_ms" not in first


# --- Reports ---
def test_json_keeps_model_field_order():
    report = SuiteReport(summary={"counts": {"pass": 1}}, checks=[CheckReport(id="C1", title="t", anchor="curve-and-first-level", status="pass")])
    data = json.loads(to_json(report))
    assert list(data) == ["schema_version", "config", "summary", "checks"]
    assert list(data["checks"][0]) == ["id", "title", "anchor", "status", "wall_time_ms", "witness", "details", "timings"]
    assert "wall_time_ms" not in json.loads(to_json(report, timings=False))["checks"][0]


def test_empty_report():
    report = SuiteReport()
    assert json.loads(emit_report(report, "json"))["checks"] == []
    assert "no checks run" in emit_report(report, "md")
    assert report.passed
    with pytest.raises(ValueError):
        emit_report(report, "xml")


def test_witness_survives_both_formats(tmp_path):
    witness = "psi1 o h1 != p1 | level 2"
    report = SuiteReport(checks=[CheckReport(id="C9", title="t", anchor="alpha-beta-homotopic", status="fail", witness=witness)])
    assert json.loads(to_json(report))["checks"][0]["witness"] == witness
    assert "psi1 o h1 != p1 \\| level 2" in to_markdown(report)
    assert not report.passed
    path = write_report(report, "json", tmp_path / "nested" / "report.json")
    assert json.loads(path.read_text())["schema_version"] == "1"


# --- CLI ---
def test_cli_writes_the_report(tmp_path):
    out = tmp_path / "report.json"
    assert main(["--n", "2", "--check", "C1,C6", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert [c["id"] for c in data["checks"]] == ["C1", "C6"]
    assert data["config"]["n"] == 2


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["--lambdas", "1,1,3"]) == 2
    assert main(["--n", "9"]) == 2
    assert main(["--break", "nope"]) == 2
    assert main(["--check", "C1", "--break", "repeated-root", "--report", "md"]) == 1
    assert "| C1 | FAIL |" in capsys.readouterr().out
    assert main(["--check", "C1", "--lambdas=-1,2,1/2"]) == 0
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["--check", "C1", "--out", str(blocker / "report.json")]) == 1


# --- Scaling and other parameters ---
@pytest.mark.slow
def test_level_five_passes():
    report = run_suite(load_config(n=5, lambdas=("1", "2", "3"), degree_bound=4))
    assert report.passed, [(c.id, c.witness) for c in report.checks if c.status != "pass"]


@pytest.mark.slow
@pytest.mark.parametrize("lambdas", [("2", "3", "5"), ("-1", "1", "2"), ("-1", "2", "1/2")])
def test_other_parameters_pass(lambdas):
    report = run_suite(load_config(n=3, lambdas=lambdas, degree_bound=4))
    assert report.passed, [(c.id, c.witness) for c in report.checks if c.status != "pass"]
