"""Tests for pipeline orchestration and the command line."""

import json
import logging
import os
from pathlib import Path
from unittest.mock import patch

import pytest

from src import pipeline
from src.coherent import PlaneQuadrature, kernel_fit, resolution_deviation
from src.config import DEFAULT_SEED, Tolerances, load_config, parse_config
from src.diagnostics import RieszVerdict
from src.errors import CoefficientOverflowError
from src.fockrep import basis_vector
from src.models import shifted_model
from src.pipeline import (
    INCONSISTENCY_LOG,
    SUITE_RUNNERS,
    _consistency_checks,
    build_system,
    exit_status,
    main,
    non_resolution_status,
    run,
    setup_inconsistency_logger,
)
from src.report import emit, parse_report
from src.systems import NogoParams

CONFIG_DIR = Path(__file__).parent.parent / "configs"


@pytest.fixture(autouse=True)
def isolated_logs(tmp_path):
    """Point the inconsistency log at a temp directory and drop cached handlers."""
    inconsistency_logger = logging.getLogger("inconsistencies")
    inconsistency_logger.handlers.clear()
    with patch.dict(os.environ, {"PBLAB_LOG_DIR": str(tmp_path / "logs"), "PBLAB_THREADS": "2"}):
        yield tmp_path / "logs"
    for handler in inconsistency_logger.handlers:
        handler.close()
    inconsistency_logger.handlers.clear()


def test_placeholder():
    """Placeholder test to verify module imports."""
    assert pipeline is not None


def test_nogo_run_diverges():
    """α = 1 is certified divergent and the run passes."""
    report = run(parse_config('{"model": "nogo", "alpha": 1.0}'))
    assert report.results["nogo"]["verdict"] == "DIVERGES"
    assert report.results["nogo"]["status"] == "pass"
    assert report.passed
    assert exit_status(report) == 0


def test_dho_run_is_infeasible():
    """No admissible sample satisfies both sign conditions."""
    cfg = parse_config(
        '{"model": "dho", "m": 1.0, "k": 2.0, "gamma": 0.5, "Gamma": [1, 0], "delta": [0, 1], "samples": 20}'
    )
    result = run(cfg).results["dho"]
    assert result["status"] == "pass"
    assert result["feasible"] is False
    assert result["admissible_with_both_conditions"] == 0
    assert len(result["tables"]["admissible_samples"]) == 20
    assert result["admissible_with_weighted_space"] == 0
    for row in result["tables"]["admissible_samples"]:
        assert row["weighted_grid"] == 64 * 64
        assert row["weighted_feasible"] == 0
        assert row["x_prime"] == pytest.approx(2 * row["c1_value"])
        assert row["y"] == pytest.approx(row["c2_value"])
    assert result["diagnostics"]["assumptions"]["A1"] == "VIOLATED"


def test_swanson_biorthogonality_suite():
    """The overlap table covers the whole family and deviates below 1e−9."""
    cfg = parse_config('{"model": "swanson", "theta": 0.25, "suites": ["biorthogonality"]}')
    result = run(cfg).results["biorthogonality"]
    assert result["status"] == "pass"
    assert result["maxdev"] < 1e-9
    assert len(result["tables"]["overlap"]) == result["size"] ** 2


def test_shifted_resolution_suite_reports_kernel():
    """β ≠ ᾱ is expected not to resolve the identity; the kernel fit decides the status."""
    cfg = parse_config('{"model": "shifted", "alpha": [0.5, 0.3], "beta": [0, 0.2], "dim": 40, "suites": ["resolution"]}')
    result = run(cfg).results["resolution"]
    assert result["expected"] == "non_resolution"
    assert result["status"] == "pass"
    assert result["deviation"] > 0.01


def test_swanson_fixture_metric_round_trip():
    """The shipped Swanson configuration closes the metric round trip within tolerance."""
    cfg = load_config(CONFIG_DIR / "swanson.json")
    result = SUITE_RUNNERS["metric"](build_system(cfg), cfg)
    assert result["method"] == "truncated_sum"
    assert result["roundtrip_defect"] <= cfg.tolerances.metric_roundtrip
    assert result["status"] == "pass"


def test_non_resolution_needs_visible_deviation():
    """β = ᾱ matches the kernel fit trivially, but its deviation cannot count as non-resolution."""
    system = shifted_model(0.3 + 0.2j, 0.3 - 0.2j, dim=40)
    quad = PlaneQuadrature()
    deviation, _ = resolution_deviation(system, quad, DEFAULT_SEED)
    ground = basis_vector(0, system.fock_dim)
    fit = kernel_fit(system, quad, ground, ground)
    tol = Tolerances()
    assert fit["error_b"] <= tol.resolution
    assert deviation <= tol.non_resolution
    assert non_resolution_status(fit, deviation, tol) == "fail"
    assert non_resolution_status(fit, 2 * tol.non_resolution, tol) == "pass"


def test_coefficient_cap_override_reaches_nogo():
    """A lower coeff_cap turns the α = 1 series into an overflow certificate."""
    default = run(parse_config('{"model": "nogo", "alpha": 1.0}')).results["nogo"]
    capped = run(parse_config('{"model": "nogo", "alpha": 1.0, "tolerances": {"coeff_cap": 1e10}}')).results["nogo"]
    assert default["certificate"]["overflow_index"] is None
    assert capped["certificate"]["overflow_index"] is not None
    assert capped["verdict"] == "DIVERGES"


def test_pn_cap_override_limits_susy_family():
    """A family longer than pn_cap is refused with an overflow error."""
    cfg = parse_config('{"model": "susy", "alpha": "0.8j", "nmax": 10, "tolerances": {"pn_cap": 5}}')
    with pytest.raises(CoefficientOverflowError) as e:
        run(cfg)
    assert e.value.index == 10


def test_suite_exception_is_captured():
    """A suite that raises is reported as an error and fails the run."""

    def boom(subject, config):
        raise RuntimeError("eigensolver exploded")

    cfg = parse_config('{"model": "nogo", "alpha": 1.0}')
    with patch.dict(SUITE_RUNNERS, {"nogo": boom}):
        report = run(cfg)
    assert report.results["nogo"]["status"] == "error"
    assert "eigensolver exploded" in report.results["nogo"]["message"]
    assert exit_status(report) == 1


def test_empty_suites():
    """Nothing to run still produces a valid, passing report."""
    report = run(parse_config('{"model": "nogo", "alpha": 1.0, "suites": []}'))
    assert report.results == {}
    assert report.passed


def test_build_system_passes_parameters_through():
    """dho and nogo runs work on the parameter record."""
    cfg = parse_config('{"model": "nogo", "alpha": 0.5}')
    assert isinstance(build_system(cfg), NogoParams)


def test_consistency_flags_bounded_failure():
    """BOUNDED, biorthogonal and unresolved is a hard inconsistency."""
    cfg = parse_config('{"model": "susy", "alpha": "0.8j"}')
    results = {
        "biorthogonality": {"status": "pass", "maxdev": 1e-12},
        "gram": {"status": "pass", "riesz_verdict": RieszVerdict.BOUNDED.value},
        "resolution": {"status": "fail", "deviation": 0.5},
    }
    messages = _consistency_checks(results, cfg)
    assert len(messages) == 1
    assert "susy" in messages[0]

    results["resolution"] = {"status": "inconclusive", "deviation": 0.5}
    assert _consistency_checks(results, cfg) == []
    results["resolution"] = {"status": "pass", "deviation": 0.5, "expected": "non_resolution"}
    assert _consistency_checks(results, cfg) == []
    del results["gram"]
    assert _consistency_checks(results, cfg) == []


def test_inconsistencies_logged_to_file(isolated_logs):
    """Inconsistencies go to the report and to inconsistencies.log."""
    cfg = parse_config('{"model": "nogo", "alpha": 1.0}')
    with patch("src.pipeline._consistency_checks", return_value=["nogo: made-up inconsistency"]):
        report = run(cfg)
    assert report.inconsistencies == ["nogo: made-up inconsistency"]
    assert exit_status(report) == 1

    log_path = isolated_logs / INCONSISTENCY_LOG
    assert log_path.exists()
    assert "made-up inconsistency" in log_path.read_text()


def test_inconsistency_logger_has_single_handler():
    """Repeated setup does not stack handlers."""
    first = setup_inconsistency_logger()
    second = setup_inconsistency_logger()
    assert first is second
    assert len(second.handlers) == 1


def test_runs_are_deterministic():
    """Two runs of one configuration give byte-identical reports."""
    cfg = parse_config('{"model": "shifted", "alpha": 0.3, "beta": 0.3, "dim": 40, "suites": ["biorthogonality", "metric"]}')
    assert emit(run(cfg)) == emit(run(cfg))


def test_timings_only_on_request():
    """Timings appear in the report when the configuration asks for them."""
    without = run(parse_config('{"model": "nogo", "alpha": 1.0}'))
    with_timings = run(parse_config('{"model": "nogo", "alpha": 1.0, "timings": true}'))
    assert without.timings is None
    assert set(with_timings.timings) == {"nogo"}


def test_cli_list_models(capsys):
    """list-models prints every registered model."""
    assert main(["list-models"]) == 0
    out = capsys.readouterr().out
    for name in ("shifted", "swanson", "gll", "nogo"):
        assert f"{name}:" in out


def test_cli_validate(tmp_path, capsys):
    """validate accepts a good file and rejects a bad one with exit code 2."""
    good = tmp_path / "good.json"
    good.write_text('{"model": "nogo", "alpha": 1.0}')
    assert main(["validate", str(good)]) == 0
    assert "valid nogo configuration" in capsys.readouterr().out

    bad = tmp_path / "bad.json"
    bad.write_text('{"model": "swanson", "theta": 0.8}')
    assert main(["validate", str(bad)]) == 2

    assert main(["validate", str(tmp_path / "missing.json")]) == 2


def test_cli_run_writes_report(tmp_path):
    """run writes the report to --output in the requested format."""
    cfg = tmp_path / "nogo.json"
    cfg.write_text('{"model": "nogo", "alpha": 1.0}')
    out = tmp_path / "reports" / "nogo.json"
    assert main(["run", str(cfg), "--output", str(out)]) == 0
    report = parse_report(out.read_bytes())
    assert report.results["nogo"]["verdict"] == "DIVERGES"
    assert report.config["params"]["alpha"] == {"im": 0.0, "re": 1.0}

    csv_out = tmp_path / "reports" / "nogo.csv"
    assert main(["run", str(cfg), "--output", str(csv_out), "--format", "csv"]) == 0
    assert csv_out.read_text().startswith("suite,table,")


def test_cli_run_failing_report_exit_code(tmp_path):
    """A failing suite makes the command exit with 1."""
    cfg = tmp_path / "nogo.json"
    cfg.write_text('{"model": "nogo", "alpha": 1.0}')

    def failing(subject, config):
        return {"status": "fail"}

    with patch.dict(SUITE_RUNNERS, {"nogo": failing}):
        assert main(["run", str(cfg), "--output", str(tmp_path / "r.json")]) == 1


def test_report_json_is_canonical(tmp_path):
    """The written file parses as plain JSON with sorted keys."""
    cfg = tmp_path / "nogo.json"
    cfg.write_text('{"model": "nogo", "alpha": 0.5, "suites": ["nogo"]}')
    out = tmp_path / "r.json"
    main(["run", str(cfg), "--output", str(out)])
    body = json.loads(out.read_text())
    assert list(body) == sorted(body)
    assert list(body["results"]["nogo"]) == sorted(body["results"]["nogo"])


CONFIG_FILES = sorted(CONFIG_DIR.glob("*.json"))


@pytest.mark.slow
@pytest.mark.parametrize("path", CONFIG_FILES, ids=[p.stem for p in CONFIG_FILES])
def test_bundled_configs_run(path):
    """Every shipped configuration validates, passes every suite it names and is reproducible."""
    cfg = load_config(path)
    first = run(cfg)
    assert set(first.results) == set(cfg.suites)
    assert all(r["status"] != "error" for r in first.results.values())
    assert first.passed, first.status_counts()
    assert emit(first) == emit(run(cfg))
