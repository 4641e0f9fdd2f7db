"""Main pipeline orchestration."""

import argparse
import contextvars
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable

import numpy as np

from src.coherent import (
    PlaneQuadrature,
    bicoherent,
    eigen_relation_residual,
    heisenberg_check,
    inner_matrix,
    kernel_fit,
    probe_vectors,
    resolution_matrix,
    route_equivalence,
    series_resolution,
)
from src.config import MODELS, RunConfig, Tolerances, load_config, load_environment, log_dir, thread_cap
from src.damped import dho_feasibility, sample_admissible
from src.diagnostics import (
    RieszVerdict,
    Status,
    assumption_summary,
    check_biorthogonality,
    intertwining_residual,
    metric_operators,
    multiplier_metric_defect,
    resolution_consistency,
)
from src.errors import ConfigError, PseudoBosonError
from src.fockrep import basis_vector
from src.gaussmath import numeric_limits
from src.landau import gll_model
from src.models import extended_oscillator, riesz_mult_model, shifted_model, susy_model, swanson_model
from src.nogo import Verdict, variant_check
from src.report import RunReport, normalize, versions, write_report
from src.systems import BiorthSystem, DHOParams, ModelParams, NogoParams, Rep

logger = logging.getLogger(__name__)

INCONSISTENCY_LOG = "inconsistencies.log"
COHERENT_POINTS = (0.0, 0.3, 0.2 + 0.2j, -0.25j)
HEISENBERG_POINT = 1.0 + 0.5j


def setup_inconsistency_logger() -> logging.Logger:
    """Set up a dedicated logger for hard inconsistencies.

    Returns:
        Logger configured to append to <log dir>/inconsistencies.log
    """
    inconsistency_logger = logging.getLogger("inconsistencies")
    inconsistency_logger.setLevel(logging.INFO)

    # Avoid adding duplicate handlers
    if not inconsistency_logger.handlers:
        directory = log_dir()
        directory.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(directory / INCONSISTENCY_LOG)
        file_handler.setLevel(logging.INFO)
        file_handler.setFormatter(logging.Formatter("%(asctime)s - %(message)s"))
        inconsistency_logger.addHandler(file_handler)

    return inconsistency_logger


def build_system(config: RunConfig) -> BiorthSystem | ModelParams:
    """Construct the configured model; dho and nogo runs work on their parameters directly."""
    p = config.params
    name = config.model
    if name == "shifted":
        return shifted_model(p.alpha, p.beta, config.dim, config.nmax)
    if name == "extended":
        return extended_oscillator(p.beta, config.dim, config.nmax)
    if name == "swanson":
        return swanson_model(p.theta, config.nmax or 10, p.rep, config.dim)
    if name == "susy":
        return susy_model(p, config.nmax or 10)
    if name == "riesz_mult":
        return riesz_mult_model(p.rho, config.nmax or 11)
    if name == "gll":
        return gll_model(p.k1, p.k2, config.nmax or 4, config.options.get("lmax", 4))
    return p


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


# --- suites -----------------------------------------------------------------------------------


def _biorthogonality_suite(system: BiorthSystem, config: RunConfig) -> dict[str, Any]:
    G, maxdev = check_biorthogonality(system)
    rows = [
        {"n": n, "m": m, "value": complex(G[n, m])} for n in range(G.shape[0]) for m in range(G.shape[1])
    ]
    return {
        "status": _status(maxdev <= config.tolerances.biorthogonality),
        "maxdev": maxdev,
        "size": G.shape[0],
        "tables": {"overlap": rows},
    }


def _gram_suite(system: BiorthSystem, config: RunConfig) -> dict[str, Any]:
    report = assumption_summary(system, config.tolerances)
    rows = [
        {"level": level, "min_eig": lo, "max_eig": hi}
        for level, lo, hi in zip(report.ladder, report.gram_min_eig, report.gram_max_eig)
    ]
    failed = any(report.assumptions.get(k) == Status.FAIL for k in ("A1", "A2"))
    return {
        "status": _status(not failed),
        "riesz_verdict": report.riesz_verdict,
        "diagnostics": report,
        "tables": {"gram_ladder": rows},
    }


def _metric_suite(system: BiorthSystem, config: RunConfig) -> dict[str, Any]:
    if system.rep == Rep.COORD2D:
        defect, method = multiplier_metric_defect(system), "multiplier"
    else:
        _, _, defect = metric_operators(system)
        method = "truncated_sum"
    return {
        "status": _status(defect <= config.tolerances.metric_roundtrip),
        "roundtrip_defect": defect,
        "method": method,
    }


def _intertwine_suite(system: BiorthSystem, config: RunConfig) -> dict[str, Any]:
    residual = intertwining_residual(system)
    return {"status": _status(residual <= config.tolerances.intertwine), "residual": residual}


def _coherent_suite(system: BiorthSystem, config: RunConfig) -> dict[str, Any]:
    tol = config.tolerances
    rows, notes = [], []
    ok = True
    for z in COHERENT_POINTS:
        pair = bicoherent(system, z, tol.tail_cap)
        res_phi, res_psi = eigen_relation_residual(system, pair)
        row = {
            "z": complex(z),
            "tail_mass": pair.tail_mass,
            "reliable": pair.reliable,
            "residual_phi": res_phi,
            "residual_psi": res_psi,
        }
        if system.rep == Rep.FOCK:
            row["route_equivalence"] = route_equivalence(system, z)
        if pair.reliable:
            ok = ok and max(res_phi, res_psi) <= tol.residual
        else:
            notes.append(f"pair at z={complex(z)} is UNRELIABLE (tail mass {pair.tail_mass:.2e})")
        rows.append(row)
    return {
        "status": _status(ok),
        "heisenberg_product": heisenberg_check(HEISENBERG_POINT, config.dim),
        "notes": notes,
        "tables": {"eigen_relation": rows},
    }


def non_resolution_status(fit: dict[str, Any], deviation: float, tolerances: Tolerances) -> str:
    """Non-resolution is shown when the kernel fit matches and the deviation clears the threshold."""
    return _status(fit["error_b"] <= tolerances.resolution and deviation > tolerances.non_resolution)


def _resolution_suite(system: BiorthSystem, config: RunConfig) -> dict[str, Any]:
    tol = config.tolerances
    quad = PlaneQuadrature()
    vectors = probe_vectors(system, config.seed)
    T = resolution_matrix(system, quad, vectors, vectors)
    exact = inner_matrix(vectors, vectors)
    deviation = float(np.max(np.abs(T - exact)))
    result: dict[str, Any] = {"deviation": deviation, "probe_vectors": len(vectors)}

    if "coordinate_shifts" in system.extras:
        alpha, beta = system.extras["coordinate_shifts"]
        if abs(alpha - np.conj(beta)) > 0:
            ground = basis_vector(0, system.fock_dim)
            fit = kernel_fit(system, quad, ground, ground)
            result["kernel_fit"] = fit
            result["status"] = non_resolution_status(fit, deviation, tol)
            result["expected"] = "non_resolution"
            return result
        result["status"] = _status(deviation <= tol.resolution)
        return result

    truncation = float(np.max(np.abs(series_resolution(system, vectors, vectors) - exact)))
    result["truncation_defect"] = truncation
    if deviation <= tol.resolution:
        result["status"] = "pass"
    elif truncation > tol.resolution:
        result["status"] = "inconclusive"
        result["notes"] = [f"family too short to resolve the probe vectors (truncation defect {truncation:.2e})"]
    else:
        result["status"] = "fail"
    return result


def _dho_suite(params: DHOParams, config: RunConfig) -> dict[str, Any]:
    report = dho_feasibility(params)
    samples = sample_admissible(config.options.get("samples", 100), config.seed)
    rows = []
    for sample in samples:
        r = dho_feasibility(sample)
        rows.append(
            {
                "c1_value": r.c1_value,
                "c2_value": r.c2_value,
                "c1": r.c1,
                "c2": r.c2,
                "x_prime": r.weighted.x_prime,
                "y": r.weighted.y,
                "weighted_grid": r.weighted.grid_size,
                "weighted_feasible": r.weighted.feasible_points,
            }
        )
    witnesses = sum(1 for row in rows if row["c1"] and row["c2"])
    weighted_witnesses = sum(1 for row in rows if row["weighted_feasible"] > 0)
    return {
        "status": _status(witnesses == 0 and weighted_witnesses == 0 and not report.feasible),
        "feasible": report.feasible,
        "feasibility": report,
        "diagnostics": assumption_summary(params, config.tolerances),
        "admissible_with_both_conditions": witnesses,
        "admissible_with_weighted_space": weighted_witnesses,
        "tables": {"admissible_samples": rows},
    }


def _nogo_suite(params: NogoParams, config: RunConfig) -> dict[str, Any]:
    seq, cert = variant_check(params)
    rows = [{"j": j, "log_term": float(t)} for j, t in enumerate(seq.log_terms)]
    return {
        "status": "inconclusive" if cert.verdict == Verdict.INCONCLUSIVE else "pass",
        "verdict": cert.verdict,
        "certificate": cert,
        "tables": {"terms": rows},
    }


SUITE_RUNNERS: dict[str, Callable[[Any, RunConfig], dict[str, Any]]] = {
    "biorthogonality": _biorthogonality_suite,
    "coherent": _coherent_suite,
    "dho": _dho_suite,
    "gram": _gram_suite,
    "intertwine": _intertwine_suite,
    "metric": _metric_suite,
    "nogo": _nogo_suite,
    "resolution": _resolution_suite,
}


def _run_suite(name: str, subject, config: RunConfig) -> tuple[dict[str, Any], float]:
    start = time.perf_counter()
    try:
        result = SUITE_RUNNERS[name](subject, config)
    except Exception as e:
        logger.error(f"Suite '{name}' failed: {e}")
        result = {"status": "error", "message": f"{type(e).__name__}: {e}"}
    return result, time.perf_counter() - start


def _consistency_checks(results: dict[str, dict[str, Any]], config: RunConfig) -> list[str]:
    needed = ("biorthogonality", "gram", "resolution")
    if any(results.get(s, {}).get("status", "error") == "error" for s in needed):
        return []
    resolution = results["resolution"]
    if resolution.get("expected") == "non_resolution" or resolution["status"] == "inconclusive":
        return []
    verdict = RieszVerdict(results["gram"]["riesz_verdict"])
    consistent = resolution_consistency(
        verdict, results["biorthogonality"]["maxdev"], resolution["deviation"], config.tolerances
    )
    if consistent:
        return []
    return [
        f"{config.model}: riesz_verdict BOUNDED with biorthogonal families but resolution deviation "
        f"{resolution['deviation']:.3e} exceeds {config.tolerances.resolution:.1e}"
    ]


def run(config: RunConfig) -> RunReport:
    """Run every configured suite against one model.

    Suites run in a thread pool capped by PBLAB_THREADS; the report lists
    them by name, so the result does not depend on completion order.

    Args:
        config: A validated run configuration.

    Returns:
        RunReport whose JSON form is identical for identical configurations.
    """
    logger.info(f"Starting run: model={config.model}, suites={list(config.suites)}")
    inconsistency_logger = setup_inconsistency_logger()

    tol = config.tolerances
    outcomes: dict[str, tuple[dict[str, Any], float]] = {}
    with numeric_limits(
        moment_order=tol.moment_cap,
        pn_degree=tol.pn_cap,
        coeff_cap=tol.coeff_cap,
        integral_rtol=tol.integral_rtol,
    ):
        subject = build_system(config) if config.suites else None
        with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
            futures = {
                name: pool.submit(contextvars.copy_context().run, _run_suite, name, subject, config)
                for name in config.suites
            }
            for name in sorted(futures):
                outcomes[name] = futures[name].result()

    results = {name: normalize(outcomes[name][0]) for name in sorted(outcomes)}
    timings = {name: outcomes[name][1] for name in sorted(outcomes)}
    inconsistencies = _consistency_checks(results, config) if config.suites else []
    for message in inconsistencies:
        inconsistency_logger.info(message)
        logger.error(f"INCONSISTENT: {message}")

    report = RunReport(
        config=normalize(config.echo()),
        results=results,
        versions=versions(),
        inconsistencies=inconsistencies,
        timings=timings if config.timings else None,
    )
    counts = report.status_counts()
    logger.info(
        f"Run complete: {len(results)} suites, "
        + ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        + f", total {sum(timings.values()):.2f}s"
    )
    return report


def exit_status(report: RunReport) -> int:
    return 0 if report.passed else 1


# --- command line --------------------------------------------------------------------------------


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(Path(args.config))
    output_path = Path(args.output) if args.output else config.output_path
    fmt = args.format or config.output_format
    report = run(config)
    write_report(report, output_path, fmt)
    return exit_status(report)


def _cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(Path(args.config))
    print(f"{args.config}: valid {config.model} configuration")
    print(f"  params: {config.echo()['params']}")
    print(f"  dim={config.dim} nmax={config.nmax} suites={', '.join(config.suites) or '(none)'}")
    return 0


def _cmd_list_models(args: argparse.Namespace) -> int:
    for name in sorted(MODELS):
        entry = MODELS[name]
        print(f"{name}: {entry.description}")
        params = ", ".join(
            f"{key}={default!r}" if default is not None else key for key, (_, default) in entry.params.items()
        )
        print(f"  params: {params}")
        print(f"  suites: {', '.join(entry.suites)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Pseudo-boson diagnostics and reports")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="Run the configured suites and write a report")
    run_parser.add_argument("config", help="Path to a JSON run configuration")
    run_parser.add_argument("--output", default=None, help="Report path (overrides the configuration)")
    run_parser.add_argument("--format", choices=["json", "csv"], default=None, help="Report format")
    run_parser.set_defaults(handler=_cmd_run)

    validate_parser = sub.add_parser("validate", help="Check a configuration without running it")
    validate_parser.add_argument("config", help="Path to a JSON run configuration")
    validate_parser.set_defaults(handler=_cmd_validate)

    list_parser = sub.add_parser("list-models", help="List models, their parameters and suites")
    list_parser.set_defaults(handler=_cmd_list_models)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    load_environment()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    try:
        return args.handler(args)
    except ConfigError as e:
        location = f" (line {e.line}, column {e.column})" if e.line is not None else ""
        field = f" [{e.field}]" if e.field else ""
        logger.error(f"Invalid configuration{field}{location}: {e}")
        return 2
    except PseudoBosonError as e:
        logger.error(f"Run aborted: {e}")
        return 2
    except OSError as e:
        logger.error(f"File error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
