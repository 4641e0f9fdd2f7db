"""Checks of the four structural assumptions on a biorthogonal system.

Biorthogonality of the two families, truncated completeness evidence, the
metric operators S_φ and S_Ψ, Riesz-bound trend analysis along a truncation
ladder and the intertwining relation S_Ψ N = N† S_Ψ.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.linalg import LinAlgError

from src.config import Tolerances
from src.damped import dho_feasibility
from src.errors import ConvergenceError, DomainError
from src.fockrep import FockOp, FockVec
from src.gaussmath import (
    GaussPoly,
    GaussPoly2D,
    hermite_coordinates,
    hermite_coordinates_2d,
    hermite_function,
    quad_inner_product,
)
from src.systems import (
    BiorthSystem,
    DHOParams,
    Member,
    Rep,
    apply_op,
    inner,
    member_norm,
    subtract,
)

logger = logging.getLogger(__name__)

COORD_COUNT = 48
COORD_COUNT_2D = 24
SYMBOL_WINDOWS = (5.0, 10.0, 20.0)
PROJECTION_VECTORS = 16
ENVELOPE_WIDTH = 3.0
MIN_LADDER_POINTS = 3


class RieszVerdict(str, Enum):
    BOUNDED = "BOUNDED"
    UNBOUNDED_TREND = "UNBOUNDED_TREND"
    INCONCLUSIVE = "INCONCLUSIVE"


class Status(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    VIOLATED = "VIOLATED"
    INCONCLUSIVE = "INCONCLUSIVE"
    SKIPPED = "SKIPPED"


@dataclass(frozen=True)
class DiagnosticsReport:
    overlap_max_offdiag: float | None
    overlap_diag_dev: float | None
    ladder: tuple[int, ...]
    gram_min_eig: tuple[float, ...]
    gram_max_eig: tuple[float, ...]
    riesz_verdict: RieszVerdict
    gram_verdict: RieszVerdict
    symbol_verdict: RieszVerdict | None
    metric_roundtrip_defect: float | None
    intertwine_residual: float | None
    vacuum_residuals: dict[str, float] = field(default_factory=dict)
    eigen_residual: float | None = None
    ladder_residual: float | None = None
    projection_defects: tuple[float, ...] = ()
    assumptions: dict[str, Status] = field(default_factory=dict)
    notes: tuple[str, ...] = ()


# --- coordinates ---------------------------------------------------------------------


def coordinates(member: Member, count: int | None = None) -> np.ndarray:
    """Coordinates in the number basis (Fock) or in Hermite functions (coordinate reps)."""
    if isinstance(member, FockVec):
        return np.asarray(member.coords)
    if isinstance(member, GaussPoly2D):
        return hermite_coordinates_2d(member, count or COORD_COUNT_2D).ravel()
    if isinstance(member, GaussPoly):
        return hermite_coordinates(member, count or COORD_COUNT)
    return np.array([quad_inner_product(hermite_function(j), member) for j in range(count or COORD_COUNT)])


def coordinate_matrix(family: Sequence[Member], count: int | None = None) -> np.ndarray:
    """Columns are the coordinates of the family members."""
    return np.column_stack([coordinates(f, count) for f in family])


def ladder_levels(system: BiorthSystem) -> tuple[int, ...]:
    """Truncation levels {L/4, L/2, L} with L one past the largest mode quantum."""
    top = max(max(occ) for occ in system.occupations) + 1
    return tuple(sorted({max(top // 4, 1), max(top // 2, 1), top}))


def ladder_indices(system: BiorthSystem, level: int) -> list[int]:
    """Family members whose mode quanta all lie below ``level``."""
    return [i for i, occ in enumerate(system.occupations) if max(occ) < level]


# --- biorthogonality -------------------------------------------------------------------


def overlap_matrix(system: BiorthSystem, nmax: int | None = None, swap: bool = False) -> np.ndarray:
    """G[n, m] = ⟨Ψ_n, φ_m⟩, or ⟨φ_n, Ψ_m⟩ with ``swap``."""
    size = len(system) if nmax is None else nmax
    if size > len(system):
        raise DomainError(f"nmax={size} exceeds family length {len(system)}", field="nmax")
    left, right = (system.phi, system.psi) if swap else (system.psi, system.phi)
    if system.rep == Rep.FOCK:
        L = coordinate_matrix(left[:size])
        R = coordinate_matrix(right[:size])
        return L.conj().T @ R
    G = np.empty((size, size), dtype=complex)
    for n in range(size):
        for m in range(size):
            G[n, m] = inner(left[n], right[m])
    return G


def reference_matrix(system: BiorthSystem, size: int) -> np.ndarray:
    return np.array([[complex(system.reference_overlap(n, m)) for m in range(size)] for n in range(size)])


def check_biorthogonality(system: BiorthSystem, nmax: int | None = None) -> tuple[np.ndarray, float]:
    """Overlap matrix and its largest deviation from the model's closed form."""
    G = overlap_matrix(system, nmax)
    maxdev = float(np.max(np.abs(G - reference_matrix(system, G.shape[0]))))
    logger.info(f"{system.name}: biorthogonality max deviation {maxdev:.2e} over {G.shape[0]} members")
    return G, maxdev


def swap_symmetry_defect(system: BiorthSystem, nmax: int | None = None) -> float:
    """max |G[n, m] − conj(G′[m, n])| where G′ swaps the roles of the families."""
    G = overlap_matrix(system, nmax)
    G_swapped = overlap_matrix(system, nmax, swap=True)
    return float(np.max(np.abs(G - G_swapped.conj().T)))


# --- Gram spectra and Riesz trends -------------------------------------------------------


def gram_matrix(family: Sequence[Member]) -> np.ndarray:
    if all(isinstance(f, FockVec) for f in family):
        C = coordinate_matrix(family)
        return C.conj().T @ C
    size = len(family)
    G = np.empty((size, size), dtype=complex)
    for n in range(size):
        for m in range(n, size):
            G[n, m] = inner(family[n], family[m])
            G[m, n] = np.conj(G[n, m])
    return G


def gram_spectrum(family: Sequence[Member], ladder: Sequence[int | Sequence[int]]) -> list[tuple[float, float]]:
    """Extreme eigenvalues of the Gram matrix for each truncation of the ladder.

    A ladder entry is either a prefix length or an explicit list of member indices.

    Raises:
        ConvergenceError: the Hermitian eigensolve failed.
    """
    G = gram_matrix(family)
    spectrum = []
    for point in ladder:
        idx = list(range(point)) if isinstance(point, (int, np.integer)) else list(point)
        block = G[np.ix_(idx, idx)]
        try:
            eigs = scipy.linalg.eigvalsh(block)
        except LinAlgError as e:
            raise ConvergenceError(f"Gram eigensolve failed at size {len(idx)}: {e}") from e
        spectrum.append((float(eigs[0]), float(eigs[-1])))
    return spectrum


def riesz_verdict(
    min_seq: Sequence[float], max_seq: Sequence[float], tolerances: Tolerances = Tolerances()
) -> RieszVerdict:
    """Classify the condition-number trend of a truncation ladder.

    BOUNDED when the last step changes the condition number by at most the
    bounded ratio and every smallest eigenvalue stays above the floor;
    UNBOUNDED_TREND when every step grows it by more than the unbounded ratio.
    Fewer than three ladder points carry no trend and give INCONCLUSIVE.
    """
    if len(min_seq) != len(max_seq):
        raise DomainError("riesz_verdict needs aligned min and max sequences")
    if len(min_seq) < MIN_LADDER_POINTS:
        return RieszVerdict.INCONCLUSIVE
    mins = np.asarray(min_seq, dtype=float)
    maxs = np.asarray(max_seq, dtype=float)
    with np.errstate(divide="ignore"):
        cond = np.where(mins > 0, maxs / np.where(mins > 0, mins, 1.0), np.inf)
    ratios = cond[1:] / cond[:-1]
    if np.all(mins > tolerances.min_eig_floor) and ratios[-1] <= tolerances.bounded_ratio:
        return RieszVerdict.BOUNDED
    if np.all(ratios > tolerances.unbounded_ratio):
        return RieszVerdict.UNBOUNDED_TREND
    return RieszVerdict.INCONCLUSIVE


def metric_symbol_verdict(
    symbol: Callable, dims: int = 1, windows: Sequence[float] = SYMBOL_WINDOWS, tolerances: Tolerances = Tolerances()
) -> tuple[RieszVerdict, list[tuple[float, float]]]:
    """Trend of sup and inf of |symbol| over growing windows [−R, R]^dims."""
    extremes = []
    for R in windows:
        if dims == 1:
            values = np.abs(symbol(np.linspace(-R, R, 2001)))
        else:
            x, y = np.meshgrid(np.linspace(-R, R, 201), np.linspace(-R, R, 201), indexing="ij")
            values = np.abs(symbol(x, y))
        extremes.append((float(np.min(values)), float(np.max(values))))
    lows = np.array([e[0] for e in extremes])
    highs = np.array([e[1] for e in extremes])
    with np.errstate(divide="ignore", over="ignore"):
        sup_growth = highs[1:] / highs[:-1]
        inf_decay = np.where(lows[1:] > 0, lows[:-1] / np.where(lows[1:] > 0, lows[1:], 1.0), np.inf)
    if (
        lows[-1] > tolerances.min_eig_floor
        and sup_growth[-1] <= tolerances.bounded_ratio
        and inf_decay[-1] <= tolerances.bounded_ratio
    ):
        return RieszVerdict.BOUNDED, extremes
    if np.all(sup_growth > tolerances.unbounded_ratio) or np.all(inf_decay > tolerances.unbounded_ratio):
        return RieszVerdict.UNBOUNDED_TREND, extremes
    return RieszVerdict.INCONCLUSIVE, extremes


# --- metric operators ------------------------------------------------------------------


def normalized_duals(system: BiorthSystem) -> list[Member]:
    """Ψ̃_n = Ψ_n / conj(c_n) so that ⟨Ψ̃_n, φ_m⟩ = δ_{n,m}."""
    return [system.psi[n].scale(1 / np.conj(system.normalization(n))) for n in range(len(system))]


def metric_operators(system: BiorthSystem, nmax: int | None = None) -> tuple[np.ndarray, np.ndarray, float]:
    """Truncated S_φ = Σ|φ_n⟩⟨φ_n| and S_Ψ = Σ|Ψ̃_n⟩⟨Ψ̃_n| with their round-trip defect.

    The round trip is the largest entry of S_φ S_Ψ − I on the leading block
    of half the truncation size.
    """
    size = len(system) if nmax is None else nmax
    if size > len(system):
        raise DomainError(f"nmax={size} exceeds family length {len(system)}", field="nmax")
    Phi = coordinate_matrix(system.phi[:size])
    Psi = coordinate_matrix(normalized_duals(system)[:size])
    S_phi = Phi @ Phi.conj().T
    S_psi = Psi @ Psi.conj().T
    block = max(size // 2, 1)
    product = (S_phi @ S_psi)[:block, :block]
    roundtrip = float(np.max(np.abs(product - np.eye(block))))
    logger.info(f"{system.name}: metric round-trip defect {roundtrip:.2e} on a {block}x{block} block")
    return S_phi, S_psi, roundtrip


def multiplier_metric_defect(system: BiorthSystem) -> float:
    """max ‖S_Ψ φ_n − Ψ̃_n‖/‖Ψ̃_n‖ for systems carrying an exact multiplication metric."""
    S_psi = system.extras["S_psi"]
    duals = normalized_duals(system)
    worst = 0.0
    for f, g in zip(system.phi, duals):
        worst = max(worst, member_norm(subtract(S_psi.apply(f), g)) / member_norm(g))
    return worst


def intertwining_residual(system: BiorthSystem, nmax: int | None = None) -> float:
    """Largest entry of S_Ψ N − N† S_Ψ on the leading block, N = B A."""
    if system.rep != Rep.FOCK:
        raise DomainError("intertwining_residual needs a Fock representation", field="rep")
    _, S_psi, _ = metric_operators(system, nmax)
    N = (system.B @ system.A).entries
    size = len(system) if nmax is None else nmax
    block = max(size // 2, 1)
    diff = S_psi @ N - N.conj().T @ S_psi
    return float(np.max(np.abs(diff[:block, :block])))


# --- residuals on the families -----------------------------------------------------------


def _size(system: BiorthSystem, f: Member) -> float:
    if isinstance(f, FockVec):
        return f.norm(system.A.protect)
    return member_norm(f)


def _distance(system: BiorthSystem, f: Member, g: Member) -> float:
    if isinstance(f, FockVec):
        return (f - g).norm(system.A.protect)
    return member_norm(subtract(f, g))


def _adjoint(op):
    return op.dagger() if isinstance(op, FockOp) else op.adjoint()


def vacuum_residuals(system: BiorthSystem) -> dict[str, float]:
    """‖A_j φ₀‖/‖φ₀‖ and ‖B_j† Ψ₀‖/‖Ψ₀‖, worst over the modes."""
    vac = system.index_of((0,) * system.modes)
    phi0, psi0 = system.phi[vac], system.psi[vac]
    out = {"phi_0": 0.0, "psi_0": 0.0}
    for A, B in zip(system.lowering, system.raising):
        out["phi_0"] = max(out["phi_0"], _size(system, apply_op(A, phi0)) / _size(system, phi0))
        out["psi_0"] = max(out["psi_0"], _size(system, apply_op(_adjoint(B), psi0)) / _size(system, psi0))
    return out


def eigen_residuals(system: BiorthSystem, max_quanta: int = 10) -> float:
    """max ‖N_j φ − n_j φ‖/‖φ‖ over modes j and members with quanta ≤ max_quanta."""
    worst = 0.0
    for i, occ in enumerate(system.occupations):
        if max(occ) > max_quanta:
            continue
        f = system.phi[i]
        for mode, (A, B) in enumerate(zip(system.lowering, system.raising)):
            Nf = apply_op(B, apply_op(A, f))
            worst = max(worst, _distance(system, Nf, f.scale(occ[mode])) / _size(system, f))
    return worst


def ladder_action_residuals(system: BiorthSystem) -> float:
    """Largest relative defect of B φ_n = √(n+1) φ_{n+1}, A φ_n = √n φ_{n−1} and the dual actions."""
    worst = 0.0
    for i, occ in enumerate(system.occupations):
        for mode, (A, B) in enumerate(zip(system.lowering, system.raising)):
            up = tuple(q + (1 if j == mode else 0) for j, q in enumerate(occ))
            down = tuple(q - (1 if j == mode else 0) for j, q in enumerate(occ))
            checks = []
            if up in system.occupations:
                k = system.index_of(up)
                checks.append((B, system.phi[i], system.phi[k], np.sqrt(occ[mode] + 1)))
                checks.append((_adjoint(A), system.psi[i], system.psi[k], np.sqrt(occ[mode] + 1)))
            if occ[mode] > 0:
                k = system.index_of(down)
                checks.append((A, system.phi[i], system.phi[k], np.sqrt(occ[mode])))
                checks.append((_adjoint(B), system.psi[i], system.psi[k], np.sqrt(occ[mode])))
            for op, f, target, factor in checks:
                expected = target.scale(factor)
                defect = _distance(system, apply_op(op, f), expected) / max(_size(system, expected), 1e-300)
                worst = max(worst, defect)
    return worst


# --- completeness evidence ----------------------------------------------------------------


def envelope_vectors(size: int, count: int, seed: int) -> np.ndarray:
    """``count`` normalized random vectors with a Gaussian envelope over ``size`` coordinates."""
    rng = np.random.default_rng(seed)
    k = np.arange(size)
    envelope = np.exp(-(k**2) / (2 * ENVELOPE_WIDTH**2))
    raw = (rng.standard_normal((count, size)) + 1j * rng.standard_normal((count, size))) * envelope
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def span_vectors(system: BiorthSystem, Phi: np.ndarray, count: int, seed: int) -> np.ndarray:
    """``count`` normalized random combinations of the top-level members.

    Weights carry a Gaussian envelope in the total quanta whose width grows
    with the top ladder level, so low levels see most of each vector.
    """
    top = ladder_levels(system)[-1]
    idx = ladder_indices(system, top)
    quanta = np.array([sum(system.occupations[i]) for i in idx], dtype=float)
    width = max(top / 4, 1.0)
    columns = Phi[:, idx] / np.linalg.norm(Phi[:, idx], axis=0)
    rng = np.random.default_rng(seed)
    weights = rng.standard_normal((count, len(idx))) + 1j * rng.standard_normal((count, len(idx)))
    raw = (weights * np.exp(-(quanta**2) / (2 * width**2))) @ columns.T
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def projection_defects(system: BiorthSystem, tolerances: Tolerances = Tolerances()) -> tuple[list[float], Status]:
    """Worst distance of the test vectors to span{φ_i} along the truncation ladder.

    One-mode systems use envelope vectors over the coordinate grid. Two-mode
    systems use vectors inside the span the top ladder level reaches.
    PASS when every ladder step lowers the defect by the configured fraction
    or the defect is already negligible.
    """
    Phi = coordinate_matrix(system.phi)
    if system.rep == Rep.COORD2D:
        vectors = span_vectors(system, Phi, PROJECTION_VECTORS, tolerances.seed)
    else:
        vectors = envelope_vectors(Phi.shape[0], PROJECTION_VECTORS, tolerances.seed)

    defects = []
    for level in ladder_levels(system):
        idx = ladder_indices(system, level)
        basis = Phi[:, idx]
        coef, *_ = np.linalg.lstsq(basis, vectors.T, rcond=None)
        residual = vectors.T - basis @ coef
        defects.append(float(np.max(np.linalg.norm(residual, axis=0) / np.linalg.norm(vectors.T, axis=0))))

    keep = 1 - tolerances.completeness_decrease
    ok = all(later <= keep * earlier or later < 1e-10 for earlier, later in zip(defects, defects[1:]))
    return defects, Status.PASS if ok else Status.FAIL


# --- summaries ---------------------------------------------------------------------------------


def _verdict_status(verdict: RieszVerdict) -> Status:
    return {
        RieszVerdict.BOUNDED: Status.PASS,
        RieszVerdict.UNBOUNDED_TREND: Status.FAIL,
        RieszVerdict.INCONCLUSIVE: Status.INCONCLUSIVE,
    }[verdict]


def _dho_summary(params: DHOParams) -> DiagnosticsReport:
    report = dho_feasibility(params)
    witness = (
        f"Re(beta*omega_plus/(2*Gamma)) = {report.c1_value:.6e} (needs > 0), "
        f"Re(delta/(alpha*omega_plus)) = {report.c2_value:.6e} (needs < 0)"
    )
    a1 = Status.PASS if report.feasible else Status.VIOLATED
    return DiagnosticsReport(
        overlap_max_offdiag=None,
        overlap_diag_dev=None,
        ladder=(),
        gram_min_eig=(),
        gram_max_eig=(),
        riesz_verdict=RieszVerdict.INCONCLUSIVE,
        gram_verdict=RieszVerdict.INCONCLUSIVE,
        symbol_verdict=None,
        metric_roundtrip_defect=None,
        intertwine_residual=None,
        vacuum_residuals=dict(report.vacuum_residuals),
        assumptions={"A1": a1, "A2": a1, "A3": Status.SKIPPED, "A4": Status.SKIPPED},
        notes=(witness, "the families cannot be built, so completeness and Riesz bounds are not defined")
        + report.notes,
    )


def assumption_summary(system: BiorthSystem | DHOParams, tolerances: Tolerances = Tolerances()) -> DiagnosticsReport:
    """Evidence for the four assumptions, bundled into one report.

    Args:
        system: A constructed system, or damped-oscillator parameters whose
            vacuum is known not to exist.
        tolerances: Thresholds for residuals and trend classification.

    Returns:
        DiagnosticsReport with per-assumption status and supporting numbers.
    """
    if isinstance(system, DHOParams):
        return _dho_summary(system)

    notes = list(system.notes)
    G, _ = check_biorthogonality(system)
    ref = reference_matrix(system, G.shape[0])
    diag_dev = float(np.max(np.abs(np.diag(G) - np.diag(ref))))
    offdiag = float(np.max(np.abs(G - np.diag(np.diag(G))))) if G.shape[0] > 1 else 0.0

    levels = ladder_levels(system)
    spectrum = gram_spectrum(system.phi, [ladder_indices(system, level) for level in levels])
    mins = tuple(s[0] for s in spectrum)
    maxs = tuple(s[1] for s in spectrum)
    gram_verdict = riesz_verdict(mins, maxs, tolerances)

    symbol_verdict = None
    verdict = gram_verdict
    if "metric_symbol" in system.extras:
        dims = 2 if system.rep == Rep.COORD2D else 1
        symbol_verdict, _ = metric_symbol_verdict(system.extras["metric_symbol"], dims, tolerances=tolerances)
        verdict = symbol_verdict
        if symbol_verdict != gram_verdict:
            notes.append(
                f"Gram trend {gram_verdict.value} differs from metric-symbol verdict {symbol_verdict.value}; "
                "the symbol is used"
            )

    if system.rep == Rep.COORD2D:
        roundtrip = multiplier_metric_defect(system)
    else:
        _, _, roundtrip = metric_operators(system)
    intertwine = intertwining_residual(system) if system.rep == Rep.FOCK else None

    defects, a3 = projection_defects(system, tolerances)
    finite_norms = all(np.isfinite(member_norm(f)) for f in system.phi)

    if system.has_operators:
        vac = vacuum_residuals(system)
        eig = eigen_residuals(system)
        ladder_res = ladder_action_residuals(system)
        a1 = Status.PASS if vac["phi_0"] <= tolerances.residual and finite_norms else Status.FAIL
        a2 = Status.PASS if vac["psi_0"] <= tolerances.residual else Status.FAIL
    else:
        vac, eig, ladder_res = {}, None, None
        a1 = a2 = Status.SKIPPED
        notes.append("ladder operators not available; vacuum and ladder checks skipped")

    report = DiagnosticsReport(
        overlap_max_offdiag=offdiag,
        overlap_diag_dev=diag_dev,
        ladder=levels,
        gram_min_eig=mins,
        gram_max_eig=maxs,
        riesz_verdict=verdict,
        gram_verdict=gram_verdict,
        symbol_verdict=symbol_verdict,
        metric_roundtrip_defect=roundtrip,
        intertwine_residual=intertwine,
        vacuum_residuals=vac,
        eigen_residual=eig,
        ladder_residual=ladder_res,
        projection_defects=tuple(defects),
        assumptions={"A1": a1, "A2": a2, "A3": a3, "A4": _verdict_status(verdict)},
        notes=tuple(notes),
    )
    logger.info(
        f"{system.name}: assumptions "
        + ", ".join(f"{k}={v.value}" for k, v in report.assumptions.items())
        + f", riesz={verdict.value}"
    )
    return report


def resolution_consistency(
    verdict: RieszVerdict, biorth_maxdev: float, resolution_dev: float, tolerances: Tolerances = Tolerances()
) -> bool:
    """False when a BOUNDED, biorthogonal system fails the resolution of the identity."""
    if RieszVerdict(verdict) != RieszVerdict.BOUNDED or biorth_maxdev >= tolerances.biorthogonality:
        return True
    return resolution_dev <= tolerances.resolution
