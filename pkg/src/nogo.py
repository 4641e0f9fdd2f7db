"""Divergence certificates for deformed ladder operators with no admissible vacuum.

For A = a − α a†ⁿ, a vacuum Aφ₀ = 0 expanded as φ₀ = Σ c_k |k⟩ must satisfy
c_{k+1}√(k+1) = α √(k!/(k−n)!) c_{k−n} with c₁ = … = c_n = 0. The squared
coefficients eventually grow for any α ≠ 0, so the series has no
normalizable sum. Coefficients are tracked as log-magnitude plus phase.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from src.errors import CoefficientOverflowError, DomainError
from src.gaussmath import current_limits
from src.systems import NOGO_VARIANTS, NogoParams

logger = logging.getLogger(__name__)

MIN_TERMS = 10
LAW_RTOL = 1e-8
ONSET_SEARCH_LIMIT = 10**12


class Verdict(str, Enum):
    DIVERGES = "DIVERGES"
    CONVERGES = "CONVERGES"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True, eq=False)
class NogoSequence:
    """Would-be vacuum coefficients c_0..c_kmax of a ladder deformation of order n_deform."""

    alpha: complex
    n_deform: int
    log_magnitudes: np.ndarray
    phases: np.ndarray

    @property
    def coeffs(self) -> np.ndarray:
        mags = np.exp(self.log_magnitudes)
        return np.where(np.isfinite(self.log_magnitudes), mags * np.exp(1j * self.phases), 0.0)

    @property
    def stride(self) -> int:
        return self.n_deform + 1

    @property
    def log_terms(self) -> np.ndarray:
        """log t_j with t_j = |c_{(n+1)j}|²."""
        return 2 * self.log_magnitudes[:: self.stride]

    @property
    def partial_norms(self) -> np.ndarray:
        """Σ_{i≤j} t_i for each j."""
        return np.exp(np.logaddexp.accumulate(self.log_terms))


@dataclass(frozen=True)
class DivergenceCertificate:
    verdict: Verdict
    terms: int
    onset_index: int | None = None
    max_law_deviation: float = 0.0
    overflow_index: int | None = None


def _log_raise_element(k: int, n: int) -> float:
    """log of (a†ⁿ)[k, k−n] = √(k!/(k−n)!)."""
    return 0.5 * (gammaln(k + 1) - gammaln(k - n + 1))


def _log_lower_element(k: int) -> float:
    """log of a[k, k+1] = √(k+1)."""
    return 0.5 * np.log(k + 1)


def _log_ratio_law(log_abs_coef: float, n: int, k: int) -> float:
    """log(t_{j+1}/t_j) where k+1 is the coefficient index of t_{j+1}."""
    return 2 * (log_abs_coef + _log_raise_element(k, n) - _log_lower_element(k))


def deformation_sequence(coef: complex, n: int, kmax: int) -> NogoSequence:
    """Solve a·φ₀ = coef·a†ⁿ·φ₀ for the coefficients of φ₀ up to index kmax.

    Raises:
        DomainError: n < 2 or kmax outside [1, 200].
        CoefficientOverflowError: a coefficient magnitude passes the cap; the
            error carries the offending index.
    """
    if n < 2:
        raise DomainError(f"deformation order must be >= 2, got {n}", field="n")
    if not 1 <= kmax <= 200:
        raise DomainError(f"kmax={kmax} outside [1, 200]", field="kmax")
    coef = complex(coef)
    log_mag = np.full(kmax + 1, -np.inf)
    phase = np.zeros(kmax + 1)
    log_mag[0] = 0.0
    if coef != 0:
        log_coef, arg_coef = np.log(abs(coef)), np.angle(coef)
        cap = current_limits().coeff_cap
        log_cap = np.log(cap)
        for k in range(n, kmax):
            if not np.isfinite(log_mag[k - n]):
                continue
            value = log_coef + log_mag[k - n] + _log_raise_element(k, n) - _log_lower_element(k)
            if value > log_cap:
                raise CoefficientOverflowError(f"|c_{k + 1}| exceeds {cap:.0e}", index=k + 1)
            log_mag[k + 1] = value
            phase[k + 1] = phase[k - n] + arg_coef
    return NogoSequence(coef, n, log_mag, phase)


def nogo_sequence(alpha: complex, kmax: int, n: int = 2) -> NogoSequence:
    """Vacuum coefficients for A = a − α a†ⁿ."""
    return deformation_sequence(alpha, n, kmax)


def closed_pattern(alpha: complex, k: int) -> complex:
    """c_{3k} = α^k √((3k)!)/(3^k k!) for the quadratic deformation."""
    log_mag = 0.5 * gammaln(3 * k + 1) - k * np.log(3.0) - gammaln(k + 1)
    return complex(alpha) ** k * np.exp(log_mag)


def _onset(log_abs_coef: float, n: int, start: int) -> int | None:
    """First j ≥ start whose ratio-law step t_{j+1}/t_j exceeds 1."""

    def grows(j: int) -> bool:
        return _log_ratio_law(log_abs_coef, n, (n + 1) * (j + 1) - 1) > 0

    if grows(start):
        return start
    hi = max(start, 1)
    while not grows(hi):
        hi *= 2
        if hi > ONSET_SEARCH_LIMIT:
            return None
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if grows(mid):
            hi = mid
        else:
            lo = mid
    return hi


def divergence_certificate(seq: NogoSequence, overflow_index: int | None = None) -> DivergenceCertificate:
    """Classify the would-be vacuum series as convergent, divergent or undecided.

    The observed term ratios are compared with the ratio law of the
    recursion; once they agree, the law is extrapolated to find the first
    step from which terms grow. The law is increasing in j, so growth
    persists from that step on.
    """
    if seq.alpha == 0:
        return DivergenceCertificate(Verdict.CONVERGES, terms=1)
    log_terms = seq.log_terms[np.isfinite(seq.log_terms)]
    if overflow_index is not None:
        logger.info(f"Coefficient overflow at index {overflow_index}: series diverges")
        return DivergenceCertificate(Verdict.DIVERGES, len(log_terms), overflow_index=overflow_index)
    if len(log_terms) < MIN_TERMS:
        return DivergenceCertificate(Verdict.INCONCLUSIVE, len(log_terms))

    log_abs = np.log(abs(seq.alpha))
    n = seq.n_deform
    observed = np.diff(log_terms)
    law = np.array([_log_ratio_law(log_abs, n, (n + 1) * (j + 1) - 1) for j in range(len(observed))])
    deviation = float(np.max(np.abs(observed - law) / np.maximum(1.0, np.abs(law))))
    if deviation > LAW_RTOL:
        logger.warning(f"Term ratios deviate from the recursion law by {deviation:.2e}")
        return DivergenceCertificate(Verdict.INCONCLUSIVE, len(log_terms), max_law_deviation=deviation)

    onset = _onset(log_abs, n, 0)
    if onset is None:
        return DivergenceCertificate(Verdict.INCONCLUSIVE, len(log_terms), max_law_deviation=deviation)
    return DivergenceCertificate(
        Verdict.DIVERGES, len(log_terms), onset_index=(n + 1) * (onset + 1), max_law_deviation=deviation
    )


def _certify(coef: complex, n: int, kmax: int) -> tuple[NogoSequence, DivergenceCertificate]:
    try:
        seq = deformation_sequence(coef, n, kmax)
        return seq, divergence_certificate(seq)
    except CoefficientOverflowError as e:
        seq = deformation_sequence(coef, n, e.index - 1)
        return seq, divergence_certificate(seq, overflow_index=e.index)


def variant_check(params: NogoParams) -> tuple[NogoSequence, DivergenceCertificate]:
    """Divergence verdict for the vacuum a deformed pair would need.

    A = a − α a†ⁿ with B = a† − β: the vacuum of A, which β does not touch.
    A = a − α with B = a† − β aⁿ: the vacuum Ψ₀ of B† = a − β̄ a†ⁿ.
    """
    if params.variant == NOGO_VARIANTS[0]:
        coef = params.alpha
    else:
        coef = np.conj(complex(params.beta))
    seq, cert = _certify(coef, params.n, params.kmax)
    logger.info(f"No-go variant {params.variant} (n={params.n}, coef={complex(coef)}): {cert.verdict.value}")
    return seq, cert
