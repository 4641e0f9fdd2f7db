"""Feasibility of the damped-oscillator pseudo-bosons.

The damped oscillator admits ladder operators a±, b± with [a±, b±] = 1, but
the would-be vacuum φ₀₀ ∝ exp(−p x² + q y²) is square integrable only if two
sign conditions hold together, and they never do. This module evaluates the
conditions for given parameters, samples admissible parameter sets and scans
the weighted-space variant over a grid of weights.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from src.errors import DomainError
from src.systems import DHOParams

logger = logging.getLogger(__name__)

RATIO_TOL = 1e-9
SCAN_POINTS = 64
SCAN_RANGE = (-3.0, 1.0)
ADMISSIBLE_MIN_SIN = 1e-3


@dataclass(frozen=True)
class WeightedScan:
    """Search for weights c₁, c₂ > 0 making both φ₀₀ and Ψ₀₀ live in the weighted space."""

    grid_size: int
    feasible_points: int
    x_prime: float
    y: float
    sign_product: float

    @property
    def compatible(self) -> bool:
        return self.feasible_points > 0


@dataclass(frozen=True)
class FeasibilityReport:
    regime: str
    Omega: float
    omega_plus: complex
    omega_minus: complex
    alpha: complex
    beta: complex
    c1_value: float
    c2_value: float
    c1: bool
    c2: bool
    ratio_defect: float
    vacuum_residuals: dict[str, float]
    vacuum_energy: complex
    weighted: WeightedScan
    notes: tuple[str, ...] = field(default=())

    @property
    def conjunction(self) -> bool:
        return self.c1 and self.c2

    @property
    def ratio_satisfied(self) -> bool:
        return self.ratio_defect < RATIO_TOL

    @property
    def feasible(self) -> bool:
        """True only if φ₀₀ is annihilated by both lowering operators and normalizable."""
        return self.conjunction and self.ratio_satisfied


def frequencies(m: float, k: float, gamma: float) -> tuple[float, complex, complex]:
    """Ω = √((k − γ²/4m)/m) and ω± = Ω ± iγ/(2m)."""
    if not m > 0:
        raise DomainError("m must be positive", field="m")
    radicand = (k - gamma**2 / (4 * m)) / m
    if radicand < 0:
        raise DomainError("k must be at least gamma^2/(4m) so that Omega is real", field="k")
    Omega = float(np.sqrt(radicand))
    return Omega, complex(Omega, gamma / (2 * m)), complex(Omega, -gamma / (2 * m))


def _coefficients(Gamma: complex, delta: complex) -> tuple[complex, complex]:
    D = Gamma * np.conj(delta) - delta * np.conj(Gamma)
    return np.conj(Gamma) / D, np.conj(delta) / D


def _vacuum_residuals(params: DHOParams, omega_p: complex, omega_m: complex, alpha, beta) -> dict[str, float]:
    """Coefficients of x and y left after applying a± to exp(−p x² + q y²)."""
    G, d = complex(params.Gamma), complex(params.delta)
    p = beta * omega_p / (2 * G)
    q = d / (2 * alpha * omega_p)
    ops = {
        "a_plus": (omega_p, beta, 1j * d / omega_p, G / omega_p, -1j * alpha),
        "a_minus": (omega_m, np.conj(beta), 1j * np.conj(d) / omega_m, np.conj(G) / omega_m, -1j * np.conj(alpha)),
    }
    residuals = {}
    for name, (omega, xc, yc, dxc, dyc) in ops.items():
        pref = np.sqrt(omega / 2)
        rx = pref * (xc - 2 * p * dxc)
        ry = pref * (yc + 2 * q * dyc)
        residuals[name] = float(max(abs(rx), abs(ry)))
    return residuals


def weighted_space_scan(x_prime: float, y: float, points: int = SCAN_POINTS) -> WeightedScan:
    """Count grid weights with c₁ + X′ > 0, c₂ − Y > 0, X′ − c₁ > 0 and c₂ + Y < 0.

    X′ = Re(βω₊/Γ) and Y = Re(δ/(αω₊)). The first pair keeps φ₀₀ in the
    weighted space, the second keeps Ψ₀₀ there.
    """
    c = np.logspace(*SCAN_RANGE, points)
    c1, c2 = np.meshgrid(c, c, indexing="ij")
    phi_ok = (c1 + x_prime > 0) & (c2 - y > 0)
    psi_ok = (x_prime - c1 > 0) & (c2 + y < 0)
    return WeightedScan(
        grid_size=points * points,
        feasible_points=int(np.count_nonzero(phi_ok & psi_ok)),
        x_prime=float(x_prime),
        y=float(y),
        sign_product=float(x_prime * y),
    )


def dho_feasibility(params: DHOParams) -> FeasibilityReport:
    """Evaluate the normalizability conditions of the damped-oscillator vacuum.

    Args:
        params: Mass, spring constant, damping and the two complex constants Γ, δ.

    Returns:
        FeasibilityReport with both sign conditions, the ratio-constraint
        defect, the vacuum residuals and the weighted-space scan.
    """
    Omega, omega_p, omega_m = frequencies(params.m, params.k, params.gamma)
    G, d = complex(params.Gamma), complex(params.delta)
    alpha, beta = _coefficients(G, d)

    x_value = (beta * omega_p / (2 * G)).real
    y_value = (d / (alpha * omega_p)).real
    ratio_defect = abs(omega_p / omega_m + (d / np.conj(d)) * (G / np.conj(G)))

    notes = []
    regime = "damped"
    if params.gamma == 0:
        regime = "undamped"
        notes.append("gamma = 0: omega_plus = omega_minus = Omega, the pseudo-bosons reduce to bosons")

    report = FeasibilityReport(
        regime=regime,
        Omega=Omega,
        omega_plus=omega_p,
        omega_minus=omega_m,
        alpha=complex(alpha),
        beta=complex(beta),
        c1_value=float(x_value),
        c2_value=float(y_value),
        c1=bool(x_value > 0),
        c2=bool(y_value < 0),
        ratio_defect=float(ratio_defect),
        vacuum_residuals=_vacuum_residuals(params, omega_p, omega_m, alpha, beta),
        vacuum_energy=(omega_p + omega_m) / 2,
        weighted=weighted_space_scan(2 * x_value, y_value),
        notes=tuple(notes),
    )
    logger.info(
        f"DHO feasibility: C1={report.c1}, C2={report.c2}, ratio_defect={report.ratio_defect:.2e}, "
        f"weighted feasible points={report.weighted.feasible_points}"
    )
    return report


def sample_admissible(count: int, seed: int) -> list[DHOParams]:
    """Draw damped-oscillator parameters that honor ω₊/ω₋ = −(δ/δ̄)(Γ/Γ̄).

    The phase of δ is fixed by the constraint up to a multiple of π; draws
    with Γδ̄ too close to real are rejected.
    """
    rng = np.random.default_rng(seed)
    samples = []
    while len(samples) < count:
        m = rng.uniform(0.5, 2.0)
        gamma = rng.uniform(0.1, 1.5)
        k = gamma**2 / (4 * m) + rng.uniform(0.1, 3.0)
        _, omega_p, _ = frequencies(m, k, gamma)
        arg_gamma = rng.uniform(0.0, 2 * np.pi)
        arg_delta = np.angle(omega_p) - arg_gamma + np.pi / 2 + np.pi * rng.integers(0, 2)
        Gamma = rng.uniform(0.5, 2.0) * np.exp(1j * arg_gamma)
        delta = rng.uniform(0.5, 2.0) * np.exp(1j * arg_delta)
        if abs((Gamma * np.conj(delta)).imag) < ADMISSIBLE_MIN_SIN * abs(Gamma) * abs(delta):
            continue
        samples.append(DHOParams(m=m, k=k, gamma=gamma, Gamma=complex(Gamma), delta=complex(delta)))
    return samples
