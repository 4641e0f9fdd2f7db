"""Bi-coherent states and the resolution of the identity over the complex plane."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import gammaln
from scipy.stats import poisson

from src.diagnostics import envelope_vectors, normalized_duals
from src.errors import DomainError
from src.fockrep import FockVec, basis_vector, coherent_vector, displacement, matrix_exp, quadratures
from src.gaussmath import GaussPoly, Modulated, gauss_laguerre_rule, hermite_function
from src.systems import BiorthSystem, Member, Rep, apply_op, inner, member_norm, subtract

logger = logging.getLogger(__name__)

TAIL_CAP = 1e-10
PROBE_BASIS = 8
PROBE_RANDOM = 8


@dataclass(frozen=True, eq=False)
class CoherentPair:
    z: complex
    phi_z: Member
    psi_z: Member
    tail_mass: float
    reliable: bool


@dataclass(frozen=True, eq=False)
class PlaneQuadrature:
    """Gauss–Laguerre in t = |z|² times uniform angles, restricted to |z| ≤ cutoff."""

    radial: int = 32
    angular: int = 64
    cutoff: float = 6.0

    def __post_init__(self):
        if self.radial < 8 or self.angular < 16:
            raise DomainError(
                f"PlaneQuadrature needs radial >= 8 and angular >= 16, got {self.radial}, {self.angular}"
            )
        if not self.cutoff > 0:
            raise DomainError("cutoff must be positive", field="cutoff")

    def nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Plane nodes z, t = |z|² and base weights (π/M)·w_j.

        Σ base·e^{t}·F(z) approximates ∫_ℂ F(z) d²z for F with Gaussian decay.
        """
        rule = gauss_laguerre_rule(self.radial)
        keep = rule.nodes <= self.cutoff**2
        t, w = rule.nodes[keep], rule.weights[keep]
        angles = 2 * np.pi * np.arange(self.angular) / self.angular
        z = (np.sqrt(t)[:, None] * np.exp(1j * angles)[None, :]).ravel()
        tt = np.repeat(t, self.angular)
        base = np.repeat(np.pi / self.angular * w, self.angular)
        return z, tt, base


# --- bi-coherent states ---------------------------------------------------------------


def _series_weights(z: complex, count: int) -> np.ndarray:
    n = np.arange(count)
    if z == 0:
        return (n == 0).astype(complex)
    log_mag = n * np.log(abs(z)) - 0.5 * gammaln(n + 1) - abs(z) ** 2 / 2
    return np.exp(log_mag + 1j * n * np.angle(z))


def combine(members: Sequence[Member], weights: Sequence[complex]) -> Member:
    """Σ w_n f_n for members sharing one representation (and exponent, in coordinates)."""
    first = members[0]
    if isinstance(first, FockVec):
        return FockVec(sum(w * f.coords for f, w in zip(members, weights)))
    if isinstance(first, Modulated):
        base = sum((f.base.poly * complex(w) for f, w in zip(members, weights)), Polynomial([0.0]))
        return first.with_base(first.base.with_poly(base))
    if isinstance(first, GaussPoly):
        for f in members[1:]:
            if not f.same_exponent(first):
                raise DomainError("Series members must share their Gaussian exponent")
        poly = sum((f.poly * complex(w) for f, w in zip(members, weights)), Polynomial([0.0]))
        return first.with_poly(poly)
    raise DomainError(f"Cannot combine members of type {type(first).__name__}")


def bicoherent(system: BiorthSystem, z: complex, tail_cap: float = TAIL_CAP) -> CoherentPair:
    """φ(z) = e^{−|z|²/2} Σ zⁿ/√n! φ_n and the same series over Ψ_n.

    The tail mass is the larger of the dropped series weight and, in Fock
    space, the share of φ(z) beyond the protected block.
    """
    if system.modes != 1:
        raise DomainError("bicoherent needs a one-mode system", field="system")
    z = complex(z)
    count = len(system)
    weights = _series_weights(z, count)
    phi_z = combine(system.phi, weights)
    psi_z = combine(system.psi, weights)

    tail = float(poisson.sf(count - 1, abs(z) ** 2)) if z != 0 else 0.0
    if system.rep == Rep.FOCK:
        protect = system.A.protect
        total = phi_z.norm() ** 2
        tail = max(tail, float(np.sum(np.abs(phi_z.coords[protect:]) ** 2)) / total)
    reliable = tail < tail_cap
    if not reliable:
        logger.warning(f"{system.name}: bi-coherent pair at z={z} is UNRELIABLE (tail mass {tail:.2e})")
    return CoherentPair(z, phi_z, psi_z, tail, reliable)


def displacement_orbit(system: BiorthSystem, z: complex) -> CoherentPair:
    """φ(z) = e^{zB − z̄A}φ₀ and Ψ(z) = e^{zA† − z̄B†}Ψ₀ built from the operator exponentials."""
    if system.rep != Rep.FOCK:
        raise DomainError("displacement_orbit needs a Fock representation", field="rep")
    z = complex(z)
    A, B = system.A, system.B
    phi_z = displacement(z, A, B) @ system.phi[0]
    psi_z = displacement(z, B.dagger(), A.dagger()) @ system.psi[0]
    tail = float(np.sum(np.abs(phi_z.coords[A.protect :]) ** 2)) / phi_z.norm() ** 2
    return CoherentPair(z, phi_z, psi_z, tail, tail < TAIL_CAP)


def eigen_relation_residual(system: BiorthSystem, pair: CoherentPair) -> tuple[float, float]:
    """(‖Aφ(z) − zφ(z)‖/‖φ(z)‖, ‖B†Ψ(z) − zΨ(z)‖/‖Ψ(z)‖), on the protected block in Fock space."""
    A, B = system.A, system.B
    dual = B.dagger() if system.rep == Rep.FOCK else B.adjoint()
    results = []
    for op, f in ((A, pair.phi_z), (dual, pair.psi_z)):
        image = apply_op(op, f)
        target = f.scale(pair.z)
        if system.rep == Rep.FOCK:
            results.append((image - target).norm(A.protect) / f.norm(A.protect))
        else:
            results.append(member_norm(subtract(image, target)) / member_norm(f))
    return results[0], results[1]


def route_equivalence(system: BiorthSystem, z: complex) -> float:
    """Distance between the series and displacement constructions of φ(z) and Ψ(z)."""
    series = bicoherent(system, z)
    orbit = displacement_orbit(system, z)
    protect = system.A.protect
    return max(
        (series.phi_z - orbit.phi_z).norm(protect) / orbit.phi_z.norm(protect),
        (series.psi_z - orbit.psi_z).norm(protect) / orbit.psi_z.norm(protect),
    )


def coordinate_coherent(z: complex, shift: complex = 0.0) -> GaussPoly:
    """η(x; w) = π^{−1/4} exp(−x²/2 + √2 w x − Re(w)²) with w = z + shift."""
    w = complex(z) + complex(shift)
    return GaussPoly(Polynomial([np.pi**-0.25]), a=0.5, b=-np.sqrt(2) * w, c=w.real**2)


def heisenberg_check(z: complex, dim: int = 80) -> float:
    """ΔX·ΔP for the bosonic coherent state |z⟩, which saturates at 1/2."""
    v = coherent_vector(z, dim)
    X, P = quadratures(dim)
    spreads = []
    for op in (X, P):
        mean = v.inner(op @ v)
        second = v.inner(op @ (op @ v))
        spreads.append(np.sqrt(max((second - mean**2).real, 0.0)))
    return float(spreads[0] * spreads[1])


# --- resolution of the identity ----------------------------------------------------------


def probe_vectors(system: BiorthSystem, seed: int) -> list[Member]:
    """The first basis states plus seeded random vectors on the same leading coordinates."""
    randoms = envelope_vectors(PROBE_BASIS, PROBE_RANDOM, seed)
    if system.rep == Rep.FOCK:
        dim = system.fock_dim
        vectors = [basis_vector(k, dim) for k in range(PROBE_BASIS)]
        for coeffs in randoms:
            padded = np.zeros(dim, dtype=complex)
            padded[:PROBE_BASIS] = coeffs
            vectors.append(FockVec(padded))
        return vectors
    if system.rep == Rep.COORD1D:
        basis = [hermite_function(k) for k in range(PROBE_BASIS)]
        return basis + [combine(basis, coeffs) for coeffs in randoms]
    raise DomainError("Resolution checks are defined for one-mode systems", field="rep")


def _powers(z: np.ndarray, count: int) -> np.ndarray:
    """Matrix zⁿ/√n! for n < count, one row per node."""
    out = np.empty((len(z), count), dtype=complex)
    out[:, 0] = 1.0
    for n in range(1, count):
        out[:, n] = out[:, n - 1] * z / np.sqrt(n)
    return out


def _fock_coords(vectors: Sequence[FockVec]) -> np.ndarray:
    return np.array([v.coords for v in vectors])


def resolution_matrix(
    system: BiorthSystem, quad: PlaneQuadrature, left: Sequence[Member], right: Sequence[Member]
) -> np.ndarray:
    """T[i, j] = (1/π) ∫ ⟨f_i, φ(z)⟩⟨Ψ(z), g_j⟩ d²z over the quadrature nodes.

    Shifted models use the coordinate coherent states φ(z) = η(·; z+α) and
    Ψ(z) = η(·; z+β̄); every other model uses the series with Ψ_n rescaled to
    unit overlap with φ_n.
    """
    z, t, base = quad.nodes()
    weights = base / np.pi
    if "coordinate_shifts" in system.extras:
        alpha, beta = system.extras["coordinate_shifts"]
        u = z + alpha
        v = z + np.conj(beta)
        dim = system.fock_dim
        F = _fock_coords(left).conj()
        G = _fock_coords(right)
        a = F @ _powers(u, dim).T
        b = _powers(v, dim).conj() @ G.T
        exponent = t - abs(u) ** 2 / 2 - abs(v) ** 2 / 2 + 1j * (u.real * u.imag - v.real * v.imag)
        a = a * np.exp(exponent)[None, :]
    else:
        count = len(system)
        duals = normalized_duals(system)
        F = inner_matrix(left, system.phi)
        G = inner_matrix(duals, right)
        powers = _powers(z, count)
        a = F @ powers.T
        b = powers.conj() @ G
    return (a * weights[None, :]) @ b


def inner_matrix(left: Sequence[Member], right: Sequence[Member]) -> np.ndarray:
    return np.array([[inner(f, g) for g in right] for f in left])


def series_resolution(system: BiorthSystem, left: Sequence[Member], right: Sequence[Member]) -> np.ndarray:
    """Σ_n ⟨f_i, φ_n⟩⟨Ψ̃_n, g_j⟩ over the whole family, without quadrature."""
    F = inner_matrix(left, system.phi)
    G = inner_matrix(normalized_duals(system), right)
    return F @ G


def resolution_check(system: BiorthSystem, quad: PlaneQuadrature, f: Member, g: Member) -> complex:
    """T(f, g); compare with ⟨f, g⟩."""
    return complex(resolution_matrix(system, quad, [f], [g])[0, 0])


def resolution_deviation(system: BiorthSystem, quad: PlaneQuadrature, seed: int) -> tuple[float, np.ndarray]:
    """Largest |T(f, g) − ⟨f, g⟩| over the probe-vector set, with the full T matrix."""
    vectors = probe_vectors(system, seed)
    T = resolution_matrix(system, quad, vectors, vectors)
    exact = inner_matrix(vectors, vectors)
    deviation = float(np.max(np.abs(T - exact)))
    logger.info(f"{system.name}: resolution deviation {deviation:.2e} over {len(vectors)} test vectors")
    return deviation, T


def kernel_fit(system: BiorthSystem, quad: PlaneQuadrature, f: FockVec, g: FockVec) -> dict[str, complex | float]:
    """Compare T(f, g) for a shifted model with the two closed forms of its kernel.

    Candidate A multiplies by the constant e^{−(α_r−β_r)²/2}·e^{i√2(α_i+β_i)};
    candidate B by e^{−(α_r−β_r)²/2}·e^{i√2(α_i+β_i)x}, the position-dependent phase.
    """
    if "coordinate_shifts" not in system.extras:
        raise DomainError("kernel_fit needs a shifted model", field="system")
    alpha, beta = system.extras["coordinate_shifts"]
    damping = np.exp(-((alpha.real - beta.real) ** 2) / 2)
    k = np.sqrt(2) * (alpha.imag + beta.imag)
    value = resolution_check(system, quad, f, g)

    candidate_a = damping * np.exp(1j * k) * f.inner(g)
    X, _ = quadratures(system.fock_dim)
    candidate_b = damping * f.inner(matrix_exp(1j * k * X) @ g)
    return {
        "value": value,
        "candidate_a": complex(candidate_a),
        "candidate_b": complex(candidate_b),
        "error_a": float(abs(value - candidate_a)),
        "error_b": float(abs(value - candidate_b)),
    }
