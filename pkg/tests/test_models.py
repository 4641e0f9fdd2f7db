"""Tests for the one-mode model constructors."""

import numpy as np
import pytest
from scipy.special import eval_laguerre

from src import models
from src.diagnostics import check_biorthogonality
from src.errors import DomainError
from src.fockrep import converged_eigpairs, ladder, matrix_exp, scalar_mul
from src.models import (
    extended_oscillator,
    riesz_mult_model,
    shifted_model,
    squeezed_closed_form,
    squeezed_vacuum,
    susy_model,
    swanson_model,
    swanson_norm_fit,
)
from src.systems import PhiSpec, Rep, RhoSpec, SusyParams, SwansonParams, member_norm


def test_placeholder():
    """Placeholder test to verify module imports."""
    assert models is not None


@pytest.mark.parametrize("alpha,beta", [(0.0, 0.0), (0.5, 0.0), (0.3 + 0.2j, 0.1 - 0.4j)])
def test_shifted_biorthogonality(alpha, beta):
    """⟨Ψ_n, φ_m⟩ = δ_nm·exp(αβ − (|α|² + |β|²)/2)."""
    system = shifted_model(alpha, beta, dim=80)
    _, maxdev = check_biorthogonality(system)
    assert maxdev < 1e-10


def test_shifted_default_family_length():
    """The family covers a third of the truncated space."""
    system = shifted_model(0.2, 0.0, dim=80)
    assert len(system) == 27
    assert system.A.protect == 70


def test_shifted_rejects_small_dim():
    """Truncations below 16 states are refused."""
    with pytest.raises(DomainError):
        shifted_model(0.0, 0.0, dim=12)


def test_shifted_nmax_must_leave_margin():
    """The family has to stay inside the protected block."""
    with pytest.raises(DomainError):
        shifted_model(0.0, 0.0, dim=40, nmax=35)


@pytest.mark.parametrize("gamma", [0.5, 0.3 - 0.2j])
def test_shifted_norm_growth(gamma):
    """‖φ_n‖² ≥ 1 + n|ᾱ − β|² for n ≤ 12 when φ₀ is normalized."""
    alpha, beta = gamma, 0.0
    system = shifted_model(alpha, beta, dim=96)
    diff = abs(np.conj(alpha) - beta) ** 2
    for n in range(13):
        assert system.phi[n].norm() ** 2 >= 1 + n * diff - 1e-12


def test_shifted_tail_warning_recorded():
    """A vacuum far from the origin leaves a note about truncation."""
    system = shifted_model(6.0, 0.0, dim=40, nmax=5)
    assert any("tail mass" in note for note in system.notes)


@pytest.mark.parametrize("beta", [1.0, np.sqrt(2), 2.0])
def test_extended_oscillator_overlaps(beta):
    """Overlap matrix equals e^{−2/β²}·I for indices ≤ 8."""
    system = extended_oscillator(beta, dim=96)
    _, maxdev = check_biorthogonality(system, nmax=9)
    assert maxdev < 1e-8
    assert abs(system.normalization(0) - np.exp(-2 / beta**2)) < 1e-12


@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_extended_oscillator_spectrum(beta):
    """Eigenvalues of H_β are β(k + γ_β) for k ≤ 5."""
    system = extended_oscillator(beta, dim=96)
    pairs = converged_eigpairs(system.extras["hamiltonian"], 6)
    expected = system.extras["reference_eigenvalues"][:6]
    assert np.allclose([p.value for p in pairs], expected, atol=1e-6)


def test_extended_intertwiner_maps_vacuum():
    """V_β^{−2} φ₀ is proportional to Ψ₀."""
    beta = 2.0
    system = extended_oscillator(beta, dim=96)
    a, adag = ladder(96)
    inverse_square = matrix_exp(scalar_mul(-2 / beta, a + adag))
    image = inverse_square @ system.phi[0]
    diff = image - system.psi[0]
    assert diff.norm(60) < 1e-8 * system.psi[0].norm(60)


def test_squeezed_vacuum_closed_form():
    """The recursion matches c_{2k} = (−i tanθ)^k √((2k)!)/(2^k k!) with zero odd coefficients."""
    theta = 0.3
    coeffs = squeezed_vacuum(theta, 40)
    for k in range(15):
        assert abs(coeffs[2 * k] - squeezed_closed_form(theta, k)) < 1e-12
        assert coeffs[2 * k + 1] == 0


@pytest.mark.parametrize("theta", [0.2, np.pi / 6])
def test_swanson_fock_spectrum(theta):
    """The lowest five levels of H_θ are ω_θ(n + 1/2)."""
    system = swanson_model(theta, dim=80)
    pairs = converged_eigpairs(system.extras["hamiltonian"], 5)
    omega = SwansonParams(theta).omega
    expected = [omega * (n + 0.5) for n in range(5)]
    assert np.allclose([p.value for p in pairs], expected, atol=1e-6)


def test_swanson_fock_biorthogonality():
    """The Fock families are biorthonormal."""
    system = swanson_model(0.25, dim=80)
    _, maxdev = check_biorthogonality(system)
    assert maxdev < 1e-9


def test_swanson_coordinate_biorthogonality():
    """The rotated Hermite families are biorthonormal."""
    system = swanson_model(0.3, nmax=10, rep=Rep.COORD1D)
    _, maxdev = check_biorthogonality(system)
    assert maxdev < 1e-9


def test_swanson_rejects_large_theta():
    """θ must stay below π/4."""
    with pytest.raises(DomainError):
        swanson_model(0.8)


def test_swanson_norm_ratio_follows_legendre():
    """‖φ_n‖²/‖φ₀‖² = P_n(1/cos 2θ) with an n-independent prefactor."""
    system = swanson_model(0.3, nmax=8, rep=Rep.COORD1D)
    fit = swanson_norm_fit(system)
    assert fit["ratio_max_rel_dev"] < 1e-6
    assert fit["prefactor_spread"] < 1e-6 * fit["fitted_prefactor"]


def test_swanson_norm_fit_needs_coordinates():
    """The fit is defined on the coordinate system only."""
    with pytest.raises(DomainError):
        swanson_norm_fit(swanson_model(0.3))


@pytest.mark.parametrize("alpha", [0.0, 0.5, 0.8j])
def test_susy_example1_biorthogonality(alpha):
    """⟨Ψ_n, φ_m⟩ = δ_nm √π e^{α²/4}."""
    system = susy_model(SusyParams(1, alpha), nmax=10)
    _, maxdev = check_biorthogonality(system)
    assert maxdev < 1e-9
    assert abs(system.normalization(0) - np.sqrt(np.pi) * np.exp(alpha**2 / 4)) < 1e-12


def test_susy_imaginary_norms_grow_like_laguerre():
    """For imaginary α, ‖φ_n‖² = √π L_n(−|α|²/2)."""
    alpha = 0.8j
    system = susy_model(SusyParams(1, alpha), nmax=8)
    for n, f in enumerate(system.phi):
        expected = np.sqrt(np.pi) * eval_laguerre(n, -abs(alpha) ** 2 / 2)
        assert abs(member_norm(f) ** 2 - expected) < 1e-9 * expected


def test_susy_example2_biorthogonality():
    """A bounded Φ keeps the families biorthogonal."""
    params = SusyParams(2, 0.5, phi=PhiSpec("sine", lam=0.3, mu=1.0))
    system = susy_model(params, nmax=6)
    _, maxdev = check_biorthogonality(system)
    assert maxdev < 1e-8


def test_riesz_mult_biorthonormal():
    """φ_n = ρ ê_n and Ψ_n = ê_n/ρ̄ are biorthonormal."""
    system = riesz_mult_model(RhoSpec("sine", eps=0.5), nmax=6)
    _, maxdev = check_biorthogonality(system)
    assert maxdev < 1e-8
    assert system.has_operators is False


def test_riesz_mult_rejects_vanishing_rho():
    """|ε| ≥ 1 lets ρ vanish."""
    with pytest.raises(DomainError):
        RhoSpec("sine", eps=1.0)
