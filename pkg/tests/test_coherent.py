"""Tests for bi-coherent states and the plane resolution of the identity."""

import numpy as np
import pytest
from scipy.special import gammaln

from src import coherent
from src.coherent import (
    PlaneQuadrature,
    bicoherent,
    coordinate_coherent,
    displacement_orbit,
    eigen_relation_residual,
    heisenberg_check,
    kernel_fit,
    probe_vectors,
    resolution_check,
    resolution_deviation,
    route_equivalence,
)
from src.errors import DomainError
from src.fockrep import basis_vector
from src.landau import gll_model
from src.models import shifted_model, susy_model, swanson_model
from src.systems import DiffOp1D, SusyParams, member_norm, subtract


def test_placeholder():
    """Placeholder test to verify module imports."""
    assert coherent is not None


@pytest.fixture(scope="module")
def bosonic():
    return shifted_model(0.0, 0.0, dim=40)


def test_origin_gives_vacuum(bosonic):
    """φ(0) = φ₀ exactly."""
    pair = bicoherent(bosonic, 0.0)
    assert np.allclose(pair.phi_z.coords, basis_vector(0, 40).coords)
    assert pair.tail_mass == 0.0
    assert pair.reliable


def test_bosonic_coefficients(bosonic):
    """⟨n|z⟩ = e^{−|z|²/2} zⁿ/√n! for the standard pair."""
    z = 0.5
    pair = bicoherent(bosonic, z)
    n = np.arange(len(bosonic))
    expected = np.exp(-(z**2) / 2 + n * np.log(z) - 0.5 * gammaln(n + 1))
    assert np.allclose(pair.phi_z.coords[: len(n)], expected, atol=1e-15)
    assert pair.reliable


def test_large_z_flagged_unreliable(bosonic):
    """A truncated series that drops visible weight is not trusted."""
    pair = bicoherent(bosonic, 3.0)
    assert not pair.reliable
    assert pair.tail_mass > coherent.TAIL_CAP


def test_bicoherent_needs_one_mode():
    """The two-mode Landau system has no single series."""
    with pytest.raises(DomainError):
        bicoherent(gll_model(0.1, 0.1, nmax=1, lmax=1), 0.2)


@pytest.mark.parametrize("z", [0.5, 0.7j, -0.6 + 0.3j])
def test_series_matches_displacement(z):
    """Σ zⁿ/√n! φ_n equals the displaced vacuum for the shifted pair."""
    system = shifted_model(0.3, 0.1j, dim=80)
    assert route_equivalence(system, z) < 1e-9


def test_displacement_needs_fock():
    """Coordinate systems carry no operator exponentials."""
    with pytest.raises(DomainError):
        displacement_orbit(susy_model(SusyParams(1, 0.5), nmax=4), 0.1)


def test_eigen_relation_bosonic():
    """A φ(z) = z φ(z) and B† Ψ(z) = z Ψ(z)."""
    system = shifted_model(0.0, 0.0, dim=80)
    res_phi, res_psi = eigen_relation_residual(system, bicoherent(system, 0.7 + 0.2j))
    assert res_phi < 1e-9
    assert res_psi < 1e-9


def test_eigen_relation_swanson():
    """The Swanson pair keeps the eigen-relations at moderate |z|."""
    system = swanson_model(0.25, nmax=20, dim=80)
    res_phi, res_psi = eigen_relation_residual(system, bicoherent(system, 0.5))
    assert res_phi < 1e-8
    assert res_psi < 1e-8


def test_eigen_relation_coordinate_family():
    """The series over GaussPoly members is an eigenvector of the differential operator."""
    system = susy_model(SusyParams(1, 0.5), nmax=10)
    res_phi, res_psi = eigen_relation_residual(system, bicoherent(system, 0.2))
    assert res_phi < 1e-8
    assert res_psi < 1e-8


def test_coordinate_coherent_state():
    """η(·; w) has unit norm and (x + d/dx)/√2 η = w η."""
    w = 0.4 - 0.3j
    eta = coordinate_coherent(w)
    assert member_norm(eta) == pytest.approx(1.0, abs=1e-13)
    lower = DiffOp1D(d=1 / np.sqrt(2), x=1 / np.sqrt(2))
    assert member_norm(subtract(lower.apply(eta), eta.scale(w))) < 1e-13


def test_heisenberg_saturated():
    """Coherent states minimize ΔX·ΔP."""
    assert heisenberg_check(1 + 0.5j) == pytest.approx(0.5, abs=1e-9)


def test_plane_quadrature_validation():
    """Too few radial or angular points, or a nonpositive cutoff, are refused."""
    with pytest.raises(DomainError):
        PlaneQuadrature(radial=4)
    with pytest.raises(DomainError):
        PlaneQuadrature(angular=8)
    with pytest.raises(DomainError):
        PlaneQuadrature(cutoff=0.0)


def test_plane_quadrature_weights():
    """Without a cutoff the base weights sum to π."""
    z, t, base = PlaneQuadrature(radial=16, angular=32, cutoff=100.0).nodes()
    assert z.shape == t.shape == base.shape == (16 * 32,)
    assert np.allclose(np.abs(z) ** 2, t)
    assert base.sum() == pytest.approx(np.pi, rel=1e-12)


def test_vacuum_resolved(bosonic):
    """(1/π)∫|⟨0|z⟩|² d²z = 1."""
    e0 = basis_vector(0, 40)
    value = resolution_check(bosonic, PlaneQuadrature(), e0, e0)
    assert abs(value - 1.0) < 1e-6


def test_quadrature_ladder_converges(bosonic):
    """Refining the plane rule drives the defect for |12⟩ down monotonically."""
    e12 = basis_vector(12, 40)
    defects = [
        abs(resolution_check(bosonic, PlaneQuadrature(r, m, c), e12, e12) - 1.0)
        for r, m, c in [(16, 32, 5.0), (32, 64, 6.0), (48, 96, 7.0)]
    ]
    assert defects[0] > defects[1] > defects[2]
    assert defects[2] < 1e-6


def test_probe_vectors(bosonic):
    """Basis states first, then seeded random vectors on the same coordinates."""
    vectors = probe_vectors(bosonic, seed=3)
    assert len(vectors) == coherent.PROBE_BASIS + coherent.PROBE_RANDOM
    assert all(np.all(v.coords[coherent.PROBE_BASIS :] == 0) for v in vectors)
    again = probe_vectors(bosonic, seed=3)
    assert all(np.array_equal(u.coords, v.coords) for u, v in zip(vectors, again))


def test_probe_vectors_need_one_mode():
    """Two-dimensional systems have no probe set."""
    with pytest.raises(DomainError):
        probe_vectors(gll_model(0.1, 0.1, nmax=1, lmax=1), seed=0)


def test_shifted_resolution_when_beta_is_alpha_bar():
    """β = ᾱ makes the coordinate kernel the identity."""
    system = shifted_model(0.3 + 0.2j, 0.3 - 0.2j, dim=40)
    deviation, T = resolution_deviation(system, PlaneQuadrature(), seed=1)
    assert deviation < 1e-6
    assert T.shape == (16, 16)


def test_shifted_resolution_fails_otherwise():
    """β ≠ ᾱ damps the kernel by e^{−(α_r−β_r)²/2}."""
    system = shifted_model(0.5, 0.0, dim=40)
    deviation, _ = resolution_deviation(system, PlaneQuadrature(), seed=1)
    assert deviation > 0.01


def test_kernel_fit_prefers_position_phase():
    """The kernel is a damping times e^{i√2(α_i+β_i)x}, not a constant phase."""
    system = shifted_model(0.5 + 0.3j, 0.2j, dim=40)
    e0 = basis_vector(0, 40)
    fit = kernel_fit(system, PlaneQuadrature(), e0, e0)
    assert fit["error_b"] < 1e-6
    assert fit["error_a"] > 0.01


def test_kernel_fit_needs_shifted_model():
    """Other systems have no coordinate shifts."""
    system = swanson_model(0.2, dim=40)
    e0 = basis_vector(0, 40)
    with pytest.raises(DomainError):
        kernel_fit(system, PlaneQuadrature(), e0, e0)


def test_imaginary_susy_resolves_identity():
    """The polynomial family spans the probes, so the series resolves them."""
    system = susy_model(SusyParams(1, 0.8j), nmax=10)
    deviation, _ = resolution_deviation(system, PlaneQuadrature(), seed=1)
    assert deviation < 1e-4
