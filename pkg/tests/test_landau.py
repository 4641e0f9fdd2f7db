"""Tests for the generalized Landau-level model."""

import numpy as np
import pytest

from src import landau
from src.diagnostics import (
    Status,
    assumption_summary,
    check_biorthogonality,
    multiplier_metric_defect,
    projection_defects,
)
from src.errors import DomainError
from src.landau import (
    general_solution,
    gll_model,
    gll_vacua,
    hamiltonian_residuals,
    monomial,
    superpotential_constraints,
)
from src.systems import Rep, inner


def test_placeholder():
    """Placeholder test to verify module imports."""
    assert landau is not None


@pytest.fixture(scope="module")
def system():
    return gll_model(0.1, -0.2, nmax=3, lmax=3)


def test_vacua_have_unit_overlap():
    """⟨Ψ₀₀, φ₀₀⟩ = 1 for any k1, k2 in the box."""
    phi00, psi00 = gll_vacua(0.3, -0.4)
    assert abs(inner(psi00, phi00) - 1.0) < 1e-14


def test_family_layout(system):
    """Members are indexed by (n, l) with both quanta up to their caps."""
    assert system.rep == Rep.COORD2D
    assert system.modes == 2
    assert len(system) == 16
    assert system.occupations[system.index_of((2, 3))] == (2, 3)


def test_biorthonormal(system):
    """⟨Ψ_{n,l}, φ_{m,k}⟩ = δ_nm δ_lk."""
    _, maxdev = check_biorthogonality(system)
    assert maxdev < 1e-9


def test_hamiltonian_eigenvalues(system):
    """h′φ_{n,l} = (n − ½)φ_{n,l} and hφ_{n,l} = (l − ½)φ_{n,l}."""
    residuals = hamiltonian_residuals(system)
    assert residuals["h_prime"] < 1e-10
    assert residuals["h"] < 1e-10


def test_multiplication_metric_maps_families(system):
    """S_Ψ φ_{n,l} = Ψ_{n,l} exactly."""
    assert multiplier_metric_defect(system) < 1e-9


def test_metric_symbol_is_unbounded_gaussian(system):
    """|S_φ| = exp(−k2 x² + k1 y²) grows along y for k1 > 0."""
    symbol = system.extras["metric_symbol"]
    assert symbol(0.0, 0.0) == pytest.approx(1.0)
    assert symbol(0.0, 10.0) == pytest.approx(np.exp(10.0))


def test_rejects_parameters_outside_box():
    """k1 and k2 must lie in (−1/2, 1/2)."""
    with pytest.raises(DomainError) as e:
        gll_model(0.6, 0.0)
    assert e.value.field == "k1"


def test_general_solution_satisfies_constraints():
    """Any polynomial V₂ and v₁(y) complete to a compatible quadruple."""
    V2 = np.zeros((3, 4), dtype=complex)
    V2[2, 1] = 1.0
    V2[0, 3] = 0.5j
    v1 = [0.3, 0.0, 1.0]
    residuals = superpotential_constraints(*general_solution(V2, v1))
    assert max(residuals.values()) < 1e-14


def test_standard_choice_satisfies_constraints():
    """V₁ = −x, V₂ = 0, W₁ = 0, W₂ = −y is the ordinary Landau pair."""
    residuals = superpotential_constraints(monomial(1, 0, -1.0), [[0.0]], [[0.0]], monomial(0, 1, -1.0))
    assert max(residuals.values()) == 0.0


def test_broken_normalization_is_reported():
    """Dropping the −y in W₂ violates W1_x + W2_y = −1 by one."""
    residuals = superpotential_constraints(monomial(1, 0, -1.0), [[0.0]], [[0.0]], [[0.0]])
    assert residuals["W_trace"] == pytest.approx(1.0)
    assert residuals["W2y_eq_V1x"] == pytest.approx(1.0)


def test_completeness_evidence_passes(system):
    """Projection defects fall along the ladder and A3 holds for the Landau levels."""
    defects, status = projection_defects(system)
    assert status == Status.PASS
    assert len(defects) == 3
    assert defects[1] < 0.9 * defects[0]
    assert assumption_summary(system).assumptions["A3"] == Status.PASS
