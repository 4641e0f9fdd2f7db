"""Tests for the damped-oscillator feasibility checks."""

import numpy as np
import pytest

from src import damped
from src.damped import dho_feasibility, frequencies, sample_admissible, weighted_space_scan
from src.errors import DomainError
from src.systems import DHOParams


def test_placeholder():
    """Placeholder test to verify module imports."""
    assert damped is not None


def test_frequencies():
    """ω± = Ω ± iγ/(2m)."""
    Omega, omega_p, omega_m = frequencies(m=1.0, k=2.0, gamma=1.0)
    assert Omega == pytest.approx(np.sqrt(1.75))
    assert omega_p == pytest.approx(complex(np.sqrt(1.75), 0.5))
    assert omega_m == pytest.approx(np.conj(omega_p))


def test_frequencies_reject_overdamping():
    """k < γ²/4m leaves Ω imaginary."""
    with pytest.raises(DomainError) as e:
        frequencies(m=1.0, k=0.1, gamma=2.0)
    assert e.value.field == "k"


def test_params_reject_real_product():
    """Γδ̄ real makes the normalization D vanish."""
    with pytest.raises(DomainError) as e:
        DHOParams(m=1.0, k=1.0, gamma=0.5, Gamma=1.0, delta=2.0)
    assert e.value.field == "delta"


def test_samples_honor_ratio_constraint():
    """Sampled parameters satisfy ω₊/ω₋ = −(δ/δ̄)(Γ/Γ̄)."""
    for params in sample_admissible(20, seed=7):
        assert dho_feasibility(params).ratio_satisfied


def test_conditions_never_hold_together():
    """Exactly one of the two sign conditions holds on every admissible sample."""
    for params in sample_admissible(100, seed=11):
        report = dho_feasibility(params)
        assert report.c1 != report.c2
        assert not report.feasible
        assert report.weighted.feasible_points == 0


def test_sampling_is_seeded():
    """The same seed draws the same parameters."""
    assert sample_admissible(5, seed=3) == sample_admissible(5, seed=3)


def test_undamped_regime_noted():
    """γ = 0 collapses ω± onto Ω and leaves a note."""
    report = dho_feasibility(DHOParams(m=1.0, k=1.0, gamma=0.0, Gamma=1.0, delta=1j))
    assert report.regime == "undamped"
    assert report.omega_plus == report.omega_minus == 1.0
    assert report.notes


def test_weighted_scan_needs_both_signs():
    """Weights exist only when X′ > 0 and Y < 0."""
    assert weighted_space_scan(1.0, -1.0).compatible
    assert not weighted_space_scan(1.0, 1.0).compatible
    assert not weighted_space_scan(-1.0, -1.0).compatible
    assert weighted_space_scan(1.0, 1.0).grid_size == damped.SCAN_POINTS**2
