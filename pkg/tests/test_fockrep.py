"""Tests for truncated number-basis operators."""

import numpy as np
import pytest
import scipy.linalg

from src import fockrep
from src.errors import DimensionMismatchError, DomainError
from src.fockrep import (
    FockOp,
    FockVec,
    basis_vector,
    coherent_vector,
    commutator_defect,
    converged_eigpairs,
    displacement,
    eigpairs,
    identity,
    ladder,
    matrix_exp,
    number_op,
    quadratures,
)


def test_placeholder():
    """Placeholder test to verify module imports."""
    assert fockrep is not None


@pytest.mark.parametrize("dim", [40, 200])
def test_ladder_commutator_on_protected_block(dim):
    """[a, a†] = 1 everywhere except the last row and column, up to round-off in √n·√n."""
    a, adag = ladder(dim)
    assert commutator_defect(a, adag, 1) < 4 * dim * np.finfo(float).eps
    assert commutator_defect(a, adag, 0) > 1.0


def test_ladder_action_on_basis():
    """a†|n⟩ = √(n+1)|n+1⟩ and a|n⟩ = √n|n−1⟩."""
    a, adag = ladder(10)
    v = basis_vector(3, 10)
    assert np.allclose((adag @ v).coords, np.sqrt(4) * basis_vector(4, 10).coords)
    assert np.allclose((a @ v).coords, np.sqrt(3) * basis_vector(2, 10).coords)


def test_ladder_default_protect():
    """The protected block excludes the last basis state."""
    a, _ = ladder(12)
    assert a.protect == 11


def test_number_operator_is_adag_a():
    """a†a equals the number operator."""
    a, adag = ladder(20)
    assert np.allclose((adag @ a).entries, number_op(20).entries)


def test_dimension_mismatch():
    """Operands of different size are rejected."""
    a, _ = ladder(8)
    with pytest.raises(DimensionMismatchError):
        a @ basis_vector(0, 9)
    with pytest.raises(DimensionMismatchError):
        a + identity(9)


def test_dim_bounds():
    """Dimensions past the cap are rejected."""
    with pytest.raises(DomainError):
        ladder(1)
    with pytest.raises(DomainError):
        identity(fockrep.MAX_DIM + 1)


def test_scalar_multiplication_both_sides():
    """Numbers, numpy scalars included, scale an operator from either side."""
    a, _ = ladder(6)
    assert np.allclose((2 * a).entries, (a * 2).entries)
    assert np.allclose((np.float64(0.5) * a).entries, 0.5 * a.entries)


def test_matrix_exp_nilpotent_exact():
    """exp(z a†) applied to |0⟩ gives the unnormalized coherent coefficients zⁿ/√n!."""
    dim = 30
    _, adag = ladder(dim)
    z = 0.4 - 0.3j
    v = matrix_exp(z * adag) @ basis_vector(0, dim)
    expected = coherent_vector(z, dim).coords * np.exp(abs(z) ** 2 / 2)
    assert np.allclose(v.coords, expected, atol=1e-15)


def test_matrix_exp_general_matches_scipy():
    """Non-nilpotent matrices fall back to scaling and squaring."""
    X, _ = quadratures(16)
    M = 0.3j * X
    assert np.allclose(matrix_exp(M).entries, scipy.linalg.expm(M.entries))


def test_matrix_exp_with_scalar_shift():
    """exp(s + N) = e^s exp(N) for nilpotent N."""
    a, _ = ladder(12)
    M = a - 0.7 * identity(12)
    expected = scipy.linalg.expm(M.entries)
    assert np.allclose(matrix_exp(M).entries, expected, atol=1e-13)


def test_displacement_builds_coherent_state():
    """D(z)|0⟩ with normal ordering is the coherent vector."""
    dim = 60
    a, adag = ladder(dim)
    z = 0.8 + 0.5j
    v = displacement(z, a, adag) @ basis_vector(0, dim)
    assert np.allclose(v.coords, coherent_vector(z, dim).coords, atol=1e-12)


def test_coherent_vector_is_eigenvector():
    """a|z⟩ = z|z⟩ on the protected block."""
    dim = 80
    a, _ = ladder(dim)
    z = 0.7 + 0.2j
    v = coherent_vector(z, dim)
    diff = (a @ v) - v.scale(z)
    assert diff.norm(a.protect) < 1e-12
    assert abs(v.norm() - 1.0) < 1e-12


def test_eigpairs_sorted_with_residuals():
    """Eigenvalues come out ordered by real part with small residuals."""
    M = FockOp(np.diag([3.0, 1.0, 2.0]) + np.triu(np.ones((3, 3)), 1))
    pairs = eigpairs(M)
    assert [round(p.value.real, 10) for p in pairs] == [1.0, 2.0, 3.0]
    assert all(p.residual < 1e-12 for p in pairs)


def test_eigpairs_tie_broken_by_imaginary_part():
    """Equal real parts are ordered by imaginary part."""
    M = FockOp(np.array([[0.0, -1.0], [1.0, 0.0]]))
    pairs = eigpairs(M)
    assert pairs[0].value.imag < pairs[1].value.imag


def test_converged_eigpairs_harmonic_oscillator():
    """The lowest levels of a†a + 1/2 are n + 1/2."""
    a, adag = ladder(40)
    H = adag @ a + 0.5 * identity(40)
    pairs = converged_eigpairs(H, 5)
    assert np.allclose([p.value.real for p in pairs], [0.5, 1.5, 2.5, 3.5, 4.5])


def test_quadratures_commutator():
    """[X, P] = i on the protected block."""
    X, P = quadratures(30)
    comm = (X @ P - P @ X).entries[:28, :28]
    assert np.allclose(comm, 1j * np.eye(28), atol=1e-12)


def test_fockvec_inner_is_antilinear_in_first_slot():
    """⟨c f, g⟩ = c̄ ⟨f, g⟩."""
    f = FockVec([1.0, 1j])
    g = FockVec([0.5, 2.0])
    assert abs(f.scale(2j).inner(g) - (-2j) * f.inner(g)) < 1e-15
