"""Truncated number-basis matrices for ladder operators, exponentials and eigenproblems."""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.linalg import LinAlgError

from src.errors import ConvergenceError, DimensionMismatchError, DomainError

logger = logging.getLogger(__name__)

MAX_DIM = 512
EIG_TIE_DECIMALS = 10


@dataclass(frozen=True, eq=False)
class FockOp:
    """dim×dim matrix over |0⟩..|dim−1⟩.

    Identities are only meaningful on the leading ``protect``×``protect`` block;
    the trailing rows feel the truncation.
    """

    entries: np.ndarray
    protect: int | None = None

    __array_ufunc__ = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatchError(f"FockOp needs a square matrix, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise DomainError("FockOp entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        protect = entries.shape[0] if self.protect is None else int(self.protect)
        if not 0 <= protect <= entries.shape[0]:
            raise DomainError(f"protect={protect} outside [0, {entries.shape[0]}]", field="protect")
        object.__setattr__(self, "protect", protect)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "FockOp":
        return FockOp(self.entries.conj().T, self.protect)

    def block(self, size: int | None = None) -> np.ndarray:
        size = self.protect if size is None else size
        return self.entries[:size, :size]

    def __matmul__(self, other):
        if isinstance(other, FockVec):
            return apply(self, other)
        return matmul(self, other)

    def __add__(self, other: "FockOp") -> "FockOp":
        return matadd(self, other)

    def __sub__(self, other: "FockOp") -> "FockOp":
        return matadd(self, scalar_mul(-1, other))

    def __mul__(self, s: complex) -> "FockOp":
        return scalar_mul(s, self)

    __rmul__ = __mul__

    def __neg__(self) -> "FockOp":
        return scalar_mul(-1, self)


@dataclass(frozen=True, eq=False)
class FockVec:
    coords: np.ndarray

    __array_ufunc__ = None

    def __post_init__(self):
        coords = np.array(self.coords, dtype=complex).ravel()
        if not np.all(np.isfinite(coords)):
            raise DomainError("FockVec coordinates must be finite")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def norm(self, size: int | None = None) -> float:
        return float(np.linalg.norm(self.coords[:size]))

    def inner(self, other: "FockVec") -> complex:
        """⟨self, other⟩, antilinear in the first slot."""
        _check_dims(self.dim, other.dim)
        return complex(np.vdot(self.coords, other.coords))

    def scale(self, s: complex) -> "FockVec":
        return FockVec(self.coords * complex(s))

    def __add__(self, other: "FockVec") -> "FockVec":
        _check_dims(self.dim, other.dim)
        return FockVec(self.coords + other.coords)

    def __sub__(self, other: "FockVec") -> "FockVec":
        _check_dims(self.dim, other.dim)
        return FockVec(self.coords - other.coords)


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise DimensionMismatchError(f"Dimension mismatch: {dims}")


def _check_dim(dim: int) -> None:
    if dim < 1 or dim > MAX_DIM:
        raise DomainError(f"dim={dim} outside [1, {MAX_DIM}]", field="dim")


def ladder(dim: int, protect: int | None = None) -> tuple[FockOp, FockOp]:
    """Lowering a (a[m, n] = √n δ_{m,n−1}) and its adjoint."""
    if dim < 2:
        raise DomainError("ladder needs dim >= 2", field="dim")
    _check_dim(dim)
    protect = dim - 1 if protect is None else protect
    a = FockOp(np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1), protect)
    return a, a.dagger()


def identity(dim: int, protect: int | None = None) -> FockOp:
    _check_dim(dim)
    return FockOp(np.eye(dim), protect)


def number_op(dim: int) -> FockOp:
    _check_dim(dim)
    return FockOp(np.diag(np.arange(dim, dtype=float)))


def basis_vector(n: int, dim: int) -> FockVec:
    if not 0 <= n < dim:
        raise DomainError(f"basis index {n} outside [0, {dim})", field="n")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return FockVec(v)


def apply(M: FockOp, v: FockVec) -> FockVec:
    _check_dims(M.dim, v.dim)
    return FockVec(M.entries @ v.coords)


def matmul(A: FockOp, B: FockOp) -> FockOp:
    _check_dims(A.dim, B.dim)
    return FockOp(A.entries @ B.entries, min(A.protect, B.protect))


def matadd(A: FockOp, B: FockOp) -> FockOp:
    _check_dims(A.dim, B.dim)
    return FockOp(A.entries + B.entries, min(A.protect, B.protect))


def scalar_mul(s: complex, M: FockOp) -> FockOp:
    return FockOp(complex(s) * M.entries, M.protect)


def commutator_defect(A: FockOp, B: FockOp, k: int) -> float:
    """max |([A, B] − I)_{ij}| over the leading (dim−k) block.

    For the √n ladder the block is zero up to a few ulps of dim, the round-off
    of √n·√n against n.
    """
    _check_dims(A.dim, B.dim)
    if not 0 <= k < A.dim:
        raise DomainError(f"k={k} outside [0, {A.dim})", field="k")
    size = A.dim - k
    comm = A.entries @ B.entries - B.entries @ A.entries - np.eye(A.dim)
    return float(np.max(np.abs(comm[:size, :size])))


def _nilpotent_part(M: FockOp) -> tuple[complex, np.ndarray] | None:
    diag = np.diag(M.entries)
    if not np.all(diag == diag[0]):
        return None
    N = M.entries - diag[0] * np.eye(M.dim)
    if not np.any(np.tril(N)) or not np.any(np.triu(N)):
        return complex(diag[0]), N
    return None


def matrix_exp(M: FockOp) -> FockOp:
    """exp(M): terminating series when M − s·I is nilpotent, scaling-and-squaring otherwise."""
    split = _nilpotent_part(M)
    if split is None:
        return FockOp(scipy.linalg.expm(M.entries), M.protect)

    shift, N = split
    result = np.eye(M.dim, dtype=complex)
    term = np.eye(M.dim, dtype=complex)
    for k in range(1, M.dim + 1):
        term = term @ N / k
        if not np.any(term):
            break
        result = result + term
    return FockOp(np.exp(shift) * result, M.protect)


def displacement(z: complex, lower: FockOp, raise_op: FockOp) -> FockOp:
    """e^{−|z|²/2}·exp(z·raise)·exp(−z̄·lower), normal ordered."""
    _check_dims(lower.dim, raise_op.dim)
    z = complex(z)
    left = matrix_exp(scalar_mul(z, raise_op))
    right = matrix_exp(scalar_mul(-np.conj(z), lower))
    return scalar_mul(np.exp(-abs(z) ** 2 / 2), matmul(left, right))


class EigenPair(NamedTuple):
    value: complex
    vector: FockVec
    residual: float


def eigpairs(M: FockOp) -> list[EigenPair]:
    """All right eigenpairs, ordered by (Re, Im) with ties rounded at 1e−10.

    Raises:
        ConvergenceError: LAPACK's QR iteration did not converge.
    """
    _check_dim(M.dim)
    try:
        values, vectors = scipy.linalg.eig(M.entries)
    except LinAlgError as e:
        raise ConvergenceError(f"Dense eigensolve failed at dim={M.dim}: {e}") from e

    order = np.lexsort((np.round(values.imag, EIG_TIE_DECIMALS), np.round(values.real, EIG_TIE_DECIMALS)))
    pairs = []
    for i in order:
        v = vectors[:, i] / np.linalg.norm(vectors[:, i])
        residual = float(np.linalg.norm(M.entries @ v - values[i] * v))
        pairs.append(EigenPair(complex(values[i]), FockVec(v), residual))
    return pairs


def converged_eigpairs(M: FockOp, count: int, tail_fraction: float = 0.2, tail_tol: float = 1e-8) -> list[EigenPair]:
    """Lowest ``count`` eigenpairs whose eigenvectors carry negligible weight near the cutoff.

    Truncating a non-normal operator produces spurious eigenvalues whose
    eigenvectors live on the trailing coordinates; those are skipped.
    """
    start = int(M.dim * (1 - tail_fraction))
    kept = [p for p in eigpairs(M) if np.linalg.norm(p.vector.coords[start:]) ** 2 < tail_tol]
    if len(kept) < count:
        logger.warning(f"Only {len(kept)} of {count} requested eigenpairs converged at dim={M.dim}")
    return kept[:count]


def coherent_vector(z: complex, dim: int) -> FockVec:
    """Normalized bosonic coherent state e^{−|z|²/2} Σ zⁿ/√n! |n⟩, truncated."""
    _check_dim(dim)
    z = complex(z)
    coords = np.empty(dim, dtype=complex)
    coords[0] = np.exp(-abs(z) ** 2 / 2)
    for n in range(1, dim):
        coords[n] = coords[n - 1] * z / np.sqrt(n)
    return FockVec(coords)


def quadratures(dim: int) -> tuple[FockOp, FockOp]:
    """Position X = (a + a†)/√2 and momentum P = i(a† − a)/√2."""
    a, adag = ladder(dim)
    X = scalar_mul(1 / np.sqrt(2), a + adag)
    P = scalar_mul(1j / np.sqrt(2), adag - a)
    return X, P
