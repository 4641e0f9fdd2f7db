"""Gaussian-polynomial analysis: moments, exact inner products, recursions and quadrature.

Functions of the form P(x)·exp(−(a x² + b x + c)) are closed under
differentiation and multiplication by x, so every ladder action and every
biorthogonality integral in the coordinate models reduces to a finite sum of
Gaussian moments.
"""

import logging
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.signal import convolve2d
from scipy.special import gammaln

from src.errors import CoefficientOverflowError, ConvergenceError, DomainError

logger = logging.getLogger(__name__)

MAX_MOMENT_ORDER = 200
MAX_PN_DEGREE = 60
COEFF_CAP = 1e150
INTEGRAL_RTOL = 1e-9
MAX_RULE_SIZE = 256


@dataclass(frozen=True)
class NumericLimits:
    """Caps on moment order, p_n degree and coefficient size, and the quadrature tolerance."""

    moment_order: int = MAX_MOMENT_ORDER
    pn_degree: int = MAX_PN_DEGREE
    coeff_cap: float = COEFF_CAP
    integral_rtol: float = INTEGRAL_RTOL


_LIMITS: ContextVar[NumericLimits] = ContextVar("numeric_limits", default=NumericLimits())


def current_limits() -> NumericLimits:
    return _LIMITS.get()


@contextmanager
def numeric_limits(**overrides) -> Iterator[NumericLimits]:
    """Apply limit overrides for the current context, restoring the previous ones on exit.

    Worker threads see the limits only when they run inside a copy of this context.
    """
    token = _LIMITS.set(replace(_LIMITS.get(), **overrides))
    try:
        yield _LIMITS.get()
    finally:
        _LIMITS.reset(token)


def _check_finite(name: str, value: complex) -> complex:
    value = complex(value)
    if not (np.isfinite(value.real) and np.isfinite(value.imag)):
        raise DomainError(f"{name} must be finite, got {value}", field=name)
    return value


def _capped(poly: Polynomial, cap: float | None = None) -> Polynomial:
    """Raise instead of letting polynomial coefficients run off to Inf."""
    cap = current_limits().coeff_cap if cap is None else cap
    coef = np.asarray(poly.coef, dtype=complex)
    mags = np.abs(coef)
    if not np.all(np.isfinite(mags)) or np.any(mags > cap):
        bad = int(np.argmax(~np.isfinite(mags) | (mags > cap)))
        raise CoefficientOverflowError(
            f"Polynomial coefficient of degree {bad} exceeds cap {cap:.1e}", index=bad
        )
    return Polynomial(coef)


def cpoly(coeffs) -> Polynomial:
    """Complex polynomial from ascending coefficients, trailing zeros trimmed."""
    coef = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    nonzero = np.flatnonzero(coef)
    if nonzero.size == 0:
        return Polynomial(np.zeros(1, dtype=complex))
    return _capped(Polynomial(coef[: nonzero[-1] + 1]))


def conj_poly(poly: Polynomial) -> Polynomial:
    return Polynomial(np.conj(np.asarray(poly.coef, dtype=complex)))


# --- moments -----------------------------------------------------------------


def gauss_moments(kmax: int, a: complex, b: complex) -> np.ndarray:
    """All moments M_0..M_kmax of ∫ x^k exp(−a x² + b x) dx.

    Args:
        kmax: Highest moment order, at most the current moment cap.
        a: Quadratic coefficient, Re(a) > 0.
        b: Linear coefficient.

    Returns:
        Complex array of length kmax + 1.
    """
    a = _check_finite("a", a)
    b = _check_finite("b", b)
    if a.real <= 0:
        raise DomainError(f"Gaussian moment needs Re(a) > 0, got a={a}", field="a")
    if kmax < 0:
        raise DomainError(f"Moment order must be >= 0, got {kmax}", field="k")
    limit = current_limits().moment_order
    if kmax > limit:
        raise CoefficientOverflowError(f"Moment order {kmax} exceeds the cap {limit}", index=kmax)

    moments = np.empty(kmax + 1, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        moments[0] = np.sqrt(np.pi / a) * np.exp(b * b / (4 * a))
        if kmax >= 1:
            moments[1] = b / (2 * a) * moments[0]
        for k in range(1, kmax):
            moments[k + 1] = (b * moments[k] + k * moments[k - 1]) / (2 * a)

    bad = ~np.isfinite(moments)
    if np.any(bad):
        index = int(np.argmax(bad))
        raise CoefficientOverflowError(f"Gaussian moment M_{index} overflowed", index=index)
    return moments


def gauss_moment(k: int, a: complex, b: complex) -> complex:
    """M_k = ∫ x^k exp(−a x² + b x) dx (principal branch of the square root)."""
    return complex(gauss_moments(k, a, b)[k])


# --- Gaussian-polynomial functions ----------------------------------------------


@dataclass(frozen=True)
class GaussPoly:
    """poly(x)·exp(−(a x² + b x + c)) with Re(a) > 0."""

    poly: Polynomial
    a: complex = 0.5
    b: complex = 0.0
    c: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "poly", cpoly(np.asarray(self.poly.coef)))
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, _check_finite(name, getattr(self, name)))
        if self.a.real <= 0:
            raise DomainError(f"GaussPoly needs Re(a) > 0, got a={self.a}", field="a")

    @property
    def degree(self) -> int:
        return len(self.poly.coef) - 1

    def exponent(self) -> Polynomial:
        return Polynomial([self.c, self.b, self.a])

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        return self.poly(x) * np.exp(-(self.a * x * x + self.b * x + self.c))

    def with_poly(self, poly: Polynomial) -> "GaussPoly":
        return GaussPoly(poly, self.a, self.b, self.c)

    def same_exponent(self, other: "GaussPoly", tol: float = 1e-14) -> bool:
        return all(
            abs(getattr(self, k) - getattr(other, k)) <= tol * (1 + abs(getattr(self, k)))
            for k in ("a", "b", "c")
        )

    def deriv(self) -> "GaussPoly":
        """d/dx of P·e^{−Q} is (P′ − P·Q′)·e^{−Q}."""
        q_prime = Polynomial([self.b, 2 * self.a])
        return self.with_poly(self.poly.deriv() - self.poly * q_prime)

    def mul_x(self) -> "GaussPoly":
        return self.with_poly(self.poly * Polynomial([0, 1]))

    def scale(self, s: complex) -> "GaussPoly":
        return self.with_poly(self.poly * complex(s))

    def __add__(self, other: "GaussPoly") -> "GaussPoly":
        if not self.same_exponent(other):
            raise DomainError("Cannot add GaussPolys with different exponents")
        return self.with_poly(self.poly + other.poly)

    def __sub__(self, other: "GaussPoly") -> "GaussPoly":
        return self + other.scale(-1)

    def conj(self) -> "GaussPoly":
        return GaussPoly(conj_poly(self.poly), np.conj(self.a), np.conj(self.b), np.conj(self.c))


def inner_product(f: GaussPoly, g: GaussPoly) -> complex:
    """Exact ∫ conj(f(x))·g(x) dx as a finite sum of Gaussian moments."""
    A = np.conj(f.a) + g.a
    B = np.conj(f.b) + g.b
    C = np.conj(f.c) + g.c
    if A.real <= 0:
        raise DomainError(f"Combined exponent not integrable (Re A = {A.real})", field="a")
    coef = np.asarray((conj_poly(f.poly) * g.poly).coef, dtype=complex)
    moments = gauss_moments(len(coef) - 1, A, -B)
    return complex(np.exp(-C) * np.dot(coef, moments))


def norm(f: GaussPoly) -> float:
    return float(np.sqrt(max(inner_product(f, f).real, 0.0)))


# --- separable 2D functions -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussPoly2D:
    """Σ coeffs[i, j] xⁱ yʲ · exp(−(ax x² + bx x + ay y² + by y + c))."""

    coeffs: np.ndarray
    ax: complex = 0.5
    bx: complex = 0.0
    ay: complex = 0.5
    by: complex = 0.0
    c: complex = 0.0

    def __post_init__(self):
        coeffs = np.array(np.atleast_2d(self.coeffs), dtype=complex)
        if not np.all(np.isfinite(coeffs)):
            raise DomainError("GaussPoly2D coefficients must be finite")
        cap = current_limits().coeff_cap
        if np.any(np.abs(coeffs) > cap):
            raise CoefficientOverflowError(f"GaussPoly2D coefficient exceeds cap {cap:.1e}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        for name in ("ax", "bx", "ay", "by", "c"):
            object.__setattr__(self, name, _check_finite(name, getattr(self, name)))
        if self.ax.real <= 0 or self.ay.real <= 0:
            raise DomainError(
                f"GaussPoly2D needs Re(ax), Re(ay) > 0, got {self.ax}, {self.ay}", field="a"
            )

    def _like(self, coeffs: np.ndarray) -> "GaussPoly2D":
        return GaussPoly2D(coeffs, self.ax, self.bx, self.ay, self.by, self.c)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        expo = self.ax * x * x + self.bx * x + self.ay * y * y + self.by * y + self.c
        return P.polyval2d(x, y, self.coeffs) * np.exp(-expo)

    def same_exponent(self, other: "GaussPoly2D", tol: float = 1e-14) -> bool:
        return all(
            abs(getattr(self, k) - getattr(other, k)) <= tol * (1 + abs(getattr(self, k)))
            for k in ("ax", "bx", "ay", "by", "c")
        )

    def deriv_x(self) -> "GaussPoly2D":
        d = P.polyder(self.coeffs, axis=0) if self.coeffs.shape[0] > 1 else np.zeros((1, self.coeffs.shape[1]))
        q = self._pad(self.mul_x().coeffs * (2 * self.ax)) + self._pad(self.coeffs * self.bx)
        return self._like(self._pad(d) - q)

    def deriv_y(self) -> "GaussPoly2D":
        d = P.polyder(self.coeffs, axis=1) if self.coeffs.shape[1] > 1 else np.zeros((self.coeffs.shape[0], 1))
        q = self._pad(self.mul_y().coeffs * (2 * self.ay)) + self._pad(self.coeffs * self.by)
        return self._like(self._pad(d) - q)

    def mul_x(self) -> "GaussPoly2D":
        out = np.zeros((self.coeffs.shape[0] + 1, self.coeffs.shape[1]), dtype=complex)
        out[1:, :] = self.coeffs
        return self._like(out)

    def mul_y(self) -> "GaussPoly2D":
        out = np.zeros((self.coeffs.shape[0], self.coeffs.shape[1] + 1), dtype=complex)
        out[:, 1:] = self.coeffs
        return self._like(out)

    def _pad(self, arr: np.ndarray) -> np.ndarray:
        # One degree of headroom in each variable covers every first-order action.
        out = np.zeros((self.coeffs.shape[0] + 1, self.coeffs.shape[1] + 1), dtype=complex)
        out[: arr.shape[0], : arr.shape[1]] = arr
        return out

    def scale(self, s: complex) -> "GaussPoly2D":
        return self._like(self.coeffs * complex(s))

    def __add__(self, other: "GaussPoly2D") -> "GaussPoly2D":
        if not self.same_exponent(other):
            raise DomainError("Cannot add GaussPoly2Ds with different exponents")
        shape = (max(self.coeffs.shape[0], other.coeffs.shape[0]), max(self.coeffs.shape[1], other.coeffs.shape[1]))
        out = np.zeros(shape, dtype=complex)
        out[: self.coeffs.shape[0], : self.coeffs.shape[1]] += self.coeffs
        out[: other.coeffs.shape[0], : other.coeffs.shape[1]] += other.coeffs
        return self._like(out)

    def __sub__(self, other: "GaussPoly2D") -> "GaussPoly2D":
        return self + other.scale(-1)

    def trimmed(self) -> "GaussPoly2D":
        mask = np.abs(self.coeffs) > 0
        if not mask.any():
            return self._like(np.zeros((1, 1)))
        rows = np.flatnonzero(mask.any(axis=1))[-1] + 1
        cols = np.flatnonzero(mask.any(axis=0))[-1] + 1
        return self._like(self.coeffs[:rows, :cols])


def inner_product_2d(f: GaussPoly2D, g: GaussPoly2D) -> complex:
    """Exact ∫∫ conj(f)·g, factorized per axis since the exponent is separable."""
    Ax = np.conj(f.ax) + g.ax
    Ay = np.conj(f.ay) + g.ay
    if Ax.real <= 0 or Ay.real <= 0:
        raise DomainError("Combined 2D exponent not integrable", field="a")
    Bx = np.conj(f.bx) + g.bx
    By = np.conj(f.by) + g.by
    C = np.conj(f.c) + g.c
    prod = convolve2d(np.conj(f.coeffs), g.coeffs)
    mx = gauss_moments(prod.shape[0] - 1, Ax, -Bx)
    my = gauss_moments(prod.shape[1] - 1, Ay, -By)
    return complex(np.exp(-C) * (mx @ prod @ my))


# --- polynomial families --------------------------------------------------------


def pn_family(alpha: complex, nmax: int) -> list[Polynomial]:
    """p_0 = 1, p_{n+1} = (2x + α) p_n − p_n′."""
    if nmax < 0:
        raise DomainError(f"nmax must be >= 0, got {nmax}", field="nmax")
    limit = current_limits().pn_degree
    if nmax > limit:
        raise CoefficientOverflowError(f"p_n degree {nmax} exceeds the cap {limit}", index=nmax)
    alpha = _check_finite("alpha", alpha)
    lin = Polynomial([alpha, 2.0])
    family = [cpoly([1.0])]
    for _ in range(nmax):
        p = family[-1]
        family.append(_capped(lin * p - p.deriv()))
    return family


@lru_cache(maxsize=None)
def _hermite_cached(n: int) -> tuple:
    x = Polynomial([0.0, 1.0])
    prev, cur = Polynomial([1.0]), Polynomial([0.0, 2.0])
    if n == 0:
        return tuple(prev.coef)
    for k in range(1, n):
        prev, cur = cur, 2 * x * cur - 2 * k * prev
    return tuple(cur.coef)


def hermite(n: int) -> Polynomial:
    """Physicists' Hermite polynomial, H_{n+1} = 2x H_n − 2n H_{n−1}."""
    if n < 0 or n > MAX_PN_DEGREE:
        raise DomainError(f"Hermite degree {n} outside [0, {MAX_PN_DEGREE}]", field="n")
    return _capped(Polynomial(np.array(_hermite_cached(n), dtype=complex)))


def legendre(n: int) -> Polynomial:
    """Legendre polynomial by Bonnet's recursion."""
    if n < 0 or n > MAX_PN_DEGREE:
        raise DomainError(f"Legendre degree {n} outside [0, {MAX_PN_DEGREE}]", field="n")
    x = Polynomial([0.0, 1.0])
    prev, cur = Polynomial([1.0]), x
    if n == 0:
        return cpoly(prev.coef)
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1) * x * cur - k * prev) / (k + 1)
    return cpoly(cur.coef)


@lru_cache(maxsize=256)
def hermite_function(n: int, scale: float = 1.0) -> GaussPoly:
    """Orthonormal Hermite function ê_n(x/scale)/√scale."""
    if scale <= 0:
        raise DomainError("scale must be positive", field="scale")
    log_norm = 0.5 * (n * np.log(2.0) + gammaln(n + 1) + 0.5 * np.log(np.pi) + np.log(scale))
    poly = hermite(n)(Polynomial([0.0, 1.0 / scale])) * np.exp(-log_norm)
    return GaussPoly(poly, a=0.5 / scale**2)


def hermite_coordinates(f: GaussPoly, count: int) -> np.ndarray:
    """Coefficients ⟨ê_j, f⟩ for j < count, all exact."""
    return np.array([inner_product(hermite_function(j), f) for j in range(count)])


def hermite_coordinates_2d(f: GaussPoly2D, count: int) -> np.ndarray:
    """Matrix ⟨ê_j ⊗ ê_k, f⟩ for j, k < count, using the separable moment factorization."""
    Ax = 0.5 + f.ax
    Ay = 0.5 + f.ay
    deg_x = f.coeffs.shape[0] - 1 + count
    deg_y = f.coeffs.shape[1] - 1 + count
    mx = gauss_moments(deg_x, Ax, -f.bx)
    my = gauss_moments(deg_y, Ay, -f.by)

    def projector(moments: np.ndarray, width: int) -> np.ndarray:
        rows = []
        for j in range(count):
            h = np.conj(np.asarray(hermite_function(j).poly.coef, dtype=complex))
            rows.append([np.dot(h, moments[i : i + len(h)]) for i in range(width)])
        return np.array(rows)

    ex = projector(mx, f.coeffs.shape[0])
    ey = projector(my, f.coeffs.shape[1])
    return np.exp(-f.c) * (ex @ f.coeffs @ ey.T)


# --- Gauss rules ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    weight_name: str = "hermite"


def _golub_welsch(diag: np.ndarray, offdiag: np.ndarray, mu0: float, name: str) -> QuadratureRule:
    """Nodes from the Jacobi matrix; weights from the Christoffel sum of orthonormal polynomials."""
    n = len(diag)
    if n == 1:
        return QuadratureRule(np.array([diag[0]]), np.array([mu0]), 1, name)
    try:
        nodes = eigh_tridiagonal(diag, offdiag, eigvals_only=True)
    except LinAlgError as e:
        raise ConvergenceError(f"Tridiagonal eigensolve failed for {name} rule of order {n}: {e}") from e
    nodes = np.sort(nodes)

    # Orthonormal three-term recurrence; 1/Σ q_k² keeps tiny outer weights relatively accurate.
    q_prev = np.zeros(n)
    q_cur = np.ones(n)
    total = np.ones(n)
    for k in range(n - 1):
        q_next = ((nodes - diag[k]) * q_cur - (offdiag[k - 1] if k > 0 else 0.0) * q_prev) / offdiag[k]
        q_prev, q_cur = q_cur, q_next
        total += q_cur * q_cur
    weights = mu0 / total
    return QuadratureRule(nodes, weights, n, name)


@lru_cache(maxsize=32)
def gauss_hermite_rule(n: int) -> QuadratureRule:
    """Gauss rule for the weight e^{−x²} on ℝ."""
    if n < 1 or n > MAX_RULE_SIZE:
        raise DomainError(f"Rule order {n} outside [1, {MAX_RULE_SIZE}]", field="n")
    k = np.arange(1, n)
    return _golub_welsch(np.zeros(n), np.sqrt(k / 2.0), float(np.sqrt(np.pi)), "hermite")


@lru_cache(maxsize=32)
def gauss_laguerre_rule(n: int) -> QuadratureRule:
    """Gauss rule for the weight e^{−t} on [0, ∞)."""
    if n < 1 or n > MAX_RULE_SIZE:
        raise DomainError(f"Rule order {n} outside [1, {MAX_RULE_SIZE}]", field="n")
    k = np.arange(n, dtype=float)
    return _golub_welsch(2 * k + 1, np.arange(1, n, dtype=float), 1.0, "laguerre")


def quad_integrate(rule: QuadratureRule, f: Callable, shift: complex = 0.0, scale: float = 1.0) -> complex:
    """Σ w_i f(shift + scale·x_i)·scale, i.e. ∫ f(x) e^{−((x−shift)/scale)²} dx."""
    if scale <= 0:
        raise DomainError("scale must be positive", field="scale")
    values = np.asarray(f(shift + scale * rule.nodes), dtype=complex)
    return complex(np.dot(rule.weights, values) * scale)


def quad_estimate(f: Callable, shift: complex = 0.0, scale: float = 1.0, n: int = 128) -> tuple[complex, float]:
    """Quadrature value with the two-resolution difference |Q_n − Q_{n/2}|."""
    fine = quad_integrate(gauss_hermite_rule(n), f, shift, scale)
    coarse = quad_integrate(gauss_hermite_rule(max(n // 2, 1)), f, shift, scale)
    return fine, abs(fine - coarse)


# --- modulated functions ----------------------------------------------------------


@dataclass(frozen=True)
class Modulated:
    """GaussPoly times a bounded modulation m(x).

    ``log_derivative`` is m′/m when the modulation is differentiable; the
    differential descriptors use it to decide whether an operator keeps the
    product form.
    """

    base: GaussPoly
    factor: Callable[[np.ndarray], np.ndarray]
    log_derivative: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = field(default="", compare=False)

    def __call__(self, x):
        return self.base(x) * self.factor(np.asarray(x, dtype=complex))

    def with_base(self, base: GaussPoly) -> "Modulated":
        return Modulated(base, self.factor, self.log_derivative, self.label)

    def scale(self, s: complex) -> "Modulated":
        return self.with_base(self.base.scale(s))


def quad_inner_product(f: GaussPoly | Modulated, g: GaussPoly | Modulated, n: int = 128) -> complex:
    """∫ conj(f)·g by Gauss–Hermite after completing the square of the combined Gaussian.

    The rule doubles from ``n`` until the two-resolution difference is within the
    integral tolerance of ∫|conj(f)·g|, or the largest rule is reached.
    """
    fb, mf = (f.base, f.factor) if isinstance(f, Modulated) else (f, None)
    gb, mg = (g.base, g.factor) if isinstance(g, Modulated) else (g, None)
    A = np.conj(fb.a) + gb.a
    B = np.conj(fb.b) + gb.b
    C = np.conj(fb.c) + gb.c
    if A.real <= 0:
        raise DomainError("Combined exponent not integrable", field="a")
    scale = 1.0 / np.sqrt(A.real)
    shift = -B.real / (2 * A.real)
    # What remains after dividing by e^{−((x−shift)/scale)²} has unit-modulus Gaussian part.
    residual_const = -C + B.real**2 / (4 * A.real)

    def integrand(x):
        x = np.asarray(x, dtype=complex)
        val = np.conj(fb.poly(x)) * gb.poly(x)
        val = val * np.exp(-1j * A.imag * x * x - 1j * B.imag * x + residual_const)
        if mf is not None:
            val = val * np.conj(mf(x))
        if mg is not None:
            val = val * mg(x)
        return val

    rtol = current_limits().integral_rtol
    mass = quad_integrate(gauss_hermite_rule(n), lambda x: np.abs(integrand(x)), shift, scale).real
    value, error = quad_estimate(integrand, shift, scale, n)
    while error > rtol * mass and n < MAX_RULE_SIZE:
        n = min(2 * n, MAX_RULE_SIZE)
        value, error = quad_estimate(integrand, shift, scale, n)
    if error > rtol * mass:
        logger.warning(f"quadrature difference {error:.2e} above rtol {rtol:.0e} at {n} nodes")
    return value
