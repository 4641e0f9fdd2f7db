"""Biorthogonal systems, model parameters and the symbolic operators acting on them."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping

import numpy as np

from src.errors import DomainError
from src.fockrep import FockOp, FockVec
from src.gaussmath import (
    GaussPoly,
    GaussPoly2D,
    Modulated,
    inner_product,
    inner_product_2d,
    quad_inner_product,
)

logger = logging.getLogger(__name__)

MODULATION_GRID = np.linspace(-12.0, 12.0, 241)


class Rep(str, Enum):
    FOCK = "fock"
    COORD1D = "coord1d"
    COORD2D = "coord2d"


# --- bounded perturbations and multipliers ----------------------------------------


@dataclass(frozen=True)
class PhiSpec:
    """Bounded real perturbation Φ of the superpotential: λ·sin(μx), λ·arctan(x) or 0."""

    kind: str = "zero"
    lam: float = 0.0
    mu: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero", "sine", "arctan"):
            raise DomainError(f"Unknown Φ kind '{self.kind}'", field="phi")
        if not (np.isfinite(self.lam) and np.isfinite(self.mu)):
            raise DomainError("Φ parameters must be finite", field="phi")

    def value(self, x):
        x = np.real(np.asarray(x, dtype=complex))
        if self.kind == "sine":
            return self.lam * np.sin(self.mu * x)
        if self.kind == "arctan":
            return self.lam * np.arctan(x)
        return np.zeros_like(x)

    def deriv(self, x):
        x = np.real(np.asarray(x, dtype=complex))
        if self.kind == "sine":
            return self.lam * self.mu * np.cos(self.mu * x)
        if self.kind == "arctan":
            return self.lam / (1 + x * x)
        return np.zeros_like(x)

    @property
    def bound(self) -> float:
        """Certified sup |Φ|."""
        if self.kind == "sine":
            return abs(self.lam)
        if self.kind == "arctan":
            return abs(self.lam) * np.pi / 2
        return 0.0


@dataclass(frozen=True)
class RhoSpec:
    """Multiplier ρ with certified bounds 0 < lo ≤ |ρ| ≤ hi."""

    kind: str = "constant"
    c: complex = 1.0
    eps: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "sine", "arctan_phase"):
            raise DomainError(f"Unknown ρ kind '{self.kind}'", field="rho")
        if self.kind == "constant" and complex(self.c) == 0:
            raise DomainError("Constant ρ must be nonzero", field="rho")
        if self.kind == "sine" and not abs(self.eps) < 1:
            raise DomainError(f"ρ = 1 + ε sin x needs |ε| < 1, got {self.eps}", field="rho")

    def value(self, x):
        x = np.asarray(x, dtype=complex)
        if self.kind == "sine":
            return 1 + self.eps * np.sin(x)
        if self.kind == "arctan_phase":
            return np.exp(1j * self.mu * np.arctan(x))
        return np.full(x.shape, complex(self.c))

    def bounds(self) -> tuple[float, float]:
        if self.kind == "sine":
            return 1 - abs(self.eps), 1 + abs(self.eps)
        if self.kind == "arctan_phase":
            return 1.0, 1.0
        return abs(complex(self.c)), abs(complex(self.c))


@dataclass(frozen=True)
class GaussianMultiplier2D:
    """Multiplication by const·exp(qx x² + qy y²)."""

    qx: float
    qy: float
    const: complex = 1.0

    def __call__(self, x, y):
        return self.const * np.exp(self.qx * np.asarray(x) ** 2 + self.qy * np.asarray(y) ** 2)

    def apply(self, f: GaussPoly2D) -> GaussPoly2D:
        return GaussPoly2D(f.coeffs * self.const, f.ax - self.qx, f.bx, f.ay - self.qy, f.by, f.c)

    def inverse(self) -> "GaussianMultiplier2D":
        return GaussianMultiplier2D(-self.qx, -self.qy, 1 / complex(self.const))


# --- model parameters ----------------------------------------------------------------


def _finite(name: str, value) -> None:
    if not np.all(np.isfinite(np.asarray(value, dtype=complex))):
        raise DomainError(f"{name} must be finite", field=name)


@dataclass(frozen=True)
class ShiftedParams:
    alpha: complex
    beta: complex
    name = "shifted"

    def __post_init__(self):
        _finite("alpha", self.alpha)
        _finite("beta", self.beta)


@dataclass(frozen=True)
class ExtOscParams:
    beta: float
    name = "extended"

    def __post_init__(self):
        _finite("beta", self.beta)
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}", field="beta")

    @property
    def gamma(self) -> float:
        return (2 + self.beta**2) / (2 * self.beta**2)


@dataclass(frozen=True)
class SwansonParams:
    theta: float
    rep: Rep = Rep.FOCK
    name = "swanson"

    def __post_init__(self):
        _finite("theta", self.theta)
        if not -np.pi / 4 < self.theta < np.pi / 4 or self.theta == 0:
            raise DomainError(f"theta must lie in (-pi/4, pi/4) without 0, got {self.theta}", field="theta")
        if Rep(self.rep) == Rep.COORD2D:
            raise DomainError("Swanson model has no 2D representation", field="rep")
        object.__setattr__(self, "rep", Rep(self.rep))

    @property
    def omega(self) -> float:
        return 1 / np.cos(2 * self.theta)


@dataclass(frozen=True)
class SusyParams:
    example: int
    alpha: complex
    beta: complex = 0.0
    phi: PhiSpec = field(default_factory=PhiSpec)
    name = "susy"

    def __post_init__(self):
        if self.example not in (1, 2):
            raise DomainError(f"example must be 1 or 2, got {self.example}", field="example")
        _finite("alpha", self.alpha)
        _finite("beta", self.beta)
        alpha = complex(self.alpha)
        if alpha.real != 0 and alpha.imag != 0:
            raise DomainError(f"alpha must be real or purely imaginary, got {alpha}", field="alpha")

    @property
    def imaginary(self) -> bool:
        return complex(self.alpha).imag != 0


@dataclass(frozen=True)
class RieszParams:
    rho: RhoSpec
    name = "riesz_mult"


@dataclass(frozen=True)
class GLLParams:
    k1: float
    k2: float
    name = "gll"

    def __post_init__(self):
        for key in ("k1", "k2"):
            value = getattr(self, key)
            _finite(key, value)
            if not -0.5 < value < 0.5:
                raise DomainError(f"{key}={value} outside the box (-1/2, 1/2)", field=key)


@dataclass(frozen=True)
class DHOParams:
    m: float
    k: float
    gamma: float
    Gamma: complex
    delta: complex
    name = "dho"

    def __post_init__(self):
        for key in ("m", "k", "gamma", "Gamma", "delta"):
            _finite(key, getattr(self, key))
        if not self.m > 0:
            raise DomainError("m must be positive", field="m")
        if self.gamma < 0:
            raise DomainError("gamma must be nonnegative", field="gamma")
        if self.k < self.gamma**2 / (4 * self.m):
            raise DomainError("k must be at least gamma^2/(4m) so that Omega is real", field="k")
        G, d = complex(self.Gamma), complex(self.delta)
        if abs(G * np.conj(d) - d * np.conj(G)) <= 1e-12 * max(abs(G) * abs(d), 1e-300):
            raise DomainError("Gamma·conj(delta) must differ from delta·conj(Gamma)", field="delta")


NOGO_VARIANTS = ("A_minus_alpha_adag_n_with_B_shift", "A_shift_with_B_minus_beta_a_m")


@dataclass(frozen=True)
class NogoParams:
    alpha: complex
    n: int = 2
    variant: str = NOGO_VARIANTS[0]
    beta: complex = 0.0
    kmax: int = 120
    name = "nogo"

    def __post_init__(self):
        _finite("alpha", self.alpha)
        _finite("beta", self.beta)
        if self.n < 2:
            raise DomainError(f"deformation order must be >= 2, got {self.n}", field="n")
        if self.variant not in NOGO_VARIANTS:
            raise DomainError(f"Unknown variant '{self.variant}'", field="variant")
        if not 1 <= self.kmax <= 200:
            raise DomainError(f"kmax={self.kmax} outside [1, 200]", field="kmax")


ModelParams = (
    ShiftedParams | ExtOscParams | SwansonParams | SusyParams | RieszParams | GLLParams | DHOParams | NogoParams
)


# --- symbolic differential operators -------------------------------------------------


@dataclass(frozen=True)
class DiffOp1D:
    """d·∂x + x·X + const (+ potential_coeff·V(x) for a modulated family).

    On a modulated function base·m the derivative spills m′/m·base; the
    operator keeps the product form only when that spill cancels against the
    potential term.
    """

    d: complex
    x: complex
    const: complex = 0.0
    potential_coeff: complex = 0.0
    potential: Callable | None = field(default=None, compare=False)

    def _base_action(self, f: GaussPoly) -> GaussPoly:
        out = f.deriv().scale(self.d) + f.mul_x().scale(self.x)
        if self.const:
            out = out + f.scale(self.const)
        return out

    def apply(self, f: GaussPoly | Modulated) -> GaussPoly | Modulated:
        if isinstance(f, GaussPoly):
            if self.potential_coeff and self.potential is not None:
                raise DomainError("Potential term needs a modulated operand")
            return self._base_action(f)
        if f.log_derivative is None:
            raise DomainError(f"Modulation '{f.label}' is not differentiable")
        spill = self.d * f.log_derivative(MODULATION_GRID)
        if self.potential is not None:
            spill = spill + self.potential_coeff * self.potential(MODULATION_GRID)
        if np.max(np.abs(spill)) > 1e-12:
            raise DomainError(f"Operator does not preserve the modulation '{f.label}'")
        return f.with_base(self._base_action(f.base))

    def adjoint(self) -> "DiffOp1D":
        return DiffOp1D(
            -np.conj(self.d),
            np.conj(self.x),
            np.conj(self.const),
            np.conj(self.potential_coeff),
            self.potential,
        )


@dataclass(frozen=True)
class DiffOp2D:
    """dx·∂x + dy·∂y + x·X + y·Y + const acting on GaussPoly2D."""

    dx: complex
    dy: complex
    x: complex
    y: complex
    const: complex = 0.0

    def apply(self, f: GaussPoly2D) -> GaussPoly2D:
        terms = [
            (self.dx, f.deriv_x),
            (self.dy, f.deriv_y),
            (self.x, f.mul_x),
            (self.y, f.mul_y),
        ]
        out = f.scale(self.const)
        for coeff, action in terms:
            if coeff:
                out = out + action().scale(coeff)
        return out.trimmed()

    def adjoint(self) -> "DiffOp2D":
        return DiffOp2D(-np.conj(self.dx), -np.conj(self.dy), np.conj(self.x), np.conj(self.y), np.conj(self.const))


Operator = FockOp | DiffOp1D | DiffOp2D
Member = FockVec | GaussPoly | GaussPoly2D | Modulated


# --- member arithmetic ----------------------------------------------------------------


def inner(f: Member, g: Member) -> complex:
    """⟨f, g⟩ for any pair of family members of the same representation."""
    if isinstance(f, FockVec) and isinstance(g, FockVec):
        return f.inner(g)
    if isinstance(f, GaussPoly2D) and isinstance(g, GaussPoly2D):
        return inner_product_2d(f, g)
    if isinstance(f, GaussPoly) and isinstance(g, GaussPoly):
        return inner_product(f, g)
    if isinstance(f, (GaussPoly, Modulated)) and isinstance(g, (GaussPoly, Modulated)):
        return quad_inner_product(f, g)
    raise DomainError(f"No inner product between {type(f).__name__} and {type(g).__name__}")


def member_norm(f: Member) -> float:
    return float(np.sqrt(max(inner(f, f).real, 0.0)))


def apply_op(op: Operator, f: Member) -> Member:
    if isinstance(op, FockOp):
        return op @ f
    return op.apply(f)


def scale(f: Member, s: complex) -> Member:
    return f.scale(s)


def subtract(f: Member, g: Member) -> Member:
    if isinstance(f, Modulated):
        if f.factor is not g.factor:
            raise DomainError("Cannot subtract members with different modulations")
        return f.with_base(f.base - g.base)
    return f - g


# --- the system -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BiorthSystem:
    """Operator pairs per mode plus the two eigenfamilies they generate.

    ``lowering``/``raising`` hold one operator per mode (one for 1D and Fock
    models, two for the Landau-level model); ``occupations[i]`` gives the mode
    quanta of family member i. ``reference_overlap(n, m)`` is the closed form
    of ⟨Ψ_n, φ_m⟩. Operators are None for families defined by expansion only.
    """

    name: str
    rep: Rep
    params: ModelParams
    lowering: tuple[Operator | None, ...]
    raising: tuple[Operator | None, ...]
    phi: tuple[Member, ...]
    psi: tuple[Member, ...]
    reference_overlap: Callable[[int, int], complex]
    occupations: tuple[tuple[int, ...], ...]
    extras: Mapping[str, Any] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.phi) != len(self.psi) or len(self.phi) != len(self.occupations):
            raise DomainError(
                f"Family lengths differ: phi={len(self.phi)}, psi={len(self.psi)}, occupations={len(self.occupations)}"
            )
        kinds = {type(m) for m in self.phi + self.psi}
        allowed = {
            Rep.FOCK: {FockVec},
            Rep.COORD1D: {GaussPoly, Modulated},
            Rep.COORD2D: {GaussPoly2D},
        }[self.rep]
        if not kinds <= allowed:
            raise DomainError(f"Members {kinds} inconsistent with representation {self.rep.value}")

    def __len__(self) -> int:
        return len(self.phi)

    @property
    def A(self) -> Operator | None:
        return self.lowering[0]

    @property
    def B(self) -> Operator | None:
        return self.raising[0]

    @property
    def modes(self) -> int:
        return len(self.lowering)

    @property
    def fock_dim(self) -> int | None:
        return self.phi[0].dim if self.rep == Rep.FOCK else None

    @property
    def has_operators(self) -> bool:
        return all(op is not None for op in self.lowering + self.raising)

    def overlap(self, n: int, m: int) -> complex:
        """⟨Ψ_n, φ_m⟩ computed from the families."""
        return inner(self.psi[n], self.phi[m])

    def normalization(self, n: int) -> complex:
        return complex(self.reference_overlap(n, n))

    def index_of(self, occupation: tuple[int, ...]) -> int:
        return self.occupations.index(tuple(occupation))
