"""Constructors for the one-mode pseudo-bosonic models.

Each constructor returns a BiorthSystem holding the operator pair, the two
eigenfamilies and the closed-form overlap of the model's own normalization
convention.
"""

import logging
from dataclasses import replace

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import eval_legendre, gammaln
from scipy.stats import poisson

from src.errors import DomainError
from src.fockrep import FockOp, FockVec, coherent_vector, identity, ladder, matrix_exp
from src.gaussmath import (
    GaussPoly,
    Modulated,
    gauss_hermite_rule,
    hermite,
    hermite_function,
    pn_family,
)
from src.systems import (
    BiorthSystem,
    DiffOp1D,
    ExtOscParams,
    PhiSpec,
    Rep,
    RhoSpec,
    RieszParams,
    ShiftedParams,
    SusyParams,
    SwansonParams,
    member_norm,
)

logger = logging.getLogger(__name__)

PROTECT_MARGIN = 10
TAIL_WARN = 1e-12
SQRT2 = np.sqrt(2.0)


def _delta(value: complex):
    value = complex(value)

    def reference(n: int, m: int) -> complex:
        return value if n == m else 0.0

    return reference


def _raise_family(start: FockVec, raise_op: FockOp, nmax: int) -> tuple[FockVec, ...]:
    """v_n = Rⁿ v_0 / √n!, built one step at a time."""
    family = [start]
    for n in range(1, nmax + 1):
        family.append((raise_op @ family[-1]).scale(1 / np.sqrt(n)))
    return tuple(family)


def _default_nmax(dim: int, nmax: int | None) -> int:
    nmax = dim // 3 if nmax is None else nmax
    if nmax >= dim - PROTECT_MARGIN:
        raise DomainError(f"nmax={nmax} too large for dim={dim}", field="nmax")
    return nmax


def coherent_tail(z: complex, dim: int) -> float:
    """Norm² of the coherent state |z⟩ above the truncation."""
    return float(poisson.sf(dim - 1, abs(complex(z)) ** 2))


# --- shifted and extended oscillator ------------------------------------------------------


def _shifted_system(alpha: complex, beta: complex, dim: int, nmax: int | None, name: str, params) -> BiorthSystem:
    if dim < 16:
        raise DomainError(f"dim must be at least 16, got {dim}", field="dim")
    nmax = _default_nmax(dim, nmax)
    alpha, beta = complex(alpha), complex(beta)
    protect = dim - PROTECT_MARGIN
    a, adag = ladder(dim, protect)
    one = identity(dim, protect)
    A = a - alpha * one
    B = adag - beta * one

    notes = []
    for label, z in (("phi_0", alpha), ("psi_0", np.conj(beta))):
        tail = coherent_tail(z, dim)
        if tail > TAIL_WARN:
            msg = f"{name}: tail mass of {label} above dim={dim} is {tail:.2e}"
            logger.warning(msg)
            notes.append(msg)

    phi = _raise_family(coherent_vector(alpha, dim), B, nmax)
    psi = _raise_family(coherent_vector(np.conj(beta), dim), A.dagger(), nmax)
    overlap = np.exp(alpha * beta - (abs(alpha) ** 2 + abs(beta) ** 2) / 2)
    logger.info(f"Built {name} system: dim={dim}, family length={nmax + 1}")
    return BiorthSystem(
        name=name,
        rep=Rep.FOCK,
        params=params,
        lowering=(A,),
        raising=(B,),
        phi=phi,
        psi=psi,
        reference_overlap=_delta(overlap),
        occupations=tuple((n,) for n in range(nmax + 1)),
        extras={"coordinate_shifts": (alpha, beta)},
        notes=tuple(notes),
    )


def shifted_model(alpha: complex, beta: complex, dim: int, nmax: int | None = None) -> BiorthSystem:
    """A = a − α, B = a† − β with φ₀ the coherent state |α⟩ and Ψ₀ = |β̄⟩."""
    return _shifted_system(alpha, beta, dim, nmax, "shifted", ShiftedParams(complex(alpha), complex(beta)))


def extended_oscillator(beta: float, dim: int, nmax: int | None = None) -> BiorthSystem:
    """H = β(B̂Â + γ_β) with Â = a − 1/β and B̂ = a† + 1/β."""
    params = ExtOscParams(beta)
    system = _shifted_system(1 / beta, -1 / beta, dim, nmax, "extended", params)
    a, adag = ladder(dim, system.A.protect)
    hamiltonian = beta * (system.B @ system.A + params.gamma * identity(dim, system.A.protect))
    intertwiner = matrix_exp((1 / beta) * (a + adag))
    extras = dict(system.extras)
    extras.update(
        hamiltonian=hamiltonian,
        reference_eigenvalues=tuple(beta * (k + params.gamma) for k in range(len(system))),
        intertwiner=intertwiner,
    )
    return replace(system, extras=extras)


# --- Swanson ------------------------------------------------------------------------------


def squeezed_vacuum(theta: float, dim: int, sign: int = -1) -> np.ndarray:
    """Coefficients solving c_{n+1} = sign·i·tanθ·√n/√(n+1)·c_{n−1}, c_0 = 1."""
    t = np.tan(theta)
    coeffs = np.zeros(dim, dtype=complex)
    coeffs[0] = 1.0
    for n in range(1, dim - 1):
        coeffs[n + 1] = sign * 1j * t * np.sqrt(n) / np.sqrt(n + 1) * coeffs[n - 1]
    return coeffs


def squeezed_closed_form(theta: float, k: int) -> complex:
    """c_{2k} = (−i tanθ)^k √((2k)!)/(2^k k!)."""
    log_mag = 0.5 * gammaln(2 * k + 1) - k * np.log(2.0) - gammaln(k + 1)
    return complex((-1j * np.tan(theta)) ** k * np.exp(log_mag))


def swanson_model(theta: float, nmax: int = 10, rep: Rep = Rep.FOCK, dim: int = 80) -> BiorthSystem:
    """H = ω(B A + ½) with A = cosθ a + i sinθ a†, B = cosθ a† + i sinθ a."""
    params = SwansonParams(theta, rep)
    if params.rep == Rep.COORD1D:
        return _swanson_coordinates(params, nmax)

    nmax = _default_nmax(dim, nmax)
    protect = dim - PROTECT_MARGIN
    a, adag = ladder(dim, protect)
    c, s = np.cos(theta), np.sin(theta)
    A = c * a + (1j * s) * adag
    B = c * adag + (1j * s) * a

    phi0 = FockVec(squeezed_vacuum(theta, dim, sign=-1))
    phi0 = phi0.scale(1 / phi0.norm())
    psi0 = FockVec(squeezed_vacuum(theta, dim, sign=+1))
    psi0 = psi0.scale(1 / np.conj(psi0.inner(phi0)))

    notes = []
    edge = float(np.sum(np.abs(phi0.coords[protect:]) ** 2))
    if edge > TAIL_WARN:
        msg = f"swanson: vacuum weight {edge:.2e} beyond the protected block at dim={dim}"
        logger.warning(msg)
        notes.append(msg)

    phi = _raise_family(phi0, B, nmax)
    psi = _raise_family(psi0, A.dagger(), nmax)
    hamiltonian = params.omega * (B @ A + 0.5 * identity(dim, protect))
    logger.info(f"Built swanson Fock system: theta={theta}, dim={dim}")
    return BiorthSystem(
        name="swanson",
        rep=Rep.FOCK,
        params=params,
        lowering=(A,),
        raising=(B,),
        phi=phi,
        psi=psi,
        reference_overlap=_delta(1.0),
        occupations=tuple((n,) for n in range(nmax + 1)),
        extras={
            "hamiltonian": hamiltonian,
            "reference_eigenvalues": tuple(params.omega * (n + 0.5) for n in range(nmax + 1)),
        },
        notes=tuple(notes),
    )


def _swanson_coordinates(params: SwansonParams, nmax: int) -> BiorthSystem:
    theta = params.theta
    rot = np.exp(1j * theta)
    n1 = np.exp(0.5j * theta) / np.pi**0.25
    n2 = np.exp(-0.5j * theta) / np.pi**0.25

    phi, psi = [], []
    for n in range(nmax + 1):
        norm = np.exp(-0.5 * (n * np.log(2.0) + gammaln(n + 1)))
        h = hermite(n)
        phi.append(GaussPoly(h(Polynomial([0, rot])) * (n1 * norm), a=rot**2 / 2))
        psi.append(GaussPoly(h(Polynomial([0, np.conj(rot)])) * (n2 * norm), a=np.conj(rot) ** 2 / 2))

    A = DiffOp1D(d=np.conj(rot) / SQRT2, x=rot / SQRT2)
    B = DiffOp1D(d=-np.conj(rot) / SQRT2, x=rot / SQRT2)
    logger.info(f"Built swanson coordinate system: theta={theta}, family length={nmax + 1}")
    return BiorthSystem(
        name="swanson",
        rep=Rep.COORD1D,
        params=params,
        lowering=(A,),
        raising=(B,),
        phi=tuple(phi),
        psi=tuple(psi),
        reference_overlap=_delta(1.0),
        occupations=tuple((n,) for n in range(nmax + 1)),
        extras={
            "normalization": (n1, n2),
            "reference_eigenvalues": tuple(params.omega * (n + 0.5) for n in range(nmax + 1)),
        },
    )


def swanson_norm_fit(system: BiorthSystem) -> dict:
    """Compare ‖φ_n‖² with the Legendre growth P_n(1/cos 2θ).

    Returns the largest deviation of ‖φ_n‖²/‖φ₀‖² from P_n(1/cos 2θ), the
    fitted prefactor ‖φ_n‖²/(|N₁|² P_n), and the two candidate closed forms.
    """
    if system.rep != Rep.COORD1D or system.name != "swanson":
        raise DomainError("Norm fit needs the coordinate Swanson system")
    theta = system.params.theta
    n1, _ = system.extras["normalization"]
    u = 1 / np.cos(2 * theta)
    norms = np.array([member_norm(f) ** 2 for f in system.phi])
    legendre_values = np.array([eval_legendre(n, u) for n in range(len(norms))])
    ratios = norms / norms[0]
    prefactors = norms / (abs(n1) ** 2 * legendre_values)
    return {
        "ratio_max_rel_dev": float(np.max(np.abs(ratios - legendre_values) / legendre_values)),
        "fitted_prefactor": float(np.mean(prefactors)),
        "prefactor_spread": float(np.ptp(prefactors)),
        "sqrt_pi_over_cos": float(np.sqrt(np.pi * u)),
        "printed_cos_form": float(np.cos(np.pi * u)),
    }


# --- supersymmetric family ----------------------------------------------------------------


def _phi_modulations(phi_spec: PhiSpec):
    def decay(x):
        return np.exp(-phi_spec.value(x))

    def growth(x):
        return np.exp(phi_spec.value(x))

    def decay_log(x):
        return -phi_spec.deriv(x)

    def growth_log(x):
        return phi_spec.deriv(x)

    return (decay, decay_log), (growth, growth_log)


def susy_model(params: SusyParams, nmax: int = 10) -> BiorthSystem:
    """a = (∂ + W_a)/√2, b = (−∂ + W_b)/√2 with W_a + W_b = 2x + α.

    Example 1 takes W_a = x; Example 2 adds a bounded Φ′ to W_a and removes it
    from W_b, so φ_n carries e^{−Φ} and Ψ_n carries e^{+Φ}. For imaginary α
    the dual family is the complex conjugate of the real-α formula.
    """
    alpha, beta = complex(params.alpha), complex(params.beta)
    polys = pn_family(alpha, nmax)

    phi, psi = [], []
    for n, p in enumerate(polys):
        norm = np.exp(-0.5 * (n * np.log(2.0) + gammaln(n + 1)))
        phi.append(GaussPoly(p * norm, a=0.5))
        if params.imaginary:
            conj_p = Polynomial(np.conj(np.asarray(p.coef)))
            psi.append(GaussPoly(conj_p * norm, a=0.5, b=np.conj(alpha), c=np.conj(beta)))
        else:
            psi.append(GaussPoly(p * norm, a=0.5, b=alpha, c=beta))

    coupling = 0.0
    potential = None
    if params.example == 2:
        (decay, decay_log), (growth, growth_log) = _phi_modulations(params.phi)
        label = f"phi:{params.phi.kind}"
        phi = [Modulated(f, decay, decay_log, label) for f in phi]
        psi = [Modulated(f, growth, growth_log, label) for f in psi]
        coupling = 1 / SQRT2
        potential = params.phi.deriv

    lower = DiffOp1D(d=1 / SQRT2, x=1 / SQRT2, potential_coeff=coupling, potential=potential)
    upper = DiffOp1D(d=-1 / SQRT2, x=1 / SQRT2, const=alpha / SQRT2, potential_coeff=-coupling, potential=potential)

    beta_term = beta if params.imaginary else np.conj(beta)
    overlap = np.sqrt(np.pi) * np.exp(alpha**2 / 4 - beta_term)

    phi_spec = params.phi if params.example == 2 else PhiSpec()

    def metric_symbol(x):
        x = np.asarray(x, dtype=float)
        return np.exp(np.real(2 * phi_spec.value(x) - alpha * x - beta))

    logger.info(f"Built susy example {params.example}: alpha={alpha}, family length={nmax + 1}")
    return BiorthSystem(
        name="susy",
        rep=Rep.COORD1D,
        params=params,
        lowering=(lower,),
        raising=(upper,),
        phi=tuple(phi),
        psi=tuple(psi),
        reference_overlap=_delta(overlap),
        occupations=tuple((n,) for n in range(nmax + 1)),
        extras={"metric_symbol": metric_symbol},
    )


# --- multiplication model -------------------------------------------------------------------


def _certify_rho(rho: RhoSpec) -> None:
    lo, hi = rho.bounds()
    grid = np.concatenate([gauss_hermite_rule(128).nodes, np.linspace(-20.0, 20.0, 401)])
    mags = np.abs(rho.value(grid))
    if np.min(mags) < lo * (1 - 1e-12) or np.max(mags) > hi * (1 + 1e-12):
        raise DomainError(
            f"|rho| leaves the certified band [{lo}, {hi}] on the quadrature grid", field="rho"
        )


def riesz_mult_model(rho: RhoSpec, nmax: int = 11) -> BiorthSystem:
    """φ_n = ρ ê_n and Ψ_n = ρ ê_n/|ρ|² from the Hermite functions ê_n."""
    _certify_rho(rho)

    def direct(x):
        return rho.value(x)

    def dual(x):
        r = rho.value(x)
        return r / np.abs(r) ** 2

    def phase(x):
        r = rho.value(x)
        return r / np.abs(r)

    label = f"rho:{rho.kind}"
    basis = [hermite_function(n) for n in range(nmax + 1)]
    phi = tuple(Modulated(e, direct, label=label) for e in basis)
    psi = tuple(Modulated(e, dual, label=label) for e in basis)

    def metric_symbol(x):
        return np.abs(rho.value(np.asarray(x, dtype=float))) ** 2

    logger.info(f"Built multiplication model with rho={rho.kind}, family length={nmax + 1}")
    return BiorthSystem(
        name="riesz_mult",
        rep=Rep.COORD1D,
        params=RieszParams(rho),
        lowering=(None,),
        raising=(None,),
        phi=phi,
        psi=psi,
        reference_overlap=_delta(1.0),
        occupations=tuple((n,) for n in range(nmax + 1)),
        extras={
            "metric_symbol": metric_symbol,
            "orthonormal_family": tuple(Modulated(e, phase, label=label) for e in basis),
        },
        notes=("ladder operators act through the expansion in ê_n and are not local",),
    )
