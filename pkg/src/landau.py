"""Generalized Landau levels: two commuting pseudo-bosonic pairs in the plane."""

import logging

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gammaln

from src.gaussmath import GaussPoly2D
from src.systems import (
    BiorthSystem,
    DiffOp2D,
    GaussianMultiplier2D,
    GLLParams,
    Rep,
    member_norm,
    subtract,
)

logger = logging.getLogger(__name__)

LADDER_CONST = 1 / np.sqrt(2.0)


def gll_operators(k1: float, k2: float) -> dict[str, DiffOp2D]:
    """The lowering operators A′, A and raising operators B′, B."""
    c = LADDER_CONST
    return {
        "A_prime": DiffOp2D(dx=c, dy=-1j * c, x=c * (1 + 2 * k2) / 2, y=-1j * c * (1 - 2 * k1) / 2),
        "B_prime": DiffOp2D(dx=-c, dy=-1j * c, x=c * (1 - 2 * k2) / 2, y=1j * c * (1 + 2 * k1) / 2),
        "A": DiffOp2D(dx=-1j * c, dy=c, x=-1j * c * (1 + 2 * k2) / 2, y=c * (1 - 2 * k1) / 2),
        "B": DiffOp2D(dx=-1j * c, dy=-c, x=1j * c * (1 - 2 * k2) / 2, y=c * (1 + 2 * k1) / 2),
    }


def gll_vacua(k1: float, k2: float) -> tuple[GaussPoly2D, GaussPoly2D]:
    """φ₀₀ and Ψ₀₀ normalized so that ⟨Ψ₀₀, φ₀₀⟩ = 1."""
    norm = 1 / np.sqrt(2 * np.pi)
    phi00 = GaussPoly2D(np.array([[norm]]), ax=(1 + 2 * k2) / 4, ay=(1 - 2 * k1) / 4)
    psi00 = GaussPoly2D(np.array([[norm]]), ax=(1 - 2 * k2) / 4, ay=(1 + 2 * k1) / 4)
    return phi00, psi00


def gll_model(k1: float, k2: float, nmax: int = 4, lmax: int = 4) -> BiorthSystem:
    """φ_{n,l} = B′ⁿ Bˡ φ₀₀/√(n! l!) and Ψ_{n,l} = A′†ⁿ A†ˡ Ψ₀₀/√(n! l!).

    Also exposes the multiplication operators T_φ, T_Ψ mapping the standard
    Landau levels onto the two families and the metric S_φ = T_φ T_φ†.
    """
    params = GLLParams(k1, k2)
    ops = gll_operators(k1, k2)
    phi00, psi00 = gll_vacua(k1, k2)
    up_n, up_l = ops["B_prime"], ops["B"]
    dual_n, dual_l = ops["A_prime"].adjoint(), ops["A"].adjoint()

    phi, psi, occupations = [], [], []
    for n in range(nmax + 1):
        f, g = phi00, psi00
        for _ in range(n):
            f, g = up_n.apply(f), dual_n.apply(g)
        for l in range(lmax + 1):
            if l > 0:
                f, g = up_l.apply(f), dual_l.apply(g)
            norm = np.exp(-0.5 * (gammaln(n + 1) + gammaln(l + 1)))
            phi.append(f.scale(norm))
            psi.append(g.scale(norm))
            occupations.append((n, l))

    n_phi = n_psi = 1 / np.sqrt(2 * np.pi)
    t_phi = GaussianMultiplier2D(qx=-k2 / 2, qy=k1 / 2, const=np.sqrt(2 * np.pi) * n_phi)
    t_psi = GaussianMultiplier2D(qx=k2 / 2, qy=-k1 / 2, const=np.sqrt(2 * np.pi) * n_psi)
    s_phi = GaussianMultiplier2D(qx=-k2, qy=k1, const=n_phi / n_psi)

    logger.info(f"Built GLL system: k1={k1}, k2={k2}, {len(phi)} members")
    return BiorthSystem(
        name="gll",
        rep=Rep.COORD2D,
        params=params,
        lowering=(ops["A_prime"], ops["A"]),
        raising=(ops["B_prime"], ops["B"]),
        phi=tuple(phi),
        psi=tuple(psi),
        reference_overlap=lambda i, j: 1.0 if i == j else 0.0,
        occupations=tuple(occupations),
        extras={
            "T_phi": t_phi,
            "T_psi": t_psi,
            "S_phi": s_phi,
            "S_psi": s_phi.inverse(),
            "metric_symbol": lambda x, y: np.abs(s_phi(x, y)),
        },
    )


def hamiltonian_residuals(system: BiorthSystem, max_index: int = 3) -> dict[str, float]:
    """Largest ‖h′φ − (n−½)φ‖/‖φ‖ and ‖hφ − (l−½)φ‖/‖φ‖ over n, l ≤ max_index.

    h′ = B′A′ − ½ and h = BA − ½ are the two commuting Hamiltonians.
    """
    worst = {"h_prime": 0.0, "h": 0.0}
    for i, (n, l) in enumerate(system.occupations):
        if n > max_index or l > max_index:
            continue
        f = system.phi[i]
        scale_f = member_norm(f)
        for key, mode, quanta in (("h_prime", 0, n), ("h", 1, l)):
            A, B = system.lowering[mode], system.raising[mode]
            hf = B.apply(A.apply(f)) - f.scale(0.5)
            residual = member_norm(subtract(hf, f.scale(quanta - 0.5))) / scale_f
            worst[key] = max(worst[key], residual)
    return worst


# --- general superpotentials ---------------------------------------------------------


def _poly2d(coeffs) -> np.ndarray:
    return np.atleast_2d(np.asarray(coeffs, dtype=complex))


def _sub(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    shape = (max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1]))
    out = np.zeros(shape, dtype=complex)
    out[: a.shape[0], : a.shape[1]] += a
    out[: b.shape[0], : b.shape[1]] -= b
    return out


def _add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _sub(a, -b)


def _dx(c: np.ndarray) -> np.ndarray:
    return P.polyder(c, axis=0)


def _dy(c: np.ndarray) -> np.ndarray:
    return P.polyder(c, axis=1)


def superpotential_constraints(V1, V2, W1, W2) -> dict[str, float]:
    """Coefficient residuals of the compatibility conditions between the two pairs.

    Each polynomial is a 2D ascending coefficient array over xⁱyʲ. The pair
    conditions are W1_x = V2_y, W2_x = −V2_x, W1_y = −V1_y, W2_y = V1_x and the
    normalization conditions V1_x + V2_y = −1, W1_x + W2_y = −1.
    """
    V1, V2, W1, W2 = (_poly2d(p) for p in (V1, V2, W1, W2))
    minus_one = _poly2d([[-1.0]])

    def size(c: np.ndarray) -> float:
        return float(np.max(np.abs(c))) if c.size else 0.0

    return {
        "W1x_eq_V2y": size(_sub(_dx(W1), _dy(V2))),
        "W2x_eq_minus_V2x": size(_add(_dx(W2), _dx(V2))),
        "W1y_eq_minus_V1y": size(_add(_dy(W1), _dy(V1))),
        "W2y_eq_V1x": size(_sub(_dy(W2), _dx(V1))),
        "V_trace": size(_sub(_add(_dx(V1), _dy(V2)), minus_one)),
        "W_trace": size(_sub(_add(_dx(W1), _dy(W2)), minus_one)),
    }


def general_solution(V2, v1) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Complete a polynomial V₂ and a function v₁(y) to (V₁, V₂, W₁, W₂).

    V₁ = −x + v₁(y) − ∫∂_yV₂ dx, W₁ = −v₁(y) + ∫∂_yV₂ dx, W₂ = −y − V₂.
    """
    V2 = _poly2d(V2)
    v1 = np.asarray(v1, dtype=complex).reshape(1, -1)
    flux = P.polyint(_dy(V2), axis=0)
    V1 = _sub(_sub(v1, flux), _poly2d([[0.0], [1.0]]))
    W1 = _sub(flux, v1)
    W2 = _sub(-V2, _poly2d([[0.0, 1.0]]))
    return V1, V2, W1, W2


def monomial(n: int, k: int, coeff: complex = 1.0) -> np.ndarray:
    """coeff·xⁿyᵏ as a coefficient array."""
    c = np.zeros((n + 1, k + 1), dtype=complex)
    c[n, k] = coeff
    return c
