"""
Análise Jacobiano → tensor métrico, nó a nó.

Todas as funções aceitam SymMat2 com componentes escalares ou arrays numpy;
os Jacobianos tratados aqui são simétricos (aplicações de transporte ótimo).
"""

import math
from dataclasses import dataclass

import numpy as np

from apps.core.exceptions import NonPositiveMetric, SingularJacobian, ZeroGradient
from apps.core.grid import SymMat2

SINGULAR_TOL = 1e-14
GRADIENT_TOL = 1e-12


@dataclass(frozen=True)
class EigenPair:
    """λ₁ ≤ λ₂ com autovetores unitários e₁ ⊥ e₂ (componentes (x, y))."""
    lam1: object
    lam2: object
    e1: tuple
    e2: tuple

    def reconstruct(self):
        return SymMat2.from_eigen(self.lam1, self.e1, self.lam2)


@dataclass(frozen=True)
class EllipseRecord:
    """Elipse circunscrita: semi-eixos a ≥ b > 0, ângulo do eixo maior em (−π/2, π/2]."""
    center: tuple
    a: object
    b: object
    angle: object


def _canonical(vx, vy):
    """Primeira componente não negativa; empate decidido pela segunda."""
    flip = (vx < 0) | ((vx == 0) & (vy < 0))
    sign = np.where(flip, -1.0, 1.0)
    return vx * sign, vy * sign


def eig_sym2(m):
    """Autodecomposição fechada de uma simétrica 2×2; no ponto degenerado a base é (1,0), (0,1)."""
    a, b, c = (np.asarray(v, dtype=float) for v in m)
    mid = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    phi = 0.5 * np.arctan2(2.0 * b, a - c)
    degenerate = rad == 0
    # eixo do autovalor maior em phi; o menor é perpendicular
    e2x = np.where(degenerate, 0.0, np.cos(phi))
    e2y = np.where(degenerate, 1.0, np.sin(phi))
    e1x = np.where(degenerate, 1.0, -np.sin(phi))
    e1y = np.where(degenerate, 0.0, np.cos(phi))
    e1 = _canonical(e1x, e1y)
    e2 = _canonical(e2x, e2y)
    if np.ndim(mid) == 0:
        return EigenPair(float(mid - rad), float(mid + rad),
                         (float(e1[0]), float(e1[1])), (float(e2[0]), float(e2[1])))
    return EigenPair(mid - rad, mid + rad, e1, e2)


def _check_nonsingular(J):
    det = J.det()
    if np.any(np.abs(det) <= SINGULAR_TOL):
        raise SingularJacobian(f"Jacobiano singular (|det J| mínimo {float(np.min(np.abs(det))):.3e})")
    return det


def metric_from_jacobian(J, theta):
    """M = θ·J⁻ᵀJ⁻¹; autovalores θ/λ_i² nos autovetores de J."""
    det = J.det()
    if np.any(det <= SINGULAR_TOL):
        raise SingularJacobian(f"Jacobiano sem orientação positiva (det J mínimo {float(np.min(det)):.3e})")
    return J.inverse().square().scaled(theta)


def qs(J):
    """Q_s = tr(JᵀJ)/(2·det(JᵀJ)^{1/2}) = (σ₁/σ₂ + σ₂/σ₁)/2."""
    det = _check_nonsingular(J)
    frob = J.a11 ** 2 + 2.0 * J.a12 ** 2 + J.a22 ** 2
    return frob / (2.0 * np.abs(det))


def qa(J, M):
    """Q_a = tr(JᵀMJ)/(2·det(JᵀMJ)^{1/2}); vale 1 se e só se JᵀMJ for escalar."""
    if np.any(M.det() <= 0) or np.any(M.trace() <= 0):
        raise NonPositiveMetric("O tensor métrico precisa ser positivo definido")
    _check_nonsingular(J)
    A = J.sandwich(M)
    return A.trace() / (2.0 * np.sqrt(A.det()))


def predicted_metric_single(rho, theta, e1):
    """θ[I + (ρ²/θ² − 1)e₁e₁ᵀ]: autovalores ρ²/θ (em e₁) e θ (em e₁⊥)."""
    return SymMat2.from_eigen(rho ** 2 / theta, e1, theta)


def predicted_metric_product(rho1, rho2, theta1, theta2, e1):
    """(θ₂ρ₁²/θ₁)e₁e₁ᵀ + (θ₁ρ₂²/θ₂)e₂e₂ᵀ."""
    return SymMat2.from_eigen(theta2 * rho1 ** 2 / theta1, e1, theta1 * rho2 ** 2 / theta2)


def _normalized(v, tol=GRADIENT_TOL):
    vx, vy = np.asarray(v[0], dtype=float), np.asarray(v[1], dtype=float)
    norm = np.hypot(vx, vy)
    return vx, vy, norm


def predicted_metric_levelset(rho, theta, grad_psi):
    """Métrica de feição única com e₁ = ∇Ψ/‖∇Ψ‖ (normal à curva Ψ = 0)."""
    gx, gy, norm = _normalized(grad_psi)
    if np.any(norm <= GRADIENT_TOL):
        raise ZeroGradient("‖∇Ψ‖ nulo: normal da feição indefinida")
    return predicted_metric_single(rho, theta, (gx / norm, gy / norm))


def predicted_metric_arclength(rho, theta, grad_u):
    """θ[I + α∇u∇uᵀ], α = (ρ² − θ²)/(θ²‖∇u‖²); θI onde ∇u se anula."""
    gx, gy, norm = _normalized(grad_u)
    safe = np.where(norm > GRADIENT_TOL, norm, 1.0)
    alpha = np.where(norm > GRADIENT_TOL, (rho ** 2 - theta ** 2) / (theta ** 2 * safe ** 2), 0.0)
    return SymMat2(theta * (1.0 + alpha * gx * gx), theta * alpha * gx * gy, theta * (1.0 + alpha * gy * gy))


def matrix_abs(m):
    """|A| = |λ₁|e₁e₁ᵀ + |λ₂|e₂e₂ᵀ."""
    pair = eig_sym2(m)
    return SymMat2.from_eigen(np.abs(pair.lam1), pair.e1, np.abs(pair.lam2))


def predicted_metric_hessian(rho, theta, hessian_u):
    """θ[I + α|H(u)|], α = (ρ² − θ²)/(θ²(|u_xx| + |u_yy|)); θI onde a Hessiana se anula."""
    H = SymMat2(*hessian_u)
    weight = np.abs(H.a11) + np.abs(H.a22)
    safe = np.where(weight > GRADIENT_TOL, weight, 1.0)
    alpha = np.where(weight > GRADIENT_TOL, (rho ** 2 - theta ** 2) / (theta ** 2 * safe), 0.0)
    absH = matrix_abs(H)
    return SymMat2(theta * (1.0 + alpha * absH.a11), theta * alpha * absH.a12, theta * (1.0 + alpha * absH.a22))


def ellipse_from_jacobian(J, center, scale):
    """Semi-eixos scale·|λ_i| ao longo dos autovetores de J; ângulo do eixo maior."""
    if np.any(J.det() <= SINGULAR_TOL):
        raise SingularJacobian("Elipse indefinida para Jacobiano com det J ≤ 0")
    pair = eig_sym2(J)
    abs1, abs2 = np.abs(pair.lam1), np.abs(pair.lam2)
    major_is_2 = abs2 >= abs1
    vx = np.where(major_is_2, pair.e2[0], pair.e1[0])
    vy = np.where(major_is_2, pair.e2[1], pair.e1[1])
    angle = np.arctan2(vy, vx)
    angle = np.where(angle <= -math.pi / 2, angle + math.pi, angle)
    angle = np.where(angle > math.pi / 2, angle - math.pi, angle)
    a = scale * np.maximum(abs1, abs2)
    b = scale * np.minimum(abs1, abs2)
    if np.ndim(a) == 0:
        return EllipseRecord(tuple(float(c) for c in center), float(a), float(b), float(angle))
    return EllipseRecord(center, a, b, angle)


def alignment_angle(J, direction):
    """Ângulo (graus, em [0, 90]) entre o autovetor do menor autovalor de J e `direction`."""
    pair = eig_sym2(J)
    dx, dy, norm = _normalized(direction)
    if np.any(norm <= GRADIENT_TOL):
        raise ZeroGradient("Direção prevista nula")
    cosine = np.abs(pair.e1[0] * dx + pair.e1[1] * dy) / norm
    return np.degrees(np.arccos(np.clip(cosine, 0.0, 1.0)))
