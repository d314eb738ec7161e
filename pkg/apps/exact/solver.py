"""
Solução fechada da equação de Monge-Ampère para densidades separáveis ao longo
de feições lineares ortogonais.

Para ρ(x) = ρ₁(x·e₁)·ρ₂(x·e₂) a aplicação é
    x·e₁ = R₁⁻¹(θ₁ ξ·e₁),   x·e₂ = R₂⁻¹(θ₂ ξ·e₂),
com R_a a primitiva de ρ_a, e o Jacobiano é (θ₁/ρ₁)e₁e₁ᵀ + (θ₂/ρ₂)e₂e₂ᵀ.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from apps.core.exceptions import DensityError, TableError
from apps.core.grid import SymMat2
from apps.density.densities import ProductTrains, ShockTrain, SingleTrain, Uniform, theta_separable

logger = logging.getLogger('exact')

DEFAULT_TABLE_SAMPLES = 1000
MIN_TABLE_SAMPLES = 1000
NEWTON_STEPS = 4


@dataclass(frozen=True)
class CumulativeTable:
    """Amostras (x′_i, R(x′_i)), x′_i = L·i/N′, sobre [0, L]."""
    train: ShockTrain
    length: float
    xs: np.ndarray
    rs: np.ndarray

    @property
    def count(self):
        return len(self.xs) - 1

    @property
    def theta(self):
        """Inclinação média R(L)/L, usada na redução periódica."""
        return float(self.rs[-1] / self.length)

    @property
    def samples(self):
        return list(zip(self.xs.tolist(), self.rs.tolist()))


def table_length(train):
    """
    Menor múltiplo do período de ρ_a que cobre ξ·e_a para ξ ∈ [0, 1]².

    Para as feições diagonais (s = √2) dá L = √2.
    """
    span = abs(train.direction[0]) + abs(train.direction[1])
    periods = max(1, math.ceil(train.scale * span - 1e-9))
    return periods / train.scale


def build_R(train, samples=DEFAULT_TABLE_SAMPLES, length=None):
    """Tabela R(x′) = ∫₀^{x′} ρ pela primitiva tanh fechada em N′ + 1 pontos."""
    if samples < MIN_TABLE_SAMPLES:
        raise TableError(f"A tabela precisa de pelo menos {MIN_TABLE_SAMPLES} amostras (recebido {samples})")
    length = table_length(train) if length is None else float(length)
    xs = length * np.arange(samples + 1) / samples
    rs = train.antiderivative(xs)
    rs[0] = 0.0
    if not np.all(np.diff(rs) > 0):
        raise TableError("A tabela R não é estritamente crescente (ρ ≤ 0 ou parâmetros inválidos)")
    return CumulativeTable(train=train, length=length, xs=xs, rs=rs)


class InverseR:
    """
    R⁻¹ por interpolação cúbica monótona (PCHIP) nos pares (R(x′_i), x′_i).

    Os argumentos são reduzidos a [0, θL) pela equivariância
    R(x′ + L) = R(x′) + θL. O valor interpolado é refinado por passos de Newton
    contra a primitiva fechada, sem sair do intervalo entre nós que o contém.
    """

    def __init__(self, table, polish=True):
        if not np.all(np.diff(table.rs) > 0):
            raise TableError("Não é possível inverter uma tabela não monótona")
        self.table = table
        self.polish = polish
        self.period = float(table.rs[-1])
        self._spline = PchipInterpolator(table.rs, table.xs, extrapolate=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        table = self.table
        shift = np.floor(t / self.period)
        tr = np.clip(t - shift * self.period, 0.0, self.period)
        x = self._spline(tr)
        if self.polish and table.train.amplitude > 0:
            idx = np.clip(np.searchsorted(table.rs, tr), 1, table.count)
            lo, hi = table.xs[idx - 1], table.xs[idx]
            for _ in range(NEWTON_STEPS):
                x = np.clip(x - (table.train.antiderivative(x) - tr) / table.train.profile(x), lo, hi)
        return x + shift * table.length


def invert_R(table, polish=True):
    return InverseR(table, polish=polish)


def _uniform_axis(direction, scale):
    return ShockTrain(amplitude=0.0, sharpness=1.0, direction=direction, scale=scale)


@dataclass(frozen=True)
class SeparableSolution:
    """Par ortonormal (e₁, e₂), constantes θ₁, θ₂ e as inversas R₁⁻¹, R₂⁻¹."""
    first: ShockTrain
    second: ShockTrain
    theta1: float
    theta2: float
    inverse1: InverseR
    inverse2: InverseR

    def __post_init__(self):
        e1, e2 = self.e1, self.e2
        if abs(e1[0] * e2[0] + e1[1] * e2[1]) > 1e-12:
            raise DensityError("A solução exata exige feições ortogonais (e₁·e₂ = 0)")

    @property
    def e1(self):
        return self.first.direction

    @property
    def e2(self):
        return self.second.direction

    @property
    def theta(self):
        return self.theta1 * self.theta2

    @property
    def table1(self):
        return self.inverse1.table

    @property
    def table2(self):
        return self.inverse2.table


def build_separable(spec, samples=DEFAULT_TABLE_SAMPLES):
    """Monta a SeparableSolution de Uniform, SingleTrain ou ProductTrains ortogonal."""
    if isinstance(spec, Uniform):
        first, second = _uniform_axis((1.0, 0.0), 1.0), _uniform_axis((0.0, 1.0), 1.0)
    elif isinstance(spec, SingleTrain):
        first = spec.train
        e1 = first.direction
        second = _uniform_axis((e1[1], -e1[0]), first.scale)
    elif isinstance(spec, ProductTrains):
        if not spec.orthogonal:
            raise DensityError("Sem solução analítica para choques não ortogonais; use o modo pma")
        first, second = spec.first, spec.second
    else:
        raise DensityError(f"A densidade {spec.variant} não é separável; use o modo pma")

    theta1 = theta_separable(first) if first.amplitude > 0 else 1.0
    theta2 = theta_separable(second) if second.amplitude > 0 else 1.0
    inverse1 = invert_R(build_R(first, samples))
    inverse2 = invert_R(build_R(second, samples))
    logger.info(f"Solução separável montada: θ₁={theta1:.10g}, θ₂={theta2:.10g}, N′={samples}")
    return SeparableSolution(first, second, theta1, theta2, inverse1, inverse2)


def _rotated(sol, xi):
    xi = np.asarray(xi, dtype=float)
    e1, e2 = sol.e1, sol.e2
    xi1 = xi[..., 0] * e1[0] + xi[..., 1] * e1[1]
    xi2 = xi[..., 0] * e2[0] + xi[..., 1] * e2[1]
    return sol.inverse1(sol.theta1 * xi1), sol.inverse2(sol.theta2 * xi2)


def exact_lift(sol, xi):
    """Imagem não reduzida x = e₁x′ + e₂y′ (levantamento contínuo da aplicação)."""
    xp, yp = _rotated(sol, xi)
    e1, e2 = sol.e1, sol.e2
    return np.stack([e1[0] * xp + e2[0] * yp, e1[1] * xp + e2[1] * yp], axis=-1)


def exact_map(sol, xi):
    """Ponto físico x ∈ [0, 1)² imagem de ξ."""
    x = exact_lift(sol, xi)
    return x - np.floor(x)


def exact_jacobian(sol, xi):
    """J = (θ₁/ρ₁)e₁e₁ᵀ + (θ₂/ρ₂)e₂e₂ᵀ com ρ_a avaliada no ponto imagem."""
    xp, yp = _rotated(sol, xi)
    lam1 = sol.theta1 / sol.first.profile(xp)
    lam2 = sol.theta2 / sol.second.profile(yp)
    return SymMat2.from_eigen(lam1, sol.e1, lam2)


def exact_mesh(sol, grid):
    """Levantamento da aplicação em todos os nós, forma (n, n, 2)."""
    return exact_lift(sol, grid.node_array())


def exact_jacobian_field(sol, grid):
    return exact_jacobian(sol, grid.node_array())


def monge_ampere_residual(sol, spec, samples=10_000, rng=None):
    """max |ρ(x(ξ))·det J(ξ) − θ| / θ sobre pontos ξ aleatórios."""
    rng = np.random.default_rng() if rng is None else rng
    xi = rng.random((samples, 2))
    rho = spec.evaluate(exact_lift(sol, xi))
    det = exact_jacobian(sol, xi).det()
    residual = float(np.max(np.abs(rho * det - sol.theta)) / sol.theta)
    logger.debug(f"Resíduo de Monge-Ampère da solução exata: {residual:.3e} ({samples} pontos)")
    return residual
