"""
Densidades escalares analíticas ρ(x) > 0, duplamente periódicas, e suas
constantes de normalização θ.

As variantes aditivas (trens de choque e curva de nível) satisfazem ρ ≥ 1.
Todas as avaliações aceitam pontos com forma (..., 2) e não precisam que x
esteja reduzido a [0, 1)².
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from apps.core.exceptions import DensityError
from apps.density.ufunctions import UFunction

logger = logging.getLogger('density')

PROBE_NODES = 256
DEFAULT_QUADRATURE = 512
SEPARABLE_QUADRATURE = 4096
MIN_QUADRATURE = 64


def sech2(z):
    """sech²(z) sem overflow para |z| grande."""
    e = np.exp(-2.0 * np.abs(z))
    return 4.0 * e / (1.0 + e) ** 2


def _unit(direction, field_name):
    e = np.asarray(direction, dtype=float)
    if e.shape != (2,):
        raise DensityError("A direção precisa ter duas componentes", field=field_name)
    norm = math.hypot(e[0], e[1])
    if abs(norm - 1.0) > 1e-12:
        raise DensityError(f"A direção precisa ser unitária (‖e‖ = {norm:.15g})", field=field_name)
    return (float(e[0]), float(e[1]))


@dataclass(frozen=True)
class ShockTrain:
    """
    ρ₁(x′) = 1 + A·Σ_m Σ_n sech²(k(s·x′ − c_m − n)), com x′ = x·e.

    A soma em n percorre as translações inteiras necessárias para a
    periodicidade dupla; translações a mais de `window` períodos do ponto
    avaliado são desprezadas (cauda abaixo da precisão dupla).
    """
    amplitude: float
    sharpness: float
    direction: tuple
    scale: float
    offsets: tuple = (0.0,)

    def __post_init__(self):
        if self.amplitude < 0:
            raise DensityError("A amplitude do trem de choques não pode ser negativa", field='amplitude')
        if self.sharpness <= 0:
            raise DensityError("A inclinação k precisa ser positiva", field='sharpness')
        if self.scale <= 0:
            raise DensityError("A escala s precisa ser positiva", field='scale')
        if not self.offsets:
            raise DensityError("O trem precisa de pelo menos um centro", field='offsets')
        object.__setattr__(self, 'direction', _unit(self.direction, 'direction'))
        object.__setattr__(self, 'offsets', tuple(float(c) for c in self.offsets))
        lattice = np.asarray(self.direction) * self.scale
        if np.any(np.abs(lattice - np.round(lattice)) > 1e-10):
            raise DensityError(
                f"s·e = ({lattice[0]:.6g}, {lattice[1]:.6g}) não é inteiro: o trem não é duplamente periódico",
                field='scale',
            )

    @property
    def window(self):
        """Número de translações de cada lado do período avaliado."""
        return max(3, math.ceil(20.0 / self.sharpness))

    @property
    def period(self):
        """Período de ρ₁ na coordenada girada x′."""
        return 1.0 / self.scale

    def coordinate(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., 0] * self.direction[0] + x[..., 1] * self.direction[1]

    def profile(self, xp):
        """ρ₁ avaliada na coordenada girada x′."""
        z = self.scale * np.asarray(xp, dtype=float)
        total = np.zeros_like(z)
        shifts = np.arange(-self.window, self.window + 1)
        for c in self.offsets:
            u = z - c
            u = u - np.round(u)
            total += sech2(self.sharpness * (u[..., None] - shifts)).sum(axis=-1)
        return 1.0 + self.amplitude * total

    def antiderivative(self, xp):
        """
        R(x′) = ∫₀^{x′} ρ₁ por tanh em forma fechada.

        Usa R(x′ + m/s) = R(x′) + θ·m/s para manter a soma de translações curta.
        """
        z = self.scale * np.asarray(xp, dtype=float)
        m = np.floor(z)
        zr = z - m
        k = self.sharpness
        shifts = np.arange(-self.window - 1, self.window + 2)
        acc = np.zeros_like(z)
        for c in self.offsets:
            c = c - math.floor(c)
            base = np.tanh(k * (-c - shifts))
            acc += (np.tanh(k * (zr[..., None] - c - shifts)) - base).sum(axis=-1)
        # trecho [0, m/s] vale exatamente m·θ/s pela soma telescópica
        return (zr + self.amplitude / k * acc + m * self.theta_closed_form()) / self.scale

    def theta_closed_form(self):
        """Média de ρ₁ num período: 1 + 2·A·(nº de centros)/k."""
        return 1.0 + 2.0 * self.amplitude * len(self.offsets) / self.sharpness

    def evaluate(self, x):
        return self.profile(self.coordinate(x))

    def to_document(self):
        return {
            'amplitude': self.amplitude,
            'sharpness': self.sharpness,
            'direction': list(self.direction),
            'scale': self.scale,
            'offsets': list(self.offsets),
        }


@dataclass(frozen=True)
class DensitySpec:
    """Base das densidades; as subclasses definem `variant` e `evaluate`."""
    variant = 'abstract'

    def __post_init__(self):
        self._validate_positive()

    def evaluate(self, x):
        raise NotImplementedError

    def _validate_positive(self):
        nodes = (np.arange(PROBE_NODES) + 0.5) / PROBE_NODES
        xx, yy = np.meshgrid(nodes, nodes, indexing='ij')
        values = self.evaluate(np.stack([xx, yy], axis=-1))
        if not np.all(np.isfinite(values)) or values.min() <= 0:
            raise DensityError(f"A densidade {self.variant} não é estritamente positiva (mínimo {values.min():.6g})")

    def to_document(self):
        return {'variant': self.variant}


@dataclass(frozen=True)
class Uniform(DensitySpec):
    variant = 'uniform'

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape[:-1])


@dataclass(frozen=True)
class SingleTrain(DensitySpec):
    """Família de choques lineares paralelos: ρ(x) = ρ₁(x·e₁)."""
    train: ShockTrain
    variant = 'single_train'

    def evaluate(self, x):
        return self.train.evaluate(x)

    @property
    def trains(self):
        return (self.train,)

    def to_document(self):
        return {'variant': self.variant, 'train': self.train.to_document()}


@dataclass(frozen=True)
class ProductTrains(DensitySpec):
    """ρ(x) = ρ₁(x·e₁)·ρ₂(x·e₂)."""
    first: ShockTrain
    second: ShockTrain
    variant = 'product_trains'

    @property
    def trains(self):
        return (self.first, self.second)

    @property
    def orthogonal(self):
        e1, e2 = self.first.direction, self.second.direction
        return abs(e1[0] * e2[0] + e1[1] * e2[1]) <= 1e-12

    def factors(self, x):
        return self.first.evaluate(x), self.second.evaluate(x)

    def evaluate(self, x):
        rho1, rho2 = self.factors(x)
        return rho1 * rho2

    def to_document(self):
        return {'variant': self.variant,
                'trains': [self.first.to_document(), self.second.to_document()]}


@dataclass(frozen=True)
class LevelSet(DensitySpec):
    """
    Choque ao longo da curva Ψ(x) = 0, Ψ = y − a·sin(2π·m·x + fase) − c:
    ρ = 1 + A·Σ_n sech²(k(Ψ − n)).
    """
    amplitude: float = 50.0
    sharpness: float = 50.0
    wave_amplitude: float = 0.2
    wavenumber: int = 1
    phase: float = 0.0
    offset: float = 0.5
    variant = 'level_set'

    def __post_init__(self):
        if self.amplitude < 0:
            raise DensityError("A amplitude não pode ser negativa", field='amplitude')
        if self.sharpness <= 0:
            raise DensityError("A inclinação k precisa ser positiva", field='sharpness')
        if int(self.wavenumber) != self.wavenumber:
            raise DensityError("O número de onda precisa ser inteiro", field='wavenumber')
        super().__post_init__()

    @property
    def window(self):
        return max(3, math.ceil(20.0 / self.sharpness))

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        return (x[..., 1] - self.wave_amplitude * np.sin(2.0 * np.pi * self.wavenumber * x[..., 0] + self.phase)
                - self.offset)

    def grad_psi(self, x):
        x = np.asarray(x, dtype=float)
        w = 2.0 * np.pi * self.wavenumber
        gx = -self.wave_amplitude * w * np.cos(w * x[..., 0] + self.phase)
        return np.stack([gx, np.ones_like(gx)], axis=-1)

    def curve_points(self, count):
        """`count` pontos igualmente espaçados em x sobre a curva Ψ = 0."""
        xs = np.arange(count) / count
        ys = self.wave_amplitude * np.sin(2.0 * np.pi * self.wavenumber * xs + self.phase) + self.offset
        return np.stack([xs, ys], axis=-1)

    def evaluate(self, x):
        psi = self.psi(x)
        u = psi - np.round(psi)
        shifts = np.arange(-self.window, self.window + 1)
        return 1.0 + self.amplitude * sech2(self.sharpness * (u[..., None] - shifts)).sum(axis=-1)

    def to_document(self):
        return {
            'variant': self.variant,
            'amplitude': self.amplitude,
            'sharpness': self.sharpness,
            'wave_amplitude': self.wave_amplitude,
            'wavenumber': self.wavenumber,
            'phase': self.phase,
            'offset': self.offset,
        }


@dataclass(frozen=True)
class ArclengthFromU(DensitySpec):
    """Densidade de comprimento de arco ρ = √(1 + α_h‖∇u‖²)."""
    u: UFunction = field(default_factory=UFunction)
    alpha_h: float = 1.0
    variant = 'arclength'

    def __post_init__(self):
        if self.alpha_h <= 0:
            raise DensityError("α_h precisa ser positivo", field='alpha_h')
        super().__post_init__()

    def evaluate(self, x):
        g = self.u.gradient(x)
        return np.sqrt(1.0 + self.alpha_h * (g[..., 0] ** 2 + g[..., 1] ** 2))

    def to_document(self):
        return {'variant': self.variant, 'alpha_h': self.alpha_h, 'u': self.u.to_document()}


@dataclass(frozen=True)
class HessianFromU(DensitySpec):
    """Densidade baseada na Hessiana ρ = √(1 + α_h(|u_xx| + |u_yy|))."""
    u: UFunction = field(default_factory=UFunction)
    alpha_h: float = 1.0
    variant = 'hessian'

    def __post_init__(self):
        if self.alpha_h <= 0:
            raise DensityError("α_h precisa ser positivo", field='alpha_h')
        super().__post_init__()

    def evaluate(self, x):
        uxx, _, uyy = self.u.hessian(x)
        return np.sqrt(1.0 + self.alpha_h * (np.abs(uxx) + np.abs(uyy)))

    def to_document(self):
        return {'variant': self.variant, 'alpha_h': self.alpha_h, 'u': self.u.to_document()}


def eval_density(spec, x):
    """ρ(x) para um ponto (2,) ou um array de pontos (..., 2)."""
    values = spec.evaluate(x)
    return float(values) if np.ndim(values) == 0 else values


def theta_2d(spec, q=DEFAULT_QUADRATURE):
    """θ = ∫_{Ω_p} ρ dx pela regra do trapézio periódica numa grade q×q."""
    if q < MIN_QUADRATURE:
        raise DensityError(f"A quadratura precisa de pelo menos {MIN_QUADRATURE} pontos por lado (recebido {q})")
    s = np.arange(q) / q
    xx, yy = np.meshgrid(s, s, indexing='ij')
    theta = float(spec.evaluate(np.stack([xx, yy], axis=-1)).mean())
    logger.debug(f"θ({spec.variant}) = {theta:.12g} com q={q}")
    return theta


def theta_separable(train, q=SEPARABLE_QUADRATURE):
    """θ₁ = média de ρ₁ sobre um período de x′ (trapézio periódico 1D)."""
    xp = np.arange(q) / q * train.period
    return float(train.profile(xp).mean())
