"""
Grade periódica uniforme no toro unitário e operadores de diferenças finitas.

Convenção de índices: eixo 0 = i (coordenada ξ), eixo 1 = j (coordenada η).
O nó (i + n, j) é o mesmo nó (i, j); a emenda periódica não é duplicada.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from apps.core.exceptions import GridError

logger = logging.getLogger('core')

MIN_NODES = 8


@dataclass(frozen=True)
class ComputationalGrid:
    """Grade n×n com espaçamento h = 1/n sobre Ω_c = [0, 1)²."""
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < MIN_NODES:
            raise GridError(f"A grade precisa de pelo menos {MIN_NODES} nós por lado (recebido n={self.n})")

    @property
    def h(self):
        return 1.0 / self.n

    @property
    def shape(self):
        return (self.n, self.n)

    def nodes(self):
        """Coordenadas (ξ, η) de todos os nós, cada uma com forma (n, n)."""
        s = np.arange(self.n) * self.h
        return np.meshgrid(s, s, indexing='ij')

    def node_array(self):
        """Nós empilhados com forma (n, n, 2)."""
        xi, eta = self.nodes()
        return np.stack([xi, eta], axis=-1)

    def wrap(self, i, j):
        return i % self.n, j % self.n


@dataclass(frozen=True)
class PeriodicScalarField:
    """Valores reais por nó: portador discreto de φ, ρ∘x e resíduos."""
    grid: ComputationalGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridError(f"Campo com forma {values.shape}, esperado {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise GridError("Campo periódico com valores não finitos")
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid, func):
        """Amostra func(ξ, η) (vetorizada) nos nós da grade."""
        xi, eta = grid.nodes()
        return cls(grid, np.broadcast_to(func(xi, eta), grid.shape).astype(float))

    def with_values(self, values):
        return PeriodicScalarField(self.grid, values)

    def mean(self):
        return float(self.values.mean())


class SymMat2(NamedTuple):
    """
    Matriz simétrica 2×2 [[a11, a12], [a12, a22]].

    Os componentes podem ser escalares ou arrays numpy de mesma forma; todas as
    operações são vetorizadas nó a nó. O termo fora da diagonal é guardado uma
    única vez, então a simetria é estrutural.
    """
    a11: object
    a12: object
    a22: object

    @classmethod
    def identity(cls, shape=()):
        return cls(np.ones(shape), np.zeros(shape), np.ones(shape))

    @classmethod
    def from_matrix(cls, m, tol=1e-8):
        """Converte uma matriz 2×2 (ou campo (..., 2, 2)) recusando assimetria."""
        m = np.asarray(m, dtype=float)
        asym = np.abs(m[..., 0, 1] - m[..., 1, 0])
        scale = np.maximum(1.0, np.abs(m).max(axis=(-2, -1)))
        if np.any(asym > tol * scale):
            raise GridError(f"Matriz não simétrica (assimetria máxima {float(asym.max()):.3e})")
        return cls(m[..., 0, 0], m[..., 0, 1], m[..., 1, 1])

    @classmethod
    def from_eigen(cls, lam1, e1, lam2):
        """λ₁e₁e₁ᵀ + λ₂e₂e₂ᵀ com e₂ ortogonal a e₁."""
        c, s = np.asarray(e1[0], dtype=float), np.asarray(e1[1], dtype=float)
        return cls(lam1 * c * c + lam2 * s * s,
                   (lam1 - lam2) * c * s,
                   lam1 * s * s + lam2 * c * c)

    def as_matrix(self):
        return np.stack([np.stack([self.a11, self.a12], axis=-1),
                         np.stack([self.a12, self.a22], axis=-1)], axis=-2)

    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a12

    def trace(self):
        return self.a11 + self.a22

    def scaled(self, c):
        return SymMat2(c * self.a11, c * self.a12, c * self.a22)

    def plus(self, other):
        return SymMat2(self.a11 + other.a11, self.a12 + other.a12, self.a22 + other.a22)

    def inverse(self):
        d = self.det()
        return SymMat2(self.a22 / d, -self.a12 / d, self.a11 / d)

    def square(self):
        """A·A (simétrica quando A é simétrica)."""
        return self.sandwich(SymMat2.identity(np.shape(self.a11)))

    def sandwich(self, middle):
        """A·B·A, simétrica para A e B simétricas."""
        a, b, c = self.a11, self.a12, self.a22
        p, q, r = middle.a11, middle.a12, middle.a22
        # (A·B) = [[ap+bq, aq+br], [bp+cq, bq+cr]]
        m11, m12 = a * p + b * q, a * q + b * r
        m21, m22 = b * p + c * q, b * q + c * r
        return SymMat2(m11 * a + m12 * b, m11 * b + m12 * c, m21 * b + m22 * c)

    def apply(self, v):
        """Produto matriz-vetor com v = (v1, v2)."""
        return (self.a11 * v[0] + self.a12 * v[1], self.a12 * v[0] + self.a22 * v[1])

    def at(self, index):
        """Extrai o nó `index` de um campo de matrizes."""
        return SymMat2(float(self.a11[index]), float(self.a12[index]), float(self.a22[index]))


def _as_values(f):
    return f.values if isinstance(f, PeriodicScalarField) else np.asarray(f, dtype=float)


def _spacing(f):
    if isinstance(f, PeriodicScalarField):
        return f.grid.h
    return 1.0 / np.shape(f)[0]


def gradient_fd(f):
    """
    Gradiente por diferenças centrais com periodicidade.

    Retorna array (n, n, 2) com (∂f/∂ξ, ∂f/∂η); segunda ordem para f suave.
    """
    v, h = _as_values(f), _spacing(f)
    d_xi = (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2.0 * h)
    d_eta = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2.0 * h)
    return np.stack([d_xi, d_eta], axis=-1)


def hessian_fd(f):
    """Hessiana discreta (f_ξξ, f_ξη, f_ηη) como campo SymMat2."""
    v, h = _as_values(f), _spacing(f)
    f_xx = (np.roll(v, -1, axis=0) - 2.0 * v + np.roll(v, 1, axis=0)) / h**2
    f_yy = (np.roll(v, -1, axis=1) - 2.0 * v + np.roll(v, 1, axis=1)) / h**2
    pp = np.roll(np.roll(v, -1, axis=0), -1, axis=1)
    pm = np.roll(np.roll(v, -1, axis=0), 1, axis=1)
    mp = np.roll(np.roll(v, 1, axis=0), -1, axis=1)
    mm = np.roll(np.roll(v, 1, axis=0), 1, axis=1)
    f_xy = (pp - pm - mp + mm) / (4.0 * h**2)
    return SymMat2(f_xx, f_xy, f_yy)


def helmholtz_symbol(n, gamma):
    """Símbolo espectral 1 + γ·4π²|k|² para rfft2 numa grade n×n."""
    k0 = np.fft.fftfreq(n, d=1.0 / n)
    k1 = np.fft.rfftfreq(n, d=1.0 / n)
    k2 = k0[:, None] ** 2 + k1[None, :] ** 2
    return 1.0 + gamma * 4.0 * np.pi**2 * k2


def inv_helmholtz(f, gamma):
    """Resolve (I − γΔ)u = f no toro, modo a modo pela FFT."""
    if gamma < 0:
        raise GridError(f"γ precisa ser não negativo (recebido {gamma})")
    v = _as_values(f)
    if gamma == 0:
        u = v.copy()
    else:
        n = v.shape[0]
        u = np.fft.irfft2(np.fft.rfft2(v) / helmholtz_symbol(n, gamma), s=v.shape)
    if isinstance(f, PeriodicScalarField):
        return f.with_values(u)
    return u


def torus_distance(a, b):
    """Distância no toro unitário entre pontos (..., 2)."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d -= np.round(d)
    return np.hypot(d[..., 0], d[..., 1])
