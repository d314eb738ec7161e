"""
Funções u(x) analíticas e periódicas usadas pelas densidades derivadas de u.

Cada função fornece valor, gradiente e Hessiana exatos; nenhuma derivada é
estimada numericamente.
"""

from dataclasses import dataclass

import numpy as np

from apps.core.exceptions import DensityError

KINDS = ('sine', 'tanh_front')


@dataclass(frozen=True)
class UFunction:
    """
    u(x) = a·g(w), w = 2π(p·x + q·y), com (p, q) inteiros.

    kind='sine':       g(w) = sin(w)
    kind='tanh_front': g(w) = tanh(k·sin(w))  (frente íngreme, ainda periódica)
    """
    kind: str = 'sine'
    amplitude: float = 1.0
    wave: tuple = (1, 0)
    sharpness: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DensityError(f"Tipo de função u desconhecido: {self.kind}", field='u.kind')
        p, q = self.wave
        if int(p) != p or int(q) != q:
            raise DensityError("O vetor de onda precisa ter componentes inteiras", field='u.wave')
        if (p, q) == (0, 0):
            raise DensityError("O vetor de onda não pode ser nulo", field='u.wave')
        if self.sharpness <= 0:
            raise DensityError("A inclinação precisa ser positiva", field='u.sharpness')
        object.__setattr__(self, 'wave', (int(p), int(q)))

    def _phase(self, x):
        x = np.asarray(x, dtype=float)
        p, q = self.wave
        return 2.0 * np.pi * (p * x[..., 0] + q * x[..., 1])

    def _derivatives(self, w):
        """g, g′, g″ em função da fase w."""
        a = self.amplitude
        if self.kind == 'sine':
            return a * np.sin(w), a * np.cos(w), -a * np.sin(w)
        k = self.sharpness
        t = np.tanh(k * np.sin(w))
        sech2 = 1.0 - t * t
        g1 = k * sech2 * np.cos(w)
        g2 = k * sech2 * (-2.0 * k * t * np.cos(w) ** 2 - np.sin(w))
        return a * t, a * g1, a * g2

    def value(self, x):
        return self._derivatives(self._phase(x))[0]

    def gradient(self, x):
        """∇u com forma (..., 2)."""
        _, g1, _ = self._derivatives(self._phase(x))
        p, q = self.wave
        c = 2.0 * np.pi
        return np.stack([g1 * c * p, g1 * c * q], axis=-1)

    def hessian(self, x):
        """Componentes (u_xx, u_xy, u_yy)."""
        _, _, g2 = self._derivatives(self._phase(x))
        p, q = self.wave
        c2 = (2.0 * np.pi) ** 2
        return g2 * c2 * p * p, g2 * c2 * p * q, g2 * c2 * q * q

    def to_document(self):
        return {
            'kind': self.kind,
            'amplitude': self.amplitude,
            'wave': list(self.wave),
            'sharpness': self.sharpness,
        }
