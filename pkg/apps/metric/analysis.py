"""
Relatório de anisotropia de uma malha: Q_s e Q_a por nó, resíduo de
equidistribuição, elipses circunscritas, sondas por região e alinhamento com
a normal prevista das feições.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from apps.core.grid import SymMat2, gradient_fd, torus_distance
from apps.density.densities import (
    ArclengthFromU,
    HessianFromU,
    LevelSet,
    ProductTrains,
    SingleTrain,
    theta_separable,
)
from apps.metric.tensors import (
    alignment_angle,
    ellipse_from_jacobian,
    predicted_metric_arclength,
    predicted_metric_hessian,
    predicted_metric_levelset,
    predicted_metric_product,
    predicted_metric_single,
    qa,
    qs,
)

logger = logging.getLogger('metric')

OFF_FEATURE = 1.5
TIE_TOLERANCE = 1e-9
CURVE_SAMPLES = 20


def predicted_metric_field(spec, x, theta):
    """M̃ nos pontos x (..., 2) conforme a variante da densidade."""
    x = np.asarray(x, dtype=float)
    rho = spec.evaluate(x)
    if isinstance(spec, SingleTrain):
        return predicted_metric_single(rho, theta, spec.train.direction)
    if isinstance(spec, ProductTrains):
        rho1, rho2 = spec.factors(x)
        theta1, theta2 = theta_separable(spec.first), theta_separable(spec.second)
        if spec.orthogonal:
            return predicted_metric_product(rho1, rho2, theta1, theta2, spec.first.direction)
        # sem ortogonalidade vale a feição dominante no nó
        first = predicted_metric_product(rho1, 1.0, theta1, theta2, spec.first.direction)
        second = predicted_metric_product(rho2, 1.0, theta2, theta1, spec.second.direction)
        dominant = rho1 >= rho2
        return SymMat2(*(np.where(dominant, p, q) for p, q in zip(first, second)))
    if isinstance(spec, LevelSet):
        g = spec.grad_psi(x)
        return predicted_metric_levelset(rho, theta, (g[..., 0], g[..., 1]))
    if isinstance(spec, ArclengthFromU):
        g = spec.u.gradient(x)
        return predicted_metric_arclength(rho, theta, (g[..., 0], g[..., 1]))
    if isinstance(spec, HessianFromU):
        return predicted_metric_hessian(rho, theta, spec.u.hessian(x))
    shape = np.shape(rho)
    return SymMat2(np.full(shape, float(theta)), np.zeros(shape), np.full(shape, float(theta)))


def jacobian_from_lift(lift):
    """
    J por diferenças centrais do levantamento tabelado x(ξ).

    O deslocamento x − ξ é periódico, então as diferenças atravessam a emenda
    sem correção. A parte antissimétrica é descartada e registrada no log.
    """
    lift = np.asarray(lift, dtype=float)
    n = lift.shape[0]
    s = np.arange(n) / n
    xi, eta = np.meshgrid(s, s, indexing='ij')
    dx = gradient_fd(lift[..., 0] - xi)
    dy = gradient_fd(lift[..., 1] - eta)
    j12, j21 = dx[..., 1], dy[..., 0]
    asym = float(np.abs(j12 - j21).max())
    logger.info(f"Jacobiano por diferenças finitas: assimetria máxima {asym:.3e} (simetrizado)")
    return SymMat2(1.0 + dx[..., 0], 0.5 * (j12 + j21), 1.0 + dy[..., 1])


@dataclass(frozen=True)
class Probe:
    name: str
    i: int
    j: int
    x: float
    y: float
    rho: float
    qs: float
    angle: float = None

    def to_document(self):
        doc = {'name': self.name, 'i': self.i, 'j': self.j, 'x': self.x, 'y': self.y,
               'rho': self.rho, 'qs': self.qs}
        if self.angle is not None:
            doc['angle'] = self.angle
        return doc


@dataclass
class AnisotropyReport:
    theta: float
    n: int
    mode: str
    lift: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    qs_field: np.ndarray = field(repr=False)
    qa_field: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)
    ellipses: object = field(repr=False)
    qs_feature: float = 1.0
    qs_background: float = 1.0
    probes: list = field(default_factory=list)
    alignment: dict = None
    residual_max: float = 0.0
    residual_cv: float = 0.0
    steps: int = 0
    converged: bool = True

    @property
    def qa_min(self):
        return float(self.qa_field.min())

    @property
    def qa_max(self):
        return float(self.qa_field.max())

    def probe(self, name):
        for probe in self.probes:
            if probe.name == name:
                return probe
        raise KeyError(name)

    def to_document(self):
        qs_doc = {
            'feature': self.qs_feature,
            'background': self.qs_background,
            'probes': [probe.to_document() for probe in self.probes],
        }
        if self.alignment is not None:
            qs_doc['alignment'] = self.alignment
        return {
            'theta': self.theta,
            'n': self.n,
            'mode': self.mode,
            'qs': qs_doc,
            'qa': {'min': self.qa_min, 'max': self.qa_max},
            'residual': {'max': self.residual_max, 'cv': self.residual_cv},
            'steps': self.steps,
            'converged': self.converged,
        }


def _select(score, competitor=None, mask=None):
    """
    Nó de máximo de `score` dentro de `mask`.

    Só empates até TIE_TOLERANCE relativo contam como máximo; entre eles vence o de
    menor `competitor`.
    """
    if mask is None or not mask.any():
        if mask is not None:
            logger.warning("Nenhum nó fora da feição concorrente; usando a grade inteira")
        mask = np.ones(score.shape, dtype=bool)
    best = score[mask].max()
    candidates = mask & (score >= best - TIE_TOLERANCE * abs(best))
    if competitor is None:
        ranking = np.where(candidates, score, -np.inf)
        return np.unravel_index(int(np.argmax(ranking)), score.shape)
    ranking = np.where(candidates, competitor, np.inf)
    return np.unravel_index(int(np.argmin(ranking)), score.shape)


def _probe(name, index, report_data, J=None, direction=None):
    lift, rho, qs_field = report_data
    point = lift[index] - np.floor(lift[index])
    angle = None
    if direction is not None:
        angle = float(alignment_angle(J.at(index), direction))
    return Probe(name=name, i=int(index[0]), j=int(index[1]), x=float(point[0]), y=float(point[1]),
                 rho=float(rho[index]), qs=float(qs_field[index]), angle=angle)


def _probes(spec, J, data):
    """Sondas por região; as que ficam sobre uma única feição levam o ângulo de alinhamento."""
    lift, rho, _ = data
    background = np.unravel_index(int(np.argmin(rho)), rho.shape)
    if isinstance(spec, ProductTrains):
        rho1, rho2 = spec.factors(lift)
        first = _select(rho1, rho2, rho2 < OFF_FEATURE)
        second = _select(rho2, rho1, rho1 < OFF_FEATURE)
        return [
            _probe('first_feature', first, data, J, spec.first.direction),
            _probe('second_feature', second, data, J, spec.second.direction),
            _probe('intersection', _select(rho), data),
            _probe('background', background, data),
        ]
    direction = spec.train.direction if isinstance(spec, SingleTrain) else None
    return [
        _probe('feature', _select(rho), data, J, direction),
        _probe('background', background, data),
    ]


def _curve_alignment(spec, lift, J):
    """Ângulos nos nós cujas imagens estão mais próximas de amostras da curva Ψ = 0."""
    reduced = lift - np.floor(lift)
    angles = []
    for point in spec.curve_points(CURVE_SAMPLES):
        index = np.unravel_index(int(np.argmin(torus_distance(reduced, point))), reduced.shape[:2])
        g = spec.grad_psi(reduced[index])
        angles.append(float(alignment_angle(J.at(index), (g[0], g[1]))))
    return angles


def analyze_mesh(spec, lift, J, theta, mode, ellipse_scale=None, steps=0, converged=True):
    """
    Monta o AnisotropyReport de uma malha dada pelo levantamento `lift` (n, n, 2)
    e pelo campo de Jacobianos J (SymMat2 com componentes (n, n)).
    """
    lift = np.asarray(lift, dtype=float)
    n = lift.shape[0]
    scale = 0.5 / n if ellipse_scale is None else float(ellipse_scale)

    rho = spec.evaluate(lift)
    mass = rho * J.det()
    residual = mass / theta - 1.0
    qs_field = qs(J)
    qa_field = qa(J, predicted_metric_field(spec, lift, theta))
    reduced = lift - np.floor(lift)
    ellipses = ellipse_from_jacobian(J, (reduced[..., 0], reduced[..., 1]), scale)

    data = (lift, rho, qs_field)
    probes = _probes(spec, J, data)
    feature = probes[2] if isinstance(spec, ProductTrains) else probes[0]

    angles = [probe.angle for probe in probes if probe.angle is not None]
    if isinstance(spec, LevelSet):
        angles = _curve_alignment(spec, lift, J)
    alignment = {'max_angle': max(angles), 'angles': angles} if angles else None

    report = AnisotropyReport(
        theta=float(theta),
        n=n,
        mode=mode,
        lift=lift,
        rho=rho,
        qs_field=qs_field,
        qa_field=qa_field,
        residual=residual,
        ellipses=ellipses,
        qs_feature=feature.qs,
        qs_background=probes[-1].qs,
        probes=probes,
        alignment=alignment,
        residual_max=float(np.abs(residual).max()),
        residual_cv=float(mass.std() / mass.mean()),
        steps=steps,
        converged=converged,
    )
    logger.info(
        f"Análise ({mode}, n={n}): Q_s feição={report.qs_feature:.4f}, fundo={report.qs_background:.4f}, "
        f"Q_a ∈ [{report.qa_min:.4f}, {report.qa_max:.4f}], resíduo máximo={report.residual_max:.3e}"
    )
    return report
