"""
Monge-Ampère parabólico (PMA): relaxação explícita do potencial da malha
até o estado estacionário ρ(∇P)·H(P) = θ.

O potencial é P(ξ) = ½|ξ|² + φ(ξ) com φ periódica; a malha é x = ξ + ∇φ e o
Jacobiano é J = I + H(φ). Cada passo faz
    φ ← φ + dt·(I − γΔ)⁻¹(q − média(q)),   q = (ρ(x)·det J)^{1/2}.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from apps.core.exceptions import GridError, StepRejected
from apps.core.grid import ComputationalGrid, PeriodicScalarField, SymMat2, gradient_fd, hessian_fd, inv_helmholtz
from apps.density.densities import DEFAULT_QUADRATURE, theta_2d

logger = logging.getLogger('pma')

# depois de cv ≤ tol o laço segue até max|ρJ/θ − 1| ≤ RESIDUAL_FACTOR·tol,
# ou até o resíduo máximo passar PLATEAU_STEPS passos sem cair PLATEAU_GAIN
RESIDUAL_FACTOR = 1.0
PLATEAU_STEPS = 500
PLATEAU_GAIN = 1e-3


@dataclass(frozen=True)
class PmaParams:
    n: int = 60
    gamma: float = 0.1
    dt: float = 1e-3
    tol: float = 1e-2
    max_steps: int = 200_000
    dt_min: float = 1e-8
    quadrature: int = DEFAULT_QUADRATURE

    def __post_init__(self):
        if self.dt <= 0:
            raise GridError(f"dt precisa ser positivo (recebido {self.dt})")
        if self.tol <= 0:
            raise GridError(f"tol precisa ser positiva (recebido {self.tol})")
        if self.max_steps < 1:
            raise GridError(f"max_steps precisa ser ≥ 1 (recebido {self.max_steps})")
        if self.gamma < 0:
            raise GridError(f"γ precisa ser não negativo (recebido {self.gamma})")

    @property
    def grid(self):
        return ComputationalGrid(self.n)


@dataclass(frozen=True)
class PotentialState:
    """Parte periódica φ do potencial; P = ½(ξ² + η²) + φ."""
    phi: PeriodicScalarField

    @classmethod
    def identity(cls, grid):
        return cls(PeriodicScalarField.zeros(grid))

    @property
    def grid(self):
        return self.phi.grid

    def jacobian(self):
        return jacobian_field(self)

    def is_convex(self):
        """H(P) = I + H(φ) positiva definida em todos os nós (det > 0 e tr > 0)."""
        J = self.jacobian()
        return bool(np.all(J.det() > 0) and np.all(J.trace() > 0))


@dataclass(frozen=True)
class ConvergenceReport:
    steps: int
    final_cv: float
    final_max_residual: float
    converged: bool
    theta: float = 1.0
    final_dt: float = 0.0
    cv_history: tuple = field(default=(), repr=False)


def jacobian_field(state):
    """J = I + H(φ), simétrico por construção."""
    return SymMat2.identity(state.grid.shape).plus(hessian_fd(state.phi))


def mesh_lift(state):
    """x = ξ + ∇φ sem redução (levantamento contínuo), forma (n, n, 2)."""
    return state.grid.node_array() + gradient_fd(state.phi)


def mesh_from_potential(state):
    """Coordenadas dos nós da malha reduzidas a [0, 1)²."""
    x = mesh_lift(state)
    return x - np.floor(x)


def _equidistribution(state, spec):
    """ρ(x_ij) e det J_ij nos nós do estado."""
    rho = spec.evaluate(mesh_lift(state))
    det = jacobian_field(state).det()
    return rho, det


def _cv(values):
    return float(values.std() / values.mean())


def equidist_residual(state, spec, theta=None, quadrature=DEFAULT_QUADRATURE):
    """r_ij = ρ(x_ij)·det J_ij/θ − 1 e o resumo {max, cv}."""
    theta = theta_2d(spec, quadrature) if theta is None else theta
    rho, det = _equidistribution(state, spec)
    mass = rho * det
    residual = state.phi.with_values(mass / theta - 1.0)
    return residual, {'max': float(np.abs(residual.values).max()), 'cv': _cv(mass)}


def _advance(state, rho, det, dt, gamma):
    q = np.sqrt(np.clip(rho * det, 0.0, None))
    increment = inv_helmholtz(q - q.mean(), gamma)
    new_state = PotentialState(state.phi.with_values(state.phi.values + dt * increment))
    if not new_state.is_convex():
        raise StepRejected(f"Potencial deixou de ser convexo com dt={dt:.3e}", dt=dt)
    return new_state


def pma_step(state, spec, params, dt=None):
    """Um passo explícito do PMA; StepRejected se o novo potencial não for convexo."""
    dt = params.dt if dt is None else dt
    if dt == 0:
        return state
    rho, det = _equidistribution(state, spec)
    return _advance(state, rho, det, dt, params.gamma)


def pma_solve(spec, params, init=None, progress=None, theta=None):
    """
    Itera pma_step até cv(ρJ) ≤ tol e max|ρJ/θ − 1| ≤ RESIDUAL_FACTOR·tol, ou
    até max_steps. Com cv ≤ tol, um resíduo máximo estagnado também encerra;
    converged continua sendo cv ≤ tol.

    Passos rejeitados dividem dt por 2 e são refeitos a partir do mesmo estado;
    StepRejected só escapa se dt cair abaixo de dt_min. Não convergir não é
    exceção: o relatório volta com converged=False.

    progress, se fornecido, recebe um dicionário por passo aceito com
    step, dt, cv e max_residual.
    """
    grid = params.grid
    state = PotentialState.identity(grid) if init is None else init
    if state.grid != grid:
        raise GridError(f"Estado inicial em grade n={state.grid.n}, parâmetros pedem n={grid.n}")
    if not state.is_convex():
        raise GridError("O potencial inicial não é convexo")
    theta = theta_2d(spec, params.quadrature) if theta is None else theta

    dt = params.dt
    steps = 0
    history = []
    best, stale = np.inf, 0
    rho, det = _equidistribution(state, spec)
    cv = _cv(rho * det)
    logger.info(f"PMA iniciado: n={grid.n}, γ={params.gamma}, dt={dt}, tol={params.tol}, θ={theta:.10g}, cv₀={cv:.4e}")

    while steps < params.max_steps:
        try:
            state = _advance(state, rho, det, dt, params.gamma)
        except StepRejected:
            dt /= 2.0
            logger.warning(f"Passo {steps + 1} rejeitado; dt reduzido para {dt:.3e}")
            if dt < params.dt_min:
                raise StepRejected(f"dt abaixo do mínimo {params.dt_min:.1e} sem recuperar a convexidade", dt=dt)
            continue
        steps += 1
        rho, det = _equidistribution(state, spec)
        mass = rho * det
        cv = _cv(mass)
        residual = float(np.abs(mass / theta - 1.0).max())
        history.append(cv)
        if progress is not None:
            progress({
                'step': steps,
                'dt': dt,
                'cv': cv,
                'max_residual': residual,
            })
        if steps % 1000 == 0:
            logger.debug(f"Passo {steps}: cv={cv:.4e}")
        if cv <= params.tol:
            if residual < best * (1.0 - PLATEAU_GAIN):
                best, stale = residual, 0
            else:
                stale += 1
            if residual <= RESIDUAL_FACTOR * params.tol:
                break
            if stale >= PLATEAU_STEPS:
                logger.info(f"Resíduo máximo estagnado em {best:.4e}; encerrando com cv={cv:.4e}")
                break

    max_residual = float(np.abs(rho * det / theta - 1.0).max())
    report = ConvergenceReport(
        steps=steps,
        final_cv=cv,
        final_max_residual=max_residual,
        converged=cv <= params.tol,
        theta=theta,
        final_dt=dt,
        cv_history=tuple(history),
    )
    if report.converged:
        logger.info(f"PMA convergiu em {steps} passos: cv={cv:.4e}, resíduo máximo={max_residual:.4e}")
    else:
        logger.warning(f"PMA não convergiu em {steps} passos: cv={cv:.4e} > tol={params.tol}")
    return state, report
