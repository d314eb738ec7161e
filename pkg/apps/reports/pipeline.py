"""
Orquestração de uma execução: solução (exata, PMA ou malha lida de arquivo),
análise de anisotropia e gravação dos artefatos pedidos.
"""

import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from apps.core.grid import ComputationalGrid
from apps.density.densities import theta_2d
from apps.exact.solver import build_separable, exact_jacobian_field, exact_mesh, monge_ampere_residual
from apps.metric.analysis import analyze_mesh, jacobian_from_lift
from apps.pma.solver import jacobian_field, mesh_lift, pma_solve
from apps.reports.utils.exporters import export_ellipses, export_mesh, export_report, export_residual, read_mesh
from apps.reports.utils.svg import render_pdf, render_svg

logger = logging.getLogger('reports')

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2

ARTIFACT_NAMES = {
    'mesh': 'mesh.csv',
    'ellipses': 'ellipses.csv',
    'residual': 'residual.csv',
    'report': 'report.json',
    'svg': 'mesh.svg',
    'pdf': 'mesh.pdf',
}


@dataclass
class RunResult:
    report: object
    status: int
    artifacts: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.report.converged


@contextmanager
def progress_sink(path):
    """Grava um registro JSON por linha para cada passo aceito do PMA."""
    if path is None:
        yield None
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as stream:
        def write(record):
            stream.write(json.dumps(record) + '\n')
        yield write


def _solve_exact(config, grid):
    sol = build_separable(config.density, config.table_samples)
    residual = monge_ampere_residual(sol, config.density, rng=np.random.default_rng(config.seed))
    logger.info(f"Resíduo de Monge-Ampère da solução exata: {residual:.3e}")
    return exact_mesh(sol, grid), exact_jacobian_field(sol, grid), sol.theta, 0, True


def _solve_pma(config, grid):
    with progress_sink(config.progress_path) as sink:
        state, report = pma_solve(config.density, config.params, progress=sink)
    return mesh_lift(state), jacobian_field(state), report.theta, report.steps, report.converged


def _load_mesh(config, grid):
    lift = read_mesh(config.mesh_path)
    theta = theta_2d(config.density, config.quadrature)
    return lift, jacobian_from_lift(lift), theta, 0, True


SOLVERS = {
    'exact': _solve_exact,
    'pma': _solve_pma,
    'analyze': _load_mesh,
}


def write_artifacts(report, config):
    out = config.out_dir
    written = {}
    if 'mesh' in config.emit:
        written['mesh'] = export_mesh(report.lift, out / ARTIFACT_NAMES['mesh'])
    if 'ellipses' in config.emit:
        written['ellipses'] = export_ellipses(report.ellipses, out / ARTIFACT_NAMES['ellipses'])
    if 'residual' in config.emit:
        written['residual'] = export_residual(report, out / ARTIFACT_NAMES['residual'])
    if 'report' in config.emit:
        written['report'] = export_report(report, out / ARTIFACT_NAMES['report'])
    # elipses só entram na figura quando também foram pedidas como artefato
    glyphs = report.ellipses if 'ellipses' in config.emit else None
    if 'svg' in config.emit:
        written['svg'] = render_svg(report.lift, glyphs, out / ARTIFACT_NAMES['svg'])
    if 'pdf' in config.emit:
        written['pdf'] = render_pdf(report.lift, glyphs, out / ARTIFACT_NAMES['pdf'])
    return written


def run(config):
    """
    Executa o modo configurado e grava os artefatos.

    Retorna RunResult com status 0 (ok) ou 2 (PMA não convergiu; artefatos
    gravados com converged=false). Erros de domínio propagam como MeshkitError.
    """
    grid = ComputationalGrid(config.n) if config.mode != 'analyze' else None
    logger.info(f"Execução {config.mode}: densidade {config.density.variant}"
                + (f", preset {config.preset}" if config.preset else ""))
    lift, J, theta, steps, converged = SOLVERS[config.mode](config, grid)
    report = analyze_mesh(config.density, lift, J, theta, config.mode,
                          ellipse_scale=config.ellipse_scale, steps=steps, converged=converged)
    artifacts = write_artifacts(report, config)
    status = EXIT_OK if converged else EXIT_NOT_CONVERGED
    return RunResult(report=report, status=status, artifacts=artifacts)
