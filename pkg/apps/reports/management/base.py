"""Base comum dos comandos exact, pma e analyze."""

import logging

from django.core.management.base import BaseCommand, CommandError

from apps.core.exceptions import MeshkitError
from apps.reports.config import load_config
from apps.reports.pipeline import EXIT_ERROR, EXIT_NOT_CONVERGED, run

logger = logging.getLogger('reports')

FLAG_NAMES = ('preset', 'n', 'gamma', 'dt', 'dt_min', 'tol', 'max_steps', 'out', 'emit', 'seed',
              'ellipse_scale', 'table_samples', 'quadrature', 'mesh', 'progress')


class MeshCommand(BaseCommand):
    """Comando de execução; as subclasses só definem `mode` e `help`."""
    mode = None

    def add_arguments(self, parser):
        parser.add_argument('--preset', help='example1, example2, example3 ou example4')
        parser.add_argument('--config', help='Arquivo JSON de configuração')
        parser.add_argument('--n', type=int, help='Nós por lado da grade')
        parser.add_argument('--gamma', type=float, help='Suavização γ do operador (I − γΔ)⁻¹')
        parser.add_argument('--dt', type=float, help='Passo de tempo inicial do PMA')
        parser.add_argument('--dt-min', type=float, dest='dt_min', help='Passo mínimo antes de desistir')
        parser.add_argument('--tol', type=float, help='Tolerância de cv(ρJ)')
        parser.add_argument('--max-steps', type=int, dest='max_steps', help='Limite de passos do PMA')
        parser.add_argument('--out', help='Diretório de saída (padrão: $MESHKIT_OUT ou out)')
        parser.add_argument('--emit', help='Lista separada por vírgulas: mesh,ellipses,residual,report,svg,pdf')
        parser.add_argument('--seed', type=int, help='Semente dos diagnósticos aleatórios')
        parser.add_argument('--ellipse-scale', type=float, dest='ellipse_scale',
                            help='Fator das elipses (padrão h/2)')
        parser.add_argument('--table-samples', type=int, dest='table_samples', help='Amostras da tabela R')
        parser.add_argument('--quadrature', type=int, help='Pontos por lado da quadratura de θ')
        parser.add_argument('--mesh', help='CSV de malha a analisar (modo analyze)')
        parser.add_argument('--progress', help='Arquivo de progresso (um JSON por linha)')

    def handle(self, *args, **options):
        flags = {name: options.get(name) for name in FLAG_NAMES}
        flags['mode'] = self.mode
        try:
            config = load_config(options.get('config'), flags)
            result = run(config)
        except MeshkitError as exc:
            raise CommandError(str(exc), returncode=EXIT_ERROR) from exc
        except Exception as exc:
            logger.exception(f"Falha inesperada no modo {self.mode}")
            raise CommandError(f"erro inesperado: {exc}", returncode=EXIT_ERROR) from exc

        for name, path in sorted(result.artifacts.items()):
            self.stdout.write(f"{name}: {path}")
        report = result.report
        if result.status == EXIT_NOT_CONVERGED:
            raise CommandError(
                f"não convergiu em {report.steps} passos (cv={report.residual_cv:.4e}); artefatos gravados",
                returncode=EXIT_NOT_CONVERGED,
            )
        self.stdout.write(self.style.SUCCESS(
            f"Q_s feição={report.qs_feature:.4f}, fundo={report.qs_background:.4f}, Q_a máx={report.qa_max:.4f}"
        ))
