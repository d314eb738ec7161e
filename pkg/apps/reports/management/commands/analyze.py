from apps.reports.management.base import MeshCommand


class Command(MeshCommand):
    help = 'Recalcula o relatório a partir de um CSV de malha (--mesh)'
    mode = 'analyze'
