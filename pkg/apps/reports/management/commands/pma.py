from apps.reports.management.base import MeshCommand


class Command(MeshCommand):
    help = 'Resolve Monge-Ampère pelo PMA e grava os artefatos'
    mode = 'pma'
