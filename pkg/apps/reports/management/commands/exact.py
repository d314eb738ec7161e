from apps.reports.management.base import MeshCommand


class Command(MeshCommand):
    help = 'Gera a malha pela solução exata separável e grava os artefatos'
    mode = 'exact'
