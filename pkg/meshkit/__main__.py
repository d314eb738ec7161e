"""Ponto de entrada `meshkit <exact|pma|analyze> ...`."""
import os
import sys


def main():
    """Executa os comandos do MeshKit (mesmo caminho do manage.py)."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'meshkit.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Django não está instalado; ative o venv e instale as dependências."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
