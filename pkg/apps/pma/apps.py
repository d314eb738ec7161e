from django.apps import AppConfig


class PmaConfig(AppConfig):
    name = 'apps.pma'
    verbose_name = 'Monge-Ampère parabólico'
