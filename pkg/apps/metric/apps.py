from django.apps import AppConfig


class MetricConfig(AppConfig):
    name = 'apps.metric'
    verbose_name = 'Métrica e anisotropia'
