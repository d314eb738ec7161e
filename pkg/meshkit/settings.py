import os
import sys
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

# Sem banco, sem sessões: a chave só existe porque o Django exige uma.
SECRET_KEY = os.environ.get('MESHKIT_SECRET_KEY', 'meshkit-local-only')

DEBUG = os.environ.get('MESHKIT_DEBUG', '') == '1'

ALLOWED_HOSTS = []

# Aplicativos do MeshKit (um por módulo do motor de malhas)
INSTALLED_APPS = [
    'apps.core',
    'apps.density',
    'apps.exact',
    'apps.pma',
    'apps.metric',
    'apps.reports',
]

# Nenhum modelo persistente: os testes usam SimpleTestCase
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'pt-br'
TIME_ZONE = 'America/Sao_Paulo'
USE_I18N = True
USE_TZ = True

# Parâmetros padrão do motor (sobrescritos por --config e pelas flags da linha de comando)
MESHKIT = {
    'N': 60,
    'GAMMA': 0.1,
    'DT': 1e-3,
    'DT_MIN': 1e-8,
    'TOL': 1e-2,
    'MAX_STEPS': 200_000,
    'TABLE_SAMPLES': 1000,
    'QUADRATURE': 512,
    'ELLIPSE_SCALE': None,  # None = h/2
    'SEED': 0,
    'OUT_DIR': os.environ.get('MESHKIT_OUT', 'out'),
}

# Configurações de logging
LOG_FILE = os.environ.get('MESHKIT_LOG_FILE')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG' if DEBUG else 'INFO',
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': 'DEBUG' if DEBUG else 'INFO',
            'propagate': False,
        }
        for app in ('core', 'density', 'exact', 'pma', 'metric', 'reports')
    },
}

if LOG_FILE:
    LOGGING['handlers']['file'] = {
        'level': 'DEBUG',
        'class': 'logging.FileHandler',
        'filename': LOG_FILE,
        'formatter': 'verbose',
    }
    for logger in LOGGING['loggers'].values():
        logger['handlers'].append('file')
