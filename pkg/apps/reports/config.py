"""
Carregamento da configuração de uma execução: arquivo JSON opcional, flags da
linha de comando e padrões de settings.MESHKIT, nessa ordem de precedência
inversa (flags vencem o arquivo, que vence os padrões).
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from django.conf import settings

from apps.core.exceptions import ConfigError, DensityError
from apps.density.densities import ProductTrains, SingleTrain, Uniform
from apps.density.presets import density_from_document, get_preset
from apps.pma.solver import PmaParams
from apps.reports.forms import RunConfigForm

logger = logging.getLogger('reports')

DEFAULT_EMIT = ('mesh', 'ellipses', 'residual', 'report', 'svg')

CONFIG_KEYS = {
    'mode', 'preset', 'density', 'n', 'gamma', 'dt', 'dt_min', 'tol', 'max_steps',
    'table_samples', 'quadrature', 'emit', 'out', 'seed', 'ellipse_scale', 'mesh', 'progress',
}


@dataclass(frozen=True)
class RunConfig:
    mode: str
    density: object
    preset: str = None
    n: int = 60
    gamma: float = 0.1
    dt: float = 1e-3
    dt_min: float = 1e-8
    tol: float = 1e-2
    max_steps: int = 200_000
    table_samples: int = 1000
    quadrature: int = 512
    emit: frozenset = frozenset(DEFAULT_EMIT)
    out_dir: Path = Path('out')
    seed: int = 0
    ellipse_scale: float = None
    mesh_path: Path = None
    progress_path: Path = None

    @property
    def params(self):
        return PmaParams(n=self.n, gamma=self.gamma, dt=self.dt, tol=self.tol, max_steps=self.max_steps,
                         dt_min=self.dt_min, quadrature=self.quadrature)


def defaults():
    """Padrões lidos de settings.MESHKIT no momento da chamada."""
    conf = settings.MESHKIT
    return {
        'n': conf['N'],
        'gamma': conf['GAMMA'],
        'dt': conf['DT'],
        'dt_min': conf['DT_MIN'],
        'tol': conf['TOL'],
        'max_steps': conf['MAX_STEPS'],
        'table_samples': conf['TABLE_SAMPLES'],
        'quadrature': conf['QUADRATURE'],
        'emit': list(DEFAULT_EMIT),
        'out': str(conf['OUT_DIR']),
        'seed': conf['SEED'],
        'ellipse_scale': conf['ELLIPSE_SCALE'],
    }


def read_config_file(path):
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except OSError as exc:
        raise ConfigError(f"não foi possível ler {path} ({exc.strerror})", field='config') from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON inválido em {path} (linha {exc.lineno})", field='config') from exc
    if not isinstance(document, dict):
        raise ConfigError("o documento de configuração precisa ser um objeto JSON", field='config')
    return document


def _split_emit(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(',') if item.strip()]
    return value


def _form_error(form):
    field, messages = next(iter(form.errors.items()))
    field = 'config' if field == '__all__' else field
    return ConfigError(str(messages[0]), field=field)


def _require_one_density(data):
    if (not data.get('preset')) == (data.get('density') is None):
        raise ConfigError("informe exatamente um entre preset e density", field='density')


def _resolve_density(preset, document):
    if preset:
        return get_preset(preset)
    try:
        return density_from_document(document)
    except DensityError as exc:
        raise ConfigError(str(exc), field=exc.field or 'density') from exc


def _is_separable(spec):
    if isinstance(spec, ProductTrains):
        return spec.orthogonal
    return isinstance(spec, (Uniform, SingleTrain))


def load_config(path=None, flags=None):
    """
    RunConfig validado a partir de `path` (JSON) e de `flags` (dict; valores
    None são ignorados). Qualquer problema vira ConfigError com o campo.
    """
    document = read_config_file(path) if path is not None else {}
    unknown = sorted(set(document) - CONFIG_KEYS)
    if unknown:
        raise ConfigError("chave desconhecida", field=unknown[0])

    data = defaults()
    data.update(document)
    data.update({key: value for key, value in (flags or {}).items() if value is not None})
    if 'emit' in data:
        data['emit'] = _split_emit(data['emit'])
    _require_one_density(data)

    form = RunConfigForm(data={key: value for key, value in data.items() if key != 'density'})
    if not form.is_valid():
        raise _form_error(form)
    cleaned = form.cleaned_data

    density = _resolve_density(cleaned['preset'], data.get('density'))
    if cleaned['mode'] == 'exact' and not _is_separable(density):
        raise ConfigError(
            f"a densidade {density.variant} não tem solução exata (choques não ortogonais ou não separável)",
            field='mode',
        )

    config = RunConfig(
        mode=cleaned['mode'],
        density=density,
        preset=cleaned['preset'] or None,
        n=cleaned['n'],
        gamma=cleaned['gamma'],
        dt=cleaned['dt'],
        dt_min=cleaned['dt_min'],
        tol=cleaned['tol'],
        max_steps=cleaned['max_steps'],
        table_samples=cleaned['table_samples'],
        quadrature=cleaned['quadrature'],
        emit=frozenset(cleaned['emit']),
        out_dir=Path(cleaned['out']),
        seed=cleaned['seed'],
        ellipse_scale=cleaned['ellipse_scale'],
        mesh_path=Path(cleaned['mesh']) if cleaned['mesh'] else None,
        progress_path=Path(cleaned['progress']) if cleaned['progress'] else None,
    )
    logger.debug(f"Configuração carregada: modo={config.mode}, densidade={density.variant}, n={config.n}")
    return config
