"""
Exportação dos artefatos de uma execução: malha, elipses e resíduo em CSV
(pandas) e o relatório de anisotropia em JSON.

CSVs e JSON usam LF e floats com 17 algarismos significativos; a leitura
dos CSVs usa float_precision='round_trip' para recuperar os mesmos bits.
"""

import json
import logging
import math
import re
from pathlib import Path

import numpy as np
import pandas as pd

from apps.core.exceptions import ExportError

logger = logging.getLogger('reports')

FLOAT_FORMAT = '%.17g'
MESH_COLUMNS = ['i', 'j', 'xi', 'eta', 'x', 'y']
ELLIPSE_COLUMNS = ['i', 'j', 'cx', 'cy', 'a', 'b', 'angle']
RESIDUAL_COLUMNS = ['i', 'j', 'x', 'y', 'rho', 'residual']
FLOAT_MARKER = '@float17:'


def _node_indices(count):
    """Índices em ordem de linha com i variando mais rápido."""
    j, i = np.meshgrid(np.arange(count), np.arange(count), indexing='ij')
    return i.ravel(), j.ravel()


def _write_csv(frame, path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    except OSError as exc:
        raise ExportError(f"falha ao gravar ({exc})", path=path) from exc
    logger.info(f"Arquivo gravado: {path} ({len(frame)} linhas)")
    return path


def _read_csv(path, columns):
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ExportError(f"falha ao ler ({exc})", path=path) from exc
    if list(frame.columns) != columns:
        raise ExportError(f"cabeçalho inesperado: {','.join(map(str, frame.columns))}", path=path)
    return frame


def mesh_frame(lift):
    """
    Tabela da malha com a emenda duplicada: (n + 1)² linhas, ξ = i/n.

    As coordenadas vêm do levantamento contínuo, então o nó (n, j) fica em
    x(0, j) + (1, 0).
    """
    lift = np.asarray(lift, dtype=float)
    n = lift.shape[0]
    i, j = _node_indices(n + 1)
    points = lift[i % n, j % n]
    return pd.DataFrame({
        'i': i,
        'j': j,
        'xi': i / n,
        'eta': j / n,
        'x': points[:, 0] + i // n,
        'y': points[:, 1] + j // n,
    }, columns=MESH_COLUMNS)


def export_mesh(lift, path):
    return _write_csv(mesh_frame(lift), path)


def read_mesh(path):
    """Levantamento (n, n, 2) a partir do CSV de malha; as linhas da emenda são descartadas."""
    frame = _read_csv(path, MESH_COLUMNS)
    side = int(round(np.sqrt(len(frame))))
    if side * side != len(frame) or side < 2:
        raise ExportError(f"{len(frame)} linhas não formam uma grade quadrada com emenda", path=path)
    n = side - 1
    inner = frame[(frame['i'] < n) & (frame['j'] < n)]
    lift = np.empty((n, n, 2))
    lift[inner['i'].to_numpy(), inner['j'].to_numpy(), 0] = inner['x'].to_numpy()
    lift[inner['i'].to_numpy(), inner['j'].to_numpy(), 1] = inner['y'].to_numpy()
    logger.info(f"Malha lida de {path}: n={n}")
    return lift


def ellipse_frame(ellipses):
    n = np.shape(ellipses.a)[0]
    i, j = _node_indices(n)
    return pd.DataFrame({
        'i': i,
        'j': j,
        'cx': np.asarray(ellipses.center[0])[i, j],
        'cy': np.asarray(ellipses.center[1])[i, j],
        'a': np.asarray(ellipses.a)[i, j],
        'b': np.asarray(ellipses.b)[i, j],
        'angle': np.asarray(ellipses.angle)[i, j],
    }, columns=ELLIPSE_COLUMNS)


def export_ellipses(ellipses, path):
    return _write_csv(ellipse_frame(ellipses), path)


def residual_frame(report):
    i, j = _node_indices(report.n)
    reduced = report.lift - np.floor(report.lift)
    return pd.DataFrame({
        'i': i,
        'j': j,
        'x': reduced[i, j, 0],
        'y': reduced[i, j, 1],
        'rho': report.rho[i, j],
        'residual': report.residual[i, j],
    }, columns=RESIDUAL_COLUMNS)


def export_residual(report, path):
    return _write_csv(residual_frame(report), path)


def read_table(path, kind):
    """Lê de volta um CSV de elipses ou de resíduo."""
    columns = {'ellipses': ELLIPSE_COLUMNS, 'residual': RESIDUAL_COLUMNS, 'mesh': MESH_COLUMNS}[kind]
    return _read_csv(path, columns)


def _mark_floats(value):
    if isinstance(value, dict):
        return {key: _mark_floats(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_mark_floats(item) for item in value]
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"float fora do JSON: {value}")
        return FLOAT_MARKER + FLOAT_FORMAT % value
    return value


def report_to_json(document):
    """JSON com indentação 2 e floats em FLOAT_FORMAT; NaN e ±inf geram ValueError."""
    text = json.dumps(_mark_floats(document), indent=2, ensure_ascii=False, allow_nan=False)
    return re.sub(f'"{re.escape(FLOAT_MARKER)}([^"]+)"', r'\1', text) + '\n'


def export_report(report, path):
    path = Path(path)
    document = report.to_document() if hasattr(report, 'to_document') else report
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report_to_json(document), encoding='utf-8', newline='\n')
    except (OSError, ValueError) as exc:
        raise ExportError(f"falha ao gravar ({exc})", path=path) from exc
    logger.info(f"Relatório gravado: {path}")
    return path


def read_report(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as exc:
        raise ExportError(f"falha ao ler ({exc})", path=path) from exc
