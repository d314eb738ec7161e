"""
Figura da malha com as elipses circunscritas, desenhada com reportlab.graphics.

O desenho usa as coordenadas físicas diretamente (viewBox 0 0 1 1); no PDF o
mesmo conteúdo é ampliado para PDF_SIZE pontos.
"""

import logging
import math
from pathlib import Path

import numpy as np
from reportlab.graphics import renderPDF, renderSVG
from reportlab.graphics.shapes import Drawing, Ellipse, Group, PolyLine, Rect
from reportlab.lib import colors

from apps.core.exceptions import ExportError

logger = logging.getLogger('reports')

SVG_PIXELS = 800
PDF_SIZE = 600
MESH_COLOR = colors.HexColor('#1f3b5c')
ELLIPSE_COLOR = colors.HexColor('#c0392b')


def _mesh_lines(lift, width):
    """n linhas de i constante e n de j constante, fechadas na emenda."""
    lift = np.asarray(lift, dtype=float)
    n = lift.shape[0]
    closed_j = np.concatenate([lift, lift[:, :1] + (0.0, 1.0)], axis=1)
    closed_i = np.concatenate([lift, lift[:1, :] + (1.0, 0.0)], axis=0)
    lines = []
    for i in range(n):
        lines.append(PolyLine(closed_j[i].ravel().tolist(), strokeColor=MESH_COLOR, strokeWidth=width))
    for j in range(n):
        lines.append(PolyLine(closed_i[:, j].ravel().tolist(), strokeColor=MESH_COLOR, strokeWidth=width))
    return lines


def _ellipse_glyphs(ellipses, width):
    glyphs = []
    a = np.asarray(ellipses.a).ravel()
    b = np.asarray(ellipses.b).ravel()
    angle = np.asarray(ellipses.angle).ravel()
    cx = np.asarray(ellipses.center[0]).ravel()
    cy = np.asarray(ellipses.center[1]).ravel()
    for k in range(a.size):
        c, s = math.cos(angle[k]), math.sin(angle[k])
        glyph = Group(
            Ellipse(0, 0, float(a[k]), float(b[k]), strokeColor=ELLIPSE_COLOR, strokeWidth=width, fillColor=None),
            transform=(c, s, -s, c, float(cx[k]), float(cy[k])),
        )
        glyphs.append(glyph)
    return glyphs


def build_drawing(lift, ellipses=None, size=1.0):
    n = np.shape(lift)[0]
    width = 0.25 / n
    content = Group(Rect(0, 0, 1, 1, strokeColor=colors.grey, strokeWidth=width, fillColor=None))
    for line in _mesh_lines(lift, width):
        content.add(line)
    if ellipses is not None:
        for glyph in _ellipse_glyphs(ellipses, width):
            content.add(glyph)
    drawing = Drawing(size, size)
    if size != 1.0:
        content.transform = (size, 0, 0, size, 0, 0)
    drawing.add(content)
    return drawing


def render_svg(lift, ellipses, path):
    """SVG determinístico: 2n polilinhas da malha e, se houver, uma elipse por nó."""
    path = Path(path)
    drawing = build_drawing(lift, ellipses)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        renderSVG.drawToFile(drawing, str(path),
                             svgAttrs={'width': str(SVG_PIXELS), 'height': str(SVG_PIXELS)})
    except OSError as exc:
        raise ExportError(f"falha ao gravar ({exc})", path=path) from exc
    logger.info(f"Figura gravada: {path}")
    return path


def render_pdf(lift, ellipses, path):
    path = Path(path)
    drawing = build_drawing(lift, ellipses, size=PDF_SIZE)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        renderPDF.drawToFile(drawing, str(path), 'MeshKit')
    except OSError as exc:
        raise ExportError(f"falha ao gravar ({exc})", path=path) from exc
    logger.info(f"PDF gravado: {path}")
    return path
