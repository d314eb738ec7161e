"""
Densidades dos quatro experimentos de referência e leitura/escrita do
documento JSON de DensitySpec.
"""

import math

from apps.core.exceptions import DensityError
from apps.density.densities import (
    ArclengthFromU,
    HessianFromU,
    LevelSet,
    ProductTrains,
    ShockTrain,
    SingleTrain,
    Uniform,
)
from apps.density.ufunctions import UFunction

SQRT2 = math.sqrt(2.0)
SQRT5 = math.sqrt(5.0)

E_DIAGONAL = (1.0 / SQRT2, 1.0 / SQRT2)
E_ANTIDIAGONAL = (1.0 / SQRT2, -1.0 / SQRT2)


def shock_train_major():
    """ρ₁ = 1 + 50·Σ sech²(50(√2x′ − n)), x′ = x·(1, 1)/√2."""
    return ShockTrain(amplitude=50.0, sharpness=50.0, direction=E_DIAGONAL, scale=SQRT2)


def shock_train_minor():
    """ρ₂ = 1 + 10·Σ sech²(25(√2y′ − m)), y′ = x·(1, −1)/√2."""
    return ShockTrain(amplitude=10.0, sharpness=25.0, direction=E_ANTIDIAGONAL, scale=SQRT2)


def example1():
    """Um choque periódico ao longo de x + y = inteiro (θ = 3)."""
    return SingleTrain(shock_train_major())


def example2():
    """Dois choques ortogonais de intensidades diferentes (θ = 3·1.8)."""
    return ProductTrains(shock_train_major(), shock_train_minor())


def example3():
    """
    Choques não ortogonais: x′ = (−x + y)/√2 e y′ = (x + 2y)/√5.

    Os centros i ∈ {−1, 0, 1} (ρ₁) e 2i − 1 ∈ {1, 3, 5} (ρ₂) coincidem módulo 1
    depois da periodização em translações inteiras; cada trem fica com um centro.
    """
    first = ShockTrain(amplitude=50.0, sharpness=50.0, direction=(-1.0 / SQRT2, 1.0 / SQRT2),
                       scale=SQRT2, offsets=(0.0,))
    second = ShockTrain(amplitude=10.0, sharpness=25.0, direction=(1.0 / SQRT5, 2.0 / SQRT5),
                        scale=SQRT5, offsets=(1.0,))
    return ProductTrains(first, second)


def example4():
    """Choque ao longo da senoide Ψ = y − 0.2·sin(2πx) − 0.5."""
    return LevelSet(amplitude=50.0, sharpness=50.0, wave_amplitude=0.2, wavenumber=1, offset=0.5)


PRESETS = {
    'example1': example1,
    'example2': example2,
    'example3': example3,
    'example4': example4,
}


def get_preset(name):
    try:
        return PRESETS[name]()
    except KeyError:
        raise DensityError(f"Preset desconhecido: {name}", field='preset') from None


TRAIN_KEYS = {'amplitude', 'sharpness', 'direction', 'scale', 'offsets'}
LEVEL_SET_KEYS = {'amplitude', 'sharpness', 'wave_amplitude', 'wavenumber', 'phase', 'offset'}
U_KEYS = {'kind', 'amplitude', 'wave', 'sharpness'}


def _check_keys(doc, allowed, path, required=()):
    if not isinstance(doc, dict):
        raise DensityError("Esperado um objeto JSON", field=path)
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise DensityError(f"Chaves desconhecidas: {', '.join(unknown)}", field=path)
    missing = [key for key in required if key not in doc]
    if missing:
        raise DensityError(f"Chaves obrigatórias ausentes: {', '.join(missing)}", field=path)


def _with_path(path, builder, *args, **kwargs):
    """Prefixa o campo do DensityError com o caminho dentro do documento."""
    try:
        return builder(*args, **kwargs)
    except DensityError as exc:
        inner = f"{path}.{exc.field}" if exc.field else path
        raise DensityError(str(exc), field=inner) from exc
    except (TypeError, ValueError) as exc:
        raise DensityError(f"Valor inválido ({exc})", field=path) from exc


def _train_from_document(doc, path):
    _check_keys(doc, TRAIN_KEYS, path, required=('amplitude', 'sharpness', 'direction', 'scale'))
    return _with_path(
        path, ShockTrain,
        amplitude=float(doc['amplitude']),
        sharpness=float(doc['sharpness']),
        direction=tuple(float(v) for v in doc['direction']),
        scale=float(doc['scale']),
        offsets=tuple(float(c) for c in doc.get('offsets', [0.0])),
    )


def _u_from_document(doc, path):
    _check_keys(doc, U_KEYS, path, required=('kind',))
    kwargs = {key: doc[key] for key in ('kind', 'amplitude', 'sharpness') if key in doc}
    if 'wave' in doc:
        kwargs['wave'] = tuple(doc['wave'])
    return _with_path(path, UFunction, **kwargs)


def density_from_document(doc, path='density'):
    """Constrói uma DensitySpec a partir do documento JSON (chaves desconhecidas são recusadas)."""
    if not isinstance(doc, dict) or 'variant' not in doc:
        raise DensityError("O documento de densidade precisa da chave 'variant'", field=path)
    variant = doc['variant']
    body = {key: value for key, value in doc.items() if key != 'variant'}

    if variant == 'uniform':
        _check_keys(body, set(), path)
        return Uniform()
    if variant == 'single_train':
        _check_keys(body, {'train'}, path, required=('train',))
        return _with_path(path, SingleTrain, _train_from_document(body['train'], f"{path}.train"))
    if variant == 'product_trains':
        _check_keys(body, {'trains'}, path, required=('trains',))
        trains = body['trains']
        if not isinstance(trains, list) or len(trains) != 2:
            raise DensityError("São necessários exatamente dois trens", field=f"{path}.trains")
        first, second = (_train_from_document(t, f"{path}.trains[{k}]") for k, t in enumerate(trains))
        return _with_path(path, ProductTrains, first, second)
    if variant == 'level_set':
        _check_keys(body, LEVEL_SET_KEYS, path)
        return _with_path(path, LevelSet, **body)
    if variant in ('arclength', 'hessian'):
        _check_keys(body, {'alpha_h', 'u'}, path, required=('alpha_h', 'u'))
        u = _u_from_document(body['u'], f"{path}.u")
        cls = ArclengthFromU if variant == 'arclength' else HessianFromU
        return _with_path(path, cls, u=u, alpha_h=float(body['alpha_h']))
    raise DensityError(f"Variante de densidade desconhecida: {variant}", field=f"{path}.variant")


def density_to_document(spec):
    return spec.to_document()
