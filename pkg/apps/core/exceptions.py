"""
Hierarquia de erros do MeshKit.

Todos os erros de domínio herdam de MeshkitError; os comandos de gerenciamento
convertem esses erros em CommandError com código de saída 1.
"""


class MeshkitError(Exception):
    """Erro base do motor de malhas."""


class GridError(MeshkitError):
    """Grade computacional ou campo periódico inválido."""


class DensityError(MeshkitError):
    """Densidade com parâmetros inválidos (não positiva ou não periódica)."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class TableError(MeshkitError):
    """Tabela cumulativa R não monótona."""


class StepRejected(MeshkitError):
    """Passo PMA produziu potencial não convexo (dt grande demais)."""

    def __init__(self, message, dt=None):
        super().__init__(message)
        self.dt = dt


class SingularJacobian(MeshkitError):
    """Jacobiano com determinante não positivo (malha embaralhada)."""


class NonPositiveMetric(MeshkitError):
    """Tensor métrico que não é simétrico positivo definido."""


class ZeroGradient(MeshkitError):
    """Normal da curva de nível indefinida (gradiente nulo)."""


class ConfigError(MeshkitError):
    """Configuração de execução inválida; `field` aponta o campo com problema."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
        self.reason = message


class ExportError(MeshkitError):
    """Falha de E/S ao gravar ou ler um artefato."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
