from django import forms

from apps.density.presets import PRESETS

MODE_CHOICES = [('exact', 'Solução exata'), ('pma', 'Monge-Ampère parabólico'), ('analyze', 'Análise de malha')]
PRESET_CHOICES = [('', '---')] + [(name, name) for name in PRESETS]
EMIT_CHOICES = [
    ('mesh', 'Malha (CSV)'),
    ('ellipses', 'Elipses (CSV)'),
    ('residual', 'Resíduo (CSV)'),
    ('report', 'Relatório (JSON)'),
    ('svg', 'Figura (SVG)'),
    ('pdf', 'Figura (PDF)'),
]


class RunConfigForm(forms.Form):
    """Validação dos parâmetros de uma execução (arquivo de configuração + flags)."""
    mode = forms.ChoiceField(choices=MODE_CHOICES, label="Modo")
    preset = forms.ChoiceField(choices=PRESET_CHOICES, required=False, label="Preset")
    n = forms.IntegerField(min_value=8, label="Nós por lado")
    gamma = forms.FloatField(min_value=0.0, label="γ (suavização)")
    dt = forms.FloatField(label="Passo de tempo")
    dt_min = forms.FloatField(label="Passo mínimo")
    tol = forms.FloatField(label="Tolerância de cv")
    max_steps = forms.IntegerField(min_value=1, label="Máximo de passos")
    table_samples = forms.IntegerField(min_value=1000, label="Amostras da tabela R")
    quadrature = forms.IntegerField(min_value=64, label="Pontos de quadratura")
    emit = forms.MultipleChoiceField(choices=EMIT_CHOICES, label="Artefatos")
    out = forms.CharField(label="Diretório de saída")
    seed = forms.IntegerField(label="Semente")
    ellipse_scale = forms.FloatField(required=False, label="Escala das elipses")
    mesh = forms.CharField(required=False, label="Malha de entrada")
    progress = forms.CharField(required=False, label="Arquivo de progresso")

    def _positive(self, name):
        value = self.cleaned_data.get(name)
        if value is not None and value <= 0:
            raise forms.ValidationError("precisa ser positivo")
        return value

    def clean_dt(self):
        return self._positive('dt')

    def clean_dt_min(self):
        return self._positive('dt_min')

    def clean_tol(self):
        return self._positive('tol')

    def clean_ellipse_scale(self):
        return self._positive('ellipse_scale')

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('mode') == 'analyze' and not cleaned_data.get('mesh'):
            self.add_error('mesh', "obrigatório no modo analyze")
        return cleaned_data
