from pathlib import Path

from setuptools import find_packages, setup

requirements = Path(__file__).with_name('requirements.txt').read_text().split()

setup(
    name='meshkit',
    version='0.1.0',
    description='Malhas periódicas por transporte ótimo (Monge-Ampère) e análise de anisotropia',
    packages=find_packages(include=['meshkit', 'meshkit.*', 'apps', 'apps.*']),
    python_requires='>=3.10',
    install_requires=requirements,
    entry_points={'console_scripts': ['meshkit = meshkit.__main__:main']},
)
