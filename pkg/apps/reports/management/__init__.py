# Arquivo vazio para marcar o diretório como pacote Python
