# Configuração de execução, exportação e comandos
