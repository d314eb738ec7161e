# Aplicativos do MeshKit, um por módulo do motor de malhas
# Este arquivo vazio marca o diretório como um pacote Python
