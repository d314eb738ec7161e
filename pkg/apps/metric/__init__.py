# Tensores métricos e medidas de anisotropia
