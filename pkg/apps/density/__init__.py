# Densidades analíticas e presets dos experimentos
