# Exportadores de CSV, JSON e figuras
