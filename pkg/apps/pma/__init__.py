# Solver PMA
