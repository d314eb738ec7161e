# Solução fechada para densidades separáveis
