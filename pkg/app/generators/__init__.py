# Package app/generators — Génération Monte Carlo (paires, transmission, détection)
