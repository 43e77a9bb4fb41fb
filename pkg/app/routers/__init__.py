# Package routers — un module par groupe d'endpoints.
#   conjugate.py : longueur d'onde conjuguée et profils nommés
#   scan.py      : scans analytique / Monte Carlo et taux attendus
