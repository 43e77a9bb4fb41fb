# Package app/data — Constantes expérimentales et profils de configuration
