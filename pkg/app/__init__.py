# Fichier vide : signale à Python que ce dossier est un "package".
# Sans ce fichier, Python ne peut pas faire `from app.main import app`.
