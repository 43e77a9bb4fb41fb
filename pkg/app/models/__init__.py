# app/models/__init__.py — Package des modèles de données
#
# Ce package regroupe :
#   - spectral.py  : grille de fréquences, fonctions spectrales, milieux dispersifs
#   - config.py    : document de configuration RunConfig et ses sections
#   - responses.py : points et courbes de scan, réponses de l'API HTTP
