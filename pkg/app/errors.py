# =============================================================================
# app/errors.py — Exceptions du domaine
#
# Toutes les erreurs levées volontairement par le simulateur héritent de
# SpectroError. Cela permet :
#   - à l'API HTTP de les convertir en réponse 400/409 avec un seul handler
#     (voir app/main.py) ;
#   - au CLI de les convertir en code de sortie (voir app/cli.py).
#
# Les erreurs de validation de configuration restent des
# pydantic.ValidationError : elles portent déjà le chemin du champ fautif.
# =============================================================================


class SpectroError(Exception):
    """Classe de base de toutes les erreurs du simulateur."""


class DomainError(SpectroError, ValueError):
    """Argument hors du domaine de définition (ex : longueur d'onde négative)."""


class ConfigError(SpectroError):
    """Configuration incohérente détectée hors de la validation Pydantic."""


class AliasingError(SpectroError):
    """La grille de fréquences est trop étroite : l'intégrande ne décroît pas aux bords."""

    def __init__(self, edge_ratio: float, threshold: float) -> None:
        self.edge_ratio = edge_ratio
        self.threshold = threshold
        super().__init__(
            f"repliement probable : |intégrande| au bord = {edge_ratio:.3e} × max "
            f"(seuil {threshold:.0e}) ; élargir la grille (span) ou réduire les largeurs"
        )

    def __reduce__(self):
        return type(self), (self.edge_ratio, self.threshold)


class CapacityError(SpectroError):
    """Trop de paires à matérialiser en une fois : utiliser la génération par blocs."""


# -----------------------------------------------------------------------------
# Erreurs de lecture du format .ttag
# -----------------------------------------------------------------------------


class TtagParseError(SpectroError):
    """Fichier .ttag mal formé. `offset` est la position en octets du défaut."""

    def __init__(self, message: str, offset: int) -> None:
        self.message = message
        self.offset = offset
        super().__init__(f"{message} (octet {offset})")

    # Reconstruction explicite : ces erreurs traversent le ProcessPoolExecutor du scan.
    def __reduce__(self):
        return type(self), (self.message, self.offset)


class MagicMismatchError(TtagParseError):
    """Le nombre magique de l'en-tête ne vaut pas 0x54544147."""


class UnsupportedVersionError(TtagParseError):
    """Version de format inconnue."""


class TruncatedRecordError(TtagParseError):
    """Le fichier s'arrête au milieu de l'en-tête ou d'un enregistrement."""


class TrailingDataError(TtagParseError):
    """Octets présents après le dernier enregistrement annoncé par l'en-tête."""


class TimestampOverflowError(TtagParseError):
    """Horodatage dont la valeur en ps dépasse la capacité d'un entier signé 64 bits."""


class NonMonotoneError(TtagParseError):
    """Horodatage non strictement croissant à l'enregistrement `record_index`."""

    def __init__(self, record_index: int, offset: int) -> None:
        self.record_index = record_index
        super().__init__(
            f"horodatage non croissant à l'enregistrement {record_index}", offset
        )

    def __reduce__(self):
        return type(self), (self.record_index, self.offset)


# -----------------------------------------------------------------------------
# Erreurs d'analyse
# -----------------------------------------------------------------------------


class NoAlignmentError(SpectroError):
    """Aucun pic de coïncidences significatif : flux probablement non corrélés."""

    def __init__(self, significance: float, threshold: float) -> None:
        self.significance = significance
        self.threshold = threshold
        super().__init__(
            f"pas d'alignement trouvé : significance {significance:.2f} < {threshold:g}"
        )

    def __reduce__(self):
        return type(self), (self.significance, self.threshold)


class EmptyReconstructionError(SpectroError):
    """La colonne normalisée ne contient aucune valeur positive."""
