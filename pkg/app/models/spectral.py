# =============================================================================
# app/models/spectral.py — Types spectraux du moteur analytique
#
# Trois types figés (frozen) décrivent tout ce que le moteur analytique
# manipule dans le domaine des fréquences :
#
#   FrequencyGrid     grille uniforme de désaccords ν (rad/s), taille 2^k
#   SpectralFunction  amplitude complexe en fonction de ω : sert pour Φ(ν),
#                     le filtre distant f(ω) et la réponse Π du monochromateur
#   DispersiveMedium  milieu traversé par un bras (k', k'' et longueur)
#
# Les invariants sont vérifiés à la construction par des validateurs Pydantic ;
# une instance existante est donc toujours bien formée. Les modèles sont figés
# (ConfigDict(frozen=True)) : ils peuvent être partagés entre threads et
# processus sans précaution.
#
# Unité interne : fréquence angulaire en rad/s. Les longueurs d'onde en nm
# n'apparaissent qu'aux frontières (configuration, CSV, API).
# =============================================================================

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


# =============================================================================
# GRILLE DE FRÉQUENCES
# =============================================================================


class FrequencyGrid(BaseModel):
    """
    Grille uniforme de désaccords ν_j, symétrique autour de `center_nu`.

    ν = 0 correspond aux fréquences centrales ω⁰_s (signal) et ω⁰_i (idler).
    `center_nu` permet de recentrer la grille là où l'intégrande est non nul
    (par exemple sur ν_M = ω⁰_i − ω_M pendant un scan).
    """

    model_config = ConfigDict(frozen=True)

    center_nu: float = Field(default=0.0, description="Centre de la grille (rad/s)")
    span: float = Field(gt=0, description="Étendue totale ν_max − ν_min (rad/s)")
    n_points: int = Field(ge=2, description="Nombre de points (puissance de deux)")

    @model_validator(mode="after")
    def _check_power_of_two(self) -> "FrequencyGrid":
        if self.n_points & (self.n_points - 1):
            raise ValueError(f"n_points doit être une puissance de deux (reçu {self.n_points})")
        return self

    @property
    def spacing(self) -> float:
        """Pas Δν = span / (n_points − 1)."""
        return self.span / (self.n_points - 1)

    @property
    def values(self) -> np.ndarray:
        """Valeurs ν_j de la grille (rad/s)."""
        half = self.span / 2.0
        return self.center_nu + np.linspace(-half, half, self.n_points)

    @property
    def tau_spacing(self) -> float:
        """Pas Δτ de la grille de temps conjuguée : 2π / (N·Δν)."""
        return 2.0 * np.pi / (self.n_points * self.spacing)

    @property
    def tau_values(self) -> np.ndarray:
        """Grille τ_k = (k − N/2)·Δτ conjuguée de la grille ν (s)."""
        k = np.arange(self.n_points) - self.n_points // 2
        return k * self.tau_spacing


# =============================================================================
# FONCTIONS SPECTRALES
# =============================================================================


class SpectralKind(str, Enum):
    """Formes fonctionnelles disponibles pour Φ, f et Π."""

    gaussian = "gaussian"
    rectangle = "rectangle"
    sinc_phase_matching = "sinc_phase_matching"
    edge = "edge"
    tabulated = "tabulated"
    flat = "flat"


class SpectralFunction(BaseModel):
    """
    Transmission en amplitude (et non en intensité) en fonction de ω.

    Conventions de largeur :
      - gaussian  : `width` est la largeur à mi-hauteur de l'amplitude
      - rectangle : `width` est la largeur totale du support
      - sinc_phase_matching : largeur déduite de `gvm` et `crystal_length`
      - edge      : marche en `center`, transmise du côté ω ≥ center si `rising`
      - flat      : constante `peak_amplitude` partout
      - tabulated : interpolation linéaire de `table`, 0 hors de la table

    `table` contient des triplets (ω en rad/s, module, phase en rad).
    """

    model_config = ConfigDict(frozen=True)

    kind: SpectralKind
    center: float = Field(default=0.0, description="Centre (rad/s)")
    width: float | None = Field(default=None, description="Largeur (rad/s)")
    peak_amplitude: float = Field(default=1.0, ge=0.0, le=1.0)
    table: tuple[tuple[float, float, float], ...] | None = None

    # Paramètres propres au kind sinc_phase_matching
    gvm: float | None = Field(
        default=None, description="Désaccord de vitesses de groupe D (s/m)"
    )
    crystal_length: float = Field(default=8e-3, gt=0, description="Longueur du cristal (m)")

    # Paramètre propre au kind edge
    rising: bool = True

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "SpectralFunction":
        kind = self.kind
        if kind in (SpectralKind.gaussian, SpectralKind.rectangle):
            if self.width is None or not self.width > 0:
                raise ValueError(f"le kind {kind.value} exige width > 0")
        elif kind is SpectralKind.sinc_phase_matching:
            if self.gvm is None or self.gvm == 0:
                raise ValueError("le kind sinc_phase_matching exige gvm non nul")
        elif kind is SpectralKind.tabulated:
            if not self.table:
                raise ValueError("le kind tabulated exige une table non vide")
            abscissae = np.array([row[0] for row in self.table])
            if np.any(np.diff(abscissae) <= 0):
                raise ValueError("les abscisses de la table doivent être strictement croissantes")
            moduli = np.abs([row[1] for row in self.table])
            if moduli.max() > self.peak_amplitude * (1 + 1e-12):
                raise ValueError(
                    f"|amplitude| tabulée {moduli.max():.6g} > peak_amplitude "
                    f"{self.peak_amplitude:.6g}"
                )
        return self


# =============================================================================
# MILIEU DISPERSIF
# =============================================================================


class DispersiveMedium(BaseModel):
    """
    Milieu traversé par un bras : k' = 1/u (s/m), k'' (s²/m) et longueur r (m).

    Un k'' négatif modélise un milieu de compensation.
    """

    model_config = ConfigDict(frozen=True)

    inverse_group_velocity: float = Field(default=0.0, ge=0.0, description="k' = 1/u (s/m)")
    gvd: float = Field(default=0.0, description="k'' (s²/m)")
    length: float = Field(default=0.0, ge=0.0, description="r (m)")

    @property
    def group_delay(self) -> float:
        """Retard de groupe r/u (s)."""
        return self.length * self.inverse_group_velocity

    @property
    def gdd(self) -> float:
        """Dispersion de retard de groupe k''·r (s²)."""
        return self.gvd * self.length
