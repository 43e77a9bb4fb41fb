# =============================================================================
# app/generators/instruments.py — Transmission optique et détection
#
# Deux étapes stochastiques entre la source et les horodateurs :
#
#   transmit()  chaque photon d'un bras survit avec la probabilité |f(ω)|²
#               (filtre distant côté signal, monochromateur Π côté idler)
#   detect()    modèle de détecteur à comptage de photons : efficacité,
#               gigue gaussienne, coups d'obscurité, temps mort non paralysable
#
# Le flux produit par detect() est exprimé dans l'horloge de référence du
# laboratoire, quantifié à 1 ps ; les horloges locales sont appliquées
# ensuite par app.io.timetag.apply_clock().
# =============================================================================

import logging
from enum import Enum

import numpy as np
from numba import njit
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.data.profiles import DETECTOR_DEFAULTS, MONOCHROMATOR_PEAK, MONOCHROMATOR_RESOLUTION_NM
from app.generators.montecarlo import PairBatch
from app.io.timetag import EventStream
from app.models.spectral import SpectralFunction
from app.physics.spectra import (
    bandwidth_to_omega,
    effective_width,
    eval_spectral,
    gaussian,
    omega_to_wavelength,
    wavelength_to_omega,
)

logger = logging.getLogger(__name__)

# Rapport largeur à mi-hauteur / écart-type d'une gaussienne : 2√(2 ln 2).
FWHM_PER_SIGMA: float = 2.0 * np.sqrt(2.0 * np.log(2.0))

# Résolution de l'horloge de référence (ps).
REFERENCE_RESOLUTION_PS: int = 1


# =============================================================================
# MODÈLES
# =============================================================================


class Arm(str, Enum):
    signal = "signal"
    idler = "idler"


class DetectorModel(BaseModel):
    """
    Détecteur à comptage de photons uniques.

    L'efficacité effective vaut efficiency + efficiency_slope·(λ − λ_ref),
    ramenée dans [0, 1] à l'évaluation.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    efficiency: float = Field(default=DETECTOR_DEFAULTS["efficiency"], ge=0.0, le=1.0)
    dark_rate: float = Field(default=DETECTOR_DEFAULTS["dark_rate"], ge=0.0,
                             description="Coups d'obscurité (1/s)")
    jitter_fwhm: float = Field(default=DETECTOR_DEFAULTS["jitter_fwhm"], ge=0.0,
                               description="Gigue temporelle, largeur à mi-hauteur (s)")
    dead_time: float = Field(default=DETECTOR_DEFAULTS["dead_time"], ge=0.0,
                             description="Temps mort non paralysable (s)")
    efficiency_slope: float = Field(default=0.0, description="Pente d'efficacité (1/nm)")
    reference_wavelength_nm: float = Field(default=915.8, gt=0.0)

    def efficiency_at(self, wavelength_nm=None):
        """Efficacité à la longueur d'onde donnée (nm), scalaire ou tableau."""
        if wavelength_nm is None:
            return self.efficiency
        raw = self.efficiency + self.efficiency_slope * (
            np.asarray(wavelength_nm, dtype=float) - self.reference_wavelength_nm
        )
        return np.clip(raw, 0.0, 1.0)


class MonochromatorSetting(BaseModel):
    """Réglage du monochromateur : Π(ω − ω_M), Π centrée en 0."""

    model_config = ConfigDict(frozen=True)

    omega_M: float = Field(gt=0, description="Fréquence de consigne (rad/s)")
    response: SpectralFunction

    @model_validator(mode="after")
    def _check_response(self) -> "MonochromatorSetting":
        width = effective_width(self.response)
        if width is None or not width > 0:
            raise ValueError("la réponse du monochromateur doit avoir une largeur finie > 0")
        return self

    @classmethod
    def from_wavelength(
        cls,
        lambda_M_nm: float,
        resolution_nm: float = MONOCHROMATOR_RESOLUTION_NM,
        peak: float = MONOCHROMATOR_PEAK,
    ) -> "MonochromatorSetting":
        """
        Réponse gaussienne dont |Π|² a pour largeur à mi-hauteur `resolution_nm`.

        La largeur en amplitude vaut donc √2 fois la résolution.
        """
        width = np.sqrt(2.0) * bandwidth_to_omega(lambda_M_nm, resolution_nm)
        return cls(omega_M=float(wavelength_to_omega(lambda_M_nm)),
                   response=gaussian(0.0, width, peak))

    @property
    def lambda_M_nm(self) -> float:
        return float(omega_to_wavelength(self.omega_M))

    def amplitude(self, omega):
        """Π(ω − ω_M)."""
        return eval_spectral(self.response, np.asarray(omega, dtype=float) - self.omega_M)


# =============================================================================
# TRANSMISSION
# =============================================================================


def transmit(
    pairs: PairBatch,
    arm: Arm,
    function: SpectralFunction | MonochromatorSetting,
    rng: np.random.Generator,
) -> PairBatch:
    """
    Applique un élément optique à un bras : survie avec probabilité |function(ω)|².

    Un seul uniforme u est tiré par photon (survie si u < |f|²) : à graine
    fixée, agrandir |f|² point par point ne retire jamais de survivant.
    """
    arm = Arm(arm)
    omega = pairs.omega_s if arm is Arm.signal else pairs.omega_i
    if isinstance(function, MonochromatorSetting):
        amplitude = function.amplitude(omega)
    else:
        amplitude = eval_spectral(function, omega)
    survive = rng.random(len(pairs)) < np.abs(amplitude) ** 2

    if arm is Arm.signal:
        return pairs.with_survival(signal_alive=pairs.signal_alive & survive)
    return pairs.with_survival(idler_alive=pairs.idler_alive & survive)


# =============================================================================
# DÉTECTION
# =============================================================================


@njit(cache=True)
def _dead_time_mask(ticks: np.ndarray, dead_ticks: int) -> np.ndarray:
    keep = np.ones(ticks.size, dtype=np.bool_)
    last = ticks[0]
    for j in range(1, ticks.size):
        if ticks[j] - last < dead_ticks:
            keep[j] = False
        else:
            last = ticks[j]
    return keep


def apply_dead_time(ticks: np.ndarray, dead_ticks: int) -> np.ndarray:
    """
    Temps mort non paralysable sur des instants entiers triés.

    Un clic à moins de `dead_ticks` du dernier clic accepté est supprimé ;
    un écart exactement égal à `dead_ticks` est accepté.
    """
    if dead_ticks <= 0 or ticks.size < 2:
        return ticks
    if not np.any(np.diff(ticks) < dead_ticks):
        return ticks
    return ticks[_dead_time_mask(np.asarray(ticks, dtype=np.int64), int(dead_ticks))]


def detect(
    arrivals: np.ndarray,
    model: DetectorModel,
    duration: float,
    rng: np.random.Generator,
    *,
    wavelengths_nm: np.ndarray | None = None,
    detector_id: int = 1,
) -> EventStream:
    """
    Convertit des instants d'arrivée de photons (s) en flux de clics.

    Étapes : efficacité (dépendante de λ), gigue gaussienne, coups
    d'obscurité poissoniens sur [0, duration), quantification à 1 ps
    (les clics confondus ne comptent qu'une fois), temps mort.

    Returns:
        EventStream dans l'horloge de référence, résolution 1 ps.
    """
    arrivals = np.asarray(arrivals, dtype=float)
    efficiency = model.efficiency_at(wavelengths_nm)
    clicks = arrivals[rng.random(arrivals.size) < efficiency]

    if model.jitter_fwhm > 0 and clicks.size:
        clicks = clicks + rng.normal(0.0, model.jitter_fwhm / FWHM_PER_SIGMA, clicks.size)

    n_dark = int(rng.poisson(model.dark_rate * duration))
    dark = rng.uniform(0.0, duration, n_dark)

    times = np.concatenate([clicks, dark])
    times = times[(times >= 0.0) & (times < duration)]

    duration_ps = int(round(duration * 1e12))
    ticks = np.rint(times * 1e12).astype(np.int64)
    ticks = ticks[ticks < duration_ps]
    unique = np.unique(ticks)
    if unique.size < ticks.size:
        logger.debug(
            "Détecteur %d : %d clics confondus à la résolution de 1 ps",
            detector_id, ticks.size - unique.size,
        )

    dead_ticks = int(round(model.dead_time * 1e12))
    kept = apply_dead_time(unique, dead_ticks)
    logger.debug(
        "Détecteur %d : %d clics (%d photons, %d obscurité, %d perdus en temps mort)",
        detector_id, kept.size, clicks.size, n_dark, unique.size - kept.size,
    )
    return EventStream(
        detector_id=detector_id,
        duration_ps=duration_ps,
        resolution_ps=REFERENCE_RESOLUTION_PS,
        timestamps=kept.astype(np.uint64),
    )
