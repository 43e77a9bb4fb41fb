# =============================================================================
# app/models/responses.py — Modèles de résultats (scan et API HTTP)
#
# Architecture :
#   - ScanPoint              une consigne du monochromateur et ses comptages
#   - AlignmentSummary       décalage recouvré pendant un scan Monte Carlo
#   - ScanCurve              courbe complète + instantané de configuration
#   - ReconstructionRow      un point de |f|² estimé (axe λ signal)
#   - ReconstructionSummary  centre et largeur de la reconstruction
#   - ConjugateResponse, ScanResponse, RateRequest, RateResponse : API HTTP
#
# Les comptages sont entiers pour le moteur Monte Carlo et flottants
# (espérances) pour le moteur analytique : d'où le type int | float.
# =============================================================================

from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.models.config import RunConfig

# Tolérance relative de la relation 1/λ_M + 1/λ_conj = 1/λ_p.
CONJUGATE_RTOL: float = 1e-9


class ScanPoint(BaseModel):
    """Une ligne du fichier scan.csv."""

    lambda_M_nm: float = Field(description="Consigne du monochromateur (idler, nm)")
    lambda_conj_nm: float = Field(description="Longueur d'onde conjuguée (signal, nm)")
    singles_1: int | float = Field(ge=0)
    singles_2: int | float = Field(ge=0)
    coincidences: int | float = Field(ge=0)
    dwell_s: float = Field(gt=0)
    # None quand D2 n'a rien compté : la valeur est manquante, pas nulle.
    normalized: float | None = None

    @model_validator(mode="after")
    def _check_counts(self) -> "ScanPoint":
        if self.coincidences > min(self.singles_1, self.singles_2):
            raise ValueError(
                f"coïncidences ({self.coincidences}) > min des singles "
                f"({self.singles_1}, {self.singles_2})"
            )
        return self


class AlignmentSummary(BaseModel):
    offset_ps: int
    centroid_offset_ps: int | None = None
    peak_count: int
    background_mean: float
    significance: float
    detection_significance: float = 0.0


class ScanCurve(BaseModel):
    pump_nm: float = Field(gt=0)
    engine: Literal["montecarlo", "analytic"]
    points: list[ScanPoint]
    config: dict = Field(description="RunConfig résolu (instantané)")
    alignment: AlignmentSummary | None = None

    @model_validator(mode="after")
    def _check_axes(self) -> "ScanCurve":
        lambdas = np.array([p.lambda_M_nm for p in self.points])
        if lambdas.size > 1:
            steps = np.diff(lambdas)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                raise ValueError("lambda_M doit être strictement monotone")
        for point in self.points:
            lhs = 1.0 / point.lambda_M_nm + 1.0 / point.lambda_conj_nm
            rhs = 1.0 / self.pump_nm
            if abs(lhs - rhs) > CONJUGATE_RTOL * rhs:
                raise ValueError(
                    f"λ_M = {point.lambda_M_nm} nm et λ_conj = {point.lambda_conj_nm} nm "
                    "ne sont pas conjuguées"
                )
        return self


class ReconstructionRow(BaseModel):
    lambda_conj_nm: float
    value: float = Field(ge=0, description="|f|² estimée, normalisée au maximum")


class ReconstructionSummary(BaseModel):
    peak_nm: float
    center_nm: float = Field(description="Milieu des passages à mi-hauteur")
    fwhm_nm: float | None = Field(default=None, description="None si la courbe reste au-dessus")


# =============================================================================
# API HTTP
# =============================================================================


class ConjugateResponse(BaseModel):
    lambda_pump_nm: float
    lambda_nm: float
    lambda_conjugate_nm: float


class ScanResponse(BaseModel):
    curve: ScanCurve
    reconstruction: list[ReconstructionRow]
    summary: ReconstructionSummary | None = None


class RateRequest(BaseModel):
    lambda_M_nm: float = Field(gt=0)
    config: RunConfig | None = None


class RateResponse(BaseModel):
    lambda_M_nm: float
    lambda_conj_nm: float
    relative_rate: float = Field(description="|Φ(ω⁰_i − ω_M)|²·|f(ω_p − ω_M)|²")
    singles_1_per_s: float
    singles_2_per_s: float
    coincidences_per_s: float
