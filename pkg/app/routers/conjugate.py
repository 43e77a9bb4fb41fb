# =============================================================================
# app/routers/conjugate.py — Endpoints GET /conjugate et GET /profiles
#
# /conjugate : longueur d'onde conjuguée par conservation de l'énergie,
#              1/λ_p = 1/λ₁ + 1/λ₂. Sert à lire les deux axes d'un scan.
# /profiles  : profils de configuration nommés, résolus en RunConfig complets.
# =============================================================================

from fastapi import APIRouter, Query

from app.data.profiles import PROFILES, PUMP_WAVELENGTH_NM
from app.models.config import RunConfig
from app.models.responses import ConjugateResponse
from app.physics.spectra import conjugate_wavelength

router = APIRouter(tags=["Conversions"])


@router.get(
    "/conjugate",
    response_model=ConjugateResponse,
    summary="Longueur d'onde conjuguée d'un photon de la paire",
)
def get_conjugate(
    lambda_nm: float = Query(..., description="Longueur d'onde d'un photon (nm)"),
    lambda_pump_nm: float = Query(PUMP_WAVELENGTH_NM, description="Pompe (nm)"),
) -> ConjugateResponse:
    """
    Retourne λ₂ tel que 1/λ_pump = 1/λ + 1/λ₂.

    Exemple : `GET /conjugate?lambda_nm=992.68` → `lambda_conjugate_nm ≈ 850.0`.

    Une longueur d'onde non positive ou plus bleue que la pompe donne un 400.
    """
    return ConjugateResponse(
        lambda_pump_nm=lambda_pump_nm,
        lambda_nm=lambda_nm,
        lambda_conjugate_nm=conjugate_wavelength(lambda_pump_nm, lambda_nm),
    )


@router.get(
    "/profiles",
    summary="Profils de configuration disponibles",
)
def get_profiles() -> dict[str, dict]:
    """Chaque profil nommé, résolu en RunConfig complet (valeurs par défaut incluses)."""
    return {
        name: RunConfig.model_validate(document).model_dump(mode="json")
        for name, document in PROFILES.items()
    }
