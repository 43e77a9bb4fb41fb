# =============================================================================
# app/routers/scan.py — Endpoints POST /scan et POST /rate
#
# /scan : exécute un scan complet (moteur analytique par défaut, Monte Carlo
#         sur demande) et renvoie la courbe, la reconstruction de |f|² et son
#         résumé. Le corps est un RunConfig ; absent, le profil "defaults".
# /rate : taux attendus pour une seule consigne du monochromateur.
#
# Un scan Monte Carlo aux paramètres par défaut dure plusieurs secondes :
# réduire scan.n_points ou fixer scan.dwell_s pour un appel interactif.
# =============================================================================

from typing import Literal

from fastapi import APIRouter, Body, Query

from app.analysis.scan import (
    analytic_scan,
    build_setup,
    expected_rates,
    reconstruction_table,
    run_scan,
    summarize_reconstruction,
)
from app.data.profiles import PROFILES
from app.errors import EmptyReconstructionError
from app.models.config import RunConfig
from app.models.responses import RateRequest, RateResponse, ScanResponse
from app.physics.spectra import conjugate_wavelength

router = APIRouter(tags=["Scan"])


def _default_config() -> RunConfig:
    return RunConfig.model_validate(PROFILES["defaults"])


@router.post(
    "/scan",
    response_model=ScanResponse,
    summary="Scan du monochromateur et reconstruction du filtre distant",
)
def post_scan(
    config: RunConfig | None = Body(default=None),
    engine: Literal["analytic", "montecarlo"] = Query(
        "analytic", description="Moteur : espérances analytiques ou Monte Carlo"
    ),
) -> ScanResponse:
    """
    Retourne la courbe de scan (une ligne par consigne λ_M), la
    reconstruction de |f|² sur l'axe λ signal et son centre / sa largeur.

    - 400 : configuration invalide
    - 409 : pas d'alignement trouvé (moteur Monte Carlo)
    """
    config = config or _default_config()
    curve = run_scan(config) if engine == "montecarlo" else analytic_scan(config)
    try:
        rows = reconstruction_table(curve)
    except EmptyReconstructionError:
        return ScanResponse(curve=curve, reconstruction=[], summary=None)
    return ScanResponse(curve=curve, reconstruction=rows, summary=summarize_reconstruction(rows))


@router.post(
    "/rate",
    response_model=RateResponse,
    summary="Taux attendus pour une consigne du monochromateur",
)
def post_rate(request: RateRequest) -> RateResponse:
    """
    Taux de singles et de coïncidences attendus (1/s) à λ_M, ainsi que le
    facteur |Φ(ω⁰_i − ω_M)|²·|f(ω_p − ω_M)|² de la limite bande étroite
    (coincidence_rate_analytic), quel que soit scan.analytic_mode.
    """
    config = request.config or _default_config()
    rates = expected_rates(build_setup(config), request.lambda_M_nm, config.scan.analytic_mode)
    return RateResponse(
        lambda_M_nm=request.lambda_M_nm,
        lambda_conj_nm=conjugate_wavelength(config.pump_nm, request.lambda_M_nm),
        relative_rate=rates.relative_rate,
        singles_1_per_s=rates.singles_1,
        singles_2_per_s=rates.singles_2,
        coincidences_per_s=rates.coincidences,
    )
