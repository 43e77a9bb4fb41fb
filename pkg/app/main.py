# =============================================================================
# app/main.py — Point d'entrée de l'application FastAPI
#
# L'API expose le moteur analytique et le scan à des clients distants
# (notebooks, scripts de tracé) sans passer par le CLI :
#
#   GET  /            santé
#   GET  /conjugate   longueur d'onde conjuguée
#   GET  /profiles    profils de configuration résolus
#   POST /scan        scan complet + reconstruction
#   POST /rate        taux attendus pour une consigne
#
# Pour lancer le serveur :
#   uvicorn app.main:app --reload --port 8000
#
# Doc Swagger générée automatiquement : http://localhost:8000/docs
# =============================================================================

import logging
from contextlib import asynccontextmanager
from typing import AsyncGenerator

from fastapi import FastAPI
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.requests import Request

from app.config import settings
from app.errors import NoAlignmentError, SpectroError
from app.routers import conjugate, scan

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI) -> AsyncGenerator:
    """
    Startup : journalise la configuration d'exécution.
    Shutdown : rien à libérer (aucune ressource persistante).
    """
    if settings.random_seed is not None:
        logger.info("Graine imposée à %d pour toutes les simulations", settings.random_seed)
    else:
        logger.info("Aucune graine imposée : graine de chaque RunConfig")

    logger.info(
        "API spectromètre distant démarrée : environnement=%s, port=%d, processus=%d, CORS=%s",
        settings.environment,
        settings.port,
        settings.threads,
        settings.cors_origins,
    )
    yield
    logger.info("API spectromètre distant arrêtée.")


app = FastAPI(
    title="Spectromètre distant à paires de photons",
    description=(
        "Simulation de la caractérisation spectrale d'un élément optique distant "
        "par coïncidences de paires de photons corrélées en fréquence."
    ),
    version="0.1.0",
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins_list,
    allow_credentials=False,
    allow_methods=["*"],
    allow_headers=["*"],
)


# =============================================================================
# Exception handlers
#
#   RequestValidationError → 400 (au lieu du 422 par défaut de FastAPI)
#   SpectroError           → 400, {"detail": message, "error": nom de classe}
#   NoAlignmentError       → 409 (la requête est valide, les données non)
#
# Starlette choisit le handler de la classe la plus spécifique : un
# NoAlignmentError n'atteint donc jamais le handler de SpectroError.
# =============================================================================


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(
    request: Request, exc: RequestValidationError
) -> JSONResponse:
    """Corps au format natif FastAPI : {"detail": [{"loc", "msg", "type"}, ...]}."""
    # jsonable_encoder : le ctx des erreurs levées dans un validateur contient
    # l'exception elle-même, non sérialisable telle quelle.
    return JSONResponse(status_code=400, content={"detail": jsonable_encoder(exc.errors())})


@app.exception_handler(SpectroError)
async def spectro_exception_handler(request: Request, exc: SpectroError) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"detail": str(exc), "error": type(exc).__name__},
    )


@app.exception_handler(NoAlignmentError)
async def no_alignment_handler(request: Request, exc: NoAlignmentError) -> JSONResponse:
    return JSONResponse(
        status_code=409,
        content={
            "detail": str(exc),
            "error": type(exc).__name__,
            "significance": exc.significance,
        },
    )


app.include_router(conjugate.router)
app.include_router(scan.router)


@app.get(
    "/",
    summary="Vérification de l'état de l'API",
    tags=["Santé"],
)
def health_check() -> dict:
    """Retourne `{"status": "ok"}` si le serveur est opérationnel."""
    return {"status": "ok"}
