# =============================================================================
# tests/conftest.py — Fixtures pytest partagées entre tous les fichiers de test
#
#   client            TestClient lié à l'application FastAPI (sans serveur réseau)
#   petite_config     RunConfig réduit : 7 points de 50 ms, recherche ± 100 µs,
#                     assez court pour un scan Monte Carlo dans un test
#   rng               générateur numpy à graine fixe
#   flux_correles     deux EventStream dont le second est décalé de 1 234 567 ps
#
# Doc : https://docs.pytest.org/en/stable/how-to/fixtures.html
# =============================================================================

import numpy as np
import pytest
from fastapi.testclient import TestClient

from app.io.timetag import EventStream
from app.main import app
from app.models.config import RunConfig

# Décalage injecté entre les deux horloges dans les fixtures (ps).
OFFSET_INJECTE_PS: int = 1_234_567


@pytest.fixture
def client() -> TestClient:
    """
    Client HTTP de test pour l'application FastAPI.

    Utilisation :
        def test_health(client):
            assert client.get("/").status_code == 200
    """
    return TestClient(app)


@pytest.fixture
def petite_config() -> RunConfig:
    """Profil par défaut (filtre 850 nm / 10 nm) raccourci pour les tests."""
    return RunConfig.model_validate({
        "scan": {
            "n_points": 7,
            "dwell_s": 0.05,
            "alignment_dwell_s": 0.05,
            "analytic_mode": "convolved",
        },
        "coincidence": {"search_range_s": 1e-4},
        "simulate": {"duration_s": 0.05},
        "seed": 7,
    })


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def _flux(ticks: np.ndarray, detector_id: int, duration_ps: int) -> EventStream:
    return EventStream(
        detector_id=detector_id,
        duration_ps=duration_ps,
        resolution_ps=1,
        timestamps=np.unique(ticks).astype(np.uint64),
    )


@pytest.fixture
def flux_correles(rng) -> tuple[EventStream, EventStream]:
    """
    1 s d'acquisition : 20 000 paires corrélées (gigue σ = 150 ps par voie)
    et 20 000 clics non corrélés par détecteur.
    """
    duration_ps = 10**12
    births = rng.integers(10**6, duration_ps - 10**7, 20_000)
    t1 = births + np.rint(rng.normal(0.0, 150.0, births.size)).astype(np.int64)
    t2 = births + OFFSET_INJECTE_PS + np.rint(rng.normal(0.0, 150.0, births.size)).astype(np.int64)
    bruit_1 = rng.integers(0, duration_ps, 20_000)
    bruit_2 = rng.integers(0, duration_ps, 20_000)
    return (
        _flux(np.concatenate([t1, bruit_1]), 1, duration_ps),
        _flux(np.concatenate([t2, bruit_2]), 2, duration_ps),
    )
