# =============================================================================
# tests/test_api.py — Tests des endpoints HTTP
# =============================================================================

import pytest
from fastapi.testclient import TestClient


def test_health(client: TestClient) -> None:
    response = client.get("/")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


# ---------------------------------------------------------------------------
# GET /conjugate
# ---------------------------------------------------------------------------

def test_conjugate_850(client: TestClient) -> None:
    response = client.get("/conjugate", params={"lambda_nm": 992.68})
    assert response.status_code == 200
    data = response.json()
    assert data["lambda_pump_nm"] == 457.9
    assert data["lambda_conjugate_nm"] == pytest.approx(850.0, abs=0.05)


def test_conjugate_pompe_personnalisee(client: TestClient) -> None:
    response = client.get("/conjugate", params={"lambda_nm": 1064.0, "lambda_pump_nm": 532.0})
    assert response.json()["lambda_conjugate_nm"] == pytest.approx(1064.0)


def test_conjugate_plus_bleu_que_la_pompe(client: TestClient) -> None:
    response = client.get("/conjugate", params={"lambda_nm": 400.0})
    assert response.status_code == 400
    assert response.json()["error"] == "DomainError"


def test_conjugate_parametre_obligatoire(client: TestClient) -> None:
    """Paramètre manquant : 400 (et non 422), au format natif FastAPI."""
    response = client.get("/conjugate")
    assert response.status_code == 400
    assert response.json()["detail"][0]["loc"] == ["query", "lambda_nm"]


# ---------------------------------------------------------------------------
# GET /profiles
# ---------------------------------------------------------------------------

def test_profils_resolus(client: TestClient) -> None:
    data = client.get("/profiles").json()
    assert set(data) == {"defaults", "filtre_850", "filtre_886", "filtre_916"}
    assert data["filtre_886"]["signal_filter"]["center_nm"] == 885.6
    assert data["filtre_916"]["source"]["signal_center_nm"] == 916.0
    assert data["defaults"]["coincidence"]["window_s"] == 5e-9


# ---------------------------------------------------------------------------
# POST /scan et POST /rate
# ---------------------------------------------------------------------------

def test_scan_analytique_par_defaut(client: TestClient) -> None:
    response = client.post("/scan")
    assert response.status_code == 200
    data = response.json()
    assert data["curve"]["engine"] == "analytic"
    assert len(data["curve"]["points"]) == 60
    assert data["summary"]["center_nm"] == pytest.approx(850.0, abs=1.0)
    assert max(row["value"] for row in data["reconstruction"]) == pytest.approx(1.0)


def test_scan_config_fournie(client: TestClient) -> None:
    body = {"scan": {"n_points": 11}, "signal_filter": {"center_nm": 860.0}}
    data = client.post("/scan", json=body).json()
    assert len(data["curve"]["points"]) == 11
    assert data["summary"]["center_nm"] == pytest.approx(860.0, abs=1.5)


def test_scan_config_invalide(client: TestClient) -> None:
    response = client.post("/scan", json={"scan": {"n_points": 0}})
    assert response.status_code == 400


def test_scan_monte_carlo_sans_paires(client: TestClient) -> None:
    """Sans paires, l'acquisition d'alignement n'a pas de pic : 409."""
    body = {
        "source": {"pair_rate": 1e-9},
        "scan": {"n_points": 3, "dwell_s": 0.01, "alignment_dwell_s": 0.05},
        "coincidence": {"search_range_s": 1e-4},
    }
    response = client.post("/scan", params={"engine": "montecarlo"}, json=body)
    assert response.status_code == 409
    assert response.json()["error"] == "NoAlignmentError"


def test_taux_attendus(client: TestClient) -> None:
    response = client.post("/rate", json={"lambda_M_nm": 992.68})
    assert response.status_code == 200
    data = response.json()
    assert data["lambda_conj_nm"] == pytest.approx(850.0, abs=0.05)
    assert data["relative_rate"] == pytest.approx(1.0, abs=1e-3)
    assert 0 < data["coincidences_per_s"] < data["singles_2_per_s"] < data["singles_1_per_s"]


def test_taux_hors_domaine(client: TestClient) -> None:
    response = client.post("/rate", json={"lambda_M_nm": 400.0})
    assert response.status_code == 400
