# =============================================================================
# tests/test_cli.py — Tests de l'interface en ligne de commande
#
# main(argv) est appelée directement : pas de sous-processus, les sorties
# standard sont capturées par la fixture capsys de pytest.
# =============================================================================

import numpy as np
import pytest

from app.cli import EXIT_CONFIG, EXIT_IO, EXIT_NO_ALIGNMENT, EXIT_OK, main
from app.io.timetag import EventStream, read_stream, write_stream

COURT = ["--set", "simulate.duration_s=0.05", "--set", "seed=11"]


def _simulate(out, *extra) -> int:
    return main(["simulate", "--out", str(out), *COURT, *extra])


def test_simulate_ecrit_les_deux_flux(tmp_path, capsys):
    assert _simulate(tmp_path) == EXIT_OK
    for nom in ("detector1.ttag", "detector2.ttag", "config_snapshot.json"):
        assert (tmp_path / nom).exists()
    s1 = read_stream(tmp_path / "detector1.ttag")
    s2 = read_stream(tmp_path / "detector2.ttag")
    assert (s1.detector_id, s2.detector_id) == (1, 2)
    sortie = capsys.readouterr().out
    assert f"events1={len(s1)}" in sortie and f"events2={len(s2)}" in sortie


def test_instantane_reproduit_les_octets(tmp_path):
    premier = tmp_path / "a"
    second = tmp_path / "b"
    assert _simulate(premier) == EXIT_OK
    snapshot = premier / "config_snapshot.json"
    assert main(["simulate", "--config", str(snapshot), "--out", str(second)]) == EXIT_OK
    for nom in ("detector1.ttag", "detector2.ttag", "config_snapshot.json"):
        assert (premier / nom).read_bytes() == (second / nom).read_bytes()


def test_obscurite_seule(tmp_path):
    """Sans paires, chaque détecteur ne compte que ses coups d'obscurité."""
    assert main([
        "simulate", "--out", str(tmp_path),
        "--set", "source.pair_rate=1e-9",
        "--set", "simulate.duration_s=1.0",
        "--set", "detector_1.dark_rate=1000",
        "--set", "detector_2.dark_rate=1000",
    ]) == EXIT_OK
    for nom in ("detector1.ttag", "detector2.ttag"):
        n = len(read_stream(tmp_path / nom))
        assert abs(n - 1000) < 5 * np.sqrt(1000)


def test_align_retrouve_le_decalage(tmp_path, capsys):
    assert _simulate(tmp_path, "--set", "simulate.duration_s=0.1") == EXIT_OK
    code = main([
        "align", str(tmp_path / "detector1.ttag"), str(tmp_path / "detector2.ttag"),
        "--search-s", "1e-4", "--out", str(tmp_path),
    ])
    assert code == EXIT_OK
    ligne = capsys.readouterr().out.strip().splitlines()[-1]
    champs = dict(champ.split("=") for champ in ligne.split())
    assert abs(int(champs["centroid_ps"]) - 1_234_567) <= 1250
    assert abs(int(champs["offset_ps"]) - 1_234_567) <= 2500
    assert (tmp_path / "alignment.csv").read_text(encoding="utf-8").startswith("shift_ps,count")


def test_align_sans_pic(tmp_path, rng):
    for detecteur in (1, 2):
        ticks = np.unique(rng.integers(0, 10**12, 5000)).astype(np.uint64)
        write_stream(EventStream(detecteur, 10**12, 1, ticks), tmp_path / f"d{detecteur}.ttag")
    code = main(["align", str(tmp_path / "d1.ttag"), str(tmp_path / "d2.ttag"),
                 "--search-s", "1e-4", "--out", str(tmp_path)])
    assert code == EXIT_NO_ALIGNMENT


def test_align_fichier_mal_forme(tmp_path):
    (tmp_path / "casse.ttag").write_bytes(b"pas un fichier ttag")
    code = main(["align", str(tmp_path / "casse.ttag"), str(tmp_path / "casse.ttag"),
                 "--out", str(tmp_path)])
    assert code == EXIT_IO


def test_align_fichier_absent(tmp_path):
    code = main(["align", str(tmp_path / "absent1.ttag"), str(tmp_path / "absent2.ttag")])
    assert code == EXIT_IO


def test_scan_analytique(tmp_path, capsys):
    assert main(["scan", "--analytic", "--out", str(tmp_path)]) == EXIT_OK
    lignes = (tmp_path / "scan.csv").read_text(encoding="utf-8").splitlines()
    assert lignes[0] == "lambda_M_nm,lambda_conj_nm,singles1,singles2,coinc,dwell_s,normalized"
    assert len(lignes) == 61
    assert (tmp_path / "reconstruction.csv").exists()
    resume = capsys.readouterr().out
    centre = float(resume.split("center_nm=")[1].split()[0])
    assert centre == pytest.approx(850.0, abs=1.0)


def test_scan_reconstruction_vide(tmp_path):
    code = main([
        "scan", "--analytic", "--out", str(tmp_path),
        "--set", "detector_2.efficiency=0", "--set", "detector_2.dark_rate=0",
        "--set", "scan.dwell_s=0.1",
    ])
    assert code == EXIT_OK
    assert (tmp_path / "reconstruction.csv").read_text(encoding="utf-8") == "lambda_conj_nm,value\r\n"


@pytest.mark.parametrize("surcharge", [
    "scan.lambda_M_nm=[]",
    "scan.n_points=0",
    "scan.lambda_M_nm=[990, 980, 995]",
    "coincidence.coarse_bin_s=1e-9",
    "pump_nm=900",
    "champ_inconnu=1",
    "sans_signe_egal",
])
def test_configuration_invalide(tmp_path, surcharge, capsys):
    assert main(["scan", "--analytic", "--out", str(tmp_path), "--set", surcharge]) == EXIT_CONFIG
    assert capsys.readouterr().err


def test_configuration_json_invalide(tmp_path):
    chemin = tmp_path / "config.json"
    chemin.write_text("{pas du json", encoding="utf-8")
    assert main(["scan", "--analytic", "--config", str(chemin), "--out", str(tmp_path)]) == EXIT_CONFIG
