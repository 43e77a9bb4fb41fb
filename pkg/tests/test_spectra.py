# =============================================================================
# tests/test_spectra.py — Tests du moteur analytique (app/physics/spectra.py)
# =============================================================================

import numpy as np
import pytest

from app.errors import AliasingError, DomainError
from app.models.spectral import DispersiveMedium, FrequencyGrid
from app.physics.spectra import (
    bandwidth_to_omega,
    coincidence_rate_analytic,
    coincidence_rate_numeric,
    compute_psi,
    conjugate_wavelength,
    direct_psi,
    edge,
    eval_spectral,
    flat,
    fwhm,
    gaussian,
    intensity,
    load_tabulated_csv,
    omega_to_wavelength,
    rectangle,
    sinc_phase_matching,
    size_grid,
    wavelength_to_omega,
)

OMEGA_P = float(wavelength_to_omega(457.9))
OMEGA_S0 = float(wavelength_to_omega(850.0))
OMEGA_I0 = OMEGA_P - OMEGA_S0
SIGMA = 1e13  # rad/s
VIDE = DispersiveMedium()


# ---------------------------------------------------------------------------
# Longueur d'onde conjuguée
# ---------------------------------------------------------------------------

def test_conjugee_point_degenere():
    """Au double de la pompe, le photon est sa propre conjuguée."""
    assert conjugate_wavelength(457.9, 915.8) == pytest.approx(915.8, rel=1e-12)


def test_conjugee_850_992():
    assert conjugate_wavelength(457.9, 992.68) == pytest.approx(850.0, abs=0.05)
    assert conjugate_wavelength(457.9, 850.0) == pytest.approx(992.68, abs=0.05)


def test_conjugee_involutive():
    for lam in (470.0, 850.0, 916.0, 1200.0, 5000.0):
        aller = conjugate_wavelength(457.9, lam)
        assert conjugate_wavelength(457.9, aller) == pytest.approx(lam, rel=1e-9)


@pytest.mark.parametrize("pompe, photon", [(457.9, 457.9), (457.9, 400.0), (457.9, -1.0), (0.0, 800.0)])
def test_conjugee_domaine_invalide(pompe, photon):
    with pytest.raises(DomainError):
        conjugate_wavelength(pompe, photon)


def test_conversion_longueur_onde_aller_retour():
    assert omega_to_wavelength(wavelength_to_omega(850.0)) == pytest.approx(850.0, rel=1e-14)


def test_conjugee_strictement_decroissante():
    photons = np.linspace(460.0, 5000.0, 400)
    conjuguees = np.array([conjugate_wavelength(457.9, lam) for lam in photons])
    assert np.all(np.diff(conjuguees) < 0)


# ---------------------------------------------------------------------------
# Évaluation des fonctions spectrales
# ---------------------------------------------------------------------------

def test_rectangle_centre_et_exterieur():
    f = rectangle(100.0, 10.0)
    assert eval_spectral(f, 100.0) == 1
    assert eval_spectral(f, 110.0) == 0
    assert eval_spectral(f, 105.0) == 1  # bord inclus


def test_gaussienne_mi_hauteur_amplitude():
    f = gaussian(100.0, 10.0)
    assert abs(eval_spectral(f, 105.0)) == pytest.approx(0.5, rel=1e-12)
    assert abs(eval_spectral(f, 95.0)) == pytest.approx(0.5, rel=1e-12)


def test_scalaire_donne_complexe_et_tableau_donne_tableau():
    f = gaussian(0.0, 1.0)
    assert isinstance(eval_spectral(f, 0.0), complex)
    values = eval_spectral(f, np.linspace(-1, 1, 5))
    assert values.shape == (5,)
    assert values.dtype == complex


def test_edge_montant_et_descendant():
    montant = edge(10.0, rising=True)
    descendant = edge(10.0, rising=False)
    assert eval_spectral(montant, 11.0) == 1 and eval_spectral(montant, 9.0) == 0
    assert eval_spectral(descendant, 9.0) == 1 and eval_spectral(descendant, 11.0) == 0


def test_flat_et_sinc_au_centre():
    assert eval_spectral(flat(0.7), 123.0) == pytest.approx(0.7)
    f = sinc_phase_matching(gvm=1e-10, crystal_length=8e-3)
    assert abs(eval_spectral(f, 0.0)) == pytest.approx(1.0)
    # Premier zéro en ν = 2π/(D·L)
    assert abs(eval_spectral(f, 2 * np.pi / (1e-10 * 8e-3))) < 1e-12


def test_intensite_est_le_carre_du_module():
    f = gaussian(0.0, 2.0, peak=0.5)
    assert intensity(f, 0.0) == pytest.approx(0.25)


def test_largeur_en_frequence():
    """Δω = 2πcΔλ/λ²."""
    attendu = 2 * np.pi * 299_792_458.0 * 10e-9 / (850e-9) ** 2
    assert bandwidth_to_omega(850.0, 10.0) == pytest.approx(attendu, rel=1e-14)


def test_table_csv_en_nanometres(tmp_path):
    chemin = tmp_path / "filtre.csv"
    chemin.write_text("lambda_nm,amplitude\n840,0.1\n850,0.9\n860,0.2\n", encoding="utf-8")
    f = load_tabulated_csv(chemin)
    assert f.peak_amplitude == pytest.approx(0.9)
    assert abs(eval_spectral(f, wavelength_to_omega(850.0))) == pytest.approx(0.9)
    assert eval_spectral(f, wavelength_to_omega(900.0)) == 0


# ---------------------------------------------------------------------------
# Fonction d'onde ψ(τ)
# ---------------------------------------------------------------------------

def _psi_gaussien(medium1=VIDE, medium2=VIDE, n_points=512, span_factor=8.0):
    phi = gaussian(0.0, SIGMA)
    f = gaussian(OMEGA_S0 + 0.2 * SIGMA, 1.5 * SIGMA)
    pi = gaussian(0.0, 0.8 * SIGMA)
    grid = FrequencyGrid(span=span_factor * 1.5 * SIGMA, n_points=n_points)
    args = (grid, phi, f, pi, OMEGA_I0, medium1, medium2)
    return args


@pytest.mark.parametrize("n_points", [256, 512, 1024])
def test_fft_identique_a_la_somme_directe(n_points):
    args = _psi_gaussien(n_points=n_points)
    rapide = compute_psi(*args, omega_s0=OMEGA_S0, omega_i0=OMEGA_I0)
    direct = direct_psi(*args, omega_s0=OMEGA_S0, omega_i0=OMEGA_I0)
    ecart = np.max(np.abs(rapide.psi - direct.psi))
    assert ecart <= 1e-9 * np.max(np.abs(direct.psi))


def test_parseval():
    """Σ g2·Δτ = Σ |A|²·Δν, sans facteur de normalisation."""
    wf = compute_psi(*_psi_gaussien(), omega_s0=OMEGA_S0, omega_i0=OMEGA_I0)
    assert wf.g2_integral == pytest.approx(wf.spectral_integral, rel=1e-9)
    assert np.all(wf.g2 >= 0)


def _psi_phi_seule(medium1=VIDE, medium2=VIDE):
    grid = FrequencyGrid(span=32 * SIGMA, n_points=1024)
    return compute_psi(grid, gaussian(0.0, SIGMA), flat(), flat(), OMEGA_I0, medium1, medium2,
                       omega_s0=OMEGA_S0, omega_i0=OMEGA_I0)


def test_largeur_temporelle_gaussienne():
    """Amplitude gaussienne de largeur σ ⇒ |ψ| de largeur 8 ln2 / σ."""
    wf = _psi_phi_seule()
    assert fwhm(wf.tau, np.abs(wf.psi)) == pytest.approx(8 * np.log(2) / SIGMA, rel=1e-2)


def test_dispersion_elargit_puis_se_compense():
    a = 4 * np.log(2) / SIGMA**2
    beta = 6 * a
    sans = _psi_phi_seule()
    disperse = _psi_phi_seule(DispersiveMedium(gvd=beta, length=1.0))
    compense = _psi_phi_seule(
        DispersiveMedium(gvd=beta, length=1.0), DispersiveMedium(gvd=-beta, length=1.0)
    )

    largeur_sans = fwhm(sans.tau, np.abs(sans.psi))
    largeur_disperse = fwhm(disperse.tau, np.abs(disperse.psi))
    # Facteur √(1 + β²/4a²) = √10
    assert largeur_disperse / largeur_sans == pytest.approx(np.sqrt(10.0), rel=2e-2)
    np.testing.assert_allclose(compense.g2, sans.g2, rtol=0, atol=1e-12 * sans.g2.max())
    # La dispersion ne change pas le taux intégré.
    assert disperse.g2_integral == pytest.approx(sans.g2_integral, rel=1e-9)


def test_grille_trop_etroite_repliement():
    grid = FrequencyGrid(span=SIGMA, n_points=256)
    with pytest.raises(AliasingError):
        compute_psi(grid, gaussian(0.0, SIGMA), flat(), flat(), OMEGA_I0, VIDE, VIDE,
                    omega_s0=OMEGA_S0, omega_i0=OMEGA_I0)


def test_integrande_nulle_sans_erreur():
    """Monochromateur hors de Φ : ψ identiquement nulle, pas d'AliasingError."""
    grid = FrequencyGrid(span=SIGMA, n_points=256)
    wf = compute_psi(grid, rectangle(0.0, SIGMA), flat(), gaussian(0.0, SIGMA), OMEGA_I0 - 50 * SIGMA,
                     VIDE, VIDE, omega_s0=OMEGA_S0, omega_i0=OMEGA_I0)
    assert wf.g2_integral == 0.0


def test_rectangle_donne_un_sinc_carre():
    """Φ rectangle de largeur W, f et Π plats : g2(τ) ∝ sinc²(Wτ/2)."""
    largeur = 4 * SIGMA
    grid = FrequencyGrid(span=4 * largeur, n_points=1024)
    wf = compute_psi(grid, rectangle(0.0, largeur), flat(), flat(), OMEGA_I0, VIDE, VIDE,
                     omega_s0=OMEGA_S0, omega_i0=OMEGA_I0)
    proche = np.abs(wf.tau) <= 6 * np.pi / largeur
    attendu = np.sinc(largeur * wf.tau[proche] / (2 * np.pi)) ** 2
    np.testing.assert_allclose(wf.g2[proche] / wf.g2.max(), attendu, atol=2e-2)


def test_filtre_edge_presque_bloquant_sans_repliement():
    """Seule une queue de Π passe le front : le bord est jugé contre l'enveloppe |Φ·Π|."""
    grid = FrequencyGrid(span=8 * SIGMA, n_points=256)
    wf = compute_psi(grid, flat(), edge(OMEGA_S0 + 3.9 * SIGMA), gaussian(0.0, SIGMA), OMEGA_I0,
                     VIDE, VIDE, omega_s0=OMEGA_S0, omega_i0=OMEGA_I0)
    assert 0.0 < wf.g2_integral < 1e-20 * SIGMA


# ---------------------------------------------------------------------------
# Taux de coïncidences
# ---------------------------------------------------------------------------

def test_limite_bande_etroite():
    """Le taux numérique tend vers |Φ(ν_M)|²·|f(ω_p − ω_M)|² quand Π s'affine."""
    phi = gaussian(0.0, 3 * SIGMA)
    f = gaussian(OMEGA_S0, SIGMA)
    nu_m = 0.4 * SIGMA
    omega_m = OMEGA_I0 - nu_m
    analytique = coincidence_rate_analytic(phi, f, omega_m, OMEGA_P, OMEGA_I0)

    erreurs = []
    for rapport in (0.3, 0.1, 0.03, 0.01):
        pi = gaussian(0.0, rapport * SIGMA, peak=0.3)
        grid = size_grid([rapport * SIGMA, SIGMA, 3 * SIGMA], center_nu=nu_m)
        numerique = coincidence_rate_numeric(grid, phi, f, pi, omega_m,
                                             omega_s0=OMEGA_S0, omega_i0=OMEGA_I0)
        erreurs.append(abs(numerique - analytique) / analytique)

    assert all(b < a for a, b in zip(erreurs, erreurs[1:]))
    assert erreurs[-1] < 1e-3


def test_taux_analytique_au_centre():
    phi = rectangle(0.0, 10 * SIGMA)
    f = gaussian(OMEGA_S0, SIGMA, peak=0.5)
    assert coincidence_rate_analytic(phi, f, OMEGA_I0, OMEGA_P, OMEGA_I0) == pytest.approx(0.25)


# ---------------------------------------------------------------------------
# Utilitaires
# ---------------------------------------------------------------------------

def test_dimensionnement_grille():
    grid = size_grid([SIGMA, 4 * SIGMA, None])
    assert grid.span == pytest.approx(32 * SIGMA)
    assert grid.spacing <= SIGMA / 16
    assert grid.n_points & (grid.n_points - 1) == 0


def test_dimensionnement_sans_largeur_finie():
    with pytest.raises(DomainError):
        size_grid([None, None])


def test_largeur_mi_hauteur_courbe_monotone():
    x = np.linspace(0, 1, 11)
    with pytest.raises(DomainError):
        fwhm(x, x)
