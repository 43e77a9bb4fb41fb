# =============================================================================
# app/data/profiles.py — Constantes expérimentales et profils de configuration
#
# Ce module centralise les valeurs de référence du montage expérimental
# simulé, ainsi que les profils nommés qui pré-remplissent un RunConfig.
#
# Organisation :
#   1. Constantes physiques
#   2. Montage de référence (pompe, cristal, monochromateur, fenêtre)
#   3. Filtres distants caractérisés (un par profil)
#   4. PROFILES : surcharges par profil, appliquées sur les valeurs par défaut
# =============================================================================

# =============================================================================
# 1. CONSTANTES PHYSIQUES
# =============================================================================

# Vitesse de la lumière dans le vide (m/s), valeur exacte SI.
SPEED_OF_LIGHT: float = 299_792_458.0

# =============================================================================
# 2. MONTAGE DE RÉFÉRENCE
# =============================================================================

# Raie du laser argon utilisée comme pompe (nm).
PUMP_WAVELENGTH_NM: float = 457.9

# Longueur du cristal non linéaire (m).
CRYSTAL_LENGTH_M: float = 8e-3

# Résolution du monochromateur local (nm, largeur de Π).
MONOCHROMATOR_RESOLUTION_NM: float = 2.0

# Transmission crête (amplitude) du monochromateur : inconnue, valeur libre.
MONOCHROMATOR_PEAK: float = 0.3

# Fenêtre d'intégration du circuit de coïncidences (s).
COINCIDENCE_WINDOW_S: float = 5e-9

# Taux de paires générées avant pertes (paires/s).
DEFAULT_PAIR_RATE: float = 5e6

# Modèle de détecteur à comptage de photons (valeurs par défaut).
DETECTOR_DEFAULTS: dict[str, float] = {
    "efficiency": 0.5,
    "dark_rate": 100.0,
    "jitter_fwhm": 350e-12,
    "dead_time": 50e-9,
}

# =============================================================================
# 3. FILTRES DISTANTS — (centre nm, largeur nm) côté signal
#
# Le filtre à 916 nm est décrit tantôt à 10 nm, tantôt à 11 nm de bande :
# on retient 10 nm.
# =============================================================================

REMOTE_FILTERS: dict[str, tuple[float, float]] = {
    "filtre_850": (850.0, 10.0),
    "filtre_886": (885.6, 11.0),
    "filtre_916": (916.0, 10.0),
}

# Largeur (nm, côté signal) du spectre de paires « plat » : rectangle assez
# large pour couvrir le filtre ± 3 largeurs à mi-hauteur.
FLAT_PHI_WIDTH_NM: float = 100.0

# =============================================================================
# 4. PROFILS NOMMÉS
#
# Chaque profil est un dict partiel de RunConfig. Le profil "defaults"
# reproduit la caractérisation du filtre 850 nm.
# =============================================================================


def _filter_profile(name: str) -> dict:
    center_nm, width_nm = REMOTE_FILTERS[name]
    return {
        "signal_filter": {"kind": "gaussian", "center_nm": center_nm, "width_nm": width_nm},
        "source": {"signal_center_nm": center_nm},
    }


PROFILES: dict[str, dict] = {
    "defaults": _filter_profile("filtre_850"),
    "filtre_850": _filter_profile("filtre_850"),
    "filtre_886": _filter_profile("filtre_886"),
    "filtre_916": _filter_profile("filtre_916"),
}
