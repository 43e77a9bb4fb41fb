# =============================================================================
# app/physics/spectra.py — Moteur analytique
#
# Ce module évalue, par calcul numérique déterministe, tout ce que la
# théorie de la source de paires prédit :
#
#   conjugate_wavelength()      λ₂ tel que 1/λ_p = 1/λ₁ + 1/λ₂
#   eval_spectral()             évaluation uniforme de Φ, f et Π
#   compute_psi()               ψ(τ) par FFT du produit spectral
#   direct_psi()                même somme en O(N²), sert d'oracle
#   coincidence_rate_analytic() R_c ∝ |Φ(ω⁰_i − ω_M)|²·|f(ω_p − ω_M)|²
#   coincidence_rate_numeric()  ∫g2 dτ / ∫|Π|² dω, limite exacte du précédent
#
# Convention de transformée : ψ(τ_k) = (Δν/√(2π)) Σ_j A(ν_j) e^{−iν_jτ_k}.
# Le facteur 1/√(2π) rend la transformée unitaire, d'où l'identité de
# Parseval Σ g2·Δτ = Σ |A|²·Δν sans facteur supplémentaire.
#
# Toutes les fonctions sont pures : aucune ne modifie ses arguments,
# elles peuvent être appelées depuis plusieurs threads.
# =============================================================================

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from app.data.profiles import SPEED_OF_LIGHT
from app.errors import AliasingError, DomainError
from app.models.spectral import (
    DispersiveMedium,
    FrequencyGrid,
    SpectralFunction,
    SpectralKind,
)

logger = logging.getLogger(__name__)

# Seuil de décroissance de l'intégrande aux bords de la grille.
EDGE_DECAY_THRESHOLD: float = 1e-6

# Demi-largeur à mi-hauteur de |sinc(x)| : sinc(1.895494...) = 0.5
_SINC_HALF_MAX_X: float = 1.8954942670339809

_FOUR_LN2: float = 4.0 * np.log(2.0)


# =============================================================================
# CONVERSIONS LONGUEUR D'ONDE ↔ FRÉQUENCE ANGULAIRE
# =============================================================================


def wavelength_to_omega(wavelength_nm):
    """ω = 2πc/λ, λ en nm, ω en rad/s. Accepte scalaires et tableaux."""
    return 2.0 * np.pi * SPEED_OF_LIGHT / (np.asarray(wavelength_nm, dtype=float) * 1e-9)


def omega_to_wavelength(omega):
    """λ = 2πc/ω, ω en rad/s, λ en nm."""
    return 2.0 * np.pi * SPEED_OF_LIGHT / np.asarray(omega, dtype=float) * 1e9


def bandwidth_to_omega(center_nm: float, width_nm: float) -> float:
    """Largeur spectrale Δλ (nm) autour de λ convertie en Δω = 2πcΔλ/λ² (rad/s)."""
    return float(2.0 * np.pi * SPEED_OF_LIGHT * width_nm * 1e-9 / (center_nm * 1e-9) ** 2)


def conjugate_wavelength(lambda_pump: float, lambda_one: float) -> float:
    """
    Longueur d'onde conjuguée d'un photon de la paire (conservation de l'énergie).

    Args:
        lambda_pump: longueur d'onde de pompe (nm).
        lambda_one: longueur d'onde de l'un des photons (nm), toujours > lambda_pump.

    Returns:
        λ₂ (nm) tel que 1/λ_pump = 1/λ_one + 1/λ₂.

    Raises:
        DomainError: longueur d'onde non positive ou λ_one ≤ λ_pump.

    Exemples :
        conjugate_wavelength(457.9, 915.8)  → 915.8   (point dégénéré)
        conjugate_wavelength(457.9, 992.68) → 850.0
    """
    if not lambda_pump > 0 or not lambda_one > 0:
        raise DomainError(
            f"longueurs d'onde positives attendues (pompe={lambda_pump}, photon={lambda_one})"
        )
    if not lambda_one > lambda_pump:
        raise DomainError(
            f"le photon ({lambda_one} nm) doit être plus rouge que la pompe ({lambda_pump} nm)"
        )
    # Forme λ_p·λ₁/(λ₁ − λ_p) : une seule division, plus précise que 1/(1/a − 1/b).
    return lambda_pump * lambda_one / (lambda_one - lambda_pump)


# =============================================================================
# FABRIQUES DE FONCTIONS SPECTRALES
# =============================================================================


def gaussian(center: float, width: float, peak: float = 1.0) -> SpectralFunction:
    """Gaussienne d'amplitude, `width` = largeur à mi-hauteur (rad/s)."""
    return SpectralFunction(kind=SpectralKind.gaussian, center=center, width=width,
                            peak_amplitude=peak)


def rectangle(center: float, width: float, peak: float = 1.0) -> SpectralFunction:
    """Rectangle de largeur totale `width` (rad/s)."""
    return SpectralFunction(kind=SpectralKind.rectangle, center=center, width=width,
                            peak_amplitude=peak)


def flat(peak: float = 1.0) -> SpectralFunction:
    """Fonction constante : aucun élément spectral."""
    return SpectralFunction(kind=SpectralKind.flat, peak_amplitude=peak)


def edge(center: float, rising: bool = True, peak: float = 1.0) -> SpectralFunction:
    """Filtre à front raide en `center` (passe-haut en ω si `rising`)."""
    return SpectralFunction(kind=SpectralKind.edge, center=center, rising=rising,
                            peak_amplitude=peak)


def sinc_phase_matching(
    gvm: float,
    crystal_length: float = 8e-3,
    center: float = 0.0,
    peak: float = 1.0,
) -> SpectralFunction:
    """Accord de phase sinc(D·L·(ω − center)/2), D en s/m, L en m."""
    return SpectralFunction(kind=SpectralKind.sinc_phase_matching, center=center, gvm=gvm,
                            crystal_length=crystal_length, peak_amplitude=peak)


def effective_width(function: SpectralFunction) -> float | None:
    """
    Largeur caractéristique (rad/s) utilisée pour dimensionner les grilles.

    Retourne None pour les fonctions sans largeur finie (flat, edge).
    Pour tabulated, l'étendue de la table.
    """
    kind = function.kind
    if kind in (SpectralKind.gaussian, SpectralKind.rectangle):
        return function.width
    if kind is SpectralKind.sinc_phase_matching:
        return 4.0 * _SINC_HALF_MAX_X / abs(function.gvm * function.crystal_length)
    if kind is SpectralKind.tabulated:
        return function.table[-1][0] - function.table[0][0]
    return None


# =============================================================================
# ÉVALUATION
# =============================================================================


def eval_spectral(function: SpectralFunction, omega):
    """
    Amplitude complexe de `function` en ω (scalaire ou tableau, rad/s).

    Fonction totale : ne lève jamais d'exception pour une fonction bien formée.

    Exemples :
        eval_spectral(rectangle(c, w), c)          → 1
        eval_spectral(rectangle(c, w), c + w)      → 0
        eval_spectral(gaussian(c, w), c + w / 2)   → 0.5
    """
    w = np.asarray(omega, dtype=float)
    peak = function.peak_amplitude
    kind = function.kind

    if kind is SpectralKind.gaussian:
        x = (w - function.center) / function.width
        values = peak * np.exp(-_FOUR_LN2 * x * x)
    elif kind is SpectralKind.rectangle:
        values = np.where(np.abs(w - function.center) <= function.width / 2.0, peak, 0.0)
    elif kind is SpectralKind.sinc_phase_matching:
        x = function.gvm * function.crystal_length * (w - function.center) / 2.0
        # np.sinc est normalisé : sinc(y) = sin(πy)/(πy)
        values = peak * np.sinc(x / np.pi)
    elif kind is SpectralKind.edge:
        passed = w >= function.center if function.rising else w <= function.center
        values = np.where(passed, peak, 0.0)
    elif kind is SpectralKind.flat:
        values = np.full(w.shape, peak)
    else:
        table = np.asarray(function.table, dtype=float)
        xs = table[:, 0]
        amplitude = table[:, 1] * np.exp(1j * table[:, 2])
        real = np.interp(w, xs, amplitude.real, left=0.0, right=0.0)
        imag = np.interp(w, xs, amplitude.imag, left=0.0, right=0.0)
        values = real + 1j * imag

    values = np.asarray(values, dtype=complex)
    if values.ndim == 0:
        return complex(values)
    return values


def intensity(function: SpectralFunction, omega):
    """Transmission en intensité |function(ω)|²."""
    return np.abs(eval_spectral(function, omega)) ** 2


# =============================================================================
# GRILLES
# =============================================================================


def size_grid(
    widths,
    center_nu: float = 0.0,
    span_factor: float = 8.0,
    points_per_width: int = 16,
    min_points: int = 256,
    max_points: int = 2**16,
) -> FrequencyGrid:
    """
    Dimensionne une grille selon la règle anti-repliement.

    span ≥ span_factor × la plus grande largeur ; Δν résout la plus petite
    largeur avec au moins `points_per_width` points ; n est une puissance de
    deux. Les largeurs None (fonctions non bornées) sont ignorées.
    """
    finite = [float(w) for w in widths if w is not None and np.isfinite(w) and w > 0]
    if not finite:
        raise DomainError("aucune largeur finie pour dimensionner la grille")
    span = span_factor * max(finite)
    target_spacing = min(finite) / points_per_width
    needed = int(np.ceil(span / target_spacing)) + 1
    n_points = max(min_points, 1 << (needed - 1).bit_length())
    if n_points > max_points:
        logger.warning(
            "Grille plafonnée à %d points (%d demandés) : résolution réduite", max_points, n_points
        )
        n_points = max_points
    return FrequencyGrid(center_nu=center_nu, span=span, n_points=n_points)


# =============================================================================
# FONCTION D'ONDE À DEUX PHOTONS
# =============================================================================


@dataclass(frozen=True)
class TwoPhotonWavefunction:
    """
    ψ(τ) échantillonnée sur la grille de temps conjuguée.

    Attributes:
        tau: grille τ_k (s), uniforme.
        psi: valeurs complexes ψ(τ_k).
        spectral_integral: Σ |A(ν_j)|²·Δν, membre de droite de Parseval.
    """

    tau: np.ndarray
    psi: np.ndarray
    spectral_integral: float

    @property
    def g2(self) -> np.ndarray:
        """G²(τ) = |ψ(τ)|², toujours ≥ 0."""
        return np.abs(self.psi) ** 2

    @property
    def tau_spacing(self) -> float:
        return float(self.tau[1] - self.tau[0])

    @property
    def g2_integral(self) -> float:
        """Σ g2·Δτ, membre de gauche de Parseval."""
        return float(self.g2.sum() * self.tau_spacing)


def spectral_product(
    grid: FrequencyGrid,
    phi: SpectralFunction,
    f: SpectralFunction,
    pi: SpectralFunction,
    omega_M: float,
    medium1: DispersiveMedium,
    medium2: DispersiveMedium,
    *,
    omega_s0: float,
    omega_i0: float,
) -> np.ndarray:
    """
    Intégrande A(ν) = Φ(ν)·f(ω⁰_s+ν)·Π(ω⁰_i−ν−ω_M)·exp(−i[k''₁r₁+k''₂r₂]ν²/2).

    Seule la somme k''₁r₁ + k''₂r₂ intervient : deux milieux de dispersions
    opposées se compensent exactement.
    """
    nu = grid.values
    beta = medium1.gdd + medium2.gdd
    product = (
        eval_spectral(phi, nu)
        * eval_spectral(f, omega_s0 + nu)
        * eval_spectral(pi, omega_i0 - nu - omega_M)
    )
    if beta != 0.0:
        product = product * np.exp(-0.5j * beta * nu * nu)
    return product


def _check_edge_decay(product: np.ndarray, envelope: np.ndarray) -> None:
    # Référence : enveloppe |Φ·Π|·max|f|. Quand f bloque presque tout, le max du
    # produit n'est qu'une queue de Π et ne peut pas servir d'échelle.
    peak = np.abs(envelope).max()
    if peak == 0.0:
        return
    magnitude = np.abs(product)
    edge_ratio = max(magnitude[0], magnitude[-1]) / peak
    if edge_ratio >= EDGE_DECAY_THRESHOLD:
        raise AliasingError(edge_ratio, EDGE_DECAY_THRESHOLD)


def compute_psi(
    grid: FrequencyGrid,
    phi: SpectralFunction,
    f: SpectralFunction,
    pi: SpectralFunction,
    omega_M: float,
    medium1: DispersiveMedium,
    medium2: DispersiveMedium,
    *,
    omega_s0: float,
    omega_i0: float,
) -> TwoPhotonWavefunction:
    """
    Fonction d'onde effective ψ(τ) par transformée de Fourier rapide.

    Avec ν_j = ν_0 + jΔν et τ_k = (k − N/2)Δτ, ΔνΔτ = 2π/N :
        e^{−iν_jτ_k} = e^{−iν_0τ_k} · (−1)^j · e^{−2πijk/N}
    donc ψ = (Δν/√(2π)) e^{−iν_0τ} · FFT(A·(−1)^j), identique à la somme directe.

    Raises:
        AliasingError: l'intégrande n'est pas négligeable aux bords de la
            grille (≥ 1e−6 du max de l'enveloppe |Φ·Π|·max|f|).
    """
    product = spectral_product(grid, phi, f, pi, omega_M, medium1, medium2,
                               omega_s0=omega_s0, omega_i0=omega_i0)
    envelope = spectral_product(grid, phi, flat(f.peak_amplitude), pi, omega_M,
                                DispersiveMedium(), DispersiveMedium(),
                                omega_s0=omega_s0, omega_i0=omega_i0)
    _check_edge_decay(product, envelope)

    n = grid.n_points
    dnu = grid.spacing
    tau = grid.tau_values
    nu0 = grid.values[0]
    alternating = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    transform = np.fft.fft(product * alternating)
    psi = (dnu / np.sqrt(2.0 * np.pi)) * np.exp(-1j * nu0 * tau) * transform

    spectral_integral = float(np.sum(np.abs(product) ** 2) * dnu)
    return TwoPhotonWavefunction(tau=tau, psi=psi, spectral_integral=spectral_integral)


def direct_psi(
    grid: FrequencyGrid,
    phi: SpectralFunction,
    f: SpectralFunction,
    pi: SpectralFunction,
    omega_M: float,
    medium1: DispersiveMedium,
    medium2: DispersiveMedium,
    *,
    omega_s0: float,
    omega_i0: float,
) -> TwoPhotonWavefunction:
    """Quadrature directe O(N²) de ψ(τ) sur la même grille que compute_psi."""
    product = spectral_product(grid, phi, f, pi, omega_M, medium1, medium2,
                               omega_s0=omega_s0, omega_i0=omega_i0)
    nu = grid.values
    tau = grid.tau_values
    kernel = np.exp(-1j * np.outer(tau, nu))
    psi = (grid.spacing / np.sqrt(2.0 * np.pi)) * (kernel @ product)
    spectral_integral = float(np.sum(np.abs(product) ** 2) * grid.spacing)
    return TwoPhotonWavefunction(tau=tau, psi=psi, spectral_integral=spectral_integral)


# =============================================================================
# TAUX DE COÏNCIDENCES
# =============================================================================


def coincidence_rate_analytic(
    phi: SpectralFunction,
    f: SpectralFunction,
    omega_M: float,
    omega_p: float,
    omega_i0: float,
) -> float:
    """
    Taux de coïncidences dans la limite d'un monochromateur infiniment fin.

    Π est traité comme une fonction δ : l'appelant garantit que Π est bien
    plus étroit que f et Φ.

    Returns:
        |Φ(ω⁰_i − ω_M)|² · |f(ω_p − ω_M)|²  (sans dimension)
    """
    phi_value = eval_spectral(phi, omega_i0 - omega_M)
    f_value = eval_spectral(f, omega_p - omega_M)
    return float(abs(phi_value) ** 2 * abs(f_value) ** 2)


def coincidence_rate_numeric(
    grid: FrequencyGrid,
    phi: SpectralFunction,
    f: SpectralFunction,
    pi: SpectralFunction,
    omega_M: float,
    medium1: DispersiveMedium | None = None,
    medium2: DispersiveMedium | None = None,
    *,
    omega_s0: float,
    omega_i0: float,
) -> float:
    """
    ∫g2(τ)dτ normalisé par l'intensité intégrée de Π.

    Par Parseval, ∫g2 dτ = ∫|A(ν)|² dν : on évite donc la FFT. Quand la
    largeur de Π tend vers 0, le résultat tend vers coincidence_rate_analytic.
    """
    medium1 = medium1 or DispersiveMedium()
    medium2 = medium2 or DispersiveMedium()
    product = spectral_product(grid, phi, f, pi, omega_M, medium1, medium2,
                               omega_s0=omega_s0, omega_i0=omega_i0)
    nu = grid.values
    pi_intensity = intensity(pi, omega_i0 - nu - omega_M)
    denominator = float(pi_intensity.sum())
    if denominator == 0.0:
        return 0.0
    return float(np.sum(np.abs(product) ** 2) / denominator)


# =============================================================================
# UTILITAIRES
# =============================================================================


def fwhm(x, y) -> float:
    """
    Largeur à mi-hauteur d'une courbe positive, par interpolation linéaire.

    Raises:
        DomainError: la courbe ne redescend pas sous la mi-hauteur des deux côtés.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    top = int(np.argmax(y))
    half = y[top] / 2.0
    below_left = np.nonzero(y[:top] < half)[0]
    below_right = np.nonzero(y[top:] < half)[0]
    if below_left.size == 0 or below_right.size == 0:
        raise DomainError("la courbe ne redescend pas sous sa mi-hauteur")
    i = below_left[-1]
    j = top + below_right[0]
    left = x[i] + (half - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i])
    right = x[j - 1] + (half - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
    return float(abs(right - left))


def load_tabulated_csv(path: str | Path) -> SpectralFunction:
    """
    Charge une fonction tabulée depuis un CSV `omega_or_lambda,amplitude[,phase_rad]`.

    Une ligne d'en-tête est obligatoire. Si le nom de la première colonne
    commence par "lambda", l'abscisse est lue en nm et convertie en rad/s
    (la table est alors retriée par ω croissant).
    """
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if len(rows) < 2:
        raise DomainError(f"{path} : en-tête et au moins une ligne de données attendus")
    header = [name.strip().lower() for name in rows[0]]
    if len(header) not in (2, 3):
        raise DomainError(f"{path} : 2 ou 3 colonnes attendues, {len(header)} trouvées")

    data = np.array([[float(cell) for cell in row] for row in rows[1:] if row], dtype=float)
    abscissa = data[:, 0]
    if header[0].startswith("lambda"):
        abscissa = wavelength_to_omega(abscissa)
    phase = data[:, 2] if data.shape[1] == 3 else np.zeros(len(data))
    order = np.argsort(abscissa)
    table = tuple(
        (float(abscissa[k]), float(data[k, 1]), float(phase[k])) for k in order
    )
    peak = float(np.abs(data[:, 1]).max())
    logger.debug("Table spectrale chargée depuis %s : %d points", path, len(table))
    return SpectralFunction(kind=SpectralKind.tabulated, table=table, peak_amplitude=peak)
