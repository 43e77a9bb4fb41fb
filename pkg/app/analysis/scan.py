# =============================================================================
# app/analysis/scan.py — Orchestration de la mesure et reconstruction
#
# Chaîne complète pour chaque consigne λ_M du monochromateur :
#
#   source (paires) → f sur le signal, Π sur l'idler → détecteurs D1, D2
#   → horloges locales → coïncidences au décalage recouvré → ScanPoint
#
# Le décalage entre horloges est recherché une seule fois, sur une
# acquisition dédiée au point de taux maximal attendu (conjugué du centre
# du filtre) ; chaque point le réutilise et, si demandé, vérifie que le pic
# de coïncidences est toujours là (journal DEBUG).
#
# Deux moteurs produisent la même structure ScanCurve :
#   run_scan()       Monte Carlo complet
#   analytic_scan()  espérances calculées par app.physics.spectra (oracle)
#
# Graines : chaque acquisition dérive ses générateurs de (seed, clé), la clé
# identifiant l'acquisition (alignement, point i, simulate) puis l'étape
# (paires, optique, détecteur). Les points sont donc indépendants de
# l'ordre et du nombre de processus.
# =============================================================================

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from app.analysis.coincidence import (
    AlignmentResult,
    CoincidenceWindow,
    align,
    count_coincidences_ps,
)
from app.config import settings
from app.errors import ConfigError, DomainError, EmptyReconstructionError
from app.generators.instruments import (
    Arm,
    DetectorModel,
    MonochromatorSetting,
    detect,
    transmit,
)
from app.generators.montecarlo import (
    CorrelationSampler,
    SourceConfig,
    chunk_rng,
    iter_pair_chunks,
    pair_arrival_times,
    phi_intensity_integral,
    phi_support,
)
from app.io.timetag import ClockModel, EventStream, apply_clock
from app.models.config import RunConfig
from app.models.responses import (
    AlignmentSummary,
    ReconstructionRow,
    ReconstructionSummary,
    ScanCurve,
    ScanPoint,
)
from app.models.spectral import DispersiveMedium, SpectralFunction, SpectralKind
from app.physics.spectra import (
    bandwidth_to_omega,
    coincidence_rate_analytic,
    coincidence_rate_numeric,
    compute_psi,
    conjugate_wavelength,
    edge,
    effective_width,
    eval_spectral,
    flat,
    gaussian,
    intensity,
    load_tabulated_csv,
    omega_to_wavelength,
    rectangle,
    sinc_phase_matching,
    size_grid,
    wavelength_to_omega,
)

logger = logging.getLogger(__name__)

SCAN_CSV_HEADER = [
    "lambda_M_nm", "lambda_conj_nm", "singles1", "singles2", "coinc", "dwell_s", "normalized",
]
RECONSTRUCTION_CSV_HEADER = ["lambda_conj_nm", "value"]

# Clés de dérivation des graines : acquisition, puis étape.
_KEY_ALIGN = 0
_KEY_POINT = 1
_KEY_SIMULATE = 2
_STEP_PAIRS = 0
_STEP_OPTICS = 1
_STEP_DETECT = 2

# Décalages (en bins grossiers) où l'on mesure le fond lors de la vérification.
_VERIFY_BACKGROUND_BINS = (-3, -2, 2, 3)

_INTEGRATION_POINTS = 8193


# =============================================================================
# MONTAGE OPTIQUE
# =============================================================================


def build_phi(config: RunConfig) -> SpectralFunction:
    """Φ(ν) en rad/s ; la largeur en nm est celle de |Φ|² côté signal."""
    spec = config.source.phi
    width = bandwidth_to_omega(config.source.signal_center_nm, spec.width_nm)
    if spec.kind == "rectangle":
        return rectangle(0.0, width)
    if spec.kind == "gaussian":
        return gaussian(0.0, np.sqrt(2.0) * width)
    return sinc_phase_matching(spec.gvm, spec.crystal_length)


def build_filter(config: RunConfig) -> SpectralFunction:
    """Filtre distant f(ω) en rad/s."""
    spec = config.signal_filter
    if spec.kind == "flat":
        return flat(spec.peak)
    if spec.kind == "tabulated":
        return load_tabulated_csv(spec.table_csv)
    center = float(wavelength_to_omega(spec.center_nm))
    width = bandwidth_to_omega(spec.center_nm, spec.width_nm)
    if spec.kind == "gaussian":
        return gaussian(center, np.sqrt(2.0) * width, spec.peak)
    if spec.kind == "rectangle":
        return rectangle(center, width, spec.peak)
    # Passe-bas en λ (shortpass) ⇔ transmet les ω au-dessus du front.
    return edge(center, rising=spec.edge_pass == "shortpass", peak=spec.peak)


@dataclass(frozen=True)
class OpticalSetup:
    """Montage résolu en rad/s, partagé (picklable) entre processus."""

    pump_nm: float
    omega_p: float
    omega_s0: float
    omega_i0: float
    phi: SpectralFunction
    signal_filter: SpectralFunction
    resolution_nm: float
    monochromator_peak: float
    detector_1: DetectorModel
    detector_2: DetectorModel
    clock_1: ClockModel
    clock_2: ClockModel
    signal_path: DispersiveMedium
    idler_path: DispersiveMedium
    window: CoincidenceWindow
    pair_rate: float
    chunk_duration: float

    def monochromator(self, lambda_M_nm: float) -> MonochromatorSetting:
        return MonochromatorSetting.from_wavelength(
            lambda_M_nm, self.resolution_nm, self.monochromator_peak
        )

    def source(self, duration: float, seed: int) -> SourceConfig:
        return SourceConfig(
            pair_rate=self.pair_rate, duration=duration, omega_p=self.omega_p,
            omega_s0=self.omega_s0, omega_i0=self.omega_i0, phi=self.phi, rng_seed=seed,
        )


def build_setup(config: RunConfig) -> OpticalSetup:
    omega_p = float(wavelength_to_omega(config.pump_nm))
    omega_s0 = float(wavelength_to_omega(config.source.signal_center_nm))
    return OpticalSetup(
        pump_nm=config.pump_nm,
        omega_p=omega_p,
        omega_s0=omega_s0,
        omega_i0=omega_p - omega_s0,
        phi=build_phi(config),
        signal_filter=build_filter(config),
        resolution_nm=config.monochromator.resolution_nm,
        monochromator_peak=config.monochromator.peak,
        detector_1=config.detector_1,
        detector_2=config.detector_2,
        clock_1=config.clock_1,
        clock_2=config.clock_2,
        signal_path=config.signal_path,
        idler_path=config.idler_path,
        window=CoincidenceWindow(width=config.coincidence.window_s),
        pair_rate=config.source.pair_rate,
        chunk_duration=config.source.chunk_duration_s,
    )


# =============================================================================
# GRILLE DE SCAN
# =============================================================================


def filter_reference_nm(config: RunConfig) -> float:
    """Longueur d'onde signal où le filtre transmet le plus (nm)."""
    spec = config.signal_filter
    if spec.kind in ("gaussian", "rectangle"):
        return spec.center_nm
    if spec.kind == "edge":
        step = spec.width_nm if spec.edge_pass == "longpass" else -spec.width_nm
        return spec.center_nm + step
    if spec.kind == "flat":
        return config.source.signal_center_nm
    table = load_tabulated_csv(spec.table_csv).table
    best = max(table, key=lambda row: abs(row[1]))
    return float(omega_to_wavelength(best[0]))


def alignment_wavelength(config: RunConfig) -> float:
    """Consigne λ_M de l'acquisition d'alignement : conjuguée du maximum du filtre."""
    return conjugate_wavelength(config.pump_nm, filter_reference_nm(config))


def check_grid_within_phi(config: RunConfig, grid) -> None:
    """
    Raises:
        DomainError: un point de la grille tombe hors du support de Φ.
    """
    phi = build_phi(config)
    omega_p = float(wavelength_to_omega(config.pump_nm))
    omega_i0 = omega_p - float(wavelength_to_omega(config.source.signal_center_nm))
    low, high = phi_support(phi)
    grid = np.asarray(grid, dtype=float)
    nu = omega_i0 - wavelength_to_omega(grid)
    outside = (nu < low) | (nu > high)
    if np.any(outside):
        raise DomainError(f"λ_M = {grid[outside][0]:.4f} nm hors du support de Φ")


def scan_grid(config: RunConfig) -> np.ndarray:
    """
    Grille λ_M (nm). Par défaut : n_points uniformes en λ_M couvrant les
    conjuguées de [centre − k·largeur, centre + k·largeur] côté signal.

    Raises:
        ConfigError: la grille automatique sort du support de Φ.
    """
    spec = config.scan
    if spec.lambda_M_nm is not None:
        return np.asarray(spec.lambda_M_nm, dtype=float)

    center = config.signal_filter.center_nm
    if config.signal_filter.kind in ("flat", "tabulated"):
        center = filter_reference_nm(config)
    if spec.n_points == 1:
        grid = np.array([conjugate_wavelength(config.pump_nm, center)])
    else:
        half = spec.span_fwhm * config.signal_filter.width_nm
        low_conj = max(center - half, config.pump_nm * (1 + 1e-6))
        grid = np.linspace(
            conjugate_wavelength(config.pump_nm, center + half),
            conjugate_wavelength(config.pump_nm, low_conj),
            spec.n_points,
        )
    try:
        check_grid_within_phi(config, grid)
    except DomainError as exc:
        raise ConfigError(f"grille de scan automatique invalide : {exc}") from exc
    return grid


# =============================================================================
# TAUX ATTENDUS (MOTEUR ANALYTIQUE)
# =============================================================================


class ExpectedRates(NamedTuple):
    """Taux mesurés attendus (1/s), temps mort et fortuites compris."""

    singles_1: float
    singles_2: float
    coincidences: float
    relative_rate: float


def _intensity_integral(function: SpectralFunction) -> float:
    width = effective_width(function)
    omega = function.center + np.linspace(-4.0 * width, 4.0 * width, _INTEGRATION_POINTS)
    return float(np.trapezoid(intensity(function, omega), omega))


def _dead_time_factor(rate: float, dead_time: float) -> float:
    """Fraction de clics conservés par un temps mort non paralysable."""
    return 1.0 / (1.0 + rate * dead_time)


def expected_rates(setup: OpticalSetup, lambda_M_nm: float, mode: str = "narrowband") -> ExpectedRates:
    """
    Taux attendus pour une consigne λ_M.

    narrowband : coincidence_rate_analytic, Π traitée comme une fonction δ de
        poids ∫|Π|², soit R_c = R·η₁η₂·|Φ(ν_M)|²·|f(ω_p − ω_M)|²·∫|Π|² / ∫|Φ|²
    convolved : coincidence_rate_numeric (∫|A|² / ∫|Π|² sur la grille),
        remultiplié par ∫|Π|² de la même grille.

    relative_rate reste le facteur à bande étroite dans les deux modes.
    """
    if mode not in ("narrowband", "convolved"):
        raise DomainError(f"mode analytique inconnu : {mode}")
    mono = setup.monochromator(lambda_M_nm)
    omega_M = mono.omega_M
    nu_M = setup.omega_i0 - omega_M
    lambda_conj = conjugate_wavelength(setup.pump_nm, lambda_M_nm)
    eta_1 = float(setup.detector_1.efficiency_at(lambda_conj))
    eta_2 = float(setup.detector_2.efficiency_at(lambda_M_nm))
    phi_norm = phi_intensity_integral(setup.phi)

    phi_M = abs(eval_spectral(setup.phi, nu_M)) ** 2
    relative = coincidence_rate_analytic(
        setup.phi, setup.signal_filter, omega_M, setup.omega_p, setup.omega_i0
    )

    if mode == "narrowband":
        pi_norm = _intensity_integral(mono.response)
        p_coinc = relative * pi_norm / phi_norm
        p_idler = phi_M * pi_norm / phi_norm
    else:
        grid = size_grid(
            [effective_width(mono.response), effective_width(setup.signal_filter)],
            center_nu=nu_M,
        )
        pi_norm = float(
            intensity(mono.response, setup.omega_i0 - grid.values - omega_M).sum() * grid.spacing
        )
        numeric = coincidence_rate_numeric(
            grid, setup.phi, setup.signal_filter, mono.response, omega_M,
            omega_s0=setup.omega_s0, omega_i0=setup.omega_i0,
        )
        idler_only = coincidence_rate_numeric(
            grid, setup.phi, flat(), mono.response, omega_M,
            omega_s0=setup.omega_s0, omega_i0=setup.omega_i0,
        )
        p_coinc = numeric * pi_norm / phi_norm
        p_idler = idler_only * pi_norm / phi_norm

    # Singles D1 : indépendants de ω_M, efficacité évaluée photon par photon.
    low, high = phi_support(setup.phi)
    nu = np.linspace(low, high, _INTEGRATION_POINTS)
    omega_s = setup.omega_s0 + nu
    weight = (
        intensity(setup.phi, nu)
        * intensity(setup.signal_filter, omega_s)
        * setup.detector_1.efficiency_at(omega_to_wavelength(omega_s))
    )
    p_signal = float(np.trapezoid(weight, nu)) / phi_norm

    rate = setup.pair_rate
    true_1 = rate * p_signal + setup.detector_1.dark_rate
    true_2 = rate * eta_2 * p_idler + setup.detector_2.dark_rate
    keep_1 = _dead_time_factor(true_1, setup.detector_1.dead_time)
    keep_2 = _dead_time_factor(true_2, setup.detector_2.dead_time)
    singles_1 = true_1 * keep_1
    singles_2 = true_2 * keep_2
    coincidences = rate * eta_1 * eta_2 * p_coinc * keep_1 * keep_2
    accidentals = singles_1 * singles_2 * setup.window.width
    return ExpectedRates(singles_1, singles_2, coincidences + accidentals, relative)


def auto_dwell(setup: OpticalSetup, grid: np.ndarray, min_peak_coincidences: float) -> float:
    """
    Durée par point telle que le point le plus favorable attende au moins
    `min_peak_coincidences` coïncidences (arrondie au ms supérieur).

    Raises:
        ConfigError: aucune coïncidence attendue sur la grille.
    """
    peak = max(expected_rates(setup, float(lam)).coincidences for lam in grid)
    if not peak > 0:
        raise ConfigError("aucune coïncidence attendue sur la grille : durée indéterminée")
    dwell = math.ceil(1000.0 * min_peak_coincidences / peak) / 1000.0
    logger.info("Durée par point : %.3f s (%.0f coïncidences/s attendues au pic)", dwell, peak)
    return dwell


# =============================================================================
# ACQUISITION MONTE CARLO
# =============================================================================


@dataclass(frozen=True)
class Acquisition:
    """Deux flux horodatés dans les horloges locales de D1 et D2."""

    lambda_M_nm: float
    dwell: float
    stream_1: EventStream
    stream_2: EventStream


def correlation_sampler(setup: OpticalSetup, mono: MonochromatorSetting) -> CorrelationSampler:
    """Distribution de τ pour la configuration optique courante, via ψ(τ)."""
    grid = size_grid(
        [effective_width(mono.response), effective_width(setup.signal_filter)],
        center_nu=setup.omega_i0 - mono.omega_M,
    )
    wavefunction = compute_psi(
        grid, setup.phi, setup.signal_filter, mono.response, mono.omega_M,
        setup.signal_path, setup.idler_path,
        omega_s0=setup.omega_s0, omega_i0=setup.omega_i0,
    )
    return CorrelationSampler.from_wavefunction(wavefunction)


def _sorted_arrivals(times: list[np.ndarray], omegas: list[np.ndarray]):
    t = np.concatenate(times) if times else np.empty(0)
    w = np.concatenate(omegas) if omegas else np.empty(0)
    order = np.argsort(t, kind="stable")
    return t[order], omega_to_wavelength(w[order])


def acquire(
    setup: OpticalSetup,
    lambda_M_nm: float,
    dwell: float,
    seed: int,
    key: tuple[int, ...],
) -> Acquisition:
    """
    Une acquisition complète à la consigne λ_M pendant `dwell` secondes.

    Les paires sont générées par blocs ; les photons survivants de tous les
    blocs sont ensuite détectés ensemble (le temps mort enjambe les blocs).
    """
    mono = setup.monochromator(lambda_M_nm)
    sampler = correlation_sampler(setup, mono)
    source = setup.source(dwell, seed)

    times_1, omegas_1, times_2, omegas_2 = [], [], [], []
    for k, batch in iter_pair_chunks(source, setup.chunk_duration, spawn_key=(*key, _STEP_PAIRS)):
        rng = chunk_rng(seed, *key, _STEP_OPTICS, k)
        batch = transmit(batch, Arm.signal, setup.signal_filter, rng)
        batch = transmit(batch, Arm.idler, mono, rng)
        t1, t2 = pair_arrival_times(batch, setup.signal_path, setup.idler_path, sampler, rng)
        times_1.append(t1[batch.signal_alive])
        omegas_1.append(batch.omega_s[batch.signal_alive])
        times_2.append(t2[batch.idler_alive])
        omegas_2.append(batch.omega_i[batch.idler_alive])

    arrivals_1, wavelengths_1 = _sorted_arrivals(times_1, omegas_1)
    arrivals_2, wavelengths_2 = _sorted_arrivals(times_2, omegas_2)
    reference_1 = detect(arrivals_1, setup.detector_1, dwell, chunk_rng(seed, *key, _STEP_DETECT, 1),
                         wavelengths_nm=wavelengths_1, detector_id=1)
    reference_2 = detect(arrivals_2, setup.detector_2, dwell, chunk_rng(seed, *key, _STEP_DETECT, 2),
                         wavelengths_nm=wavelengths_2, detector_id=2)
    return Acquisition(
        lambda_M_nm=lambda_M_nm,
        dwell=dwell,
        stream_1=apply_clock(reference_1, setup.clock_1),
        stream_2=apply_clock(reference_2, setup.clock_2),
    )


def simulate(config: RunConfig) -> Acquisition:
    """Acquisition unique décrite par la section `simulate` du RunConfig."""
    setup = build_setup(config)
    lambda_M = config.simulate.lambda_M_nm or alignment_wavelength(config)
    logger.info("Simulation à λ_M = %.3f nm pendant %.3g s", lambda_M, config.simulate.duration_s)
    return acquire(setup, lambda_M, config.simulate.duration_s, config.seed, (_KEY_SIMULATE,))


def align_setup(config: RunConfig, setup: OpticalSetup | None = None) -> AlignmentResult:
    """
    Recherche du décalage entre horloges sur une acquisition dédiée.

    Raises:
        NoAlignmentError: pic non significatif.
    """
    setup = setup or build_setup(config)
    lambda_M = alignment_wavelength(config)
    acquisition = acquire(setup, lambda_M, config.scan.alignment_dwell_s, config.seed, (_KEY_ALIGN,))
    spec = config.coincidence
    result = align(
        acquisition.stream_1, acquisition.stream_2,
        spec.search_range_s, spec.coarse_bin_s, setup.window,
        significance_threshold=spec.significance_threshold,
    )
    return result.ensure_aligned()


@dataclass(frozen=True)
class _PointTask:
    setup: OpticalSetup
    index: int
    lambda_M_nm: float
    dwell: float
    seed: int
    offset_ps: int
    coarse_bin_ps: int
    verify: bool


def _measure_point(task: _PointTask) -> ScanPoint:
    acquisition = acquire(task.setup, task.lambda_M_nm, task.dwell, task.seed,
                          (_KEY_POINT, task.index))
    t1 = acquisition.stream_1.times_ps
    t2 = acquisition.stream_2.times_ps
    width_ps = task.setup.window.width_ps
    coincidences = count_coincidences_ps(t1, t2, task.offset_ps, width_ps)

    if task.verify:
        background = np.mean([
            count_coincidences_ps(t1, t2, task.offset_ps + m * task.coarse_bin_ps, width_ps)
            for m in _VERIFY_BACKGROUND_BINS
        ])
        logger.debug(
            "Point %d (λ_M = %.3f nm) : %d coïncidences, fond %.2f, significance %.1f",
            task.index, task.lambda_M_nm, coincidences, background,
            (coincidences - background) / np.sqrt(max(background, 1.0)),
        )

    singles_2 = len(acquisition.stream_2)
    if singles_2 == 0:
        logger.warning("Point %d (λ_M = %.3f nm) : aucun clic sur D2", task.index, task.lambda_M_nm)
    return ScanPoint(
        lambda_M_nm=task.lambda_M_nm,
        lambda_conj_nm=conjugate_wavelength(task.setup.pump_nm, task.lambda_M_nm),
        singles_1=len(acquisition.stream_1),
        singles_2=singles_2,
        coincidences=coincidences,
        dwell_s=task.dwell,
        normalized=coincidences / singles_2 if singles_2 else None,
    )


def run_scan(config: RunConfig, threads: int | None = None) -> ScanCurve:
    """
    Scan Monte Carlo complet.

    Raises:
        NoAlignmentError: l'acquisition d'alignement ne montre pas de pic.
        ConfigError: grille ou durée indéterminée.
    """
    threads = threads or settings.threads
    setup = build_setup(config)
    grid = scan_grid(config)
    dwell = config.scan.dwell_s or auto_dwell(setup, grid, config.scan.min_peak_coincidences)
    logger.info("Scan Monte Carlo : %d points, %.3f s par point, %d processus",
                grid.size, dwell, threads)

    alignment = align_setup(config, setup)
    coarse_bin_ps = int(round(config.coincidence.coarse_bin_s * 1e12))
    tasks = [
        _PointTask(setup, i, float(lam), dwell, config.seed, alignment.best_offset_ps,
                   coarse_bin_ps, config.scan.verify_alignment)
        for i, lam in enumerate(grid)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(_measure_point, tasks))
    else:
        points = [_measure_point(task) for task in tasks]

    logger.info("Scan terminé : %d coïncidences au total", sum(p.coincidences for p in points))
    return ScanCurve(
        pump_nm=config.pump_nm,
        engine="montecarlo",
        points=points,
        config=config.model_dump(mode="json"),
        alignment=AlignmentSummary(
            offset_ps=alignment.best_offset_ps,
            centroid_offset_ps=alignment.centroid_offset_ps,
            peak_count=alignment.peak_count,
            background_mean=alignment.background_mean,
            significance=alignment.significance,
            detection_significance=alignment.detection_significance,
        ),
    )


def analytic_scan(config: RunConfig, mode: str | None = None) -> ScanCurve:
    """Même grille et même durée que run_scan, comptages = espérances."""
    mode = mode or config.scan.analytic_mode
    setup = build_setup(config)
    grid = scan_grid(config)
    dwell = config.scan.dwell_s or auto_dwell(setup, grid, config.scan.min_peak_coincidences)

    points = []
    for lam in grid.tolist():
        rates = expected_rates(setup, lam, mode)
        singles_1 = rates.singles_1 * dwell
        singles_2 = rates.singles_2 * dwell
        coincidences = min(rates.coincidences * dwell, singles_1, singles_2)
        points.append(ScanPoint(
            lambda_M_nm=lam,
            lambda_conj_nm=conjugate_wavelength(config.pump_nm, lam),
            singles_1=singles_1,
            singles_2=singles_2,
            coincidences=coincidences,
            dwell_s=dwell,
            normalized=coincidences / singles_2 if singles_2 > 0 else None,
        ))
    logger.info("Scan analytique (%s) : %d points", mode, len(points))
    return ScanCurve(pump_nm=config.pump_nm, engine="analytic", points=points,
                     config=config.model_dump(mode="json"))


# =============================================================================
# RECONSTRUCTION
# =============================================================================


def reconstruction_table(curve: ScanCurve) -> list[ReconstructionRow]:
    """
    Estimation de |f|² sur l'axe λ signal, normalisée au maximum, par λ croissant.

    Les points sans valeur normalisée sont absents.

    Raises:
        EmptyReconstructionError: aucune valeur normalisée positive.
    """
    valid = [p for p in curve.points if p.normalized is not None]
    peak = max((p.normalized for p in valid), default=0.0)
    if not peak > 0:
        raise EmptyReconstructionError("aucune coïncidence normalisée positive dans le scan")
    rows = [ReconstructionRow(lambda_conj_nm=p.lambda_conj_nm, value=p.normalized / peak)
            for p in valid]
    return sorted(rows, key=lambda row: row.lambda_conj_nm)


def reconstruct(curve: ScanCurve) -> SpectralFunction:
    """
    Fonction tabulée estimant f sur l'axe ω signal : module √(|f|² estimée),
    phase nulle (une mesure d'intensité ne donne pas la phase).
    """
    rows = reconstruction_table(curve)
    table = sorted(
        (float(wavelength_to_omega(row.lambda_conj_nm)), float(np.sqrt(row.value)), 0.0)
        for row in rows
    )
    return SpectralFunction(kind=SpectralKind.tabulated, table=tuple(table), peak_amplitude=1.0)


def summarize_reconstruction(rows: list[ReconstructionRow]) -> ReconstructionSummary:
    """Maximum, milieu des passages à mi-hauteur et largeur à mi-hauteur (nm)."""
    x = np.array([row.lambda_conj_nm for row in rows])
    y = np.array([row.value for row in rows])
    top = int(np.argmax(y))
    peak_nm = float(x[top])
    below_left = np.flatnonzero(y[:top] < 0.5)
    below_right = np.flatnonzero(y[top:] < 0.5)
    if below_left.size == 0 or below_right.size == 0:
        return ReconstructionSummary(peak_nm=peak_nm, center_nm=peak_nm, fwhm_nm=None)
    i = int(below_left[-1])
    j = top + int(below_right[0])
    left = x[i] + (0.5 - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i])
    right = x[j - 1] + (0.5 - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
    return ReconstructionSummary(
        peak_nm=peak_nm, center_nm=float((left + right) / 2.0), fwhm_nm=float(right - left)
    )


# =============================================================================
# SORTIES
# =============================================================================


def write_scan_csv(curve: ScanCurve, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(SCAN_CSV_HEADER)
        for p in curve.points:
            writer.writerow([
                p.lambda_M_nm, p.lambda_conj_nm, p.singles_1, p.singles_2,
                p.coincidences, p.dwell_s, "" if p.normalized is None else p.normalized,
            ])
    logger.info("Courbe de scan écrite : %s", path)


def write_reconstruction_csv(rows: list[ReconstructionRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(RECONSTRUCTION_CSV_HEADER)
        for row in rows:
            writer.writerow([row.lambda_conj_nm, row.value])
    logger.info("Reconstruction écrite : %s", path)


def write_config_snapshot(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(config.model_dump_json(indent=2) + "\n", encoding="utf-8")
