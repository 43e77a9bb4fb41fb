# =============================================================================
# app/models/config.py — RunConfig : document de configuration d'une expérience
#
# Un RunConfig décrit intégralement une expérience simulée (source, filtre
# distant, monochromateur, détecteurs, horloges, fenêtre, grille de scan,
# graine). C'est un document JSON unique :
#
#   - chargé depuis un fichier (--config) ou un profil nommé (--profile),
#   - surchargé champ par champ par chemin pointé (--set scan.n_points=30),
#   - recopié à côté de chaque sortie (config_snapshot.json) : relancer avec
#     cet instantané reproduit les sorties octet pour octet.
#
# Les longueurs d'onde et largeurs sont exprimées en nm, les durées en s.
# Les largeurs de filtres sont des largeurs à mi-hauteur en INTENSITÉ
# (|f|², |Π|²), comme sur une fiche technique ; la conversion en amplitude
# et en rad/s est faite par app.analysis.scan.build_setup().
#
# Toute incohérence est signalée par une pydantic.ValidationError portant le
# chemin du champ fautif (ex : scan.lambda_M_nm).
# =============================================================================

import copy
import json
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.config import settings
from app.data.profiles import (
    COINCIDENCE_WINDOW_S,
    CRYSTAL_LENGTH_M,
    DEFAULT_PAIR_RATE,
    FLAT_PHI_WIDTH_NM,
    MONOCHROMATOR_PEAK,
    MONOCHROMATOR_RESOLUTION_NM,
    PROFILES,
    PUMP_WAVELENGTH_NM,
    REMOTE_FILTERS,
)
from app.errors import ConfigError
from app.generators.instruments import DetectorModel
from app.io.timetag import ClockModel
from app.models.spectral import DispersiveMedium

_DEFAULT_FILTER_NM, _DEFAULT_FILTER_WIDTH_NM = REMOTE_FILTERS["filtre_850"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


# =============================================================================
# SECTIONS
# =============================================================================


class PhiSpec(_Section):
    """Amplitude spectrale des paires Φ(ν), largeur côté signal."""

    kind: Literal["rectangle", "gaussian", "sinc_phase_matching"] = "rectangle"
    width_nm: float = Field(default=FLAT_PHI_WIDTH_NM, gt=0,
                            description="Largeur à mi-hauteur de |Φ|² (nm, côté signal)")
    gvm: float | None = Field(default=None, description="D = 1/u_s − 1/u_i (s/m)")
    crystal_length: float = Field(default=CRYSTAL_LENGTH_M, gt=0, description="L (m)")

    @model_validator(mode="after")
    def _check_gvm(self) -> "PhiSpec":
        if self.kind == "sinc_phase_matching" and not self.gvm:
            raise ValueError("gvm non nul requis pour sinc_phase_matching")
        return self


class SourceSpec(_Section):
    pair_rate: float = Field(default=DEFAULT_PAIR_RATE, gt=0, description="Paires/s")
    signal_center_nm: float = Field(default=_DEFAULT_FILTER_NM, gt=0,
                                    description="λ⁰_s, centre de Φ côté signal (nm)")
    phi: PhiSpec = Field(default_factory=PhiSpec)
    chunk_duration_s: float = Field(default=0.05, gt=0,
                                    description="Durée des blocs de génération (s)")


class FilterSpec(_Section):
    """Élément distant f(ω) sur le bras signal."""

    kind: Literal["gaussian", "rectangle", "edge", "flat", "tabulated"] = "gaussian"
    center_nm: float = Field(default=_DEFAULT_FILTER_NM, gt=0)
    width_nm: float = Field(default=_DEFAULT_FILTER_WIDTH_NM, gt=0,
                            description="Largeur à mi-hauteur de |f|² (nm)")
    peak: float = Field(default=1.0, ge=0.0, le=1.0, description="Amplitude crête")
    edge_pass: Literal["longpass", "shortpass"] = Field(
        default="longpass", description="Côté transmis d'un filtre edge (en λ)"
    )
    table_csv: str | None = Field(default=None, description="Table pour kind=tabulated")

    @model_validator(mode="after")
    def _check_table(self) -> "FilterSpec":
        if self.kind == "tabulated" and not self.table_csv:
            raise ValueError("table_csv requis pour kind=tabulated")
        return self


class MonochromatorSpec(_Section):
    resolution_nm: float = Field(default=MONOCHROMATOR_RESOLUTION_NM, gt=0,
                                 description="Largeur à mi-hauteur de |Π|² (nm)")
    peak: float = Field(default=MONOCHROMATOR_PEAK, gt=0.0, le=1.0,
                        description="Amplitude crête de Π")


class CoincidenceSpec(_Section):
    window_s: float = Field(default=COINCIDENCE_WINDOW_S, gt=0)
    search_range_s: float = Field(default=1.0, gt=0)
    coarse_bin_s: float = Field(default=100e-9, gt=0)
    significance_threshold: float = Field(default=5.0, gt=0)

    @model_validator(mode="after")
    def _check_bin(self) -> "CoincidenceSpec":
        if self.coarse_bin_s < self.window_s:
            raise ValueError("coarse_bin_s doit être ≥ window_s")
        return self


class ScanSpec(_Section):
    n_points: int = Field(default=60, ge=1)
    span_fwhm: float = Field(default=3.0, gt=0,
                             description="Demi-étendue de la grille, en largeurs du filtre")
    lambda_M_nm: list[float] | None = Field(
        default=None, description="Grille explicite (nm) ; None = grille automatique"
    )
    dwell_s: float | None = Field(default=None, gt=0, description="None = durée automatique")
    min_peak_coincidences: float = Field(default=400.0, gt=0)
    alignment_dwell_s: float = Field(default=0.2, gt=0)
    analytic_mode: Literal["narrowband", "convolved"] = "narrowband"
    verify_alignment: bool = True

    @field_validator("lambda_M_nm")
    @classmethod
    def _check_grid(cls, grid: list[float] | None) -> list[float] | None:
        if grid is None:
            return grid
        if not grid:
            raise ValueError("la grille lambda_M_nm est vide")
        steps = np.diff(grid)
        if len(grid) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("la grille lambda_M_nm doit être strictement monotone")
        return grid


class SimulateSpec(_Section):
    lambda_M_nm: float | None = Field(
        default=None, gt=0, description="Consigne du monochromateur ; None = conjuguée du filtre"
    )
    duration_s: float = Field(default=1.0, gt=0)


def _default_clock_2() -> ClockModel:
    return ClockModel(offset=1.234567e-6)


# =============================================================================
# DOCUMENT COMPLET
# =============================================================================


class RunConfig(_Section):
    """Configuration complète d'une expérience simulée."""

    pump_nm: float = Field(default=PUMP_WAVELENGTH_NM, gt=0)
    source: SourceSpec = Field(default_factory=SourceSpec)
    signal_filter: FilterSpec = Field(default_factory=FilterSpec)
    monochromator: MonochromatorSpec = Field(default_factory=MonochromatorSpec)
    detector_1: DetectorModel = Field(default_factory=DetectorModel)
    detector_2: DetectorModel = Field(default_factory=DetectorModel)
    clock_1: ClockModel = Field(default_factory=ClockModel)
    clock_2: ClockModel = Field(default_factory=_default_clock_2)
    signal_path: DispersiveMedium = Field(default_factory=DispersiveMedium)
    idler_path: DispersiveMedium = Field(default_factory=DispersiveMedium)
    coincidence: CoincidenceSpec = Field(default_factory=CoincidenceSpec)
    scan: ScanSpec = Field(default_factory=ScanSpec)
    simulate: SimulateSpec = Field(default_factory=SimulateSpec)
    seed: int = Field(default=1, ge=0, lt=2**64)
    output_dir: str = "out"

    @model_validator(mode="after")
    def _check_cross_fields(self) -> "RunConfig":
        pump = self.pump_nm
        if not self.source.signal_center_nm > pump:
            raise ValueError("source.signal_center_nm doit dépasser pump_nm")
        if self.signal_filter.kind in ("gaussian", "rectangle", "edge"):
            if not self.signal_filter.center_nm > pump:
                raise ValueError("signal_filter.center_nm doit dépasser pump_nm")
        if self.scan.lambda_M_nm is not None:
            if min(self.scan.lambda_M_nm) <= pump:
                raise ValueError("scan.lambda_M_nm : toutes les valeurs doivent dépasser pump_nm")
            _check_within_phi(self, self.scan.lambda_M_nm)
        if self.simulate.lambda_M_nm is not None and not self.simulate.lambda_M_nm > pump:
            raise ValueError("simulate.lambda_M_nm doit dépasser pump_nm")
        return self


def _check_within_phi(config: RunConfig, grid: list[float]) -> None:
    """Chaque point de scan doit tomber dans le support échantillonné de Φ."""
    # Import local : app.analysis.scan importe ce module.
    from app.analysis.scan import check_grid_within_phi

    check_grid_within_phi(config, grid)


# =============================================================================
# CHARGEMENT ET SURCHARGES
# =============================================================================


def _deep_merge(base: dict, overrides: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def apply_override(document: dict, assignment: str) -> dict:
    """
    Applique une surcharge `chemin.pointé=valeur` à un document.

    La valeur est lue en JSON si possible (nombres, listes, null, booléens),
    sinon conservée comme chaîne.

    Exemple : apply_override({}, "scan.n_points=30") → {"scan": {"n_points": 30}}
    """
    if "=" not in assignment:
        raise ConfigError(f"surcharge invalide « {assignment} » : forme attendue chemin=valeur")
    path, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = [key for key in path.strip().split(".") if key]
    if not keys:
        raise ConfigError(f"surcharge invalide « {assignment} » : chemin vide")
    nested: dict = value
    for key in reversed(keys):
        nested = {key: nested}
    return _deep_merge(document, nested)


def load_run_config(
    path: str | Path | None = None,
    profile: str = "defaults",
    overrides: list[str] | tuple[str, ...] = (),
) -> RunConfig:
    """
    Construit le RunConfig : profil, puis fichier JSON, puis surcharges,
    puis variables d'environnement RANDOM_SEED et OUTPUT_DIR.

    Raises:
        ConfigError: profil inconnu ou surcharge mal formée.
        pydantic.ValidationError: document invalide.
    """
    if profile not in PROFILES:
        raise ConfigError(f"profil inconnu « {profile} » (disponibles : {', '.join(PROFILES)})")
    document = copy.deepcopy(PROFILES[profile])
    if path is not None:
        document = _deep_merge(document, json.loads(Path(path).read_text(encoding="utf-8")))
    for assignment in overrides:
        document = apply_override(document, assignment)
    if settings.random_seed is not None:
        document["seed"] = settings.random_seed
    if settings.output_dir is not None:
        document["output_dir"] = settings.output_dir
    return RunConfig.model_validate(document)
