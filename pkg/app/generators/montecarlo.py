# =============================================================================
# app/generators/montecarlo.py — Génération Monte Carlo des paires de photons
#
# Chaque paire est décrite par :
#   - son instant de création (processus de Poisson homogène, en s)
#   - son désaccord ν tiré selon la densité |Φ(ν)|² (CDF inverse)
#   - ses deux fréquences ω_s = ω⁰_s + ν et ω_i = ω_p − ω_s
#
# Représentation :
#   PairSample  une paire isolée (NamedTuple)
#   PairBatch   un lot de paires sous forme de tableaux numpy, avec un drapeau
#               de survie par bras mis à jour par app.generators.instruments
#
# Générateurs aléatoires :
#   numpy.random.Generator(PCG64) initialisé par un SeedSequence. Les blocs
#   temporels reçoivent chacun un SeedSequence dérivé (spawn_key), si bien que
#   le découpage en blocs reste reproductible et parallélisable.
# =============================================================================

import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import cumulative_trapezoid

from app.errors import CapacityError, DomainError
from app.models.spectral import DispersiveMedium, SpectralFunction, SpectralKind
from app.physics.spectra import TwoPhotonWavefunction, eval_spectral

logger = logging.getLogger(__name__)

# Au-delà, le nombre de paires ne tient plus dans un compteur 32 bits.
MAX_PAIRS_PER_CALL: int = 2**32

# Nombre de points de la table de CDF inverse.
_CDF_POINTS: int = 8193


# =============================================================================
# TYPES
# =============================================================================


class PairSample(NamedTuple):
    """Une paire signal/idler (temps en s, fréquences en rad/s)."""

    birth_time: float
    nu: float
    omega_s: float
    omega_i: float


class SourceConfig(BaseModel):
    """Paramètres de la source de paires pour une acquisition."""

    model_config = ConfigDict(frozen=True)

    pair_rate: float = Field(gt=0, description="Paires créées par seconde")
    duration: float = Field(gt=0, description="Durée d'acquisition (s)")
    omega_p: float = Field(gt=0, description="Pompe (rad/s)")
    omega_s0: float = Field(gt=0, description="Fréquence centrale signal (rad/s)")
    omega_i0: float = Field(gt=0, description="Fréquence centrale idler (rad/s)")
    phi: SpectralFunction
    rng_seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_energy(self) -> "SourceConfig":
        if not np.isclose(self.omega_s0 + self.omega_i0, self.omega_p, rtol=1e-12, atol=0.0):
            raise ValueError("omega_s0 + omega_i0 doit valoir omega_p")
        return self


@dataclass(frozen=True)
class PairBatch:
    """
    Lot de paires, une entrée par paire, trié par instant de création.

    `signal_alive` / `idler_alive` indiquent si chaque photon a survécu aux
    éléments optiques traversés jusqu'ici.
    """

    birth_time: np.ndarray
    nu: np.ndarray
    omega_s: np.ndarray
    omega_i: np.ndarray
    signal_alive: np.ndarray
    idler_alive: np.ndarray

    def __len__(self) -> int:
        return int(self.birth_time.size)

    def __getitem__(self, index: int) -> PairSample:
        return PairSample(
            float(self.birth_time[index]),
            float(self.nu[index]),
            float(self.omega_s[index]),
            float(self.omega_i[index]),
        )

    def with_survival(self, signal_alive=None, idler_alive=None) -> "PairBatch":
        """Copie du lot avec de nouveaux drapeaux de survie."""
        changes = {}
        if signal_alive is not None:
            changes["signal_alive"] = np.asarray(signal_alive, dtype=bool)
        if idler_alive is not None:
            changes["idler_alive"] = np.asarray(idler_alive, dtype=bool)
        return replace(self, **changes)

    @classmethod
    def empty(cls) -> "PairBatch":
        zeros = np.empty(0)
        flags = np.empty(0, dtype=bool)
        return cls(zeros, zeros, zeros, zeros, flags, flags)

    @classmethod
    def concatenate(cls, batches: list["PairBatch"]) -> "PairBatch":
        if not batches:
            return cls.empty()
        return cls(*(np.concatenate([getattr(b, name) for b in batches]) for name in (
            "birth_time", "nu", "omega_s", "omega_i", "signal_alive", "idler_alive"
        )))


# =============================================================================
# ÉCHANTILLONNAGE DE ν
# =============================================================================


def phi_support(phi: SpectralFunction) -> tuple[float, float]:
    """
    Intervalle de ν sur lequel |Φ(ν)|² est échantillonnée.

    Rectangle : exactement son support. Gaussienne : ± 4 largeurs.
    Sinc : ± 16 lobes. Tabulée : étendue de la table.

    Raises:
        DomainError: Φ sans support fini (flat, edge).
    """
    kind = phi.kind
    if kind is SpectralKind.rectangle:
        half = phi.width / 2.0
    elif kind is SpectralKind.gaussian:
        half = 4.0 * phi.width
    elif kind is SpectralKind.sinc_phase_matching:
        # Zéros du sinc espacés de 2π/(|D|·L)
        half = 16.0 * 2.0 * np.pi / abs(phi.gvm * phi.crystal_length)
    elif kind is SpectralKind.tabulated:
        return phi.table[0][0], phi.table[-1][0]
    else:
        raise DomainError(f"Φ de kind {kind.value} sans support fini : échantillonnage impossible")
    return phi.center - half, phi.center + half


@lru_cache(maxsize=32)
def _inverse_cdf_table(phi: SpectralFunction) -> tuple[np.ndarray, np.ndarray]:
    low, high = phi_support(phi)
    nu = np.linspace(low, high, _CDF_POINTS)
    density = np.abs(eval_spectral(phi, nu)) ** 2
    cdf = cumulative_trapezoid(density, nu, initial=0.0)
    if cdf[-1] <= 0.0:
        raise DomainError("|Φ|² est nulle sur tout son support")
    return cdf / cdf[-1], nu


def sample_detuning(phi: SpectralFunction, rng: np.random.Generator, size: int) -> np.ndarray:
    """Tire `size` valeurs de ν i.i.d. de densité ∝ |Φ(ν)|²."""
    cdf, nu = _inverse_cdf_table(phi)
    return np.interp(rng.random(size), cdf, nu)


def phi_intensity_integral(phi: SpectralFunction) -> float:
    """∫|Φ(ν)|² dν sur le support d'échantillonnage."""
    low, high = phi_support(phi)
    nu = np.linspace(low, high, _CDF_POINTS)
    return float(np.trapezoid(np.abs(eval_spectral(phi, nu)) ** 2, nu))


# =============================================================================
# GÉNÉRATION
# =============================================================================


def _check_capacity(expected: float) -> None:
    if expected > MAX_PAIRS_PER_CALL:
        raise CapacityError(
            f"{expected:.3g} paires attendues (> 2^32) : utiliser iter_pair_chunks"
        )


def _draw_pairs(
    config: SourceConfig,
    rng: np.random.Generator,
    start: float,
    length: float,
) -> PairBatch:
    n = int(rng.poisson(config.pair_rate * length))
    birth = start + np.sort(rng.uniform(0.0, length, n))
    nu = sample_detuning(config.phi, rng, n)

    # ω_i = ω_p − ω_s puis ω_s = ω_p − ω_i : l'une des deux soustractions est
    # exacte (lemme de Sterbenz), donc ω_s + ω_i == ω_p bit pour bit.
    omega_s = config.omega_s0 + nu
    omega_i = config.omega_p - omega_s
    omega_s = config.omega_p - omega_i

    alive = np.ones(n, dtype=bool)
    return PairBatch(birth, nu, omega_s, omega_i, alive, alive.copy())


def generate_pairs(config: SourceConfig) -> PairBatch:
    """
    Génère toutes les paires de [0, duration) en un seul lot.

    Même config (graine comprise) ⇒ même lot, octet pour octet.

    Raises:
        CapacityError: plus de 2³² paires attendues.
    """
    _check_capacity(config.pair_rate * config.duration)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.rng_seed)))
    batch = _draw_pairs(config, rng, 0.0, config.duration)
    logger.debug("%d paires générées sur %.3g s", len(batch), config.duration)
    return batch


def chunk_rng(seed: int, *key: int) -> np.random.Generator:
    """Générateur PCG64 dérivé de (seed, key) ; clés distinctes ⇒ flux indépendants."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def iter_pair_chunks(
    config: SourceConfig,
    chunk_duration: float,
    spawn_key: tuple[int, ...] = (),
) -> Iterator[tuple[int, PairBatch]]:
    """
    Génère les paires par blocs temporels consécutifs de `chunk_duration`.

    Le bloc k reçoit la graine dérivée (rng_seed, spawn_key + (k,)) : chaque
    bloc peut être recalculé seul, et la concaténation dans l'ordre des index
    ne dépend pas de l'ordre d'exécution.

    Yields:
        (index du bloc, PairBatch)
    """
    if not chunk_duration > 0:
        raise DomainError(f"chunk_duration doit être > 0 (reçu {chunk_duration})")
    _check_capacity(config.pair_rate * min(chunk_duration, config.duration))
    n_chunks = int(np.ceil(config.duration / chunk_duration))
    for k in range(n_chunks):
        start = k * chunk_duration
        length = min(chunk_duration, config.duration - start)
        if length <= 0:
            break
        rng = chunk_rng(config.rng_seed, *spawn_key, k)
        yield k, _draw_pairs(config, rng, start, length)


# =============================================================================
# INSTANTS D'ARRIVÉE
# =============================================================================


class CorrelationSampler:
    """
    Tire l'écart τ entre les deux photons d'une paire selon g2(τ) normalisé.

    Si g2 est identiquement nul (aucune paire transmise), τ = 0.
    """

    def __init__(self, tau: np.ndarray, g2: np.ndarray) -> None:
        tau = np.asarray(tau, dtype=float)
        g2 = np.asarray(g2, dtype=float)
        total = cumulative_trapezoid(g2, tau, initial=0.0)
        self._tau = tau
        self._cdf = total / total[-1] if total[-1] > 0 else None

    @classmethod
    def from_wavefunction(cls, wavefunction: TwoPhotonWavefunction) -> "CorrelationSampler":
        return cls(wavefunction.tau, wavefunction.g2)

    @classmethod
    def none(cls) -> "CorrelationSampler":
        """Corrélation parfaite : τ = 0 pour toutes les paires."""
        return cls(np.array([-1.0, 1.0]), np.zeros(2))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self._cdf is None:
            return np.zeros(size)
        return np.interp(rng.random(size), self._cdf, self._tau)


def pair_arrival_times(
    pairs: PairBatch | PairSample,
    path1: DispersiveMedium,
    path2: DispersiveMedium,
    sampler: CorrelationSampler | None = None,
    rng: np.random.Generator | None = None,
):
    """
    Instants d'arrivée (t1, t2) des photons signal et idler, en s.

    t1 = naissance + r₁/u₁ − τ/2,  t2 = naissance + r₂/u₂ + τ/2,
    τ tiré de g2 par `sampler` (τ = 0 sans sampler).
    """
    birth = np.atleast_1d(np.asarray(pairs.birth_time, dtype=float))
    if sampler is None:
        tau = np.zeros(birth.size)
    else:
        if rng is None:
            raise DomainError("un générateur aléatoire est requis avec un sampler")
        tau = sampler.sample(rng, birth.size)

    t1 = birth + path1.group_delay - tau / 2.0
    t2 = birth + path2.group_delay + tau / 2.0
    if isinstance(pairs, PairSample):
        return float(t1[0]), float(t2[0])
    return t1, t2
