# =============================================================================
# app/io/timetag.py — Horodateurs, horloges locales et format .ttag
#
# Un EventStream est la liste des instants de clic d'un détecteur, en
# entiers (« ticks ») multiples de la résolution de son horodateur.
# Tout le calcul de temps se fait en picosecondes entières : aucune
# erreur d'arrondi flottant ne s'accumule sur les longues acquisitions.
#
# Format binaire .ttag (petit-boutiste) :
#
#   offset  taille  champ
#   0       4       magic          0x54544147
#   4       2       version        1
#   6       1       detector_id    1 ou 2
#   7       1       réservé        0
#   8       4       resolution_ps
#   12      8       duration_ps
#   20      8       count
#   28      8·count horodatages u64, en unités de resolution_ps
#
# Les enregistrements de taille fixe permettent une lecture mémoire-mappée
# (numpy.memmap) des fichiers de plusieurs millions d'événements.
# =============================================================================

import io
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.errors import (
    DomainError,
    MagicMismatchError,
    NonMonotoneError,
    TimestampOverflowError,
    TrailingDataError,
    TruncatedRecordError,
    TtagParseError,
    UnsupportedVersionError,
)

logger = logging.getLogger(__name__)

MAGIC: int = 0x54544147
FORMAT_VERSION: int = 1
HEADER = struct.Struct("<IHBBIQQ")
HEADER_SIZE: int = HEADER.size  # 28 octets
RECORD_DTYPE = np.dtype("<u8")


def max_ticks(resolution_ps: int) -> int:
    """Plus grand horodatage convertible en ps sans dépasser un int64."""
    return (2**63 - 1) // resolution_ps


# =============================================================================
# HORLOGE LOCALE
# =============================================================================


class ClockModel(BaseModel):
    """Horloge affine : t_local = (1 + drift)·t_ref + offset, quantifiée à `resolution`."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    offset: float = Field(default=0.0, description="Décalage (s)")
    drift: float = Field(default=0.0, gt=-1e-3, lt=1e-3, description="Dérive relative")
    resolution: float = Field(default=1e-12, gt=0, description="Pas de quantification (s)")

    @field_validator("resolution")
    @classmethod
    def _whole_picoseconds(cls, value: float) -> float:
        ps = round(value * 1e12)
        if ps < 1 or abs(value * 1e12 - ps) > 1e-6 * ps:
            raise ValueError(f"la résolution doit être un nombre entier de ps (reçu {value} s)")
        return value

    @property
    def offset_ps(self) -> int:
        return int(round(self.offset * 1e12))

    @property
    def resolution_ps(self) -> int:
        return int(round(self.resolution * 1e12))


# =============================================================================
# FLUX D'ÉVÉNEMENTS
# =============================================================================


@dataclass(frozen=True, eq=False)
class EventStream:
    """
    Flux horodaté d'un détecteur, immuable.

    Attributes:
        detector_id: 1 (signal) ou 2 (idler).
        duration_ps: durée nominale de l'acquisition (ps).
        resolution_ps: pas de l'horodateur (ps).
        timestamps: instants en ticks (uint64), strictement croissants.
    """

    detector_id: int
    duration_ps: int
    resolution_ps: int
    timestamps: np.ndarray

    def __post_init__(self) -> None:
        if self.detector_id not in (1, 2):
            raise DomainError(f"detector_id doit valoir 1 ou 2 (reçu {self.detector_id})")
        if self.resolution_ps < 1:
            raise DomainError("resolution_ps doit être ≥ 1")
        if self.duration_ps < 0:
            raise DomainError("duration_ps doit être ≥ 0")
        timestamps = np.asarray(self.timestamps)
        if timestamps.ndim != 1:
            raise DomainError("timestamps doit être un tableau 1-D")
        if timestamps.size and timestamps.dtype.kind == "i" and timestamps.min() < 0:
            raise DomainError("horodatages négatifs")
        timestamps = timestamps.astype(np.uint64, copy=False)
        if timestamps.size > 1 and np.any(timestamps[1:] <= timestamps[:-1]):
            raise DomainError("les horodatages doivent être strictement croissants")
        if timestamps.size and int(timestamps[-1]) > max_ticks(self.resolution_ps):
            raise DomainError("horodatages hors de la plage int64 une fois convertis en ps")
        object.__setattr__(self, "timestamps", timestamps)

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.detector_id == other.detector_id
            and self.duration_ps == other.duration_ps
            and self.resolution_ps == other.resolution_ps
            and np.array_equal(self.timestamps, other.timestamps)
        )

    @property
    def times_ps(self) -> np.ndarray:
        """Instants en ps (int64)."""
        return self.timestamps.astype(np.int64) * self.resolution_ps

    @property
    def duration(self) -> float:
        return self.duration_ps * 1e-12

    @property
    def rate(self) -> float:
        """Taux moyen de clics (1/s)."""
        return len(self) / self.duration if self.duration_ps else 0.0


def apply_clock(stream: EventStream, clock: ClockModel) -> EventStream:
    """
    Passe un flux de l'horloge de référence à une horloge locale.

    t_local = quantize(t_ref + round(drift·t_ref) + offset, resolution), en ps
    entiers. Les instants devenus négatifs sont écartés ; deux clics tombant
    dans le même tick n'en font plus qu'un.

    Exemples :
        offset = 1 ms      → chaque instant décalé de 1e9 ps exactement
        drift = 1e−6, 1 s  → t_local − t_ref = 1e6 ps
    """
    t = stream.times_ps
    local = t + clock.offset_ps + np.rint(clock.drift * t).astype(np.int64)
    res = clock.resolution_ps
    ticks = (local + res // 2) // res

    negative = int(np.count_nonzero(ticks < 0))
    if negative:
        logger.warning(
            "Détecteur %d : %d événements avant l'origine de l'horloge locale écartés",
            stream.detector_id, negative,
        )
        ticks = ticks[ticks >= 0]
    unique = np.unique(ticks)
    if unique.size < ticks.size:
        logger.warning(
            "Détecteur %d : %d événements confondus à la résolution de %d ps",
            stream.detector_id, ticks.size - unique.size, res,
        )

    duration_ps = (
        stream.duration_ps + int(round(clock.drift * stream.duration_ps)) + abs(clock.offset_ps)
    )
    return EventStream(
        detector_id=stream.detector_id,
        duration_ps=duration_ps,
        resolution_ps=res,
        timestamps=unique.astype(np.uint64),
    )


def shift_stream(stream: EventStream, delta_ps: int) -> EventStream:
    """Décale tous les instants de `delta_ps` (multiple de la résolution)."""
    if delta_ps % stream.resolution_ps:
        raise DomainError(
            f"décalage {delta_ps} ps non multiple de la résolution {stream.resolution_ps} ps"
        )
    ticks = stream.timestamps.astype(np.int64) + delta_ps // stream.resolution_ps
    ticks = ticks[ticks >= 0]
    return EventStream(
        detector_id=stream.detector_id,
        duration_ps=stream.duration_ps + max(delta_ps, 0),
        resolution_ps=stream.resolution_ps,
        timestamps=ticks.astype(np.uint64),
    )


# =============================================================================
# ÉCRITURE / LECTURE
# =============================================================================


def stream_to_bytes(stream: EventStream) -> bytes:
    header = HEADER.pack(
        MAGIC, FORMAT_VERSION, stream.detector_id, 0,
        stream.resolution_ps, stream.duration_ps, len(stream),
    )
    return header + stream.timestamps.astype(RECORD_DTYPE).tobytes()


def write_stream(stream: EventStream, sink: str | Path | BinaryIO) -> None:
    """Écrit `stream` au format .ttag dans un chemin ou un fichier binaire ouvert."""
    payload = stream_to_bytes(stream)
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(payload)
        logger.info("Flux du détecteur %d écrit : %s (%d événements)",
                    stream.detector_id, sink, len(stream))
    else:
        sink.write(payload)


def _parse_header(header: bytes, total_size: int) -> tuple[int, int, int, int]:
    if len(header) < HEADER_SIZE:
        raise TruncatedRecordError("en-tête incomplet", len(header))
    magic, version, detector_id, reserved, resolution_ps, duration_ps, count = HEADER.unpack(
        header[:HEADER_SIZE]
    )
    if magic != MAGIC:
        raise MagicMismatchError(f"nombre magique 0x{magic:08X} inattendu", 0)
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"version {version} non prise en charge", 4)
    if detector_id not in (1, 2):
        raise TtagParseError(f"detector_id {detector_id} invalide", 6)
    if reserved != 0:
        raise TtagParseError("octet réservé non nul", 7)
    if resolution_ps == 0:
        raise TtagParseError("résolution nulle", 8)

    body = total_size - HEADER_SIZE
    expected = count * RECORD_DTYPE.itemsize
    if body < expected:
        complete = body // RECORD_DTYPE.itemsize
        raise TruncatedRecordError(
            f"{count} enregistrements annoncés, {complete} complets",
            HEADER_SIZE + complete * RECORD_DTYPE.itemsize,
        )
    if body > expected:
        raise TrailingDataError(f"{body - expected} octets en excès", HEADER_SIZE + expected)
    return detector_id, resolution_ps, duration_ps, count


def _check_monotone(timestamps: np.ndarray) -> None:
    if timestamps.size < 2:
        return
    bad = np.flatnonzero(timestamps[1:] <= timestamps[:-1])
    if bad.size:
        k = int(bad[0]) + 1
        raise NonMonotoneError(k, HEADER_SIZE + k * RECORD_DTYPE.itemsize)


def _check_range(timestamps: np.ndarray, resolution_ps: int) -> None:
    if timestamps.size == 0 or int(timestamps[-1]) <= max_ticks(resolution_ps):
        return
    k = int(np.flatnonzero(timestamps > np.uint64(max_ticks(resolution_ps)))[0])
    raise TimestampOverflowError(
        f"horodatage {int(timestamps[k])} × {resolution_ps} ps hors de la plage int64",
        HEADER_SIZE + k * RECORD_DTYPE.itemsize,
    )


def read_stream(source: str | Path | bytes | BinaryIO) -> EventStream:
    """
    Lit un flux .ttag depuis un chemin (lecture mémoire-mappée), des octets
    ou un fichier binaire ouvert.

    Raises:
        MagicMismatchError, UnsupportedVersionError, TruncatedRecordError,
        TrailingDataError, NonMonotoneError, TimestampOverflowError:
        fichier mal formé ; l'attribut
        `offset` donne la position du défaut en octets.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        size = path.stat().st_size
        with path.open("rb") as handle:
            header = handle.read(HEADER_SIZE)
        detector_id, resolution_ps, duration_ps, count = _parse_header(header, size)
        if count:
            timestamps = np.memmap(path, dtype=RECORD_DTYPE, mode="r",
                                   offset=HEADER_SIZE, shape=(count,))
        else:
            timestamps = np.empty(0, dtype=RECORD_DTYPE)
    else:
        data = bytes(source) if isinstance(source, (bytes, bytearray, memoryview)) else source.read()
        detector_id, resolution_ps, duration_ps, count = _parse_header(data, len(data))
        timestamps = np.frombuffer(data, dtype=RECORD_DTYPE, count=count, offset=HEADER_SIZE)

    _check_monotone(timestamps)
    _check_range(timestamps, resolution_ps)
    return EventStream(
        detector_id=detector_id,
        duration_ps=duration_ps,
        resolution_ps=resolution_ps,
        timestamps=timestamps,
    )


def export_csv(stream: EventStream, path: str | Path) -> None:
    """Export de débogage : une colonne `timestamp_ps`."""
    buffer = io.StringIO()
    np.savetxt(buffer, stream.times_ps, fmt="%d", header="timestamp_ps", comments="")
    Path(path).write_text(buffer.getvalue(), encoding="utf-8")
