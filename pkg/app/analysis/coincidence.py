# =============================================================================
# app/analysis/coincidence.py — Comptage de coïncidences et alignement
#
# Deux opérations sur des paires de flux horodatés :
#
#   count_coincidences()  appariement un-pour-un, au plus tôt, des clics
#                         tels que |t2 − t1 − offset| ≤ largeur/2
#   align()               recherche du décalage entre horloges qui maximise
#                         les coïncidences, en deux étages :
#                           1. histogramme grossier de toutes les différences
#                              t2 − t1 dans ± search_range (balayage trié)
#                           2. affinage autour du meilleur bin par comptages
#                              exacts sur une grille de pas fenêtre/4
#
# Tous les calculs se font en picosecondes entières (int64).
# =============================================================================

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit
from pydantic import BaseModel, ConfigDict, Field

from app.data.profiles import COINCIDENCE_WINDOW_S
from app.errors import DomainError, NoAlignmentError
from app.io.timetag import EventStream

logger = logging.getLogger(__name__)

# Nombre maximal de différences matérialisées par bloc lors du balayage.
SWEEP_CHUNK_DIFFERENCES: int = 4_000_000

SIGNIFICANCE_THRESHOLD: float = 5.0

# Bins de fond retenus pour la significance, et garde autour du pic (bins).
BACKGROUND_BINS: int = 16
PEAK_GUARD_BINS: int = 2


class CoincidenceWindow(BaseModel):
    """Fenêtre d'intégration : (t1, t2) coïncident si |t2 − t1 − offset| ≤ width/2."""

    model_config = ConfigDict(frozen=True)

    width: float = Field(default=COINCIDENCE_WINDOW_S, gt=0, description="Largeur totale (s)")

    @property
    def width_ps(self) -> int:
        return max(1, int(round(self.width * 1e12)))


# =============================================================================
# COMPTAGE
# =============================================================================


def _has_partner(times: np.ndarray, others: np.ndarray, half: int) -> np.ndarray:
    """Masque des instants ayant au moins un partenaire dans [t − half, t + half]."""
    lo = np.searchsorted(others, times - half, side="left")
    hi = np.searchsorted(others, times + half, side="right")
    return hi > lo


@njit(cache=True)
def _greedy_count(a: np.ndarray, b: np.ndarray, half: int) -> int:
    count = 0
    i = 0
    j = 0
    while i < a.size and j < b.size:
        d = b[j] - a[i]
        if d < -half:
            j += 1
        elif d > half:
            i += 1
        else:
            count += 1
            i += 1
            j += 1
    return count


def count_coincidences_ps(t1: np.ndarray, t2: np.ndarray, offset_ps: int, width_ps: int) -> int:
    """
    Nombre de coïncidences entre deux suites triées d'instants en ps.

    Appariement glouton au plus tôt, chaque événement servant au plus une
    fois ; ce glouton est un appariement maximum, donc le résultat est
    symétrique par échange des flux (offset → −offset) et croissant avec
    la largeur de fenêtre.
    """
    if t1.size == 0 or t2.size == 0:
        return 0
    half = width_ps // 2
    shifted = t2 - offset_ps

    # Les événements sans aucun partenaire possible ne changent pas le résultat.
    a = t1[_has_partner(t1, shifted, half)].astype(np.int64, copy=False)
    b = shifted[_has_partner(shifted, t1, half)].astype(np.int64, copy=False)
    return int(_greedy_count(a, b, int(half)))


def count_coincidences(
    s1: EventStream,
    s2: EventStream,
    offset: float,
    window: CoincidenceWindow,
) -> int:
    """
    Coïncidences entre `s1` et `s2` décalé de −offset (s).

    Exemple : s1 = {0, 10, 20} ns, s2 = {1, 100} ns, offset 0, fenêtre 5 ns → 1
    """
    return count_coincidences_ps(
        s1.times_ps, s2.times_ps, int(round(offset * 1e12)), window.width_ps
    )


def accidental_rate(rate_1: float, rate_2: float, window: float) -> float:
    """Taux de coïncidences fortuites entre flux non corrélés : r₁·r₂·fenêtre."""
    return rate_1 * rate_2 * window


# =============================================================================
# ALIGNEMENT
# =============================================================================


@dataclass(frozen=True)
class AlignmentResult:
    """
    Résultat d'une recherche de décalage.

    `histogram[k]` compte les différences t2 − t1 du bin grossier
    first_bin + k, qui couvre [−R + (first_bin + k)·b, −R + (first_bin + k + 1)·b).
    Seule la portée atteignable par les deux flux est stockée.

    `best_offset_ps` est le maximum des comptages exacts de la grille fine (à
    égalité, le plus petit |offset|) ; `centroid_offset_ps` est le barycentre
    du plateau autour de ce maximum, plus précis quand la fenêtre est bien plus
    large que la gigue.

    Deux statistiques coexistent :
      - `significance` = (pic − background_mean)/√background_mean, avec
        `background_mean` la moyenne par bin hors du voisinage du pic ;
      - `detection_significance`, calculée contre `look_elsewhere_background`
        (moyenne des BACKGROUND_BINS plus hauts bins hors du pic). C'est elle
        qui décide `aligned` : le plus haut bin de millions de bins de bruit
        dépasse couramment 5σ de la moyenne.
    """

    best_offset_ps: int
    histogram: np.ndarray
    first_bin: int
    coarse_bin_ps: int
    search_range_ps: int
    peak_count: int
    background_mean: float
    significance: float
    look_elsewhere_background: float = 0.0
    detection_significance: float = 0.0
    threshold: float = SIGNIFICANCE_THRESHOLD
    centroid_offset_ps: int | None = None
    fine_shifts_ps: np.ndarray | None = None
    fine_counts: np.ndarray | None = None

    @property
    def best_offset(self) -> float:
        """Décalage retenu (s)."""
        return self.best_offset_ps * 1e-12

    @property
    def aligned(self) -> bool:
        return self.detection_significance >= self.threshold

    @property
    def bin_shifts_ps(self) -> np.ndarray:
        """Bord gauche de chaque bin stocké (ps)."""
        k = self.first_bin + np.arange(self.histogram.size)
        return -self.search_range_ps + k * self.coarse_bin_ps

    def bin_index(self, shift_ps: int) -> int | None:
        """Index dans `histogram` du bin contenant `shift_ps`, None hors portée."""
        k = (shift_ps + self.search_range_ps) // self.coarse_bin_ps - self.first_bin
        if 0 <= k < self.histogram.size:
            return int(k)
        return None

    def ensure_aligned(self) -> "AlignmentResult":
        if not self.aligned:
            raise NoAlignmentError(self.detection_significance, self.threshold)
        return self


def _difference_histogram(
    t1: np.ndarray, t2: np.ndarray, search_range_ps: int, bin_ps: int
) -> tuple[np.ndarray, int]:
    """
    Histogramme de toutes les différences t2 − t1 dans [−R, R].

    Balayage trié : pour chaque t2, les t1 compatibles forment une tranche
    contiguë [lo, hi) ; les tranches sont matérialisées par blocs bornés
    puis comptées par np.bincount. Les histogrammes partiels s'additionnent.
    """
    R = search_range_ps
    if t1.size == 0 or t2.size == 0:
        return np.zeros(0, dtype=np.int64), 0
    d_min = max(-R, int(t2[0] - t1[-1]))
    d_max = min(R, int(t2[-1] - t1[0]))
    if d_min > d_max:
        return np.zeros(0, dtype=np.int64), 0
    first_bin = (d_min + R) // bin_ps
    n_span = (d_max + R) // bin_ps - first_bin + 1
    hist = np.zeros(n_span, dtype=np.int64)

    lo = np.searchsorted(t1, t2 - R, side="left")
    hi = np.searchsorted(t1, t2 + R, side="right")
    counts = hi - lo
    starts = np.concatenate([[0], np.cumsum(counts)])
    total = int(starts[-1])
    if total == 0:
        return hist, first_bin

    # Taille de bloc : au moins n_span différences pour amortir chaque bincount.
    target = max(SWEEP_CHUNK_DIFFERENCES, n_span)
    cuts = np.searchsorted(starts, np.arange(target, total, target), side="left")
    bounds = np.unique(np.concatenate([[0], cuts, [t2.size]]))

    for a, b in zip(bounds[:-1].tolist(), bounds[1:].tolist()):
        c = counts[a:b]
        n = int(c.sum())
        if n == 0:
            continue
        rows = np.repeat(np.arange(a, b), c)
        within = np.arange(n) - np.repeat(starts[a:b] - starts[a], c)
        idx1 = np.repeat(lo[a:b], c) + within
        d = t2[rows] - t1[idx1]
        hist += np.bincount((d + R) // bin_ps - first_bin, minlength=n_span)
    return hist, first_bin


def _pick_top_bin(hist: np.ndarray, first_bin: int, R: int, bin_ps: int) -> int:
    top = hist.max()
    candidates = np.flatnonzero(hist == top)
    centers = -R + (first_bin + candidates) * bin_ps + bin_ps // 2
    return int(candidates[np.argmin(np.abs(centers))])


def _refine(
    t1: np.ndarray,
    t2: np.ndarray,
    low_ps: int,
    high_ps: int,
    width_ps: int,
) -> tuple[int, int, np.ndarray, np.ndarray]:
    """
    Comptages exacts sur la grille low, low + pas, ... ≤ high (pas = fenêtre/4).

    Returns:
        (argmax, barycentre, décalages, comptages). L'argmax départage les
        égalités vers le plus petit |offset|. Le barycentre est pondéré par
        (comptage − médiane) sur la zone contiguë au maximum où le comptage
        dépasse la médiane.
    """
    step = max(1, width_ps // 4)
    shifts = np.arange(low_ps, high_ps + 1, step, dtype=np.int64)
    half = width_ps // 2

    # Restreint les flux aux événements ayant un partenaire pour au moins un décalage.
    lo = np.searchsorted(t2, t1 + low_ps - half, side="left")
    hi = np.searchsorted(t2, t1 + high_ps + half, side="right")
    a = t1[hi > lo]
    lo = np.searchsorted(t1, t2 - high_ps - half, side="left")
    hi = np.searchsorted(t1, t2 - low_ps + half, side="right")
    b = t2[hi > lo]

    counts = np.array([count_coincidences_ps(a, b, int(x), width_ps) for x in shifts])
    top = counts.max()
    candidates = np.flatnonzero(counts == top)
    peak = int(candidates[np.argmin(np.abs(shifts[candidates]))])
    best = int(shifts[peak])

    baseline = float(np.median(counts))
    weights = counts - baseline
    if weights[peak] <= 0:
        return best, best, shifts, counts
    left = peak
    while left > 0 and weights[left - 1] > 0:
        left -= 1
    right = peak
    while right < counts.size - 1 and weights[right + 1] > 0:
        right += 1
    w = weights[left : right + 1]
    relative = float(np.sum((shifts[left : right + 1] - low_ps) * w) / np.sum(w))
    return best, low_ps + int(round(relative)), shifts, counts


def align(
    s1: EventStream,
    s2: EventStream,
    search_range: float,
    coarse_bin: float,
    window: CoincidenceWindow,
    *,
    significance_threshold: float = SIGNIFICANCE_THRESHOLD,
) -> AlignmentResult:
    """
    Retrouve le décalage d'horloge qui maximise les coïncidences.

    significance = (pic − fond)/√fond, fond = moyenne par bin hors du pic.
    La décision aligné / non aligné utilise detection_significance, mesurée
    contre les BACKGROUND_BINS plus hauts bins hors du pic : une fluctuation
    d'un flux non corrélé ne dépasse donc pas le seuil.

    Un résultat non aligné est renvoyé tel quel ; ensure_aligned() lève
    NoAlignmentError.

    Raises:
        DomainError: coarse_bin < largeur de fenêtre, ou portée nulle.
    """
    R = int(round(search_range * 1e12))
    bin_ps = int(round(coarse_bin * 1e12))
    width_ps = window.width_ps
    if R <= 0:
        raise DomainError("search_range doit être > 0")
    if bin_ps < width_ps:
        raise DomainError(
            f"coarse_bin ({bin_ps} ps) doit être ≥ la fenêtre ({width_ps} ps)"
        )

    t1 = s1.times_ps
    t2 = s2.times_ps
    hist, first_bin = _difference_histogram(t1, t2, R, bin_ps)
    if hist.size == 0 or hist.max() == 0:
        logger.warning("Aucune différence t2 − t1 dans ± %d ps : alignement impossible", R)
        return AlignmentResult(
            best_offset_ps=0, histogram=hist, first_bin=first_bin, coarse_bin_ps=bin_ps,
            search_range_ps=R, peak_count=0, background_mean=0.0, significance=0.0,
            threshold=significance_threshold,
        )

    top = _pick_top_bin(hist, first_bin, R, bin_ps)
    k = first_bin + top
    low = max(-R, -R + (k - 1) * bin_ps)
    high = min(R, -R + (k + 2) * bin_ps)
    best, centroid, fine_shifts, fine_counts = _refine(t1, t2, low, high, width_ps)

    peak_index = (best + R) // bin_ps - first_bin
    peak_count = int(hist[peak_index]) if 0 <= peak_index < hist.size else 0

    mask = np.ones(hist.size, dtype=bool)
    mask[max(0, top - PEAK_GUARD_BINS) : top + PEAK_GUARD_BINS + 1] = False
    others = hist[mask]
    if others.size:
        background = float(others.mean())
        n_bg = min(BACKGROUND_BINS, others.size)
        look_elsewhere = float(np.partition(others, others.size - n_bg)[-n_bg:].mean())
    else:
        background = look_elsewhere = 0.0
    significance = (peak_count - background) / np.sqrt(max(background, 1.0))
    # Le pic grossier lui-même : l'argmax fin peut tomber dans le bin voisin.
    detection = (int(hist[top]) - look_elsewhere) / np.sqrt(max(look_elsewhere, 1.0))

    result = AlignmentResult(
        best_offset_ps=best,
        histogram=hist,
        first_bin=first_bin,
        coarse_bin_ps=bin_ps,
        search_range_ps=R,
        peak_count=peak_count,
        background_mean=background,
        significance=float(significance),
        look_elsewhere_background=look_elsewhere,
        detection_significance=float(detection),
        threshold=significance_threshold,
        centroid_offset_ps=centroid,
        fine_shifts_ps=fine_shifts,
        fine_counts=fine_counts,
    )
    logger.info(
        "Alignement : offset %d ps (barycentre %d), pic %d, fond %.2f, significance %.1f, "
        "détection %.1f (%s)",
        best, centroid, peak_count, background, result.significance,
        result.detection_significance, "aligné" if result.aligned else "non aligné",
    )
    return result


def export_alignment_csv(result: AlignmentResult, path: str | Path, neighbourhood: int = 50) -> None:
    """
    Écrit le pic de corrélation (`shift_ps,count`) : les bins grossiers à
    ± `neighbourhood` bins du décalage retenu.
    """
    index = result.bin_index(result.best_offset_ps)
    if index is None:
        index = int(np.argmax(result.histogram)) if result.histogram.size else 0
    lo = max(0, index - neighbourhood)
    hi = min(result.histogram.size, index + neighbourhood + 1)
    shifts = result.bin_shifts_ps[lo:hi]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["shift_ps", "count"])
        for shift, count in zip(shifts.tolist(), result.histogram[lo:hi].tolist()):
            writer.writerow([shift, count])
    logger.info("Histogramme d'alignement écrit : %s", path)
