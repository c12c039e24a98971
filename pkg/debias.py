"""
debias.py - DC normalization and dark/non-dark statistical alignment

Lights are normalized by their DC term, then the dark group's
coefficients (indices 1-8) are standardized with dark statistics and
re-expressed with non-dark statistics. Non-dark items pass through.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

import config
from sh_lighting import PreconditionError, ShCoeffs
from skin_tone import SkinTone

logger = logging.getLogger(__name__)

HIGHER = slice(1, config.SH_COUNT)
HIGHER_COUNT = config.SH_COUNT - 1
# Relative distance difference under which a point is equally near both centroids
TIE_RTOL = 1e-9


class DegenerateLightError(ValueError):
    """A light whose DC term is too close to zero to normalize by"""


class InsufficientGroupError(ValueError):
    """Fewer than two dark or two non-dark items"""


# ═══════════════════════════════════════════════════════════════════
# 📦 DATA CLASSES
# ═══════════════════════════════════════════════════════════════════

def _unit_dc_values(values) -> Tuple[float, ...]:
    values = tuple(float(v) for v in values)
    if len(values) != config.SH_COUNT:
        raise PreconditionError(f"expected {config.SH_COUNT} coefficients, got {len(values)}")
    if values[0] != 1.0:
        raise PreconditionError(f"DC-normalized coefficients have c[0] = 1, got {values[0]}")
    if not all(math.isfinite(v) for v in values):
        raise PreconditionError("coefficients must be finite")
    return values


@dataclass(frozen=True)
class NormalizedCoeffs:
    """l / l[0]"""
    c: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'c', _unit_dc_values(self.c))

    def as_array(self) -> np.ndarray:
        return np.array(self.c)


@dataclass(frozen=True)
class AlignedCoeffs:
    """Normalized coefficients after dark-to-non-dark alignment"""
    c: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'c', _unit_dc_values(self.c))

    def as_array(self) -> np.ndarray:
        return np.array(self.c)


def _vector8(values, name: str) -> Tuple[float, ...]:
    values = tuple(float(v) for v in values)
    if len(values) != HIGHER_COUNT or not all(math.isfinite(v) for v in values):
        raise PreconditionError(f"{name} needs {HIGHER_COUNT} finite values")
    return values


@dataclass(frozen=True)
class AlignmentStats:
    """Per-index mean/std (indices 1-8) of the dark and non-dark groups"""
    mu_d: Tuple[float, ...]
    sigma_d: Tuple[float, ...]
    mu_nd: Tuple[float, ...]
    sigma_nd: Tuple[float, ...]
    n_d: int
    n_nd: int

    def __post_init__(self):
        for name in ('mu_d', 'sigma_d', 'mu_nd', 'sigma_nd'):
            object.__setattr__(self, name, _vector8(getattr(self, name), name))
        if min(self.sigma_d + self.sigma_nd) < config.SIGMA_FLOOR:
            raise PreconditionError(f"standard deviations must be >= {config.SIGMA_FLOOR}")
        if self.n_d < 2 or self.n_nd < 2:
            raise InsufficientGroupError("alignment statistics need >= 2 items per group")

    def to_dict(self) -> dict:
        return {
            'schema': config.SCHEMA_VERSION,
            'mu_d': list(self.mu_d),
            'sigma_d': list(self.sigma_d),
            'mu_nd': list(self.mu_nd),
            'sigma_nd': list(self.sigma_nd),
            'n_d': self.n_d,
            'n_nd': self.n_nd,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'AlignmentStats':
        if data.get('schema') != config.SCHEMA_VERSION:
            raise PreconditionError(f"unsupported alignment stats schema: {data.get('schema')!r}")
        return cls(data['mu_d'], data['sigma_d'], data['mu_nd'], data['sigma_nd'],
                   int(data['n_d']), int(data['n_nd']))

    def save(self, path: Union[str, Path]):
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write('\n')

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'AlignmentStats':
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class SeparabilityReport:
    centroid_gap: float
    nc_accuracy: float          # balanced: mean of the two recalls
    recall_dark: float
    recall_non_dark: float
    n_dark: int
    n_non_dark: int

    def to_dict(self) -> Dict[str, float]:
        return {
            'centroid_gap': self.centroid_gap,
            'nc_accuracy': self.nc_accuracy,
            'recall_dark': self.recall_dark,
            'recall_non_dark': self.recall_non_dark,
            'n_dark': self.n_dark,
            'n_non_dark': self.n_non_dark,
        }


# ═══════════════════════════════════════════════════════════════════
# ⚖️ NORMALIZATION & ALIGNMENT
# ═══════════════════════════════════════════════════════════════════

def normalize_dc(l: Union[ShCoeffs, NormalizedCoeffs]) -> NormalizedCoeffs:
    """l_n[i] = l[i] / l[0], l_n[0] = 1"""
    values = l.c
    dc = values[0]
    if abs(dc) <= config.DC_EPSILON:
        raise DegenerateLightError(f"DC term {dc} is too close to zero to normalize")
    return NormalizedCoeffs((1.0,) + tuple(v / dc for v in values[1:]))


def _group_moments(rows: List[np.ndarray]) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    n = len(rows)
    means, stds = [], []
    for i in range(HIGHER_COUNT):
        column = [float(row[i]) for row in rows]
        mean = math.fsum(column) / n
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in column) / n)
        means.append(mean)
        stds.append(max(std, config.SIGMA_FLOOR))
    return tuple(means), tuple(stds)


def compute_alignment_stats(corpus: Sequence[Tuple[NormalizedCoeffs, SkinTone]]) -> AlignmentStats:
    """Population mean/std per index 1-8 for dark vs {fair, medium, tan}"""
    dark = [l_n.as_array()[HIGHER] for l_n, tone in corpus if tone.is_dark]
    non_dark = [l_n.as_array()[HIGHER] for l_n, tone in corpus if not tone.is_dark]
    if len(dark) < 2 or len(non_dark) < 2:
        raise InsufficientGroupError(
            f"need >= 2 dark and >= 2 non-dark items, got {len(dark)} and {len(non_dark)}"
        )

    mu_d, sigma_d = _group_moments(dark)
    mu_nd, sigma_nd = _group_moments(non_dark)
    return AlignmentStats(mu_d, sigma_d, mu_nd, sigma_nd, len(dark), len(non_dark))


def align(l_n: NormalizedCoeffs, tone: SkinTone, stats: AlignmentStats) -> AlignedCoeffs:
    """Dark: ((l_n - mu_d) / sigma_d) * sigma_nd + mu_nd on indices 1-8; others unchanged"""
    if not tone.is_dark:
        return AlignedCoeffs(l_n.c)
    higher = np.array(l_n.c[1:])
    aligned = (higher - np.array(stats.mu_d)) / np.array(stats.sigma_d) * np.array(stats.sigma_nd) \
        + np.array(stats.mu_nd)
    return AlignedCoeffs((1.0,) + tuple(aligned))


def unalign(l_nsa: AlignedCoeffs, tone: SkinTone, stats: AlignmentStats) -> NormalizedCoeffs:
    """Inverse of align"""
    if not tone.is_dark:
        return NormalizedCoeffs(l_nsa.c)
    higher = np.array(l_nsa.c[1:])
    restored = (higher - np.array(stats.mu_nd)) / np.array(stats.sigma_nd) * np.array(stats.sigma_d) \
        + np.array(stats.mu_d)
    return NormalizedCoeffs((1.0,) + tuple(restored))


def _fold_assignment(records: Sequence[Tuple[str, object, SkinTone]], folds: int) -> Dict[int, int]:
    """Record index -> fold, round-robin in id order"""
    order = sorted(range(len(records)), key=lambda k: records[k][0])
    return {k: rank % folds for rank, k in enumerate(order)}


def cross_fit_align(records: Sequence[Tuple[str, NormalizedCoeffs, SkinTone]],
                    folds: int = 2) -> List[AlignedCoeffs]:
    """
    Out-of-fold alignment, returned in input order

    Items go to folds round-robin in id order; each fold is aligned with
    statistics computed on the remaining folds.
    """
    if folds < 2:
        raise PreconditionError("cross-fitting needs at least 2 folds")

    fold_of = _fold_assignment(records, folds)
    aligned: List[AlignedCoeffs] = [None] * len(records)
    for fold in range(folds):
        training = [(l_n, tone) for k, (_, l_n, tone) in enumerate(records) if fold_of[k] != fold]
        stats = compute_alignment_stats(training)
        for k, (_, l_n, tone) in enumerate(records):
            if fold_of[k] == fold:
                aligned[k] = align(l_n, tone, stats)
    return aligned


# ═══════════════════════════════════════════════════════════════════
# 🔍 DIAGNOSTICS
# ═══════════════════════════════════════════════════════════════════

def _feature_matrix(vectors: Sequence) -> np.ndarray:
    features = np.array([np.asarray(v, dtype=np.float64) for v in vectors])
    if features.ndim != 2 or not np.all(np.isfinite(features)):
        raise PreconditionError("separability needs equal-length finite vectors")
    # Full SH vectors are compared on indices 1-8; anything else (e.g. 2-d embeddings) as is
    return features[:, HIGHER] if features.shape[1] == config.SH_COUNT else features


def _centroid_hits(points: np.ndarray, own_centroid: np.ndarray, other_centroid: np.ndarray) -> np.ndarray:
    """1 when nearer the own centroid, 0.5 on a tie, 0 otherwise"""
    to_own = np.linalg.norm(points - own_centroid, axis=1)
    to_other = np.linalg.norm(points - other_centroid, axis=1)
    tie = np.isclose(to_own, to_other, rtol=TIE_RTOL, atol=0.0)
    return np.where(tie, 0.5, (to_own < to_other).astype(np.float64))


def _loo_recall(own: np.ndarray, other_centroid: np.ndarray) -> float:
    n = len(own)
    loo_centroids = (own.sum(axis=0) - own) / (n - 1)
    return float(np.mean(_centroid_hits(own, loo_centroids, other_centroid)))


def _centroid_gap(dark: np.ndarray, non_dark: np.ndarray) -> float:
    """Centroid distance in units of the pooled per-dimension std"""
    n = len(dark) + len(non_dark)
    pooled_var = (len(dark) * dark.var(axis=0) + len(non_dark) * non_dark.var(axis=0)) / n
    scale = max(float(np.mean(np.sqrt(pooled_var))), config.SIGMA_FLOOR)
    return float(np.linalg.norm(dark.mean(axis=0) - non_dark.mean(axis=0))) / scale


def separability(corpus: Sequence[Tuple[object, SkinTone]]) -> SeparabilityReport:
    """
    Dark vs non-dark leave-one-out nearest-centroid accuracy and centroid gap

    nc_accuracy is balanced (mean per-group recall), so 0.5 means the groups
    are indistinguishable whatever their sizes. Coefficients aligned with
    statistics of the same corpus are scored by aligned_separability.
    """
    if not corpus:
        raise InsufficientGroupError("separability of an empty corpus")
    features = _feature_matrix([v for v, _ in corpus])
    is_dark = np.array([tone.is_dark for _, tone in corpus])
    dark, non_dark = features[is_dark], features[~is_dark]
    if len(dark) < 2 or len(non_dark) < 2:
        raise InsufficientGroupError(
            f"separability needs >= 2 items per group, got {len(dark)} dark and {len(non_dark)} non-dark"
        )

    recall_dark = _loo_recall(dark, non_dark.mean(axis=0))
    recall_non_dark = _loo_recall(non_dark, dark.mean(axis=0))
    return SeparabilityReport(
        centroid_gap=_centroid_gap(dark, non_dark),
        nc_accuracy=(recall_dark + recall_non_dark) / 2.0,
        recall_dark=recall_dark,
        recall_non_dark=recall_non_dark,
        n_dark=len(dark),
        n_non_dark=len(non_dark),
    )


def aligned_separability(records: Sequence[Tuple[str, NormalizedCoeffs, SkinTone]],
                         folds: int = 2) -> SeparabilityReport:
    """
    Separability left after aligning a corpus with its own statistics

    Scored out of fold: per fold, statistics come from the training folds,
    the training items aligned with them give both centroids, and the
    held-out items, aligned with the same statistics, are classified against
    those centroids. The centroid gap is that of the whole corpus aligned
    with its own statistics.

    Leave-one-out scores of vectors already aligned in-sample sit below
    chance: alignment puts each dark item's leave-one-out centroid on the
    far side of the non-dark centroid.
    """
    if folds < 2:
        raise PreconditionError("out-of-fold scoring needs at least 2 folds")
    is_dark = np.array([tone.is_dark for _, _, tone in records], dtype=bool)
    n_dark = int(is_dark.sum())
    n_non_dark = len(records) - n_dark
    if n_dark < 2 or n_non_dark < 2:
        raise InsufficientGroupError(
            f"separability needs >= 2 items per group, got {n_dark} dark and {n_non_dark} non-dark"
        )

    def aligned_rows(indices: List[int], stats: AlignmentStats) -> np.ndarray:
        rows = [align(records[k][1], records[k][2], stats).as_array()[HIGHER] for k in indices]
        return np.array(rows, dtype=np.float64).reshape(-1, HIGHER_COUNT)

    fold_of = _fold_assignment(records, folds)
    dark_hits, non_dark_hits = [], []
    for fold in range(folds):
        training = [k for k in range(len(records)) if fold_of[k] != fold]
        held_out = [k for k in range(len(records)) if fold_of[k] == fold]
        stats = compute_alignment_stats([(records[k][1], records[k][2]) for k in training])

        train_rows, test_rows = aligned_rows(training, stats), aligned_rows(held_out, stats)
        train_dark, test_dark = is_dark[training], is_dark[held_out]
        mu_d, mu_nd = train_rows[train_dark].mean(axis=0), train_rows[~train_dark].mean(axis=0)
        dark_hits.append(_centroid_hits(test_rows[test_dark], mu_d, mu_nd))
        non_dark_hits.append(_centroid_hits(test_rows[~test_dark], mu_nd, mu_d))

    own_stats = compute_alignment_stats([(l_n, tone) for _, l_n, tone in records])
    in_sample = aligned_rows(list(range(len(records))), own_stats)
    recall_dark = float(np.concatenate(dark_hits).mean())
    recall_non_dark = float(np.concatenate(non_dark_hits).mean())
    logger.debug(f"Out-of-fold aligned recalls: dark {recall_dark:.3f}, non-dark {recall_non_dark:.3f}")
    return SeparabilityReport(
        centroid_gap=_centroid_gap(in_sample[is_dark], in_sample[~is_dark]),
        nc_accuracy=(recall_dark + recall_non_dark) / 2.0,
        recall_dark=recall_dark,
        recall_non_dark=recall_non_dark,
        n_dark=n_dark,
        n_non_dark=n_non_dark,
    )
