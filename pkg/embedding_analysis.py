"""
embedding_analysis.py - 2-d views of SH coefficient sets

Exact t-SNE (perplexity-calibrated affinities, gradient descent with
early exaggeration, momentum and adaptive gains), a PCA projection, the
band-0 strip plot and the per-class sampling protocol that feeds them.

All reductions use numpy broadcasting sums, never BLAS matrix products,
so embeddings are bitwise reproducible whatever the thread count.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, TypeVar

import numpy as np

import config
from debias import InsufficientGroupError
from sh_lighting import PreconditionError
from skin_tone import ALL_TONES, SkinTone

logger = logging.getLogger(__name__)

T = TypeVar('T')


class TooFewPointsError(ValueError):
    """Not enough points for the requested embedding"""


# ═══════════════════════════════════════════════════════════════════
# 📦 DATA CLASSES
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class EmbedPoint:
    x: float
    y: float
    label: SkinTone
    id: str

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise PreconditionError(f"{self.id}: embedding coordinates must be finite")


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = config.TSNE_PERPLEXITY
    iterations: int = config.TSNE_ITERATIONS
    learning_rate: float = config.TSNE_LEARNING_RATE
    early_exaggeration: float = config.TSNE_EARLY_EXAGGERATION
    exaggeration_iters: int = config.TSNE_EXAGGERATION_ITERS
    momentum: Tuple[float, float] = config.TSNE_MOMENTUM
    seed: int = config.SEED

    def __post_init__(self):
        if not self.perplexity > 1.0:
            raise PreconditionError("perplexity must be > 1")
        if self.iterations < 1 or self.learning_rate <= 0.0:
            raise PreconditionError("iterations and learning_rate must be positive")


def to_points(coords: np.ndarray, ids: Sequence[str], labels: Sequence[SkinTone]) -> List[EmbedPoint]:
    return [EmbedPoint(float(x), float(y), label, item_id)
            for (x, y), item_id, label in zip(coords, ids, labels)]


# ═══════════════════════════════════════════════════════════════════
# 🔗 AFFINITIES
# ═══════════════════════════════════════════════════════════════════

def _as_matrix(points) -> np.ndarray:
    data = np.array([np.asarray(p, dtype=np.float64) for p in points])
    if data.ndim != 2:
        raise PreconditionError("points must all have the same dimension")
    if not np.all(np.isfinite(data)):
        raise PreconditionError("points must be finite")
    return data


def _squared_distances(data: np.ndarray) -> np.ndarray:
    diff = data[:, None, :] - data[None, :, :]
    return np.sum(diff * diff, axis=2)


def _row_distribution(distances: np.ndarray, beta: float) -> Tuple[np.ndarray, float]:
    """Gaussian conditional for one row (self excluded) and its entropy in nats"""
    shifted = distances - distances.min()
    weights = np.exp(-shifted * beta)
    total = weights.sum()
    p = weights / total
    entropy = math.log(total) + beta * float(np.sum(shifted * p))
    return p, entropy


def conditional_affinities(points, perplexity: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Row-stochastic P(j|i) calibrated by bisection on the precision

    Returns (P, realised perplexity per point). Each row's entropy ends
    within TSNE_TOLERANCE of log(perplexity) unless the step cap is hit.
    """
    data = _as_matrix(points)
    n = len(data)
    if n < 2:
        raise TooFewPointsError("affinities need at least 2 points")

    sq = _squared_distances(data)
    target = math.log(perplexity)
    P = np.zeros((n, n))
    realised = np.zeros(n)
    capped = 0

    for i in range(n):
        others = np.delete(sq[i], i)
        # start near the neighbourhood scale so the search converges within the cap
        beta, beta_lo, beta_hi = 1.0 / max(float(np.median(others)), 1e-12), 0.0, math.inf
        for _ in range(config.TSNE_MAX_BISECTION):
            p, entropy = _row_distribution(others, beta)
            gap = entropy - target
            if abs(gap) <= config.TSNE_TOLERANCE:
                break
            if gap > 0.0:
                beta_lo = beta
                beta = beta * 2.0 if beta_hi == math.inf else (beta + beta_hi) / 2.0
            else:
                beta_hi = beta
                beta = (beta + beta_lo) / 2.0
        else:
            p, entropy = _row_distribution(others, beta)
            capped += 1

        P[i, np.arange(n) != i] = p
        realised[i] = math.exp(entropy)

    if capped:
        logger.warning(f"Perplexity search hit its step cap for {capped} of {n} points")
    return P, realised


def joint_affinities(points, perplexity: float) -> np.ndarray:
    """Symmetrised P = (P(j|i) + P(i|j)) / 2n, sums to 1"""
    conditional, _ = conditional_affinities(points, perplexity)
    return (conditional + conditional.T) / (2.0 * len(conditional))


# ═══════════════════════════════════════════════════════════════════
# 🗺️ EMBEDDINGS
# ═══════════════════════════════════════════════════════════════════

def _gradient(P: np.ndarray, Y: np.ndarray) -> np.ndarray:
    diff = Y[:, None, :] - Y[None, :, :]
    num = 1.0 / (1.0 + np.sum(diff * diff, axis=2))
    np.fill_diagonal(num, 0.0)
    Q = np.maximum(num / num.sum(), np.finfo(np.float64).eps)
    return 4.0 * np.sum(((P - Q) * num)[:, :, None] * diff, axis=1)


def tsne(points, cfg: TsneConfig = TsneConfig()) -> np.ndarray:
    """Exact t-SNE to 2-d, returns (n, 2) coordinates"""
    data = _as_matrix(points)
    n = len(data)
    if n <= 3 * cfg.perplexity:
        raise TooFewPointsError(
            f"t-SNE needs more than 3 x perplexity = {3 * cfg.perplexity:g} points, got {n}; "
            f"lower the perplexity"
        )

    P = joint_affinities(data, cfg.perplexity)
    rng = np.random.default_rng(cfg.seed)
    Y = rng.normal(0.0, config.TSNE_INIT_STD, size=(n, 2))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    early_momentum, late_momentum = cfg.momentum

    for it in range(cfg.iterations):
        exaggerating = it < cfg.exaggeration_iters
        grad = _gradient(P * cfg.early_exaggeration if exaggerating else P, Y)

        steady = update * grad < 0.0
        gains = np.where(steady, gains + 0.2, gains * 0.8)
        gains = np.maximum(gains, config.TSNE_MIN_GAIN)

        momentum = early_momentum if exaggerating else late_momentum
        update = momentum * update - cfg.learning_rate * gains * grad
        Y = Y + update
        Y = Y - Y.mean(axis=0)

    logger.debug(f"t-SNE finished {cfg.iterations} iterations on {n} points")
    return Y


def pca2(points) -> np.ndarray:
    """
    Projection onto the top two principal components

    Each component is signed so its largest-magnitude loading is positive.
    """
    data = _as_matrix(points)
    if len(data) < 2:
        raise TooFewPointsError("PCA needs at least 2 points")

    centered = data - data.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:2]
    for k in range(len(components)):
        lead = np.argmax(np.abs(components[k]))
        if components[k, lead] < 0.0:
            components[k] = -components[k]

    projected = np.sum(centered[:, None, :] * components[None, :, :], axis=2)
    if projected.shape[1] < 2:
        projected = np.hstack([projected, np.zeros((len(data), 2 - projected.shape[1]))])
    return projected


def band0_scatter(values: Sequence[float], seed: int) -> np.ndarray:
    """x = value, y = seeded uniform jitter in [0, 1)"""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise PreconditionError("band-0 scatter needs at least one value")
    jitter = np.random.default_rng(seed).random(values.size)
    return np.column_stack([values, jitter])


# ═══════════════════════════════════════════════════════════════════
# 🎲 SAMPLING & SCORING
# ═══════════════════════════════════════════════════════════════════

def analysis_protocol(corpus: Sequence[Tuple[T, SkinTone]], per_class: int = config.DEFAULT_PER_CLASS,
                      seed: int = config.SEED) -> List[Tuple[T, SkinTone]]:
    """Seeded sample of per_class items from every class, input order kept within a class"""
    if per_class < 1:
        raise PreconditionError("per_class must be >= 1")

    rng = np.random.default_rng(seed)
    sampled = []
    for tone in ALL_TONES:
        pool = [entry for entry in corpus if entry[1] is tone]
        if len(pool) < per_class:
            raise InsufficientGroupError(
                f"class {tone.value} has {len(pool)} items, fewer than {per_class}"
            )
        picks = np.sort(rng.choice(len(pool), size=per_class, replace=False))
        sampled.extend(pool[k] for k in picks)
    return sampled


def nearest_centroid_accuracy(points: np.ndarray, labels: Sequence[SkinTone]) -> float:
    """Share of points whose nearest class centroid is their own class"""
    points = np.asarray(points, dtype=np.float64)
    classes = sorted(set(labels), key=lambda tone: tone.index)
    label_idx = np.array([classes.index(tone) for tone in labels])
    centroids = np.array([points[label_idx == k].mean(axis=0) for k in range(len(classes))])
    distances = np.linalg.norm(points[:, None, :] - centroids[None, :, :], axis=2)
    return float(np.mean(np.argmin(distances, axis=1) == label_idx))
