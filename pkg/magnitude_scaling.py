"""
magnitude_scaling.py - Illumination magnitude and gamma-domain scaling

m(I) is the mean of the tonemapped facial pixels. The scale factor of an
image is its magnitude over the mean magnitude of its skin tone class,
and a relit image is scaled in the linear domain: (I^gamma * s)^(1/gamma).
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from sh_lighting import DimensionMismatchError, ImagePlane, PreconditionError
from skin_tone import ALL_TONES, EmptyMaskError, SkinTone

logger = logging.getLogger(__name__)


class MissingClassError(LookupError):
    """A lookup against a skin tone class with no magnitude statistics"""


# ═══════════════════════════════════════════════════════════════════
# 📦 DATA CLASSES
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class FaceMask:
    """Facial pixel set, one bool per pixel"""
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise PreconditionError("a face mask is a 2-d grid")
        bits.setflags(write=False)
        object.__setattr__(self, 'bits', bits)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, FaceMask) and np.array_equal(self.bits, other.bits)

    @classmethod
    def from_shading(cls, shading: np.ndarray, valid: np.ndarray,
                     percentile: float = config.MASK_SHADING_PERCENTILE) -> 'FaceMask':
        """Silhouette pixels whose shading is above the given percentile"""
        if shading.shape != valid.shape:
            raise DimensionMismatchError("shading and silhouette sizes differ")
        if not valid.any():
            raise EmptyMaskError("silhouette is empty")
        cutoff = np.percentile(shading[valid], percentile)
        return cls(valid & (shading > cutoff))


@dataclass
class ClassMagnitudes:
    """Per-class mean magnitude over a training corpus"""
    means: Dict[SkinTone, float] = field(default_factory=dict)
    counts: Dict[SkinTone, int] = field(default_factory=dict)
    global_mean: float = 0.0

    def mean_for(self, tone: SkinTone) -> float:
        if self.counts.get(tone, 0) < 1:
            raise MissingClassError(f"no magnitude statistics for class {tone.value}")
        mean = self.means[tone]
        if mean <= 0.0:
            raise PreconditionError(f"class {tone.value} has zero mean magnitude")
        return mean

    def to_dict(self) -> dict:
        return {
            'schema': config.SCHEMA_VERSION,
            'global_mean': self.global_mean,
            'classes': {
                tone.value: {'mean': self.means[tone], 'count': self.counts[tone]}
                for tone in ALL_TONES if tone in self.counts
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'ClassMagnitudes':
        if data.get('schema') != config.SCHEMA_VERSION:
            raise PreconditionError(f"unsupported class magnitudes schema: {data.get('schema')!r}")
        means, counts = {}, {}
        for name, entry in data['classes'].items():
            tone = SkinTone.from_string(name)
            means[tone] = float(entry['mean'])
            counts[tone] = int(entry['count'])
            if counts[tone] >= 1 and not (math.isfinite(means[tone]) and means[tone] > 0.0):
                raise PreconditionError(f"class {name} mean must be finite and positive")
        return cls(means, counts, float(data['global_mean']))

    def save(self, path: Union[str, Path]):
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write('\n')

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'ClassMagnitudes':
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_dict(json.load(f))


# ═══════════════════════════════════════════════════════════════════
# 📏 MAGNITUDE
# ═══════════════════════════════════════════════════════════════════

def illum_magnitude(img: ImagePlane, mask: FaceMask) -> float:
    """Mean tonemapped value over the masked pixels (all channels)"""
    if img.is_linear:
        raise PreconditionError("illumination magnitude is measured on the gamma-encoded image")
    if (mask.height, mask.width) != (img.height, img.width):
        raise DimensionMismatchError("mask and image sizes differ")
    if mask.count == 0:
        raise EmptyMaskError("face mask selects no pixels")
    return math.fsum(img.pixels[mask.bits].ravel()) / img.pixels[mask.bits].size


def class_magnitude_means(corpus: Iterable[Tuple[ImagePlane, FaceMask, SkinTone]]) -> ClassMagnitudes:
    """Per-class and global mean of illum_magnitude"""
    by_class: Dict[SkinTone, List[float]] = {}
    for img, mask, tone in corpus:
        by_class.setdefault(tone, []).append(illum_magnitude(img, mask))
    if not by_class:
        raise PreconditionError("cannot compute class magnitudes of an empty corpus")

    means = {tone: math.fsum(values) / len(values) for tone, values in by_class.items()}
    counts = {tone: len(values) for tone, values in by_class.items()}
    everything = [v for values in by_class.values() for v in values]

    for tone in ALL_TONES:
        if tone not in counts:
            logger.warning(f"No training images for class {tone.value}; lookups against it will fail")
    return ClassMagnitudes(means, counts, math.fsum(everything) / len(everything))


def scale_factor(img: ImagePlane, mask: FaceMask, tone: SkinTone, cm: ClassMagnitudes,
                 per_class: bool = True) -> float:
    """s = m(I) / mean m over the class (or over every class when per_class is False)"""
    reference = cm.mean_for(tone) if per_class else cm.global_mean
    if reference <= 0.0:
        raise PreconditionError("reference magnitude must be positive")
    return illum_magnitude(img, mask) / reference


# ═══════════════════════════════════════════════════════════════════
# 🔆 SCALING
# ═══════════════════════════════════════════════════════════════════

def apply_scale(img: ImagePlane, s: float, gamma: Optional[float] = None) -> ImagePlane:
    """Per pixel (v^gamma * s)^(1/gamma) = v * s^(1/gamma), clamped to [0, 1]"""
    if img.is_linear:
        raise PreconditionError("apply_scale works on gamma-encoded images")
    if not (math.isfinite(s) and s > 0.0):
        raise PreconditionError(f"scale must be positive, got {s}")
    if np.any(img.pixels < 0.0) or np.any(img.pixels > 1.0):
        raise PreconditionError("pixel values must lie in [0, 1]")

    gamma = img.gamma if gamma is None else gamma
    scaled = np.clip(img.pixels * s ** (1.0 / gamma), 0.0, 1.0)
    return ImagePlane.encoded(scaled, img.gamma)


def normalize_magnitude(img: ImagePlane, s: float, gamma: Optional[float] = None) -> ImagePlane:
    """Bring an image to its class mean magnitude: m(result) = m(img) / s"""
    gamma = img.gamma if gamma is None else gamma
    if not (math.isfinite(s) and s > 0.0):
        raise PreconditionError(f"scale must be positive, got {s}")
    return apply_scale(img, s ** (-gamma), gamma)


def sample_training_scales(training: Sequence[Tuple[float, SkinTone]],
                           tones: Sequence[SkinTone], seed: int) -> List[float]:
    """For each tone, the scale factor of a random training image of the same tone"""
    pools: Dict[SkinTone, List[float]] = {}
    for s, tone in training:
        pools.setdefault(tone, []).append(s)

    rng = np.random.default_rng(seed)
    drawn = []
    for tone in tones:
        pool = pools.get(tone)
        if not pool:
            raise MissingClassError(f"no training scale factors for class {tone.value}")
        drawn.append(pool[int(rng.integers(len(pool)))])
    return drawn


# ═══════════════════════════════════════════════════════════════════
# 📊 SPREAD
# ═══════════════════════════════════════════════════════════════════

def _population_std(values: Sequence[float]) -> float:
    mean = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))


def magnitude_std(corpus: Iterable[Tuple[ImagePlane, FaceMask]]) -> float:
    """Population std of illum_magnitude over a corpus"""
    values = [illum_magnitude(img, mask) for img, mask in corpus]
    if len(values) < 2:
        raise PreconditionError("magnitude_std needs at least 2 images")
    return _population_std(values)


def within_class_std(magnitudes: Sequence[float], tones: Sequence[SkinTone]) -> float:
    """Pooled population std of magnitudes around their own class means"""
    if len(magnitudes) != len(tones):
        raise PreconditionError("one tone per magnitude")
    if len(magnitudes) < 2:
        raise PreconditionError("within_class_std needs at least 2 images")

    groups: Dict[SkinTone, List[float]] = {}
    for m, tone in zip(magnitudes, tones):
        groups.setdefault(tone, []).append(m)

    squared = []
    for values in groups.values():
        mean = math.fsum(values) / len(values)
        squared.extend((v - mean) ** 2 for v in values)
    return math.sqrt(math.fsum(squared) / len(squared))
