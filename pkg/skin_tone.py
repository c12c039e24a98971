"""
skin_tone.py - Skin tone classes, ITA classification and tone metrics

Classifies facial pixels into {fair, medium, tan, dark} with the
Individual Typology Angle, ITA = atan2(L* - 50, b*) in degrees, computed
on the masked mean color in CIELAB (D65). Also provides the consistency
score between soft score vectors, KL divergence between tone
distributions and ingestion of externally computed label files.

Label file format:
    id,class
    img7,dark
"""

import csv
import io
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Dict, Iterable, Tuple, Union

import numpy as np

import config
from sh_lighting import ImagePlane, PreconditionError

if TYPE_CHECKING:
    from magnitude_scaling import FaceMask

logger = logging.getLogger(__name__)


class UnknownSkinToneError(ValueError):
    """A class string outside {fair, medium, tan, dark}"""


class DuplicateIdError(ValueError):
    """An id appears twice in a label or coefficient file"""


class LabelFormatError(ValueError):
    """A label file row or header is malformed"""


class EmptyMaskError(ValueError):
    """A face mask selects no pixels"""


# ═══════════════════════════════════════════════════════════════════
# 📦 DATA CLASSES
# ═══════════════════════════════════════════════════════════════════

class SkinTone(Enum):
    """The four skin tone classes, in fixed score order"""
    FAIR = 'fair'
    MEDIUM = 'medium'
    TAN = 'tan'
    DARK = 'dark'

    @classmethod
    def from_string(cls, value: str) -> 'SkinTone':
        """Parse a lowercase class name, rejecting anything else"""
        try:
            return cls(value)
        except ValueError:
            raise UnknownSkinToneError(f"unknown skin tone class: {value!r}") from None

    @property
    def index(self) -> int:
        return ALL_TONES.index(self)

    @property
    def is_dark(self) -> bool:
        return self is SkinTone.DARK


ALL_TONES = tuple(SkinTone)


@dataclass(frozen=True)
class SkinToneScore:
    """Soft scores in the order (fair, medium, tan, dark)"""
    scores: Tuple[float, float, float, float]

    def __post_init__(self):
        values = tuple(float(v) for v in self.scores)
        if len(values) != len(ALL_TONES):
            raise PreconditionError("a skin tone score has exactly 4 entries")
        if not all(math.isfinite(v) and v >= 0.0 for v in values):
            raise PreconditionError("skin tone scores must be finite and non-negative")
        if not any(values):
            raise PreconditionError("skin tone scores cannot all be zero")
        object.__setattr__(self, 'scores', values)

    def as_array(self) -> np.ndarray:
        return np.array(self.scores)

    def argmax(self) -> SkinTone:
        return ALL_TONES[int(np.argmax(self.as_array()))]

    def to_json(self) -> list:
        return list(self.scores)


@dataclass(frozen=True)
class ToneDistribution:
    """Categorical distribution over the four classes"""
    p: Tuple[float, float, float, float]

    def __post_init__(self):
        values = tuple(float(v) for v in self.p)
        if len(values) != len(ALL_TONES) or any(v < 0.0 or not math.isfinite(v) for v in values):
            raise PreconditionError("a tone distribution has 4 non-negative entries")
        if abs(math.fsum(values) - 1.0) > 1e-9:
            raise PreconditionError("a tone distribution must sum to 1")
        object.__setattr__(self, 'p', values)

    def to_dict(self) -> Dict[str, float]:
        return {tone.value: p for tone, p in zip(ALL_TONES, self.p)}


# ═══════════════════════════════════════════════════════════════════
# 🎨 COLORIMETRY
# ═══════════════════════════════════════════════════════════════════

# Linear sRGB (D65) -> XYZ with Yn = 1
_RGB_TO_XYZ = np.array([
    [0.4124, 0.3576, 0.1805],
    [0.2126, 0.7152, 0.0722],
    [0.0193, 0.1192, 0.9505],
])
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)

_LAB_DELTA = 6.0 / 29.0


def _lab_f(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return np.where(t > _LAB_DELTA ** 3, np.cbrt(t), t / (3.0 * _LAB_DELTA ** 2) + 4.0 / 29.0)


def _lab_f_inv(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    return np.where(f > _LAB_DELTA, f ** 3, 3.0 * _LAB_DELTA ** 2 * (f - 4.0 / 29.0))


def linear_rgb_to_lab(rgb: Iterable[float]) -> Tuple[float, float, float]:
    """Linear RGB in [0, 1] -> (L*, a*, b*)"""
    xyz = _RGB_TO_XYZ @ np.asarray(rgb, dtype=np.float64)
    fx, fy, fz = _lab_f(xyz / np.array(config.D65_WHITE))
    return float(116.0 * fy - 16.0), float(500.0 * (fx - fy)), float(200.0 * (fy - fz))


def lab_to_linear_rgb(L: float, a: float, b: float) -> np.ndarray:
    fy = (L + 16.0) / 116.0
    f = np.array([fy + a / 500.0, fy, fy - b / 200.0])
    xyz = _lab_f_inv(f) * np.array(config.D65_WHITE)
    return _XYZ_TO_RGB @ xyz


def ita_angle(L: float, b: float) -> float:
    """Individual Typology Angle in degrees"""
    return math.degrees(math.atan2(L - 50.0, b))


def tone_from_ita(ita: float) -> SkinTone:
    """Hard class: fair > 41, medium (19, 41], tan (-30, 19], dark <= -30"""
    upper, middle, lower = config.ITA_THRESHOLDS
    if ita > upper:
        return SkinTone.FAIR
    if ita > middle:
        return SkinTone.MEDIUM
    if ita > lower:
        return SkinTone.TAN
    return SkinTone.DARK


def _class_intervals() -> Tuple[Tuple[float, float], ...]:
    upper, middle, lower = config.ITA_THRESHOLDS
    return ((upper, math.inf), (middle, upper), (lower, middle), (-math.inf, lower))


def soft_scores(ita: float) -> SkinToneScore:
    """
    Softmax of -d/10, d = angular distance from ITA to each class interval

    The interval containing ITA has d = 0, so the argmax is the hard class.
    Exactly on a threshold the two neighbouring classes tie.
    """
    distances = np.array([max(0.0, lo - ita, ita - hi) for lo, hi in _class_intervals()])
    logits = -distances / config.ITA_SOFTNESS
    weights = np.exp(logits - logits.max())
    return SkinToneScore(tuple(weights / weights.sum()))


# ═══════════════════════════════════════════════════════════════════
# 🔍 CLASSIFICATION
# ═══════════════════════════════════════════════════════════════════

def masked_mean_lab(img: ImagePlane, mask: 'FaceMask') -> Tuple[float, float, float]:
    """CIELAB of the masked mean color of a gamma-encoded RGB image"""
    if img.channels != 3:
        raise PreconditionError("skin tone classification needs an RGB image")
    if img.is_linear:
        raise PreconditionError("skin tone classification expects a gamma-encoded image")
    if mask.bits.shape != (img.height, img.width):
        raise PreconditionError("mask and image sizes differ")
    if not mask.bits.any():
        raise EmptyMaskError("face mask selects no pixels")

    mean_encoded = img.pixels[mask.bits].mean(axis=0)
    linear = np.clip(mean_encoded, 0.0, 1.0) ** img.gamma
    return linear_rgb_to_lab(linear)


def classify_ita(img: ImagePlane, mask: 'FaceMask') -> Tuple[SkinTone, SkinToneScore]:
    """Hard class and soft scores from the ITA of the masked facial pixels"""
    L, _, b = masked_mean_lab(img, mask)
    ita = ita_angle(L, b)
    return tone_from_ita(ita), soft_scores(ita)


# ═══════════════════════════════════════════════════════════════════
# 📊 METRICS
# ═══════════════════════════════════════════════════════════════════

def consistency_score(a: SkinToneScore, b: SkinToneScore) -> float:
    """Cosine similarity between two score vectors, 1 = identical tone profile"""
    va, vb = a.as_array(), b.as_array()
    cosine = float(np.dot(va, vb) / (np.linalg.norm(va) * np.linalg.norm(vb)))
    return min(1.0, max(0.0, cosine))


def consistency_stats(values: Iterable[float]) -> Dict[str, float]:
    """Avg / population std / minimum of a set of consistency scores"""
    values = list(values)
    if not values:
        raise PreconditionError("no consistency scores to aggregate")
    mean = math.fsum(values) / len(values)
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))
    return {'avg': mean, 'std': std, 'min': min(values), 'count': len(values)}


def tone_distribution(labels: Iterable[SkinTone]) -> ToneDistribution:
    counts = np.zeros(len(ALL_TONES))
    for tone in labels:
        counts[tone.index] += 1
    if counts.sum() == 0:
        raise PreconditionError("cannot build a distribution from no labels")
    p = counts / counts.sum()
    p[-1] = 1.0 - math.fsum(p[:-1])
    return ToneDistribution(tuple(p))


def _smoothed(p: Tuple[float, ...]) -> np.ndarray:
    values = np.array(p) + config.KL_EPSILON
    return values / values.sum()


def kl_divergence(p: ToneDistribution, q: ToneDistribution) -> float:
    """Sum p ln(p/q), natural log, both sides smoothed with eps = 1e-6"""
    ps, qs = _smoothed(p.p), _smoothed(q.p)
    return max(0.0, math.fsum(float(a * math.log(a / b)) for a, b in zip(ps, qs)))


# ═══════════════════════════════════════════════════════════════════
# 🏷️ LABEL FILES
# ═══════════════════════════════════════════════════════════════════

class LabelCSVParser:
    """Parser for `id,class` label files; rejects rather than repairs"""

    HEADER = ['id', 'class']

    def __init__(self):
        self.labels: Dict[str, SkinTone] = {}

    def parse_bytes(self, file_content: bytes, encoding: str = 'utf-8') -> Dict[str, SkinTone]:
        self.labels = {}
        try:
            text_content = file_content.decode(encoding)
        except UnicodeDecodeError as e:
            raise LabelFormatError(f"label file is not valid {encoding}: {e}") from e

        reader = csv.reader(io.StringIO(text_content))
        header = next(reader, None)
        if header is None or [cell.strip() for cell in header] != self.HEADER:
            raise LabelFormatError(f"label file header must be {','.join(self.HEADER)}")

        for row_num, row in enumerate(reader, start=2):
            if not row or all(cell.strip() == '' for cell in row):
                continue
            self._parse_row(row, row_num)

        logger.debug(f"Parsed {len(self.labels)} labels")
        return self.labels

    def _parse_row(self, row, row_num: int):
        if len(row) != 2:
            raise LabelFormatError(f"row {row_num}: expected 2 columns (id, class), got {len(row)}")

        item_id, class_name = row[0].strip(), row[1].strip()
        if not item_id:
            raise LabelFormatError(f"row {row_num}: empty id")
        if item_id in self.labels:
            raise DuplicateIdError(f"row {row_num}: duplicate id {item_id!r}")
        self.labels[item_id] = SkinTone.from_string(class_name)


def ingest_labels(source: Union[str, Path, bytes]) -> Dict[str, SkinTone]:
    """Parse a label file (path or raw bytes) into {id: SkinTone}"""
    content = source if isinstance(source, bytes) else Path(source).read_bytes()
    return LabelCSVParser().parse_bytes(content)


def write_labels(labels: Dict[str, SkinTone], path: Union[str, Path]):
    """Write labels sorted by id"""
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(LabelCSVParser.HEADER)
        for item_id in sorted(labels):
            writer.writerow([item_id, labels[item_id].value])
