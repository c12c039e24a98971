"""
synthetic_faces.py - Seeded synthetic portrait corpus

Sphere proxies with a per-class albedo (gray level times an RGB tint)
lit by lights drawn independently of the class, rendered, captured
through the sensor model and packaged with their ground truth.

Every item draws from its own seed sequence keyed by
(master_seed, class index, item index), so any item can be regenerated
on its own and the corpus does not depend on the worker count.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

import config
from image_io import read_mask, read_png, write_mask, write_png
from light_estimation import SensorConfig, simulate_capture
from magnitude_scaling import FaceMask
from parallel import process_parallel
from sh_lighting import (
    LUMA_WEIGHTS, ImagePlane, NormalMap, PreconditionError, ShCoeffs, render, shading_map,
    sphere_normal_map,
)
from skin_tone import ALL_TONES, SkinTone, ingest_labels, lab_to_linear_rgb, linear_rgb_to_lab, write_labels

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


# ═══════════════════════════════════════════════════════════════════
# 🎨 ALBEDO MODEL
# ═══════════════════════════════════════════════════════════════════

def albedo_view_shading(view_dc: float = config.ALBEDO_VIEW_DC) -> float:
    """Constant shading of the ambient reference light"""
    return math.pi * config.SH_Y00 * view_dc


def derive_tint(mean_albedo: float, a_star: float, b_star: float,
                view_dc: float = config.ALBEDO_VIEW_DC) -> Tuple[float, float, float]:
    """
    RGB tint with unit luminance whose albedo view hits (a*, b*)

    The target L* is that of the class mean albedo seen under the
    ambient reference light.
    """
    L, _, _ = linear_rgb_to_lab([mean_albedo * albedo_view_shading(view_dc)] * 3)
    rgb = lab_to_linear_rgb(L, a_star, b_star)
    luminance = float(rgb @ np.array(LUMA_WEIGHTS))
    tint = rgb / luminance
    if np.any(tint <= 0.0):
        raise PreconditionError(f"chroma target ({a_star}, {b_star}) is outside the RGB gamut")
    return tuple(float(v) for v in tint)


@dataclass
class ClassAlbedoModel:
    """Per-class mean reflectance, relative spread and RGB tint"""
    means: Dict[SkinTone, float] = field(
        default_factory=lambda: {SkinTone(k): v for k, v in config.ALBEDO_MEANS.items()}
    )
    relative_std: float = config.ALBEDO_RELATIVE_STD
    bounds: Tuple[float, float] = config.ALBEDO_RANGE
    tints: Dict[SkinTone, Tuple[float, float, float]] = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.bounds
        if not 0.0 < lo < hi < 1.0:
            raise PreconditionError("albedo bounds must satisfy 0 < lo < hi < 1")
        for tone in ALL_TONES:
            if not lo < self.means[tone] < hi:
                raise PreconditionError(f"mean albedo of {tone.value} lies outside the bounds")
            if tone not in self.tints:
                self.tints[tone] = derive_tint(
                    self.means[tone], config.TONE_A_STAR, config.TONE_B_STAR[tone.value]
                )


@dataclass(frozen=True)
class AlbedoSample:
    value: float
    tint: Tuple[float, float, float]

    @property
    def rgb(self) -> Tuple[float, float, float]:
        return tuple(float(min(1.0, self.value * t)) for t in self.tint)


def sample_albedo(tone: SkinTone, model: ClassAlbedoModel, seed) -> AlbedoSample:
    """Gaussian around the class mean, redrawn until it falls strictly inside the bounds"""
    rng = np.random.default_rng(seed)
    mean = model.means[tone]
    lo, hi = model.bounds
    while True:
        value = rng.normal(mean, model.relative_std * mean)
        if lo < value < hi:
            return AlbedoSample(float(value), model.tints[tone])


# ═══════════════════════════════════════════════════════════════════
# 💡 LIGHT PRIOR
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class LightPrior:
    """Class-independent environment prior"""
    dc_range: Tuple[float, float] = config.LIGHT_DC_RANGE
    band1_range: Tuple[float, float] = config.LIGHT_BAND1_RANGE
    band2_std: float = config.LIGHT_BAND2_STD

    def __post_init__(self):
        if not 0.0 < self.dc_range[0] <= self.dc_range[1]:
            raise PreconditionError("DC range must be positive")
        if not 0.0 <= self.band1_range[0] <= self.band1_range[1]:
            raise PreconditionError("band-1 range must be non-negative")
        if self.band2_std < 0.0:
            raise PreconditionError("band-2 std must be >= 0")


def sample_light(prior: LightPrior, seed) -> ShCoeffs:
    """Ambient DC, one dominant direction in band 1, Gaussian band 2"""
    rng = np.random.default_rng(seed)
    dc = rng.uniform(*prior.dc_range)

    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    x, y, z = direction
    strength = rng.uniform(*prior.band1_range) * dc

    band2 = rng.normal(0.0, prior.band2_std * dc, size=5)
    return ShCoeffs((dc, strength * y, strength * z, strength * x) + tuple(band2))


# ═══════════════════════════════════════════════════════════════════
# 🧑 CORPUS
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class LabeledSample:
    """One corpus item with its ground truth"""
    id: str
    tone: SkinTone
    light: ShCoeffs
    albedo: AlbedoSample
    image: ImagePlane               # gamma-encoded capture
    mask: FaceMask
    albedo_view: ImagePlane         # albedo under the ambient reference light, noise free
    estimate: Optional[ShCoeffs] = None


def item_id(tone: SkinTone, index: int) -> str:
    return f"{tone.value}_{index:04d}"


def item_seeds(master_seed: int, class_index: int, item_index: int) -> Tuple[int, int, int]:
    """Independent (albedo, light, noise) seeds of one item"""
    root = np.random.SeedSequence(master_seed, spawn_key=(class_index, item_index))
    return tuple(int(child.generate_state(1, dtype=np.uint64)[0]) for child in root.spawn(3))


def albedo_plane(albedo: AlbedoSample, normals: NormalMap) -> ImagePlane:
    pixels = np.zeros((normals.height, normals.width, 3))
    pixels[normals.valid] = albedo.rgb
    return ImagePlane.linear(pixels)


def capture_albedo_view(albedo: AlbedoSample, normals: NormalMap, gamma: float = config.GAMMA) -> ImagePlane:
    view = render(normals, albedo_plane(albedo, normals), ShCoeffs.ambient(config.ALBEDO_VIEW_DC))
    return simulate_capture(view, SensorConfig(bit_depth=8, noise_sigma=0.0), gamma)


def default_mask(normals: NormalMap, light: ShCoeffs) -> FaceMask:
    """Silhouette pixels shaded above the 25th percentile"""
    return FaceMask.from_shading(shading_map(normals, light), normals.valid)


def make_sample(tone: SkinTone, index: int, normals: NormalMap, sensor: SensorConfig, master_seed: int,
                model: ClassAlbedoModel, prior: LightPrior, gamma: float = config.GAMMA) -> LabeledSample:
    albedo_seed, light_seed, noise_seed = item_seeds(master_seed, tone.index, index)
    albedo = sample_albedo(tone, model, albedo_seed)
    light = sample_light(prior, light_seed)

    relit = render(normals, albedo_plane(albedo, normals), light)
    capture = simulate_capture(relit, sensor.with_seed(noise_seed), gamma)
    return LabeledSample(
        id=item_id(tone, index),
        tone=tone,
        light=light,
        albedo=albedo,
        image=capture,
        mask=default_mask(normals, light),
        albedo_view=capture_albedo_view(albedo, normals, gamma),
    )


def generate_corpus(n_per_class: int, resolution: int, sensor: SensorConfig, master_seed: int,
                    model: Optional[ClassAlbedoModel] = None, prior: Optional[LightPrior] = None,
                    workers: int = 1, gamma: float = config.GAMMA) -> List[LabeledSample]:
    """n_per_class items of every class, class-major order"""
    if n_per_class < 1:
        raise PreconditionError("n_per_class must be >= 1")
    if resolution < config.MIN_CORPUS_RESOLUTION:
        raise PreconditionError(f"resolution must be >= {config.MIN_CORPUS_RESOLUTION}")

    model = model or ClassAlbedoModel()
    prior = prior or LightPrior()
    normals = sphere_normal_map(resolution)
    jobs = [(tone, i) for tone in ALL_TONES for i in range(n_per_class)]

    samples = process_parallel(
        lambda job: make_sample(job[0], job[1], normals, sensor, master_seed, model, prior, gamma),
        jobs, workers, label=lambda job: item_id(*job),
    )
    logger.info(f"Generated {len(samples)} samples at {resolution}x{resolution}")
    return samples


# ═══════════════════════════════════════════════════════════════════
# 💾 CORPUS ON DISK
# ═══════════════════════════════════════════════════════════════════

TRUTH_FILE = 'truth.json'
LABELS_FILE = 'labels.csv'


@dataclass
class CorpusManifest:
    """Contents of truth.json"""
    resolution: int
    gamma: float
    sensor: SensorConfig
    master_seed: int
    items: Dict[str, dict]

    def to_dict(self) -> dict:
        return {
            'schema': config.SCHEMA_VERSION,
            'resolution': self.resolution,
            'gamma': self.gamma,
            'sensor': {'bit_depth': self.sensor.bit_depth, 'noise_sigma': self.sensor.noise_sigma},
            'master_seed': self.master_seed,
            'items': self.items,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'CorpusManifest':
        if data.get('schema') != config.SCHEMA_VERSION:
            raise PreconditionError(f"unsupported corpus schema: {data.get('schema')!r}")
        sensor = SensorConfig(int(data['sensor']['bit_depth']), float(data['sensor']['noise_sigma']),
                              int(data['master_seed']))
        return cls(int(data['resolution']), float(data['gamma']), sensor, int(data['master_seed']),
                   data['items'])

    def light_of(self, sample_id: str) -> ShCoeffs:
        return ShCoeffs(self.items[sample_id]['light'])

    def albedo_of(self, sample_id: str) -> float:
        return float(self.items[sample_id]['albedo'])


def write_corpus(samples: List[LabeledSample], out_dir: PathLike, resolution: int, sensor: SensorConfig,
                 master_seed: int, gamma: float = config.GAMMA, workers: int = 1) -> Path:
    """images/, masks/, albedo/, truth.json and labels.csv under out_dir"""
    out_dir = Path(out_dir)
    for sub in ('images', 'masks', 'albedo'):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    def write_item(sample: LabeledSample):
        write_png(sample.image, out_dir / 'images' / f"{sample.id}.png")
        write_mask(sample.mask, out_dir / 'masks' / f"{sample.id}.png")
        write_png(sample.albedo_view, out_dir / 'albedo' / f"{sample.id}.png")

    process_parallel(write_item, samples, workers, label=lambda s: s.id)

    manifest = CorpusManifest(resolution, gamma, sensor, master_seed, {
        s.id: {
            'class': s.tone.value,
            'light': s.light.to_list(),
            'albedo': s.albedo.value,
            'tint': list(s.albedo.tint),
        }
        for s in samples
    })
    with open(out_dir / TRUTH_FILE, 'w', encoding='utf-8') as f:
        json.dump(manifest.to_dict(), f, indent=2, sort_keys=True)
        f.write('\n')
    write_labels({s.id: s.tone for s in samples}, out_dir / LABELS_FILE)

    logger.info(f"Wrote {len(samples)} samples to {out_dir}")
    return out_dir


def read_manifest(corpus_dir: PathLike) -> CorpusManifest:
    with open(Path(corpus_dir) / TRUTH_FILE, 'r', encoding='utf-8') as f:
        return CorpusManifest.from_dict(json.load(f))


def read_corpus(corpus_dir: PathLike, workers: int = 1) -> Tuple[CorpusManifest, List[LabeledSample]]:
    """Load a written corpus back, items sorted by id"""
    corpus_dir = Path(corpus_dir)
    manifest = read_manifest(corpus_dir)
    labels = ingest_labels(corpus_dir / LABELS_FILE)
    if set(labels) != set(manifest.items):
        raise PreconditionError(f"{LABELS_FILE} and {TRUTH_FILE} list different ids")

    def read_item(sample_id: str) -> LabeledSample:
        entry = manifest.items[sample_id]
        if SkinTone.from_string(entry['class']) is not labels[sample_id]:
            raise PreconditionError(f"class of {sample_id} differs between {LABELS_FILE} and {TRUTH_FILE}")
        return LabeledSample(
            id=sample_id,
            tone=labels[sample_id],
            light=manifest.light_of(sample_id),
            albedo=AlbedoSample(float(entry['albedo']), tuple(entry['tint'])),
            image=read_png(corpus_dir / 'images' / f"{sample_id}.png", manifest.gamma),
            mask=read_mask(corpus_dir / 'masks' / f"{sample_id}.png"),
            albedo_view=read_png(corpus_dir / 'albedo' / f"{sample_id}.png", manifest.gamma),
        )

    samples = process_parallel(read_item, sorted(labels), workers)
    return manifest, samples
