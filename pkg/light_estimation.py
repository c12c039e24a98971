"""
light_estimation.py - Inverse lighting from shaded pixels

Exact weighted least-squares SH fit, a ridge fit pulled toward a prior
light, the sensor model (gamma, noise, quantization) and the fixed-prior
estimator that stands in for learned single-image light estimators.

The estimator divides every capture by one reference albedo. Subjects
darker than the reference therefore look dimly lit, and the ridge pull
toward the prior ambient light acts hardest on the weakly determined
directions, so DC-normalized coefficients end up tone dependent.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

import config
from sh_lighting import (
    LUMA_WEIGHTS, DimensionMismatchError, ImagePlane, NormalMap, PreconditionError,
    ShCoeffs, UnitNormal, shading_design,
)

logger = logging.getLogger(__name__)


class SingularFitError(RuntimeError):
    """The weighted design matrix does not have full column rank"""


# ═══════════════════════════════════════════════════════════════════
# 📦 DATA CLASSES
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class ShadedSample:
    """One observed pixel: normal, linear radiance, fit weight"""
    normal: UnitNormal
    intensity: float
    weight: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.intensity) and self.intensity >= 0.0):
            raise PreconditionError(f"intensity must be finite and >= 0, got {self.intensity}")
        if not (math.isfinite(self.weight) and self.weight > 0.0):
            raise PreconditionError(f"weight must be finite and > 0, got {self.weight}")


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Array form of a list of ShadedSample"""
    normals: np.ndarray      # (N, 3)
    intensity: np.ndarray    # (N,)
    weight: np.ndarray       # (N,)

    def __post_init__(self):
        n = len(self.intensity)
        if self.normals.shape != (n, 3) or self.weight.shape != (n,):
            raise DimensionMismatchError("normals, intensity and weight must have N rows")
        if not (np.all(np.isfinite(self.intensity)) and np.all(self.intensity >= 0.0)):
            raise PreconditionError("intensities must be finite and >= 0")
        if not (np.all(np.isfinite(self.weight)) and np.all(self.weight > 0.0)):
            raise PreconditionError("weights must be finite and > 0")

    def __len__(self) -> int:
        return len(self.intensity)

    @classmethod
    def from_samples(cls, samples: Sequence[ShadedSample]) -> 'SampleBatch':
        return cls(
            np.array([s.normal.as_array() for s in samples]).reshape(-1, 3),
            np.array([s.intensity for s in samples], dtype=np.float64),
            np.array([s.weight for s in samples], dtype=np.float64),
        )

    @classmethod
    def unweighted(cls, normals: np.ndarray, intensity: np.ndarray) -> 'SampleBatch':
        intensity = np.asarray(intensity, dtype=np.float64)
        return cls(np.asarray(normals, dtype=np.float64), intensity, np.ones_like(intensity))


Samples = Union[SampleBatch, Sequence[ShadedSample]]


@dataclass(frozen=True)
class SensorConfig:
    bit_depth: int = config.BIT_DEPTH
    noise_sigma: float = config.NOISE_SIGMA
    seed: int = config.SEED

    def __post_init__(self):
        if self.bit_depth < 1:
            raise PreconditionError("bit_depth must be >= 1")
        if self.noise_sigma < 0.0:
            raise PreconditionError("noise_sigma must be >= 0")

    def with_seed(self, seed: int) -> 'SensorConfig':
        return dataclasses.replace(self, seed=seed)


@dataclass(frozen=True)
class EstimatorConfig:
    ridge_lambda: float = config.RIDGE_LAMBDA
    reference_albedo: float = config.REFERENCE_ALBEDO
    sensor: SensorConfig = field(default_factory=SensorConfig)
    prior_light_dc: float = config.PRIOR_LIGHT_DC

    def __post_init__(self):
        if self.ridge_lambda < 0.0:
            raise PreconditionError("ridge_lambda must be >= 0")
        if not 0.0 < self.reference_albedo <= 1.0:
            raise PreconditionError("reference_albedo must lie in (0, 1]")

    @classmethod
    def preset(cls, name: str, sensor: Optional[SensorConfig] = None) -> 'EstimatorConfig':
        if name not in config.ESTIMATOR_PRESETS:
            raise PreconditionError(
                f"unknown estimator {name!r}; choose from {', '.join(sorted(config.ESTIMATOR_PRESETS))}"
            )
        return cls(sensor=sensor or SensorConfig(), **config.ESTIMATOR_PRESETS[name])

    def unbiased(self, albedo: float) -> 'EstimatorConfig':
        """Same sensor, true albedo, no regularisation"""
        return dataclasses.replace(self, reference_albedo=albedo, ridge_lambda=0.0)


# ═══════════════════════════════════════════════════════════════════
# 📐 FITTING
# ═══════════════════════════════════════════════════════════════════

def _as_batch(samples: Samples) -> SampleBatch:
    return samples if isinstance(samples, SampleBatch) else SampleBatch.from_samples(samples)


def _weighted_system(batch: SampleBatch, albedo: float):
    if len(batch) < config.SH_COUNT:
        raise PreconditionError(f"need at least {config.SH_COUNT} samples, got {len(batch)}")
    if not albedo > 0.0:
        raise PreconditionError(f"albedo must be > 0, got {albedo}")
    root_w = np.sqrt(batch.weight)
    design = shading_design(batch.normals) * root_w[:, None]
    target = batch.intensity / albedo * root_w
    return design, target


def fit_sh_least_squares(samples: Samples, albedo: float) -> ShCoeffs:
    """arg min_l sum w (intensity/albedo - sum_i A_i l[i] Y_i(n))^2"""
    design, target = _weighted_system(_as_batch(samples), albedo)
    solution, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < config.SH_COUNT:
        raise SingularFitError(f"design matrix has rank {rank} < {config.SH_COUNT}")
    return ShCoeffs.from_array(solution)


def fit_sh_ridge(samples: Samples, albedo: float, lam: float,
                 prior: Optional[ShCoeffs] = None) -> ShCoeffs:
    """Least squares plus lam * |l - prior|^2 (prior defaults to zero)"""
    if not (math.isfinite(lam) and lam >= 0.0):
        raise PreconditionError(f"ridge lambda must be >= 0, got {lam}")
    if lam == 0.0:
        return fit_sh_least_squares(samples, albedo)

    design, target = _weighted_system(_as_batch(samples), albedo)
    prior_vec = np.zeros(config.SH_COUNT) if prior is None else prior.as_array()
    normal_matrix = design.T @ design + lam * np.eye(config.SH_COUNT)
    rhs = design.T @ target + lam * prior_vec
    return ShCoeffs.from_array(np.linalg.solve(normal_matrix, rhs))


# ═══════════════════════════════════════════════════════════════════
# 📷 SENSOR
# ═══════════════════════════════════════════════════════════════════

def quantize(values: np.ndarray, bit_depth: int) -> np.ndarray:
    levels = 2 ** bit_depth - 1
    return np.rint(values * levels) / levels


def simulate_capture(img: ImagePlane, sensor: SensorConfig, gamma: float = config.GAMMA) -> ImagePlane:
    """Gamma-compress, add seeded Gaussian noise, clamp to [0, 1], quantize"""
    if not img.is_linear:
        raise PreconditionError("simulate_capture expects a linear image")
    if np.any(img.pixels < 0.0):
        raise PreconditionError("radiance must be >= 0")

    encoded = img.pixels ** (1.0 / gamma)
    if sensor.noise_sigma > 0.0:
        rng = np.random.default_rng(sensor.seed)
        encoded = encoded + rng.normal(0.0, sensor.noise_sigma, size=encoded.shape)
    encoded = quantize(np.clip(encoded, 0.0, 1.0), sensor.bit_depth)
    return ImagePlane.encoded(encoded, gamma)


# ═══════════════════════════════════════════════════════════════════
# 🎯 ESTIMATION
# ═══════════════════════════════════════════════════════════════════

def observed_batch(img: ImagePlane, normals: NormalMap) -> SampleBatch:
    """
    Linear luminance of usable silhouette pixels

    A pixel is usable when every channel is strictly inside (0, 1), so
    clipped highlights and unlit pixels never enter the fit.
    """
    if img.is_linear:
        raise PreconditionError("estimation expects a gamma-encoded capture")
    if (img.height, img.width) != (normals.height, normals.width):
        raise DimensionMismatchError(
            f"image {img.width}x{img.height} vs normals {normals.width}x{normals.height}"
        )

    pixels = img.pixels if img.channels == 3 else img.pixels[:, :, None]
    unclipped = np.all((pixels > 0.0) & (pixels < 1.0), axis=2)
    usable = normals.valid & unclipped

    linear = pixels ** img.gamma
    luminance = linear @ np.array(LUMA_WEIGHTS) if img.channels == 3 else linear[:, :, 0]
    return SampleBatch.unweighted(normals.normals[usable], luminance[usable])


def biased_estimate(img: ImagePlane, normals: NormalMap, cfg: EstimatorConfig) -> ShCoeffs:
    """
    Fixed-prior light estimate

    Divides by cfg.reference_albedo (not the subject's albedo) and ridge
    fits toward the ambient prior light; lambda is per unit sample weight.
    """
    batch = observed_batch(img, normals)
    if len(batch) < config.SH_COUNT:
        raise SingularFitError(f"only {len(batch)} usable pixels in the capture")

    prior = ShCoeffs.ambient(cfg.prior_light_dc)
    lam = cfg.ridge_lambda * float(batch.weight.sum())
    return fit_sh_ridge(batch, cfg.reference_albedo, lam, prior)

