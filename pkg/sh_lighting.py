"""
sh_lighting.py - Second-order spherical harmonics lighting

Real SH basis (9 coefficients, fixed ordering Y00, Y1-1, Y10, Y11, Y2-2,
Y2-1, Y20, Y21, Y22), Lambertian irradiance shading and the forward
renderer: relit image = albedo x max(0, shading).
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

import config


class PreconditionError(ValueError):
    """An operation was called with inputs outside its domain"""


class DimensionMismatchError(ValueError):
    """Two images/maps that must share a size do not"""


# ═══════════════════════════════════════════════════════════════════
# 📦 DATA CLASSES
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class ShCoeffs:
    """Monochrome environment light as 9 real SH weights"""
    c: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.c)
        if len(values) != config.SH_COUNT:
            raise PreconditionError(f"ShCoeffs needs {config.SH_COUNT} values, got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise PreconditionError("ShCoeffs values must be finite")
        object.__setattr__(self, 'c', values)

    @property
    def dc(self) -> float:
        return self.c[0]

    def as_array(self) -> np.ndarray:
        return np.array(self.c, dtype=np.float64)

    def scaled(self, k: float) -> 'ShCoeffs':
        return ShCoeffs(tuple(k * v for v in self.c))

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def to_list(self) -> list:
        return list(self.c)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'ShCoeffs':
        return cls(tuple(float(v) for v in values))

    @classmethod
    def zeros(cls) -> 'ShCoeffs':
        return cls((0.0,) * config.SH_COUNT)

    @classmethod
    def ambient(cls, dc: float) -> 'ShCoeffs':
        return cls((dc,) + (0.0,) * (config.SH_COUNT - 1))


@dataclass(frozen=True)
class UnitNormal:
    """Surface normal, unit length within 1e-9"""
    x: float
    y: float
    z: float

    def __post_init__(self):
        length_sq = self.x * self.x + self.y * self.y + self.z * self.z
        if not math.isfinite(length_sq) or abs(length_sq - 1.0) > config.UNIT_TOLERANCE:
            raise PreconditionError(f"normal ({self.x}, {self.y}, {self.z}) is not unit length")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)


@dataclass(frozen=True, eq=False)
class NormalMap:
    """Per-pixel normals; `valid` marks the silhouette"""
    normals: np.ndarray          # (H, W, 3), zeros outside the silhouette
    valid: np.ndarray            # (H, W) bool

    def __post_init__(self):
        if self.normals.ndim != 3 or self.normals.shape[2] != 3:
            raise PreconditionError("normals must have shape (H, W, 3)")
        if self.valid.shape != self.normals.shape[:2]:
            raise DimensionMismatchError("valid mask must match the normal grid")
        lengths = np.linalg.norm(self.normals[self.valid], axis=1)
        if lengths.size and np.max(np.abs(lengths - 1.0)) > config.UNIT_TOLERANCE:
            raise PreconditionError("every present normal must be unit length")
        self.normals.setflags(write=False)
        self.valid.setflags(write=False)

    @property
    def height(self) -> int:
        return self.normals.shape[0]

    @property
    def width(self) -> int:
        return self.normals.shape[1]

    def normal_at(self, row: int, col: int) -> Optional[UnitNormal]:
        if not self.valid[row, col]:
            return None
        x, y, z = self.normals[row, col]
        return UnitNormal(float(x), float(y), float(z))

    def silhouette_normals(self) -> np.ndarray:
        """(N, 3) normals of silhouette pixels in row-major order"""
        return self.normals[self.valid]


class Encoding(Enum):
    LINEAR = 'linear'
    GAMMA = 'gamma'


@dataclass(frozen=True, eq=False)
class ImagePlane:
    """Intensity image, (H, W) or (H, W, 3), with its transfer encoding"""
    pixels: np.ndarray
    encoding: Encoding = Encoding.LINEAR
    gamma: Optional[float] = None

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim not in (2, 3) or (pixels.ndim == 3 and pixels.shape[2] != 3):
            raise PreconditionError(f"unsupported image shape {pixels.shape}")
        if not np.all(np.isfinite(pixels)):
            raise PreconditionError("image pixels must be finite")
        if self.encoding is Encoding.GAMMA and (self.gamma is None or self.gamma <= 0):
            raise PreconditionError("gamma-encoded images need a positive gamma")
        if self.encoding is Encoding.LINEAR and self.gamma is not None:
            raise PreconditionError("linear images carry no gamma")
        pixels.setflags(write=False)
        object.__setattr__(self, 'pixels', pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    @property
    def is_linear(self) -> bool:
        return self.encoding is Encoding.LINEAR

    def luminance(self) -> np.ndarray:
        """Rec.709 luminance of a linear image, (H, W)"""
        if not self.is_linear:
            raise PreconditionError("luminance is defined on linear images")
        if self.channels == 1:
            return np.array(self.pixels)
        return self.pixels @ np.array(LUMA_WEIGHTS)

    @classmethod
    def linear(cls, pixels: np.ndarray) -> 'ImagePlane':
        return cls(pixels, Encoding.LINEAR, None)

    @classmethod
    def encoded(cls, pixels: np.ndarray, gamma: float = config.GAMMA) -> 'ImagePlane':
        return cls(pixels, Encoding.GAMMA, gamma)


LUMA_WEIGHTS = (0.2126, 0.7152, 0.0722)


# ═══════════════════════════════════════════════════════════════════
# 💡 BASIS & SHADING
# ═══════════════════════════════════════════════════════════════════

def _attenuation() -> np.ndarray:
    return np.array([config.BAND_ATTENUATION[b] for b in config.BAND_OF_INDEX])


def sh_basis_array(normals: np.ndarray) -> np.ndarray:
    """Evaluate the 9 basis functions at (N, 3) unit normals, returns (N, 9)"""
    normals = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
    x, y, z = normals[:, 0], normals[:, 1], normals[:, 2]
    return np.stack([
        np.full_like(x, config.SH_Y00),
        config.SH_BAND1 * y,
        config.SH_BAND1 * z,
        config.SH_BAND1 * x,
        config.SH_BAND2 * x * y,
        config.SH_BAND2 * y * z,
        config.SH_Y20 * (3.0 * z * z - 1.0),
        config.SH_BAND2 * x * z,
        config.SH_Y22 * (x * x - y * y),
    ], axis=1)


def sh_basis(n: UnitNormal) -> Tuple[float, ...]:
    """(Y00(n), ..., Y22(n))"""
    if not isinstance(n, UnitNormal):
        raise PreconditionError("sh_basis expects a UnitNormal")
    return tuple(float(v) for v in sh_basis_array(n.as_array())[0])


def shading_design(normals: np.ndarray) -> np.ndarray:
    """Basis rows scaled by the per-band Lambertian attenuation, (N, 9)"""
    return sh_basis_array(normals) * _attenuation()


def irradiance_array(l: ShCoeffs, normals: np.ndarray) -> np.ndarray:
    """Unclamped Lambertian shading at (N, 3) normals"""
    return np.einsum('ni,i->n', shading_design(normals), l.as_array())


def irradiance_shading(l: ShCoeffs, n: UnitNormal) -> float:
    """Sum_i A_i * l[i] * Y_i(n), A = (pi, 2pi/3, pi/4) per band"""
    if not isinstance(n, UnitNormal):
        raise PreconditionError("irradiance_shading expects a UnitNormal")
    return float(irradiance_array(l, n.as_array())[0])


def shading_map(normals: NormalMap, l: ShCoeffs) -> np.ndarray:
    """Unclamped shading on the silhouette, 0 elsewhere, (H, W)"""
    out = np.zeros((normals.height, normals.width))
    out[normals.valid] = irradiance_array(l, normals.silhouette_normals())
    return out


# ═══════════════════════════════════════════════════════════════════
# 🖼️ RENDERING
# ═══════════════════════════════════════════════════════════════════

def render(normals: NormalMap, albedo: ImagePlane, l: ShCoeffs) -> ImagePlane:
    """
    Relit image = albedo x max(0, shading) on the silhouette, 0 elsewhere

    Output is linear and not clamped at 1; clamping happens at encode time.
    """
    if not albedo.is_linear:
        raise PreconditionError("render expects a linear albedo")
    if (albedo.height, albedo.width) != (normals.height, normals.width):
        raise DimensionMismatchError(
            f"albedo {albedo.width}x{albedo.height} vs normals {normals.width}x{normals.height}"
        )
    if np.any(albedo.pixels < 0.0) or np.any(albedo.pixels > 1.0):
        raise PreconditionError("albedo values must lie in [0, 1]")

    shading = np.maximum(shading_map(normals, l), 0.0)
    if albedo.channels == 3:
        shading = shading[:, :, None]
    return ImagePlane.linear(albedo.pixels * shading)


def sphere_normal_map(resolution: int) -> NormalMap:
    """Orthographic front-facing hemisphere; pixels outside the unit disc are absent"""
    if resolution < config.MIN_SPHERE_RESOLUTION:
        raise PreconditionError(f"resolution must be >= {config.MIN_SPHERE_RESOLUTION}")

    centers = (np.arange(resolution) + 0.5) / resolution * 2.0 - 1.0
    x = np.tile(centers, (resolution, 1))
    y = -np.tile(centers[:, None], (1, resolution))   # row 0 is the top
    r2 = x * x + y * y
    valid = r2 < 1.0

    z = np.sqrt(np.clip(1.0 - r2, 0.0, None))
    normals = np.stack([x, y, z], axis=2)
    normals[valid] /= np.linalg.norm(normals[valid], axis=1)[:, None]
    normals[~valid] = 0.0
    return NormalMap(normals, valid)
