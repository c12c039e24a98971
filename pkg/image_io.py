"""
image_io.py - Image and coefficient file formats

8-bit PNG images (values / 255), 1-bit PNG masks, the pure power-law
gamma transfer, coefficient files (CSV or JSON by suffix) and the
SVG + CSV scatter pair emitted for embeddings.

Readers reject rather than repair: anything outside the documented
formats raises.
"""

import csv
import io
import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple, Union

import numpy as np
from jinja2 import Environment, FileSystemLoader, select_autoescape
from PIL import Image, UnidentifiedImageError

import config
from sh_lighting import ImagePlane, PreconditionError
from skin_tone import DuplicateIdError, SkinTone

if TYPE_CHECKING:
    from embedding_analysis import EmbedPoint
    from magnitude_scaling import FaceMask

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class UnsupportedImageError(ValueError):
    """PNG with a bit depth or color type outside 8-bit L/RGB and 1-bit masks"""


class CoeffFormatError(ValueError):
    """A coefficient file that does not follow the id,c0..c8[,class][,kind] layout"""


# ═══════════════════════════════════════════════════════════════════
# 🌗 GAMMA TRANSFER
# ═══════════════════════════════════════════════════════════════════

def gamma_compress(values: np.ndarray, gamma: float = config.GAMMA) -> np.ndarray:
    """v^(1/gamma), clamped to [0, 1]"""
    values = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return values ** (1.0 / gamma)


def gamma_expand(values: np.ndarray, gamma: float = config.GAMMA) -> np.ndarray:
    """v^gamma for values in [0, 1]"""
    values = np.asarray(values, dtype=np.float64)
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise PreconditionError("gamma decoding expects values in [0, 1]")
    return values ** gamma


def encode_gamma(img: ImagePlane, gamma: float = config.GAMMA) -> ImagePlane:
    if not img.is_linear:
        raise PreconditionError("image is already gamma-encoded")
    return ImagePlane.encoded(gamma_compress(img.pixels, gamma), gamma)


def decode_gamma(img: ImagePlane) -> ImagePlane:
    if img.is_linear:
        raise PreconditionError("image is already linear")
    return ImagePlane.linear(gamma_expand(img.pixels, img.gamma))


# ═══════════════════════════════════════════════════════════════════
# 🖼️ PNG
# ═══════════════════════════════════════════════════════════════════

def _open_png(path: PathLike) -> Image.Image:
    try:
        image = Image.open(path)
        image.load()
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as e:
        raise UnsupportedImageError(f"{path}: not a readable PNG ({e})") from e
    if image.format != 'PNG':
        raise UnsupportedImageError(f"{path}: expected PNG, found {image.format}")
    return image


def read_png(path: PathLike, gamma: float = config.GAMMA) -> ImagePlane:
    """Read an 8-bit grayscale or RGB PNG as a gamma-encoded image in [0, 1]"""
    image = _open_png(path)
    if image.mode not in ('L', 'RGB'):
        raise UnsupportedImageError(f"{path}: unsupported PNG mode {image.mode}")
    return ImagePlane.encoded(np.asarray(image, dtype=np.float64) / 255.0, gamma)


def quantize_8bit(img: ImagePlane) -> np.ndarray:
    pixels = img.pixels
    if np.any(pixels < 0.0) or np.any(pixels > 1.0):
        raise PreconditionError("pixel values must lie in [0, 1] to be written")
    return np.rint(pixels * 255.0).astype(np.uint8)


def write_png(img: ImagePlane, path: PathLike):
    """Write a gamma-encoded image as 8-bit L or RGB PNG"""
    if img.is_linear:
        raise PreconditionError("only gamma-encoded images are written to PNG")
    mode = 'L' if img.channels == 1 else 'RGB'
    Image.fromarray(quantize_8bit(img), mode=mode).save(path, format='PNG')


def read_mask(path: PathLike) -> 'FaceMask':
    """1-bit PNG, or 8-bit grayscale restricted to {0, 255}"""
    from magnitude_scaling import FaceMask

    image = _open_png(path)
    if image.mode == '1':
        return FaceMask(np.asarray(image, dtype=bool))
    if image.mode == 'L':
        values = np.asarray(image)
        if not np.isin(values, (0, 255)).all():
            raise UnsupportedImageError(f"{path}: 8-bit mask values must be 0 or 255")
        return FaceMask(values == 255)
    raise UnsupportedImageError(f"{path}: unsupported mask mode {image.mode}")


def write_mask(mask: 'FaceMask', path: PathLike):
    levels = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(levels, mode='L').convert('1', dither=Image.Dither.NONE).save(path, format='PNG')


# ═══════════════════════════════════════════════════════════════════
# 🔢 COEFFICIENT FILES
# ═══════════════════════════════════════════════════════════════════

class CoeffKind(Enum):
    RAW = 'raw'
    NORMALIZED = 'normalized'
    ALIGNED = 'aligned'


COEFF_COLUMNS = [f"c{i}" for i in range(config.SH_COUNT)]


@dataclass(frozen=True)
class CoeffRecord:
    """One serialized light: raw l, DC-normalized l_n or aligned l_nsa"""
    id: str
    coeffs: Tuple[float, ...]
    tone: Optional[SkinTone] = None
    kind: Optional[CoeffKind] = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.coeffs)
        if not self.id:
            raise CoeffFormatError("coefficient records need a non-empty id")
        if len(values) != config.SH_COUNT:
            raise CoeffFormatError(f"{self.id}: expected {config.SH_COUNT} coefficients, got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise CoeffFormatError(f"{self.id}: coefficients must be finite")
        if self.kind in (CoeffKind.NORMALIZED, CoeffKind.ALIGNED) and values[0] != 1.0:
            raise CoeffFormatError(f"{self.id}: {self.kind.value} record must have c0 = 1, got {values[0]}")
        object.__setattr__(self, 'coeffs', values)

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs)

    def to_json(self) -> dict:
        data = {'id': self.id, 'coeffs': list(self.coeffs)}
        if self.tone is not None:
            data['class'] = self.tone.value
        if self.kind is not None:
            data['kind'] = self.kind.value
        return data


def _check_unique(records: Sequence[CoeffRecord]):
    seen = set()
    for record in records:
        if record.id in seen:
            raise DuplicateIdError(f"duplicate coefficient id {record.id!r}")
        seen.add(record.id)


def _parse_kind(value: str) -> CoeffKind:
    try:
        return CoeffKind(value)
    except ValueError:
        raise CoeffFormatError(f"unknown coefficient kind {value!r}") from None


def write_coeffs(records: Sequence[CoeffRecord], path: PathLike):
    """CSV (17 significant digits) or JSON, chosen by suffix; record order is kept"""
    path = Path(path)
    _check_unique(records)
    suffix = path.suffix.lower()

    if suffix == '.json':
        payload = {'schema': config.SCHEMA_VERSION, 'records': [r.to_json() for r in records]}
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2)
            f.write('\n')
    elif suffix == '.csv':
        with_class = any(r.tone is not None for r in records)
        with_kind = any(r.kind is not None for r in records)
        header = ['id'] + COEFF_COLUMNS + (['class'] if with_class else []) + (['kind'] if with_kind else [])

        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for r in records:
                row = [r.id] + [format(v, '.17g') for v in r.coeffs]
                if with_class:
                    row.append(r.tone.value if r.tone else '')
                if with_kind:
                    row.append(r.kind.value if r.kind else '')
                writer.writerow(row)
    else:
        raise CoeffFormatError(f"{path}: coefficient files must end in .csv or .json")

    logger.debug(f"Wrote {len(records)} coefficient records to {path}")


def _parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise CoeffFormatError(f"{where}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise CoeffFormatError(f"{where}: non-finite value {text!r}")
    return value


def _read_coeffs_csv(text: str, path: Path) -> List[CoeffRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or header[:1 + config.SH_COUNT] != ['id'] + COEFF_COLUMNS:
        raise CoeffFormatError(f"{path}: header must start with id,{','.join(COEFF_COLUMNS)}")

    extras = header[1 + config.SH_COUNT:]
    if extras not in ([], ['class'], ['kind'], ['class', 'kind']):
        raise CoeffFormatError(f"{path}: unknown columns {extras}")

    records = []
    for row_num, row in enumerate(reader, start=2):
        if not row:
            continue
        where = f"{path}:{row_num}"
        if len(row) != len(header):
            raise CoeffFormatError(f"{where}: expected {len(header)} fields, got {len(row)}")

        fields = dict(zip(header, row))
        coeffs = tuple(_parse_float(fields[c], where) for c in COEFF_COLUMNS)
        tone = SkinTone.from_string(fields['class']) if fields.get('class') else None
        kind = _parse_kind(fields['kind']) if fields.get('kind') else None
        records.append(CoeffRecord(fields['id'], coeffs, tone, kind))
    return records


def _read_coeffs_json(text: str, path: Path) -> List[CoeffRecord]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise CoeffFormatError(f"{path}: invalid JSON ({e})") from e
    if not isinstance(payload, dict) or payload.get('schema') != config.SCHEMA_VERSION:
        raise CoeffFormatError(f"{path}: expected a schema {config.SCHEMA_VERSION} coefficient file")

    records = []
    for entry in payload.get('records', []):
        unknown = set(entry) - {'id', 'coeffs', 'class', 'kind'}
        if unknown:
            raise CoeffFormatError(f"{path}: unknown record fields {sorted(unknown)}")
        coeffs = entry.get('coeffs')
        if not isinstance(coeffs, list) or not all(isinstance(v, (int, float)) for v in coeffs):
            raise CoeffFormatError(f"{path}: record {entry.get('id')!r} has malformed coeffs")
        tone = SkinTone.from_string(entry['class']) if entry.get('class') else None
        kind = _parse_kind(entry['kind']) if entry.get('kind') else None
        records.append(CoeffRecord(str(entry.get('id', '')), tuple(coeffs), tone, kind))
    return records


def read_coeffs(path: PathLike) -> List[CoeffRecord]:
    path = Path(path)
    text = path.read_text(encoding='utf-8')
    suffix = path.suffix.lower()

    if suffix == '.csv':
        records = _read_coeffs_csv(text, path)
    elif suffix == '.json':
        records = _read_coeffs_json(text, path)
    else:
        raise CoeffFormatError(f"{path}: coefficient files must end in .csv or .json")

    _check_unique(records)
    return records


# ═══════════════════════════════════════════════════════════════════
# 📈 SCATTER PLOTS
# ═══════════════════════════════════════════════════════════════════

SVG_SIZE = 480
SVG_MARGIN = 24

_jinja_env = Environment(
    loader=FileSystemLoader(str(config.TEMPLATE_DIR)),
    autoescape=select_autoescape(['svg', 'j2']),
    keep_trailing_newline=True,
)


def _viewport(values: np.ndarray) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo if hi > lo else 1.0
    return SVG_MARGIN + (values - lo) / span * (SVG_SIZE - 2 * SVG_MARGIN)


def emit_scatter(points: Sequence['EmbedPoint'], path: PathLike, title: str = '') -> Tuple[Path, Path]:
    """Write `<path>.svg` and `<path>.csv`, points ordered by id"""
    if not points:
        raise PreconditionError("cannot plot an empty point set")

    base = Path(path)
    svg_path, csv_path = base.with_suffix('.svg'), base.with_suffix('.csv')
    ordered = sorted(points, key=lambda p: p.id)

    with open(csv_path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['id', 'x', 'y', 'class'])
        for p in ordered:
            writer.writerow([p.id, format(p.x, '.17g'), format(p.y, '.17g'), p.label.value])

    xs = _viewport(np.array([p.x for p in ordered]))
    ys = SVG_SIZE - _viewport(np.array([p.y for p in ordered]))
    circles = [
        {'id': p.id, 'cx': f"{cx:.3f}", 'cy': f"{cy:.3f}", 'color': config.TONE_COLORS[p.label.value]}
        for p, cx, cy in zip(ordered, xs, ys)
    ]
    legend = [{'name': name, 'color': color} for name, color in config.TONE_COLORS.items()]

    svg = _jinja_env.get_template('scatter.svg.j2').render(
        size=SVG_SIZE, title=title, points=circles, legend=legend,
    )
    svg_path.write_text(svg, encoding='utf-8')

    logger.info(f"Wrote scatter {svg_path.name} ({len(ordered)} points)")
    return svg_path, csv_path
