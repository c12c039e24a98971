"""Tests for illumination magnitude, class statistics and gamma-domain scaling"""

import math

import numpy as np
import pytest

from magnitude_scaling import (
    ClassMagnitudes, FaceMask, MissingClassError, apply_scale, class_magnitude_means, illum_magnitude,
    magnitude_std, normalize_magnitude, sample_training_scales, scale_factor, within_class_std,
)
from sh_lighting import DimensionMismatchError, ImagePlane, PreconditionError, ShCoeffs, shading_map, sphere_normal_map
from skin_tone import EmptyMaskError, SkinTone

FULL = FaceMask(np.ones((4, 4), dtype=bool))


def _uniform(value: float, size: int = 4) -> ImagePlane:
    return ImagePlane.encoded(np.full((size, size, 3), value))


# ═══════════════════════════════════════════════════════════════════
# Magnitude
# ═══════════════════════════════════════════════════════════════════

def test_magnitude_of_uniform_image():
    assert illum_magnitude(_uniform(0.5), FULL) == 0.5


def test_magnitude_uses_masked_pixels_only():
    pixels = np.zeros((4, 4))
    pixels[:, 2:] = 1.0
    bits = np.zeros((4, 4), dtype=bool)
    bits[:, 2:] = True
    assert illum_magnitude(ImagePlane.encoded(pixels), FaceMask(bits)) == 1.0


def test_magnitude_preconditions():
    with pytest.raises(EmptyMaskError):
        illum_magnitude(_uniform(0.5), FaceMask(np.zeros((4, 4), dtype=bool)))
    with pytest.raises(PreconditionError):
        illum_magnitude(ImagePlane.linear(np.full((4, 4), 0.5)), FULL)
    with pytest.raises(DimensionMismatchError):
        illum_magnitude(_uniform(0.5, size=8), FULL)


def test_face_mask_from_shading():
    normals = sphere_normal_map(32)
    light = ShCoeffs((1.0, 0.0, 0.0, 0.5) + (0.0,) * 5)
    mask = FaceMask.from_shading(shading_map(normals, light), normals.valid)
    assert 0 < mask.count < int(normals.valid.sum())
    assert not np.any(mask.bits & ~normals.valid)
    assert mask == FaceMask(mask.bits.copy())


def test_class_magnitude_means():
    corpus = [(_uniform(0.4), FULL, SkinTone.FAIR),
              (_uniform(0.2), FULL, SkinTone.DARK),
              (_uniform(0.6), FULL, SkinTone.DARK)]
    cm = class_magnitude_means(corpus)
    assert cm.mean_for(SkinTone.FAIR) == pytest.approx(0.4)
    assert cm.mean_for(SkinTone.DARK) == pytest.approx(0.4)
    assert cm.counts == {SkinTone.FAIR: 1, SkinTone.DARK: 2}
    assert cm.global_mean == pytest.approx(0.4)
    with pytest.raises(MissingClassError):
        cm.mean_for(SkinTone.TAN)

    reordered = class_magnitude_means(corpus[::-1])
    assert reordered.to_dict() == cm.to_dict()


def test_class_magnitudes_save_load(tmp_path):
    cm = class_magnitude_means([(_uniform(0.3), FULL, SkinTone.TAN), (_uniform(0.5), FULL, SkinTone.MEDIUM)])
    cm.save(tmp_path / 'cm.json')
    loaded = ClassMagnitudes.load(tmp_path / 'cm.json')
    assert loaded.to_dict() == cm.to_dict()


def test_scale_factor():
    cm = ClassMagnitudes({SkinTone.FAIR: 0.5}, {SkinTone.FAIR: 3}, 0.25)
    assert scale_factor(_uniform(0.4), FULL, SkinTone.FAIR, cm) == pytest.approx(0.8)
    assert scale_factor(_uniform(0.5), FULL, SkinTone.FAIR, cm) == pytest.approx(1.0)
    assert scale_factor(_uniform(0.5), FULL, SkinTone.FAIR, cm, per_class=False) == pytest.approx(2.0)
    with pytest.raises(MissingClassError):
        scale_factor(_uniform(0.5), FULL, SkinTone.DARK, cm)


# ═══════════════════════════════════════════════════════════════════
# Scaling
# ═══════════════════════════════════════════════════════════════════

def test_apply_scale_values():
    pixels = np.array([[0.5, 0.0], [0.25, 1.0]])
    scaled = apply_scale(ImagePlane.encoded(pixels), 2.0)
    assert scaled.pixels[0, 0] == pytest.approx(0.6852, abs=1e-4)
    assert scaled.pixels[0, 1] == 0.0
    assert scaled.pixels[1, 1] == 1.0


def test_apply_scale_identity():
    img = ImagePlane.encoded(np.linspace(0.0, 1.0, 16).reshape(4, 4))
    assert np.array_equal(apply_scale(img, 1.0).pixels, img.pixels)


def test_apply_scale_is_linear_domain_multiplication():
    img = ImagePlane.encoded(np.array([[0.1, 0.3], [0.5, 0.7]]))
    scaled = apply_scale(img, 0.6)
    assert np.allclose(scaled.pixels ** 2.2, 0.6 * img.pixels ** 2.2, atol=1e-12)


def test_apply_scale_composes():
    img = ImagePlane.encoded(np.array([[0.1, 0.3], [0.5, 0.6]]))
    twice = apply_scale(apply_scale(img, 0.5), 1.5)
    once = apply_scale(img, 0.75)
    assert np.allclose(twice.pixels, once.pixels, atol=1e-12)


def test_apply_scale_preconditions():
    with pytest.raises(PreconditionError):
        apply_scale(_uniform(0.5), 0.0)
    with pytest.raises(PreconditionError):
        apply_scale(ImagePlane.linear(np.full((2, 2), 0.5)), 2.0)


def test_normalize_magnitude_divides_by_scale():
    img = _uniform(0.6)
    normalized = normalize_magnitude(img, 1.5)
    assert illum_magnitude(normalized, FULL) == pytest.approx(0.4, abs=1e-12)


def test_sample_training_scales():
    training = [(0.8, SkinTone.FAIR), (1.2, SkinTone.FAIR), (0.5, SkinTone.DARK)]
    tones = [SkinTone.DARK, SkinTone.FAIR, SkinTone.FAIR, SkinTone.DARK]
    drawn = sample_training_scales(training, tones, seed=3)
    assert drawn[0] == drawn[3] == 0.5
    assert set(drawn[1:3]) <= {0.8, 1.2}
    assert drawn == sample_training_scales(training, tones, seed=3)
    with pytest.raises(MissingClassError):
        sample_training_scales(training, [SkinTone.TAN], seed=3)


# ═══════════════════════════════════════════════════════════════════
# Spread
# ═══════════════════════════════════════════════════════════════════

def test_magnitude_std():
    assert magnitude_std([(_uniform(0.5), FULL)] * 3) == 0.0
    assert magnitude_std([(_uniform(0.2), FULL), (_uniform(0.6), FULL)]) == pytest.approx(0.2)
    with pytest.raises(PreconditionError):
        magnitude_std([(_uniform(0.2), FULL)])


def test_within_class_std():
    magnitudes = [0.2, 0.4, 0.7, 0.7]
    tones = [SkinTone.DARK, SkinTone.DARK, SkinTone.FAIR, SkinTone.FAIR]
    assert within_class_std(magnitudes, tones) == pytest.approx(np.sqrt(0.02 / 4))


def test_normalizing_corpus_reduces_spread(corpus):
    """Per-image normalisation brings every class to its own mean magnitude"""
    cm = class_magnitude_means((s.image, s.mask, s.tone) for s in corpus)
    normalized = [
        (normalize_magnitude(s.image, scale_factor(s.image, s.mask, s.tone, cm)), s.mask) for s in corpus
    ]
    before = [illum_magnitude(s.image, s.mask) for s in corpus]
    after = [illum_magnitude(img, mask) for img, mask in normalized]
    tones = [s.tone for s in corpus]
    assert within_class_std(after, tones) <= 0.5 * within_class_std(before, tones)


def test_global_normalization_collapses_magnitude_spread(corpus):
    cm = class_magnitude_means((s.image, s.mask, s.tone) for s in corpus)
    before = magnitude_std((s.image, s.mask) for s in corpus)
    after = magnitude_std(
        (normalize_magnitude(s.image, scale_factor(s.image, s.mask, s.tone, cm, per_class=False)), s.mask)
        for s in corpus
    )
    assert after <= 0.5 * before
    assert after <= 0.1 * before


def test_class_scale_factors_average_to_one(corpus):
    cm = class_magnitude_means((s.image, s.mask, s.tone) for s in corpus)
    for tone in (SkinTone.FAIR, SkinTone.MEDIUM, SkinTone.TAN, SkinTone.DARK):
        scales = [scale_factor(s.image, s.mask, s.tone, cm) for s in corpus if s.tone is tone]
        assert len(scales) == 100
        assert math.fsum(scales) / len(scales) == pytest.approx(1.0, abs=1e-12)


def test_missing_class_message_is_plain():
    with pytest.raises(MissingClassError) as excinfo:
        ClassMagnitudes().mean_for(SkinTone.TAN)
    assert str(excinfo.value) == 'no magnitude statistics for class tan'
