"""Tests for the SH fits, the sensor model and the fixed-prior estimator"""

import math

import numpy as np
import pytest

from debias import normalize_dc, separability
from light_estimation import (
    EstimatorConfig, SampleBatch, SensorConfig, ShadedSample, SingularFitError, biased_estimate,
    fit_sh_least_squares, fit_sh_ridge, simulate_capture,
)
from sh_lighting import (
    DimensionMismatchError, ImagePlane, PreconditionError, ShCoeffs, UnitNormal, irradiance_array, render,
    sphere_normal_map,
)


def _sphere_batch(l: ShCoeffs, albedo: float, count: int = 2000, seed: int = 0) -> SampleBatch:
    rng = np.random.default_rng(seed)
    normals = rng.normal(size=(count, 3))
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    shading = irradiance_array(l, normals)
    keep = shading > 0.0
    return SampleBatch.unweighted(normals[keep], albedo * shading[keep])


def _gray_capture(albedo: float, light: ShCoeffs, resolution: int, sensor: SensorConfig):
    normals = sphere_normal_map(resolution)
    plane = ImagePlane.linear(np.where(normals.valid, albedo, 0.0))
    return normals, simulate_capture(render(normals, plane, light), sensor)


# ═══════════════════════════════════════════════════════════════════
# Fits
# ═══════════════════════════════════════════════════════════════════

def test_least_squares_round_trip(random_light):
    """Noise-free shading over many normals gives back the light"""
    for seed in range(100):
        truth = random_light(seed)
        fitted = fit_sh_least_squares(_sphere_batch(truth, 0.6, seed=seed), 0.6)
        error = np.linalg.norm(fitted.as_array() - truth.as_array()) / truth.norm()
        assert error < 1e-6


def test_least_squares_ambient_closed_form():
    kappa = 0.37
    normals = sphere_normal_map(16).silhouette_normals()
    batch = SampleBatch.unweighted(normals, np.full(len(normals), kappa))
    fitted = fit_sh_least_squares(batch, 1.0)
    expected = (kappa / (math.pi * 0.282095),) + (0.0,) * 8
    assert fitted.c == pytest.approx(expected, abs=1e-9)


def test_least_squares_accepts_sample_list():
    l = ShCoeffs((1.0, 0.1, 0.3, -0.2, 0.0, 0.05, 0.0, 0.0, 0.02))
    batch = _sphere_batch(l, 1.0, count=40)
    samples = [ShadedSample(UnitNormal(*n), float(v)) for n, v in zip(batch.normals, batch.intensity)]
    assert fit_sh_least_squares(samples, 1.0).c == pytest.approx(l.c, abs=1e-9)


def test_least_squares_too_few_samples():
    batch = _sphere_batch(ShCoeffs.ambient(1.0), 1.0, count=8)
    with pytest.raises(PreconditionError):
        fit_sh_least_squares(batch, 1.0)


def test_least_squares_rank_deficient():
    """Nine copies of one normal cannot pin down nine coefficients"""
    normals = np.tile([[0.0, 0.0, 1.0]], (9, 1))
    with pytest.raises(SingularFitError):
        fit_sh_least_squares(SampleBatch.unweighted(normals, np.ones(9)), 1.0)


def test_least_squares_rejects_bad_albedo():
    with pytest.raises(PreconditionError):
        fit_sh_least_squares(_sphere_batch(ShCoeffs.ambient(1.0), 1.0), 0.0)


def test_ridge_zero_lambda_is_least_squares():
    batch = _sphere_batch(ShCoeffs((1.0, 0.3, 0.2, 0.1, 0.0, 0.0, 0.05, 0.0, 0.0)), 0.5)
    assert fit_sh_ridge(batch, 0.5, 0.0).c == pytest.approx(fit_sh_least_squares(batch, 0.5).c, abs=1e-9)


def test_ridge_shrinks_to_zero():
    batch = _sphere_batch(ShCoeffs.ambient(1.0), 0.5, count=200)
    assert fit_sh_ridge(batch, 0.5, 1e9).norm() < 1e-6


def test_ridge_monotone_in_lambda():
    batch = _sphere_batch(ShCoeffs((1.0, 0.3, 0.2, 0.1, 0.0, 0.0, 0.05, 0.0, 0.0)), 0.5)
    norms = [fit_sh_ridge(batch, 0.5, lam).norm() for lam in (0.0, 1.0, 10.0, 100.0, 1e4)]
    assert all(a >= b for a, b in zip(norms, norms[1:]))


def test_ridge_pulls_toward_prior():
    batch = _sphere_batch(ShCoeffs.ambient(0.2), 1.0)
    prior = ShCoeffs.ambient(1.0)
    assert fit_sh_ridge(batch, 1.0, 1e12, prior).c == pytest.approx(prior.c, abs=1e-6)


def test_ridge_rejects_negative_lambda():
    with pytest.raises(PreconditionError):
        fit_sh_ridge(_sphere_batch(ShCoeffs.ambient(1.0), 1.0), 1.0, -1.0)


# ═══════════════════════════════════════════════════════════════════
# Sensor
# ═══════════════════════════════════════════════════════════════════

def test_capture_quantizes_gamma_value():
    img = ImagePlane.linear(np.full((2, 2), 0.25))
    captured = simulate_capture(img, SensorConfig(bit_depth=16, noise_sigma=0.0))
    assert captured.pixels[0, 0] == round(0.25 ** (1 / 2.2) * 65535) / 65535
    assert not captured.is_linear and captured.gamma == 2.2


def test_capture_clamps_endpoints():
    img = ImagePlane.linear(np.array([[0.0, 1.0], [1.7, 0.5]]))
    captured = simulate_capture(img, SensorConfig(bit_depth=8, noise_sigma=0.0))
    assert captured.pixels[0, 0] == 0.0
    assert captured.pixels[0, 1] == 1.0 and captured.pixels[1, 0] == 1.0


def test_capture_is_seeded():
    img = ImagePlane.linear(np.full((8, 8), 0.3))
    sensor = SensorConfig(bit_depth=8, noise_sigma=0.05, seed=42)
    first, second = simulate_capture(img, sensor), simulate_capture(img, sensor)
    other = simulate_capture(img, sensor.with_seed(43))
    assert np.array_equal(first.pixels, second.pixels)
    assert not np.array_equal(first.pixels, other.pixels)


def test_capture_rejects_encoded_input():
    with pytest.raises(PreconditionError):
        simulate_capture(ImagePlane.encoded(np.zeros((2, 2))), SensorConfig())


# ═══════════════════════════════════════════════════════════════════
# Estimator
# ═══════════════════════════════════════════════════════════════════

LIGHT = ShCoeffs((1.0, 0.15, 0.25, -0.1, 0.02, -0.03, 0.04, 0.01, -0.02))
EXACT = SensorConfig(bit_depth=16, noise_sigma=0.0)


def test_estimate_unbiased_configuration():
    normals, capture = _gray_capture(0.5, LIGHT, 64, EXACT)
    cfg = EstimatorConfig(ridge_lambda=0.0, reference_albedo=0.5, sensor=EXACT)
    assert biased_estimate(capture, normals, cfg).c == pytest.approx(LIGHT.c, abs=1e-3)


def test_estimate_half_albedo_halves_dc():
    normals, capture = _gray_capture(0.35, LIGHT, 64, EXACT)
    cfg = EstimatorConfig(ridge_lambda=0.0, reference_albedo=0.7, sensor=EXACT)
    assert biased_estimate(capture, normals, cfg).dc == pytest.approx(LIGHT.dc / 2, abs=1e-3)


def test_estimate_unbiased_helper_uses_true_albedo():
    normals, capture = _gray_capture(0.3, LIGHT, 64, EXACT)
    cfg = EstimatorConfig.preset('deca-like', EXACT).unbiased(0.3)
    assert cfg.ridge_lambda == 0.0 and cfg.reference_albedo == 0.3
    assert biased_estimate(capture, normals, cfg).c == pytest.approx(LIGHT.c, abs=1e-3)


def test_estimate_ignores_clipped_pixels():
    """A bright capture clips; the unclipped pixels still give the light"""
    light = LIGHT.scaled(1.3)
    normals, capture = _gray_capture(0.9, light, 64, EXACT)
    assert np.any(capture.pixels == 1.0)
    cfg = EstimatorConfig(ridge_lambda=0.0, reference_albedo=0.9, sensor=EXACT)
    assert biased_estimate(capture, normals, cfg).c == pytest.approx(light.c, abs=1e-3)


def test_estimate_size_mismatch():
    _, capture = _gray_capture(0.5, LIGHT, 32, EXACT)
    with pytest.raises(DimensionMismatchError):
        biased_estimate(capture, sphere_normal_map(16), EstimatorConfig())


def test_estimate_black_capture():
    normals, capture = _gray_capture(0.5, ShCoeffs.zeros(), 16, EXACT)
    with pytest.raises(SingularFitError):
        biased_estimate(capture, normals, EstimatorConfig())


def test_presets():
    assert EstimatorConfig.preset('sfsnet-like').reference_albedo == 0.7
    assert EstimatorConfig.preset('deca-like').ridge_lambda == 3e-3
    with pytest.raises(PreconditionError):
        EstimatorConfig.preset('clip-like')


def test_dark_estimates_have_smaller_dc(estimated_corpus):
    """The fixed reference albedo reads dark subjects as dimly lit"""
    dark = [s.estimate.dc for s in estimated_corpus if s.tone.is_dark]
    non_dark = [s.estimate.dc for s in estimated_corpus if not s.tone.is_dark]
    assert np.mean(dark) <= 0.8 * np.mean(non_dark)


def test_normalized_estimates_separate_dark(estimated_corpus):
    truth = separability([(normalize_dc(s.light).as_array(), s.tone) for s in estimated_corpus])
    biased = separability([(normalize_dc(s.estimate).as_array(), s.tone) for s in estimated_corpus])
    assert 0.4 <= truth.nc_accuracy <= 0.6
    assert biased.nc_accuracy >= 0.7
