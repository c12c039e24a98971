"""Shared seeded corpora for the test suite"""

import dataclasses

import numpy as np
import pytest

from light_estimation import EstimatorConfig, SensorConfig, biased_estimate
from sh_lighting import ShCoeffs, sphere_normal_map
from synthetic_faces import generate_corpus

CORPUS_SEED = 7
CORPUS_RESOLUTION = 32
CORPUS_PER_CLASS = 100


@pytest.fixture(scope='session')
def normals32():
    return sphere_normal_map(CORPUS_RESOLUTION)


@pytest.fixture(scope='session')
def corpus():
    """400 items (100 per class), 8-bit captures with noise 0.01"""
    return generate_corpus(CORPUS_PER_CLASS, CORPUS_RESOLUTION, SensorConfig(8, 0.01, CORPUS_SEED), CORPUS_SEED)


@pytest.fixture(scope='session')
def estimated_corpus(corpus, normals32):
    """The corpus with default-preset estimates attached"""
    cfg = EstimatorConfig()
    return [dataclasses.replace(s, estimate=biased_estimate(s.image, normals32, cfg)) for s in corpus]


@pytest.fixture
def random_light():
    def draw(seed: int) -> ShCoeffs:
        rng = np.random.default_rng(seed)
        values = rng.normal(0.0, 0.3, size=9)
        values[0] = rng.uniform(0.8, 1.2)
        return ShCoeffs(tuple(values))
    return draw
