"""
Configuration file for the SH lighting de-biasing toolkit
Contains shading constants, estimator defaults and corpus model parameters
"""

import math
import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# ═══════════════════════════════════════════════════════════════════
# 📁 PATHS
# ═══════════════════════════════════════════════════════════════════

BASE_DIR = Path(__file__).parent
TEMPLATE_DIR = BASE_DIR / 'templates'
DATA_DIR = Path(os.environ.get('SHDEBIAS_DATA_DIR', BASE_DIR / 'data'))

# ═══════════════════════════════════════════════════════════════════
# 🔧 RUNTIME
# ═══════════════════════════════════════════════════════════════════

LOG_LEVEL = os.environ.get('SHDEBIAS_LOG_LEVEL', 'INFO').upper()
SEED = int(os.environ.get('SHDEBIAS_SEED', 7))
WORKERS = int(os.environ.get('SHDEBIAS_WORKERS', 1))

# ═══════════════════════════════════════════════════════════════════
# 💡 SPHERICAL HARMONICS
# ═══════════════════════════════════════════════════════════════════

# Ordering: Y00, Y1-1, Y10, Y11, Y2-2, Y2-1, Y20, Y21, Y22
SH_COUNT = 9
SH_Y00 = 0.282095
SH_BAND1 = 0.488603
SH_BAND2 = 1.092548
SH_Y20 = 0.315392
SH_Y22 = 0.546274

# Lambertian convolution per band
BAND_ATTENUATION = (math.pi, 2.0 * math.pi / 3.0, math.pi / 4.0)
BAND_OF_INDEX = (0, 1, 1, 1, 2, 2, 2, 2, 2)

UNIT_TOLERANCE = 1e-9
MIN_SPHERE_RESOLUTION = 8

# ═══════════════════════════════════════════════════════════════════
# 📷 CAPTURE & ESTIMATION
# ═══════════════════════════════════════════════════════════════════

GAMMA = 2.2
BIT_DEPTH = 8
NOISE_SIGMA = 0.01

REFERENCE_ALBEDO = 0.7    # fixed light-skin prior of the estimator
RIDGE_LAMBDA = 1e-3       # per unit sample weight
PRIOR_LIGHT_DC = 1.0      # ambient level the ridge pulls toward

ESTIMATOR_PRESETS = {
    'sfsnet-like': {'reference_albedo': 0.7, 'ridge_lambda': 1e-3},
    'deca-like': {'reference_albedo': 0.6, 'ridge_lambda': 3e-3},
}
DEFAULT_ESTIMATOR = 'sfsnet-like'

# ═══════════════════════════════════════════════════════════════════
# 🎨 SKIN TONE
# ═══════════════════════════════════════════════════════════════════

SKIN_TONES = ('fair', 'medium', 'tan', 'dark')

# Hard class: fair > 41, medium (19, 41], tan (-30, 19], dark <= -30
ITA_THRESHOLDS = (41.0, 19.0, -30.0)
ITA_SOFTNESS = 10.0

# D65 white, Yn normalised to 1
D65_WHITE = (0.95047, 1.0, 1.08883)

KL_EPSILON = 1e-6

# Scatter colors per class
TONE_COLORS = {
    'fair': '#e8c4a0',
    'medium': '#c68642',
    'tan': '#8d5524',
    'dark': '#3b2219',
}

# ═══════════════════════════════════════════════════════════════════
# 🧑 SYNTHETIC CORPUS
# ═══════════════════════════════════════════════════════════════════

ALBEDO_MEANS = {'fair': 0.60, 'medium': 0.45, 'tan': 0.32, 'dark': 0.18}
ALBEDO_RELATIVE_STD = 0.08
ALBEDO_RANGE = (0.02, 0.95)

# a* and b* of each class's albedo view at its reference luminance
TONE_A_STAR = 5.0
TONE_B_STAR = {'fair': 10.0, 'medium': 13.0, 'tan': 18.0, 'dark': 11.5}

# Albedo views are rendered under an ambient light with this DC
ALBEDO_VIEW_DC = 0.65

LIGHT_DC_RANGE = (0.8, 1.2)
LIGHT_BAND1_RANGE = (0.2, 0.6)   # times DC
LIGHT_BAND2_STD = 0.05           # times DC

MASK_SHADING_PERCENTILE = 25.0
MIN_CORPUS_RESOLUTION = 32
DEFAULT_RESOLUTION = 64
DEFAULT_PER_CLASS = 100

# ═══════════════════════════════════════════════════════════════════
# 📈 ANALYSIS
# ═══════════════════════════════════════════════════════════════════

SIGMA_FLOOR = 1e-8
DC_EPSILON = 1e-9

TSNE_PERPLEXITY = 30.0
TSNE_ITERATIONS = 1000
TSNE_LEARNING_RATE = 200.0
TSNE_EARLY_EXAGGERATION = 12.0
TSNE_EXAGGERATION_ITERS = 250
TSNE_MOMENTUM = (0.5, 0.8)
TSNE_TOLERANCE = 1e-5
TSNE_MAX_BISECTION = 50
TSNE_INIT_STD = 1e-4
TSNE_MIN_GAIN = 0.01

CONSISTENCY_PAIRS = 100

# Published values from trained generators; context only
REFERENCE_VALUES = {
    'consistency_avg': 0.9745,
    'consistency_std': 0.0221,
    'consistency_min': 0.6388,
    'kl_divergence': 0.0029,
    'kl_divergence_baseline': 0.0043,
    'magnitude_std_scaled': 0.1011,
    'magnitude_std_unscaled': 0.2349,
}

SCHEMA_VERSION = 'v1'
