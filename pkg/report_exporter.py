"""
Report Exporter for the SH de-biasing pipeline
Builds the corpus-level report and exports it as JSON and Markdown
"""

import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np

import config
from debias import aligned_separability, cross_fit_align, normalize_dc, separability
from light_estimation import SensorConfig, simulate_capture
from magnitude_scaling import (
    FaceMask, class_magnitude_means, illum_magnitude, magnitude_std, normalize_magnitude, scale_factor,
    within_class_std,
)
from sh_lighting import NormalMap, PreconditionError, ShCoeffs, render, sphere_normal_map
from skin_tone import (
    SkinTone, classify_ita, consistency_score, consistency_stats, kl_divergence, tone_distribution,
)
from synthetic_faces import (
    AlbedoSample, ClassAlbedoModel, LabeledSample, albedo_plane, capture_albedo_view, default_mask,
)

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════
# 🎨 RELIGHT CONSISTENCY
# ═══════════════════════════════════════════════════════════════════

def relight_consistency(albedo: AlbedoSample, lights: Sequence[ShCoeffs], normals: NormalMap,
                        gamma: float = config.GAMMA) -> List[float]:
    """
    Consistency between the albedo's own tone scores and those of each relit image

    The albedo view is the albedo under the ambient reference light;
    relit images are captured noise free at 8 bits.
    """
    view = capture_albedo_view(albedo, normals, gamma)
    _, albedo_scores = classify_ita(view, FaceMask(normals.valid))

    sensor = SensorConfig(bit_depth=8, noise_sigma=0.0)
    scores = []
    for light in lights:
        relit = simulate_capture(render(normals, albedo_plane(albedo, normals), light), sensor, gamma)
        _, relit_scores = classify_ita(relit, default_mask(normals, light))
        scores.append(consistency_score(albedo_scores, relit_scores))
    return scores


# ═══════════════════════════════════════════════════════════════════
# 📊 REPORT
# ═══════════════════════════════════════════════════════════════════

def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def build_report(samples: Sequence[LabeledSample], seed: int = config.SEED,
                 consistency_pairs: int = config.CONSISTENCY_PAIRS, gamma: float = config.GAMMA) -> Dict:
    """Report dictionary for a corpus whose samples carry raw estimates"""
    samples = sorted(samples, key=lambda s: s.id)
    if any(s.estimate is None for s in samples):
        raise PreconditionError("every sample needs an estimated light for the report")

    tones = [s.tone for s in samples]
    truth_n = [normalize_dc(s.light) for s in samples]
    raw = [s.estimate for s in samples]
    estimated_n = [normalize_dc(l) for l in raw]
    records = [(s.id, l_n, s.tone) for s, l_n in zip(samples, estimated_n)]
    aligned = cross_fit_align(records)

    def separation(coeffs) -> Dict:
        return separability([(c.as_array(), tone) for c, tone in zip(coeffs, tones)]).to_dict()

    dark_dc = [l.dc for l, tone in zip(raw, tones) if tone.is_dark]
    non_dark_dc = [l.dc for l, tone in zip(raw, tones) if not tone.is_dark]
    mean_dc = {'dark': _mean(dark_dc), 'non_dark': _mean(non_dark_dc)}
    mean_dc['relative_gap'] = 1.0 - mean_dc['dark'] / mean_dc['non_dark']

    # Consistency: relight the fair class mean albedo with sampled lights
    model = ClassAlbedoModel()
    fair = AlbedoSample(model.means[SkinTone.FAIR], model.tints[SkinTone.FAIR])
    normals = sphere_normal_map(samples[0].image.height)
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(len(samples), size=min(consistency_pairs, len(samples)), replace=False))
    light_sets = {
        'raw': [raw[k] for k in picks],
        'normalized': [ShCoeffs(estimated_n[k].c) for k in picks],
        'aligned': [ShCoeffs(aligned[k].c) for k in picks],
    }
    consistency = {
        name: consistency_stats(relight_consistency(fair, lights, normals, gamma))
        for name, lights in light_sets.items()
    }

    # Label distribution against the ITA classifier on albedo views
    predicted = [classify_ita(s.albedo_view, s.mask)[0] for s in samples]
    label_dist, ita_dist = tone_distribution(tones), tone_distribution(predicted)

    # Magnitude spread: corpus-wide against the global mean, within class against the class means
    magnitudes = [illum_magnitude(s.image, s.mask) for s in samples]
    cm = class_magnitude_means((s.image, s.mask, s.tone) for s in samples)
    class_scales = [scale_factor(s.image, s.mask, s.tone, cm) for s in samples]
    global_scales = [scale_factor(s.image, s.mask, s.tone, cm, per_class=False) for s in samples]
    global_normalized = [normalize_magnitude(s.image, scale, gamma) for s, scale in zip(samples, global_scales)]
    class_normalized = [
        illum_magnitude(normalize_magnitude(s.image, scale, gamma), s.mask)
        for s, scale in zip(samples, class_scales)
    ]
    per_class_scale = {
        tone.value: _mean([sc for sc, t in zip(class_scales, tones) if t is tone])
        for tone in sorted(set(tones), key=lambda t: t.index)
    }

    report = {
        'schema': config.SCHEMA_VERSION,
        'seed': seed,
        'items': len(samples),
        'separability': {
            'ground_truth': separation(truth_n),
            'raw': separation(raw),
            'normalized': separation(estimated_n),
            'aligned': aligned_separability(records).to_dict(),
        },
        'mean_dc': mean_dc,
        'consistency': consistency,
        'tone_distribution': {
            'labels': label_dist.to_dict(),
            'ita': ita_dist.to_dict(),
            'ita_agreement': _mean([float(p is t) for p, t in zip(predicted, tones)]),
            'kl_divergence': kl_divergence(label_dist, ita_dist),
        },
        'magnitude': {
            'std_before': magnitude_std((s.image, s.mask) for s in samples),
            'std_after': magnitude_std(zip(global_normalized, [s.mask for s in samples])),
            'within_class_std_before': within_class_std(magnitudes, tones),
            'within_class_std_after': within_class_std(class_normalized, tones),
            'mean_scale_per_class': per_class_scale,
        },
        'reference_values': dict(config.REFERENCE_VALUES, note='published values, not reproducible here'),
    }
    logger.info(f"Built report over {len(samples)} samples")
    return report


# ═══════════════════════════════════════════════════════════════════
# 📤 EXPORT
# ═══════════════════════════════════════════════════════════════════

class ReportExporter:
    """Export the report in JSON and Markdown"""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)

    def export_all(self, report: Dict, filename_base: str = 'report') -> Dict[str, Path]:
        """
        Export the report in every format

        Returns:
            Dict mapping format to filepath
        """
        self.out_dir.mkdir(parents=True, exist_ok=True)
        results = {'json': self.export_json(report, filename_base)}
        logger.info(f"Exported JSON to {results['json']}")
        results['markdown'] = self.export_markdown(report, filename_base)
        logger.info(f"Exported Markdown to {results['markdown']}")
        return results

    def export_json(self, report: Dict, filename: str = 'report') -> Path:
        filepath = self.out_dir / f"{filename}.json"
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(report, f, indent=2, sort_keys=True)
            f.write('\n')
        return filepath

    def export_markdown(self, report: Dict, filename: str = 'report') -> Path:
        filepath = self.out_dir / f"{filename}.md"
        with open(filepath, 'w', encoding='utf-8') as f:
            f.write(build_markdown(report))
        return filepath


def build_markdown(report: Dict) -> str:
    """Human-readable summary of a report dictionary"""
    sep = report['separability']
    dc = report['mean_dc']
    tones = report['tone_distribution']
    magnitude = report['magnitude']

    text = f"""# 📊 SH Lighting Bias Report

**Items:** {report['items']}
**Seed:** {report['seed']}

---

## 🔍 Dark vs Non-dark Separability

| Coefficients | NC accuracy | Centroid gap |
|--------------|-------------|--------------|
"""
    for name in ('ground_truth', 'raw', 'normalized', 'aligned'):
        text += f"| {name.replace('_', ' ')} | {sep[name]['nc_accuracy']:.3f} | {sep[name]['centroid_gap']:.3f} |\n"

    text += f"""
**Mean estimated DC:** dark {dc['dark']:.4f}, non-dark {dc['non_dark']:.4f} ({dc['relative_gap'] * 100:.1f}% lower)

---

## 🎨 Skin Tone Consistency

| Lights | Avg | Std | Min |
|--------|-----|-----|-----|
"""
    for name, stats in report['consistency'].items():
        text += f"| {name} | {stats['avg']:.4f} | {stats['std']:.4f} | {stats['min']:.4f} |\n"

    text += f"""
**KL(labels ‖ ITA):** {tones['kl_divergence']:.4f} (agreement {tones['ita_agreement'] * 100:.1f}%)

---

## 🔆 Illumination Magnitude

| | Magnitude std (global reference) | Within-class std (class reference) |
|--|----------------------------------|------------------------------------|
| Before scaling | {magnitude['std_before']:.4f} | {magnitude['within_class_std_before']:.4f} |
| After scaling | {magnitude['std_after']:.4f} | {magnitude['within_class_std_after']:.4f} |

---

## 📚 Published Reference Values

These come from trained generators on real portraits and are not reproduced by this toolkit.

| Metric | Value |
|--------|-------|
"""
    for key, value in report['reference_values'].items():
        if key != 'note':
            text += f"| {key} | {value} |\n"
    return text
