"""
cli_pipeline.py - Command-line entry point for the SH de-biasing toolkit

    shdebias synth-gen --per-class 100 --seed 7 --out corpus/
    shdebias estimate --corpus corpus/ --out coeffs_raw.csv
    shdebias stats --corpus corpus/ --coeffs coeffs_raw.csv --out stats/
    shdebias align --coeffs coeffs_raw.csv --stats stats/alignment_stats.json --out coeffs_aligned.csv
    shdebias embed --coeffs coeffs_raw.csv --aligned coeffs_aligned.csv --out plots/
    shdebias relight-scale --corpus corpus/ --mode normalize --out scaled/
    shdebias report --corpus corpus/ --coeffs coeffs_raw.csv --out report/
    shdebias run --out work/

Exit codes: 0 success, 1 runtime or data error, 2 usage or config error.
"""

import dataclasses
import functools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import click
import numpy as np
from dotenv import dotenv_values

import config
from debias import AlignmentStats, NormalizedCoeffs, align, compute_alignment_stats, cross_fit_align, normalize_dc, separability
from embedding_analysis import TsneConfig, analysis_protocol, band0_scatter, nearest_centroid_accuracy, to_points, tsne
from image_io import CoeffFormatError, CoeffKind, CoeffRecord, emit_scatter, read_coeffs, write_coeffs, write_png
from light_estimation import EstimatorConfig, SensorConfig, biased_estimate, simulate_capture
from magnitude_scaling import (
    ClassMagnitudes, apply_scale, class_magnitude_means, illum_magnitude, magnitude_std, normalize_magnitude,
    sample_training_scales, scale_factor, within_class_std,
)
from parallel import process_parallel
from report_exporter import ReportExporter, build_report
from sh_lighting import PreconditionError, ShCoeffs, render, sphere_normal_map
from skin_tone import SkinTone, ingest_labels
from synthetic_faces import LABELS_FILE, albedo_plane, generate_corpus, read_corpus, write_corpus

logger = logging.getLogger(__name__)

ALIGNMENT_STATS_FILE = 'alignment_stats.json'
CLASS_MAGNITUDES_FILE = 'class_magnitudes.json'


# ═══════════════════════════════════════════════════════════════════
# ⚙️ PIPELINE CONFIG
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class PipelineConfig:
    """Resolved settings: config.py defaults, then the run file, then flags"""
    seed: int = config.SEED
    workers: int = config.WORKERS
    per_class: int = config.DEFAULT_PER_CLASS
    resolution: int = config.DEFAULT_RESOLUTION
    gamma: float = config.GAMMA
    bit_depth: int = config.BIT_DEPTH
    noise_sigma: float = config.NOISE_SIGMA
    estimator: str = config.DEFAULT_ESTIMATOR
    perplexity: float = config.TSNE_PERPLEXITY
    tsne_iterations: int = config.TSNE_ITERATIONS
    consistency_pairs: int = config.CONSISTENCY_PAIRS

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise PreconditionError("gamma must be > 0")
        if self.workers < 1 or self.per_class < 1:
            raise PreconditionError("workers and per-class must be >= 1")
        if self.estimator not in config.ESTIMATOR_PRESETS:
            raise PreconditionError(
                f"unknown estimator {self.estimator!r}; choose from {', '.join(sorted(config.ESTIMATOR_PRESETS))}"
            )

    def sensor(self) -> SensorConfig:
        return SensorConfig(self.bit_depth, self.noise_sigma, self.seed)

    def estimator_config(self) -> EstimatorConfig:
        return EstimatorConfig.preset(self.estimator, self.sensor())

    def tsne_config(self) -> TsneConfig:
        return TsneConfig(perplexity=self.perplexity, iterations=self.tsne_iterations, seed=self.seed)


# KEY=VALUE run file keys -> (PipelineConfig field, parser)
RUN_FILE_KEYS = {
    'SEED': ('seed', int),
    'WORKERS': ('workers', int),
    'PER_CLASS': ('per_class', int),
    'RESOLUTION': ('resolution', int),
    'GAMMA': ('gamma', float),
    'BIT_DEPTH': ('bit_depth', int),
    'NOISE_SIGMA': ('noise_sigma', float),
    'ESTIMATOR': ('estimator', str),
    'PERPLEXITY': ('perplexity', float),
    'TSNE_ITERATIONS': ('tsne_iterations', int),
    'CONSISTENCY_PAIRS': ('consistency_pairs', int),
}


def load_run_file(path: str) -> Dict[str, object]:
    """Parse a KEY=VALUE run file into PipelineConfig overrides"""
    overrides = {}
    for key, value in dotenv_values(path).items():
        if key not in RUN_FILE_KEYS:
            raise click.UsageError(f"{path}: unknown key {key}")
        name, parse = RUN_FILE_KEYS[key]
        try:
            overrides[name] = parse(value)
        except (TypeError, ValueError):
            raise click.UsageError(f"{path}: invalid value for {key}: {value!r}") from None
    return overrides


def resolve_config(ctx: click.Context, **flags) -> PipelineConfig:
    settings = dict(ctx.obj.get('run_file', {}) if ctx.obj else {})
    settings.update({name: value for name, value in flags.items() if value is not None})
    try:
        return PipelineConfig(**settings)
    except PreconditionError as e:
        raise click.UsageError(str(e)) from e


def reports_errors(fn):
    """Turn data and runtime failures into exit code 1 with the message"""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, RuntimeError, OSError, LookupError) as e:
            logger.error(f"{fn.__name__.replace('_', '-')} failed: {e}")
            raise click.ClickException(str(e)) from e
    return wrapper


# ═══════════════════════════════════════════════════════════════════
# 🔧 HELPERS
# ═══════════════════════════════════════════════════════════════════

def _with_tones(records: List[CoeffRecord], corpus_dir: Optional[Path] = None) -> List[CoeffRecord]:
    """Fill missing classes from the corpus labels; every record must end up labelled"""
    if all(r.tone is not None for r in records):
        return records
    if corpus_dir is None:
        raise CoeffFormatError("coefficient records carry no class and no corpus labels were given")
    labels = ingest_labels(Path(corpus_dir) / LABELS_FILE)
    missing = [r.id for r in records if r.tone is None and r.id not in labels]
    if missing:
        raise CoeffFormatError(f"no class for ids {', '.join(missing[:5])}")
    return [r if r.tone is not None else dataclasses.replace(r, tone=labels[r.id]) for r in records]


def _normalized(record: CoeffRecord) -> NormalizedCoeffs:
    if record.kind is CoeffKind.ALIGNED:
        raise CoeffFormatError(f"{record.id}: expected raw or normalized coefficients, got aligned")
    if record.kind is CoeffKind.NORMALIZED:
        return NormalizedCoeffs(record.coeffs)
    return normalize_dc(ShCoeffs(record.coeffs))


def _raw_lights(records: List[CoeffRecord]) -> Dict[str, ShCoeffs]:
    for r in records:
        if r.kind not in (None, CoeffKind.RAW):
            raise CoeffFormatError(f"{r.id}: expected raw coefficients, got {r.kind.value}")
    return {r.id: ShCoeffs(r.coeffs) for r in records}


def _per_class_means(values: List[float], tones: List[SkinTone]) -> Dict[str, float]:
    return {
        tone.value: float(np.mean([v for v, t in zip(values, tones) if t is tone]))
        for tone in sorted(set(tones), key=lambda t: t.index)
    }


# ═══════════════════════════════════════════════════════════════════
# 🧪 PIPELINE STEPS
# ═══════════════════════════════════════════════════════════════════

def run_synth_gen(cfg: PipelineConfig, out: Path) -> Path:
    sensor = cfg.sensor()
    samples = generate_corpus(cfg.per_class, cfg.resolution, sensor, cfg.seed,
                              workers=cfg.workers, gamma=cfg.gamma)
    return write_corpus(samples, out, cfg.resolution, sensor, cfg.seed, cfg.gamma, cfg.workers)


def run_estimate(cfg: PipelineConfig, corpus_dir: Path, out: Path, unbiased: bool = False) -> List[CoeffRecord]:
    manifest, samples = read_corpus(corpus_dir, cfg.workers)
    normals = sphere_normal_map(manifest.resolution)
    estimator = cfg.estimator_config()

    def fit(sample):
        settings = estimator.unbiased(sample.albedo.value) if unbiased else estimator
        return biased_estimate(sample.image, normals, settings)

    lights = process_parallel(fit, samples, cfg.workers, label=lambda s: s.id)
    records = [CoeffRecord(s.id, l.c, s.tone, CoeffKind.RAW) for s, l in zip(samples, lights)]
    write_coeffs(records, out)
    logger.info(f"Estimated {len(records)} lights ({'unbiased' if unbiased else cfg.estimator})")
    return records


def run_stats(cfg: PipelineConfig, corpus_dir: Path, coeffs_path: Path, out_dir: Path):
    records = _with_tones(read_coeffs(coeffs_path), corpus_dir)
    stats = compute_alignment_stats([(_normalized(r), r.tone) for r in records])

    _, samples = read_corpus(corpus_dir, cfg.workers)
    magnitudes = class_magnitude_means((s.image, s.mask, s.tone) for s in samples)

    out_dir.mkdir(parents=True, exist_ok=True)
    stats.save(out_dir / ALIGNMENT_STATS_FILE)
    magnitudes.save(out_dir / CLASS_MAGNITUDES_FILE)
    logger.info(f"Wrote alignment stats ({stats.n_d} dark, {stats.n_nd} non-dark) to {out_dir}")
    return stats, magnitudes


def run_align(coeffs_path: Path, stats_path: Path, out: Path, corpus_dir: Optional[Path] = None) -> List[CoeffRecord]:
    stats = AlignmentStats.load(stats_path)
    records = _with_tones(read_coeffs(coeffs_path), corpus_dir)
    aligned = [
        CoeffRecord(r.id, align(_normalized(r), r.tone, stats).c, r.tone, CoeffKind.ALIGNED)
        for r in records
    ]
    write_coeffs(aligned, out)
    logger.info(f"Aligned {len(aligned)} lights")
    return aligned


def run_embed(cfg: PipelineConfig, coeffs_path: Path, out_dir: Path, aligned_path: Optional[Path] = None,
              with_normalized: bool = False, corpus_dir: Optional[Path] = None) -> Dict[str, dict]:
    records = sorted(_with_tones(read_coeffs(coeffs_path), corpus_dir), key=lambda r: r.id)
    _raw_lights(records)
    sampled = [r for r, _ in analysis_protocol([(r, r.tone) for r in records], cfg.per_class, cfg.seed)]
    ids = [r.id for r in sampled]
    tones = [r.tone for r in sampled]
    raw = np.array([r.coeffs for r in sampled])
    normalized = [_normalized(r) for r in sampled]

    if aligned_path is not None:
        by_id = {r.id: r for r in read_coeffs(aligned_path)}
        missing = [i for i in ids if i not in by_id]
        if missing:
            raise CoeffFormatError(f"{aligned_path}: no aligned coefficients for {', '.join(missing[:5])}")
        aligned = np.array([by_id[i].coeffs for i in ids])
    else:
        aligned = np.array([a.c for a in cross_fit_align(list(zip(ids, normalized, tones)))])

    tsne_cfg = cfg.tsne_config()
    plots = {
        'tsne_raw': ('raw SH coefficients', tsne(raw, tsne_cfg)),
        'band0': ('band 0 (DC) with random jitter', band0_scatter(raw[:, 0], cfg.seed)),
        'tsne_bands': ('raw bands 1-2', tsne(raw[:, 1:], tsne_cfg)),
        'tsne_aligned': ('normalized and aligned', tsne(aligned, tsne_cfg)),
    }
    if with_normalized:
        plots['tsne_normalized'] = ('DC-normalized', tsne(np.array([n.c for n in normalized]), tsne_cfg))

    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {}
    for name, (title, coords) in plots.items():
        emit_scatter(to_points(coords, ids, tones), out_dir / name, title)
        summary[name] = {
            'separability': separability(list(zip(coords, tones))).to_dict(),
            'class_centroid_accuracy': nearest_centroid_accuracy(coords, tones),
        }
    with open(out_dir / 'embedding_summary.json', 'w', encoding='utf-8') as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write('\n')
    return summary


def run_relight_scale(cfg: PipelineConfig, corpus_dir: Path, out_dir: Path, mode: str,
                      fixed_scale: Optional[float] = None, aligned_path: Optional[Path] = None,
                      magnitudes_path: Optional[Path] = None, reference: str = 'global') -> dict:
    manifest, samples = read_corpus(corpus_dir, cfg.workers)
    tones = [s.tone for s in samples]
    masks = [s.mask for s in samples]
    cm = ClassMagnitudes.load(magnitudes_path) if magnitudes_path else \
        class_magnitude_means((s.image, s.mask, s.tone) for s in samples)
    class_scales = [scale_factor(s.image, s.mask, s.tone, cm) for s in samples]

    if fixed_scale is not None:
        mode = 'fixed'
        reference = None
        before = [s.image for s in samples]
        scales = [fixed_scale] * len(samples)
        after = [apply_scale(img, fixed_scale) for img in before]
    elif mode == 'normalize':
        before = [s.image for s in samples]
        scales = class_scales if reference == 'class' else \
            [scale_factor(s.image, s.mask, s.tone, cm, per_class=False) for s in samples]
        after = [normalize_magnitude(img, s) for img, s in zip(before, scales)]
    else:
        if aligned_path is None:
            raise click.UsageError("--mode randomize needs --aligned coefficients")
        aligned = {r.id: r for r in read_coeffs(aligned_path)}
        normals = sphere_normal_map(manifest.resolution)
        sensor = SensorConfig(bit_depth=8, noise_sigma=0.0)

        def relight(sample):
            if sample.id not in aligned:
                raise CoeffFormatError(f"no aligned light for {sample.id}")
            light = ShCoeffs(aligned[sample.id].coeffs)
            return simulate_capture(render(normals, albedo_plane(sample.albedo, normals), light),
                                    sensor, manifest.gamma)

        before = process_parallel(relight, samples, cfg.workers, label=lambda s: s.id)
        reference = 'class'
        scales = sample_training_scales(list(zip(class_scales, tones)), tones, cfg.seed)
        after = [apply_scale(img, s) for img, s in zip(before, scales)]

    images_dir = out_dir / 'images'
    images_dir.mkdir(parents=True, exist_ok=True)
    process_parallel(lambda k: write_png(after[k], images_dir / f"{samples[k].id}.png"),
                     list(range(len(samples))), cfg.workers, label=lambda k: samples[k].id)

    m_before = [illum_magnitude(img, mask) for img, mask in zip(before, masks)]
    m_after = [illum_magnitude(img, mask) for img, mask in zip(after, masks)]
    report = {
        'schema': config.SCHEMA_VERSION,
        'mode': mode,
        'reference': reference,
        'items': len(samples),
        'magnitude_std_before': magnitude_std(zip(before, masks)),
        'magnitude_std_after': magnitude_std(zip(after, masks)),
        'within_class_std_before': within_class_std(m_before, tones),
        'within_class_std_after': within_class_std(m_after, tones),
        'mean_scale_per_class': _per_class_means(class_scales, tones),
        'mean_applied_scale_per_class': _per_class_means(scales, tones),
    }
    with open(out_dir / 'magnitude_report.json', 'w', encoding='utf-8') as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info(f"Scaled {len(samples)} images ({mode})")
    return report


def run_report(cfg: PipelineConfig, corpus_dir: Path, coeffs_path: Path, out_dir: Path) -> dict:
    manifest, samples = read_corpus(corpus_dir, cfg.workers)
    lights = _raw_lights(read_coeffs(coeffs_path))
    missing = [s.id for s in samples if s.id not in lights]
    if missing:
        raise CoeffFormatError(f"{coeffs_path}: no estimate for {', '.join(missing[:5])}")

    samples = [dataclasses.replace(s, estimate=lights[s.id]) for s in samples]
    report = build_report(samples, cfg.seed, cfg.consistency_pairs, manifest.gamma)
    ReportExporter(out_dir).export_all(report)
    return report


# ═══════════════════════════════════════════════════════════════════
# 💻 COMMANDS
# ═══════════════════════════════════════════════════════════════════

seed_option = click.option('--seed', type=int, default=None, help='Master seed')
workers_option = click.option('--workers', type=click.IntRange(min=1), default=None, help='Worker threads')
per_class_option = click.option('--per-class', type=click.IntRange(min=1), default=None,
                                help='Items per skin tone class')
out_path = click.Path(path_type=Path)
existing_dir = click.Path(exists=True, file_okay=False, path_type=Path)
existing_file = click.Path(exists=True, dir_okay=False, path_type=Path)


@click.group(name='shdebias')
@click.option('--config', 'run_file', type=click.Path(exists=True, dir_okay=False), default=None,
              help='KEY=VALUE run file; flags win over its values')
@click.pass_context
def cli(ctx, run_file):
    """SH lighting de-biasing toolkit"""
    logging.basicConfig(level=config.LOG_LEVEL)
    ctx.obj = {'run_file': load_run_file(run_file) if run_file else {}}


@cli.command('synth-gen')
@click.option('--out', required=True, type=out_path, help='Corpus directory to create')
@per_class_option
@click.option('--resolution', type=click.IntRange(min=config.MIN_CORPUS_RESOLUTION), default=None)
@click.option('--bit-depth', type=click.IntRange(min=1, max=8), default=None)
@click.option('--noise-sigma', type=click.FloatRange(min=0.0), default=None)
@seed_option
@workers_option
@click.pass_context
@reports_errors
def synth_gen(ctx, out, per_class, resolution, bit_depth, noise_sigma, seed, workers):
    """Generate a seeded synthetic corpus"""
    cfg = resolve_config(ctx, per_class=per_class, resolution=resolution, bit_depth=bit_depth,
                         noise_sigma=noise_sigma, seed=seed, workers=workers)
    run_synth_gen(cfg, out)
    click.echo(f"Wrote {4 * cfg.per_class} samples to {out}")


@cli.command('estimate')
@click.option('--corpus', required=True, type=existing_dir)
@click.option('--out', required=True, type=out_path, help='Coefficient file (.csv or .json)')
@click.option('--estimator', type=click.Choice(sorted(config.ESTIMATOR_PRESETS)), default=None)
@click.option('--unbiased', is_flag=True, help='Use the true albedo and no regularisation')
@workers_option
@click.pass_context
@reports_errors
def estimate(ctx, corpus, out, estimator, unbiased, workers):
    """Estimate a raw SH light for every corpus image"""
    cfg = resolve_config(ctx, estimator=estimator, workers=workers)
    records = run_estimate(cfg, corpus, out, unbiased)
    click.echo(f"Wrote {len(records)} coefficient records to {out}")


@cli.command('stats')
@click.option('--corpus', required=True, type=existing_dir)
@click.option('--coeffs', required=True, type=existing_file)
@click.option('--out', required=True, type=out_path, help='Directory for the statistics files')
@workers_option
@click.pass_context
@reports_errors
def stats(ctx, corpus, coeffs, out, workers):
    """Compute alignment statistics and class magnitudes"""
    cfg = resolve_config(ctx, workers=workers)
    run_stats(cfg, corpus, coeffs, out)
    click.echo(f"Wrote {ALIGNMENT_STATS_FILE} and {CLASS_MAGNITUDES_FILE} to {out}")


@cli.command('align')
@click.option('--coeffs', required=True, type=existing_file)
@click.option('--stats', 'stats_file', required=True, type=existing_file)
@click.option('--out', required=True, type=out_path)
@click.option('--corpus', type=existing_dir, default=None, help='Labels for records without a class')
@click.pass_context
@reports_errors
def align_cmd(ctx, coeffs, stats_file, out, corpus):
    """Normalize and align coefficients"""
    resolve_config(ctx)
    records = run_align(coeffs, stats_file, out, corpus)
    click.echo(f"Wrote {len(records)} aligned records to {out}")


@cli.command('embed')
@click.option('--coeffs', required=True, type=existing_file, help='Raw coefficients')
@click.option('--out', required=True, type=out_path, help='Directory for the plots')
@click.option('--aligned', type=existing_file, default=None, help='Aligned coefficients (cross-fit when absent)')
@click.option('--with-normalized', is_flag=True, help='Also plot DC-normalized coefficients')
@click.option('--corpus', type=existing_dir, default=None, help='Labels for records without a class')
@per_class_option
@click.option('--perplexity', type=float, default=None)
@click.option('--iterations', 'tsne_iterations', type=click.IntRange(min=1), default=None)
@seed_option
@click.pass_context
@reports_errors
def embed(ctx, coeffs, out, aligned, with_normalized, corpus, per_class, perplexity, tsne_iterations, seed):
    """t-SNE and band-0 scatter plots"""
    cfg = resolve_config(ctx, per_class=per_class, perplexity=perplexity,
                         tsne_iterations=tsne_iterations, seed=seed)
    summary = run_embed(cfg, coeffs, out, aligned, with_normalized, corpus)
    click.echo(f"Wrote {len(summary)} plots to {out}")


@cli.command('relight-scale')
@click.option('--corpus', required=True, type=existing_dir)
@click.option('--out', required=True, type=out_path)
@click.option('--mode', type=click.Choice(['normalize', 'randomize']), default='normalize')
@click.option('--fixed-scale', type=click.FloatRange(min=0.0, min_open=True), default=None,
              help='Apply one scale to every image')
@click.option('--aligned', type=existing_file, default=None, help='Aligned lights for randomize')
@click.option('--magnitudes', type=existing_file, default=None, help='Class magnitudes JSON')
@click.option('--reference', type=click.Choice(['global', 'class']), default='global',
              help='Normalize toward the global mean magnitude or each class mean')
@seed_option
@workers_option
@click.pass_context
@reports_errors
def relight_scale(ctx, corpus, out, mode, fixed_scale, aligned, magnitudes, reference, seed, workers):
    """Gamma-domain illumination magnitude scaling"""
    cfg = resolve_config(ctx, seed=seed, workers=workers)
    report = run_relight_scale(cfg, corpus, out, mode, fixed_scale, aligned, magnitudes, reference)
    click.echo(f"Magnitude std {report['magnitude_std_before']:.4f} -> {report['magnitude_std_after']:.4f} "
               f"(within class {report['within_class_std_before']:.4f} -> {report['within_class_std_after']:.4f})")


@cli.command('report')
@click.option('--corpus', required=True, type=existing_dir)
@click.option('--coeffs', required=True, type=existing_file, help='Raw coefficients')
@click.option('--out', required=True, type=out_path)
@seed_option
@workers_option
@click.pass_context
@reports_errors
def report_cmd(ctx, corpus, coeffs, out, seed, workers):
    """Bias and mitigation report (JSON + Markdown)"""
    cfg = resolve_config(ctx, seed=seed, workers=workers)
    run_report(cfg, corpus, coeffs, out)
    click.echo(f"Wrote report to {out}")


@cli.command('run')
@click.option('--out', type=out_path, default=config.DATA_DIR, show_default=True, help='Working directory')
@per_class_option
@click.option('--resolution', type=click.IntRange(min=config.MIN_CORPUS_RESOLUTION), default=None)
@click.option('--estimator', type=click.Choice(sorted(config.ESTIMATOR_PRESETS)), default=None)
@click.option('--perplexity', type=float, default=None)
@click.option('--iterations', 'tsne_iterations', type=click.IntRange(min=1), default=None)
@seed_option
@workers_option
@click.pass_context
@reports_errors
def run(ctx, out, per_class, resolution, estimator, perplexity, tsne_iterations, seed, workers):
    """synth-gen, estimate, stats, align, embed and report in one go"""
    cfg = resolve_config(ctx, per_class=per_class, resolution=resolution, estimator=estimator,
                         perplexity=perplexity, tsne_iterations=tsne_iterations, seed=seed, workers=workers)
    corpus = run_synth_gen(cfg, out / 'corpus')
    run_estimate(cfg, corpus, out / 'coeffs_raw.csv')
    run_stats(cfg, corpus, out / 'coeffs_raw.csv', out / 'stats')
    run_align(out / 'coeffs_raw.csv', out / 'stats' / ALIGNMENT_STATS_FILE, out / 'coeffs_aligned.csv')
    run_embed(cfg, out / 'coeffs_raw.csv', out / 'plots')
    run_report(cfg, corpus, out / 'coeffs_raw.csv', out / 'report')
    click.echo(f"Pipeline finished in {out}")


if __name__ == '__main__':
    cli()
