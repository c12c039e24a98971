"""Tests for DC normalization, alignment and separability"""

import numpy as np
import pytest

from debias import (
    AlignedCoeffs, AlignmentStats, DegenerateLightError, InsufficientGroupError, NormalizedCoeffs, align,
    aligned_separability, compute_alignment_stats, cross_fit_align, normalize_dc, separability, unalign,
)
from sh_lighting import PreconditionError, ShCoeffs
from skin_tone import ALL_TONES, SkinTone


def _normalized(*higher) -> NormalizedCoeffs:
    values = list(higher) + [0.0] * (8 - len(higher))
    return NormalizedCoeffs((1.0,) + tuple(values))


def _stats(mu_d=0.0, sigma_d=1.0, mu_nd=0.0, sigma_nd=1.0) -> AlignmentStats:
    return AlignmentStats((mu_d,) * 8, (sigma_d,) * 8, (mu_nd,) * 8, (sigma_nd,) * 8, 10, 30)


def _random_corpus(seed: int, n_per_class: int, dark_shift: float = 0.0, dark_scale: float = 1.0):
    rng = np.random.default_rng(seed)
    corpus = []
    for tone in ALL_TONES:
        for _ in range(n_per_class):
            higher = rng.normal(0.0, 0.2, size=8)
            if tone.is_dark:
                higher = higher * dark_scale + dark_shift
            corpus.append((NormalizedCoeffs((1.0,) + tuple(higher)), tone))
    return corpus


# ═══════════════════════════════════════════════════════════════════
# Normalization
# ═══════════════════════════════════════════════════════════════════

def test_normalize_dc():
    assert normalize_dc(ShCoeffs((2.0, 1.0) + (0.0,) * 7)).c == (1.0, 0.5) + (0.0,) * 7


def test_normalize_dc_identity_for_unit_dc():
    l = ShCoeffs((1.0, 0.3, -0.2, 0.1, 0.0, 0.05, 0.0, 0.01, 0.0))
    assert normalize_dc(l).c == l.c


def test_normalize_dc_rejects_zero():
    with pytest.raises(DegenerateLightError):
        normalize_dc(ShCoeffs.zeros())


def test_normalized_coeffs_require_unit_dc():
    with pytest.raises(PreconditionError):
        NormalizedCoeffs((0.9,) + (0.0,) * 8)


# ═══════════════════════════════════════════════════════════════════
# Alignment statistics
# ═══════════════════════════════════════════════════════════════════

def test_alignment_stats_two_point():
    corpus = [(_normalized(0.2), SkinTone.DARK), (_normalized(0.4), SkinTone.DARK),
              (_normalized(0.0), SkinTone.FAIR), (_normalized(1.0), SkinTone.TAN)]
    stats = compute_alignment_stats(corpus)
    assert stats.mu_d[0] == pytest.approx(0.3)
    assert stats.sigma_d[0] == pytest.approx(0.1)
    assert stats.mu_nd[0] == pytest.approx(0.5)
    assert (stats.n_d, stats.n_nd) == (2, 2)


def test_alignment_stats_floor_sigma():
    corpus = [(_normalized(0.1), tone) for tone in (SkinTone.DARK, SkinTone.DARK, SkinTone.FAIR, SkinTone.MEDIUM)]
    stats = compute_alignment_stats(corpus)
    assert all(s == 1e-8 for s in stats.sigma_d + stats.sigma_nd)


def test_alignment_stats_order_invariant():
    corpus = _random_corpus(1, 20)
    assert compute_alignment_stats(corpus) == compute_alignment_stats(corpus[::-1])


def test_alignment_stats_need_both_groups():
    corpus = [(_normalized(0.1), SkinTone.FAIR), (_normalized(0.2), SkinTone.TAN), (_normalized(0.3), SkinTone.DARK)]
    with pytest.raises(InsufficientGroupError):
        compute_alignment_stats(corpus)


def test_alignment_stats_save_load(tmp_path):
    stats = compute_alignment_stats(_random_corpus(2, 10))
    stats.save(tmp_path / 'stats.json')
    assert AlignmentStats.load(tmp_path / 'stats.json') == stats


def test_alignment_stats_reject_unknown_schema():
    data = _stats().to_dict()
    data['schema'] = 'v0'
    with pytest.raises(PreconditionError):
        AlignmentStats.from_dict(data)


# ═══════════════════════════════════════════════════════════════════
# Alignment
# ═══════════════════════════════════════════════════════════════════

def test_align_passes_non_dark_through():
    l_n = _normalized(0.5, -0.2, 0.3)
    for tone in (SkinTone.FAIR, SkinTone.MEDIUM, SkinTone.TAN):
        assert align(l_n, tone, _stats(0.2, 0.1, 0.0, 0.2)).c == l_n.c


def test_align_identity_when_groups_match():
    l_n = _normalized(0.5, -0.2, 0.3)
    assert align(l_n, SkinTone.DARK, _stats(0.1, 0.3, 0.1, 0.3)).c == pytest.approx(l_n.c, abs=1e-15)


def test_align_dark_value():
    aligned = align(_normalized(0.5), SkinTone.DARK, _stats(0.2, 0.1, 0.0, 0.2))
    assert aligned.c[1] == pytest.approx(0.6, abs=1e-12)
    assert aligned.c[0] == 1.0


def test_align_round_trip():
    stats = _stats(0.2, 0.1, -0.1, 0.3)
    l_n = _normalized(0.5, -0.2, 0.3, 0.1)
    restored = unalign(align(l_n, SkinTone.DARK, stats), SkinTone.DARK, stats)
    assert restored.c == pytest.approx(l_n.c, abs=1e-9)


def test_aligned_corpus_matches_non_dark_moments():
    corpus = _random_corpus(4, 100, dark_shift=0.3, dark_scale=0.5)
    stats = compute_alignment_stats(corpus)
    aligned = [align(l_n, tone, stats) for l_n, tone in corpus]
    dark = np.array([a.c[1:] for a, (_, tone) in zip(aligned, corpus) if tone.is_dark])
    assert np.allclose(dark.mean(axis=0), stats.mu_nd, atol=1e-9)
    assert np.allclose(dark.std(axis=0), stats.sigma_nd, atol=1e-9)


def test_aligned_coeffs_keep_unit_dc():
    with pytest.raises(PreconditionError):
        AlignedCoeffs((0.5,) + (0.0,) * 8)


def test_cross_fit_align_uses_out_of_fold_stats():
    corpus = _random_corpus(5, 40, dark_shift=0.5)
    records = [(f"item{k:03d}", l_n, tone) for k, (l_n, tone) in enumerate(corpus)]
    aligned = cross_fit_align(records)
    assert len(aligned) == len(records)
    for (_, l_n, tone), a in zip(records, aligned):
        if not tone.is_dark:
            assert a.c == l_n.c

    even = [(l_n, tone) for k, (_, l_n, tone) in enumerate(records) if k % 2 == 0]
    odd_stats = compute_alignment_stats(even)
    dark_odd = 121
    assert records[dark_odd][2] is SkinTone.DARK
    assert aligned[dark_odd].c == align(records[dark_odd][1], SkinTone.DARK, odd_stats).c


def test_cross_fit_align_needs_two_folds():
    with pytest.raises(PreconditionError):
        cross_fit_align([], folds=1)


# ═══════════════════════════════════════════════════════════════════
# Separability
# ═══════════════════════════════════════════════════════════════════

def test_separability_same_distribution():
    corpus = _random_corpus(6, 125)
    report = separability([(l_n.as_array(), tone) for l_n, tone in corpus])
    assert 0.4 <= report.nc_accuracy <= 0.6
    assert (report.n_dark, report.n_non_dark) == (125, 375)


def test_separability_separated_groups():
    corpus = _random_corpus(7, 50, dark_shift=10 * 0.2 / np.sqrt(8))
    report = separability([(l_n.as_array(), tone) for l_n, tone in corpus])
    assert report.nc_accuracy >= 0.99
    assert report.centroid_gap > 5.0


def _records(corpus):
    return [(f"item{k:03d}", l_n, tone) for k, (l_n, tone) in enumerate(corpus)]


def test_aligned_separability_at_chance():
    corpus = _random_corpus(8, 100, dark_shift=0.3, dark_scale=0.7)
    before = separability([(l_n.as_array(), tone) for l_n, tone in corpus])
    after = aligned_separability(_records(corpus))
    assert before.nc_accuracy >= 0.9
    assert 0.4 <= after.nc_accuracy <= 0.6
    assert after.centroid_gap < 1e-9
    assert (after.n_dark, after.n_non_dark) == (100, 300)


@pytest.mark.parametrize('folds', [2, 5])
def test_aligned_separability_fold_counts(folds):
    corpus = _random_corpus(9, 40, dark_shift=-0.4, dark_scale=1.5)
    assert 0.4 <= aligned_separability(_records(corpus), folds=folds).nc_accuracy <= 0.6


def test_leave_one_out_on_in_sample_alignment_is_below_chance():
    corpus = _random_corpus(8, 100, dark_shift=0.3, dark_scale=0.7)
    stats = compute_alignment_stats(corpus)
    aligned = [(align(l_n, tone, stats).as_array(), tone) for l_n, tone in corpus]
    assert separability(aligned).nc_accuracy < 0.1


def test_aligned_separability_preconditions():
    corpus = _random_corpus(10, 10)
    with pytest.raises(PreconditionError):
        aligned_separability(_records(corpus), folds=1)
    with pytest.raises(InsufficientGroupError):
        aligned_separability([r for r in _records(corpus) if not r[2].is_dark])


def test_separability_counts_ties_as_half():
    points = [((-1.0, 0.0), SkinTone.DARK), ((1.0, 0.0), SkinTone.DARK),
              ((-2.0, 2.0), SkinTone.FAIR), ((0.0, 2.0), SkinTone.TAN)]
    report = separability(points)
    assert report.recall_dark == 0.75
    assert report.recall_non_dark == 0.75
    assert report.nc_accuracy == 0.75


def test_separability_of_2d_points():
    points = [((0.0, 0.0), SkinTone.DARK), ((0.1, 0.0), SkinTone.DARK),
              ((5.0, 5.0), SkinTone.FAIR), ((5.1, 5.0), SkinTone.MEDIUM)]
    assert separability(points).nc_accuracy == 1.0


def test_separability_needs_both_groups():
    with pytest.raises(InsufficientGroupError):
        separability([((0.0, 0.0), SkinTone.DARK), ((1.0, 0.0), SkinTone.FAIR), ((2.0, 0.0), SkinTone.FAIR)])
