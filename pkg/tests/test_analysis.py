import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from oracles import anova_2x2_brute, art_brute, bh_brute
from teleadjust.analysis import (
    EFFECTS,
    AnalysisError,
    DatasetRow,
    ExperimentDataset,
    align_rank_transform,
    aligned_values,
    art_anova,
    bh_fdr,
    correlation_table,
    describe,
    descriptives,
    pearson,
    rm_anova_2x2,
    sbsod_score,
    sot_error,
)


def shifted_table(n, delta, noise, rng, axis="direction"):
    base = rng.normal(1.0, 0.4, size=(n, 1, 1))
    y = np.repeat(np.repeat(base, 2, axis=1), 2, axis=2)
    if axis == "direction":
        y[:, 1, :] += delta
    else:
        y[:, :, 1] += delta
    return y + rng.normal(0, noise, size=y.shape)


class TestDescriptives:
    def test_constant(self):
        d = describe([0.8] * 6)
        assert (d.mean, d.sd, d.outliers) == (pytest.approx(0.8), 0.0, ())

    def test_fence(self):
        d = describe([1, 2, 3, 4, 100])
        assert (d.q1, d.q3) == (2.0, 4.0)
        assert d.high_fence == 10.0
        assert d.outliers == (4,)

    def test_empty(self):
        with pytest.raises(AnalysisError):
            describe([])
        with pytest.raises(AnalysisError):
            descriptives(ExperimentDataset([]))


class TestRmAnova:
    def test_matches_brute_force(self, rng):
        y = rng.normal(size=(4, 2, 2))
        res = rm_anova_2x2(y)
        ref = anova_2x2_brute(y)
        for e in EFFECTS:
            F, dfe, eta, _, _ = ref[e]
            assert res[e].F == pytest.approx(F, rel=1e-9)
            assert res[e].df == (1, dfe)
            assert res[e].partial_eta_sq == pytest.approx(eta, rel=1e-9)
            assert res[e].p == pytest.approx(stats.f.sf(F, 1, dfe), rel=1e-9)

    def test_pure_direction_shift(self, rng):
        y = shifted_table(10, 0.5, 0.0, rng)
        res = rm_anova_2x2(y)
        assert res.direction.p == 0.0 and res.direction.degenerate
        assert res.size.F == pytest.approx(0.0, abs=1e-9)

    def test_constant_data_degenerate(self):
        res = rm_anova_2x2(np.full((5, 2, 2), 1.2))
        assert all(res[e].degenerate for e in EFFECTS)
        assert all(0 <= res[e].p <= 1 for e in EFFECTS)

    def test_needs_two_participants(self):
        with pytest.raises(AnalysisError):
            rm_anova_2x2(np.ones((1, 2, 2)))
        with pytest.raises(AnalysisError):
            rm_anova_2x2(np.ones((3, 2, 3)))

    @settings(max_examples=50)
    @given(st.integers(0, 10_000))
    def test_subject_offset_invariance(self, seed):
        r = np.random.default_rng(seed)
        y = r.normal(size=(6, 2, 2))
        shifted = y + r.normal(scale=5, size=(6, 1, 1))
        a, b = rm_anova_2x2(y), rm_anova_2x2(shifted)
        for e in EFFECTS:
            assert b[e].F == pytest.approx(a[e].F, rel=1e-9, abs=1e-9)


class TestArt:
    def test_matches_brute_force(self, rng):
        y = rng.normal(size=(5, 2, 2))
        aligned, ranked = art_brute(y)
        ours_aligned, ours_ranked = aligned_values(y), align_rank_transform(y)
        for e in EFFECTS:
            np.testing.assert_allclose(ours_aligned[e], aligned[e], atol=1e-12)
            np.testing.assert_array_equal(ours_ranked[e], ranked[e])

    def test_direction_only_separation(self, rng):
        base = np.random.default_rng(2).uniform(0.9, 1.1, size=(8, 1, 1))
        y = np.broadcast_to(base, (8, 2, 2)).copy()
        y[:, 1, :] += 1.0
        ranks = align_rank_transform(y)
        assert ranks["direction"][:, 1, :].min() > ranks["direction"][:, 0, :].max()
        # size-aligned values carry no size information: ranks tie across size
        np.testing.assert_array_equal(ranks["size"][:, :, 0], ranks["size"][:, :, 1])

    def test_all_equal(self):
        ranks = align_rank_transform(np.full((4, 2, 2), 0.9))
        for e in EFFECTS:
            assert np.all(ranks[e] == ranks[e].flat[0])

    @settings(max_examples=50)
    @given(st.integers(0, 10_000), st.floats(0.01, 100))
    def test_aligned_values_sum_to_zero(self, seed, scale):
        y = np.random.default_rng(seed).normal(scale=scale, size=(7, 2, 2))
        for e, v in aligned_values(y).items():
            assert abs(v.sum()) <= 1e-9 * scale * v.size

    @pytest.mark.parametrize("axis, other", [("direction", "size"), ("size", "direction")])
    def test_single_effect_shift(self, axis, other):
        r = np.random.default_rng(31)
        res = art_anova(shifted_table(31, 1.0, 0.1, r, axis=axis))
        assert res[axis].p < 0.001
        assert res[other].p > 0.2


class TestPearson:
    def test_perfect(self):
        assert pearson([1, 2, 3], [2, 4, 6])[0] == pytest.approx(1.0)

    def test_orthogonal(self):
        assert pearson([1, -1, 1, -1], [1, 1, -1, -1])[0] == pytest.approx(0.0)

    def test_matches_scipy(self, rng):
        x, y = rng.normal(size=20), rng.normal(size=20)
        r, p = pearson(x, y)
        ref = stats.pearsonr(x, y)
        assert r == pytest.approx(ref.statistic, abs=1e-12)
        assert p == pytest.approx(ref.pvalue, rel=1e-9)

    def test_preconditions(self):
        with pytest.raises(AnalysisError):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(AnalysisError):
            pearson([1, 2], [1, 2])

    @settings(max_examples=50)
    @given(st.integers(0, 10_000), st.floats(0.1, 10), st.floats(-5, 5))
    def test_affine_invariance(self, seed, a, b):
        r = np.random.default_rng(seed)
        x, y = r.normal(size=10), r.normal(size=10)
        assert pearson(a * x + b, y)[0] == pytest.approx(pearson(x, y)[0], abs=1e-12)


class TestBhFdr:
    def test_worked_example(self):
        assert bh_fdr([0.01, 0.02, 0.04, 0.05]) == pytest.approx([0.04, 0.04, 0.05, 0.05])

    def test_single(self):
        assert bh_fdr([0.3]) == pytest.approx([0.3])

    @pytest.mark.parametrize("c, m", [(0.01, 5), (0.3, 5)])
    def test_all_equal(self, c, m):
        assert bh_fdr([c] * m) == pytest.approx([min(1.0, c)] * m)
        assert bh_fdr([c] * m) == pytest.approx(bh_brute([c] * m))

    def test_rejects_bad_p(self):
        with pytest.raises(AnalysisError):
            bh_fdr([0.1, 1.2])

    @settings(max_examples=100)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=15))
    def test_brute_force_and_monotone(self, p):
        adj = bh_fdr(p)
        assert adj == pytest.approx(bh_brute(p), abs=1e-12)
        order = np.argsort(p, kind="stable")
        assert np.all(np.diff(adj[order]) >= -1e-15)
        assert np.all(adj >= np.asarray(p) - 1e-15)


class TestTraitScores:
    def test_sbsod(self):
        none, all_rev = [False] * 15, [True] * 15
        assert sbsod_score([7] * 15, none) == 7.0
        assert sbsod_score([4] * 15, all_rev) == 4.0
        assert sbsod_score([7] * 15, all_rev) == 1.0
        with pytest.raises(AnalysisError):
            sbsod_score([8] + [4] * 14, none)

    def test_sot(self):
        assert sot_error([10, 350], [0, 0]) == pytest.approx(10.0)
        assert sot_error([45, 90], [45, 90]) == 0.0
        assert sot_error([180], [0]) == 180.0
        assert sot_error([-170], [170]) == pytest.approx(20.0)
        with pytest.raises(AnalysisError):
            sot_error([], [])


def test_correlation_table_shape(rng):
    rows = [DatasetRow(i, True, {k: float(v) for k, v in zip(
        ("forward_small", "forward_large", "backward_small", "backward_large"),
        rng.uniform(0.2, 2, 4))}, float(rng.uniform(10, 60)), float(rng.uniform(1, 7)),
        int(rng.integers(1, 6))) for i in range(12)]
    cells = correlation_table(ExperimentDataset(rows))
    assert len(cells) == 12
    assert all(c.p_adjusted >= c.p for c in cells)
    with pytest.raises(AnalysisError):
        correlation_table(ExperimentDataset(rows[:2]))
