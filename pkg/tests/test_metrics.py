"""Accuracy, confusion, Mann-Whitney AUCROC and the ROC curve."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memefuse.errors import MetricError
from memefuse.metrics import (
    accuracy,
    auc_roc,
    confusion,
    evaluate_scores,
    roc_curve,
    trapezoid_area,
)

from oracles import pair_count_auc


class TestAccuracy:
    def test_perfect(self):
        labels = [1, 0, 1, 1, 0, 0, 1]
        assert accuracy(labels, labels) == 1.0

    def test_all_flipped(self):
        labels = [1, 0, 1, 1, 0, 0, 1, 0]
        flipped = [1 - y for y in labels]
        assert accuracy(flipped, labels) == 0.0

    def test_three_of_four(self):
        assert accuracy([1, 0, 1, 0], [1, 1, 1, 0]) == 0.75

    def test_empty_rejected(self):
        with pytest.raises(MetricError, match="empty"):
            accuracy([], [])

    def test_non_binary_rejected(self):
        with pytest.raises(MetricError):
            accuracy([0, 2], [0, 1])


class TestConfusion:
    def test_perfect_balanced(self):
        mat = confusion([0, 0, 1, 1], [0, 0, 1, 1])
        np.testing.assert_array_equal(mat, [[2, 0], [0, 2]])

    def test_degenerate_all_positive_predictor(self):
        mat = confusion([1] * 6, [0, 0, 0, 1, 1, 1])
        np.testing.assert_array_equal(mat, [[0, 3], [0, 3]])

    def test_mixed_counts(self):
        mat = confusion([1, 0, 0, 1], [1, 1, 0, 0])
        np.testing.assert_array_equal(mat, [[1, 1], [1, 1]])

    def test_consistent_with_accuracy(self):
        rng = np.random.default_rng(0)
        preds = rng.integers(0, 2, 50)
        labels = rng.integers(0, 2, 50)
        mat = confusion(preds, labels)
        assert mat.sum() == 50
        assert accuracy(preds, labels) == np.trace(mat) / 50


class TestAucRoc:
    def test_perfect_separation(self):
        assert auc_roc([0.9, 0.8, 0.3, 0.2], [1, 1, 0, 0]) == 1.0

    def test_tie_convention(self):
        assert auc_roc([0.5, 0.5], [1, 0]) == 0.5

    def test_three_of_four_pairs(self):
        assert auc_roc([0.9, 0.6, 0.4, 0.2], [1, 0, 1, 0]) == 0.75

    def test_single_class_rejected(self):
        with pytest.raises(MetricError, match="single class"):
            auc_roc([0.1, 0.9], [1, 1])

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_pair_counting_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(10, 500))
        # Quantized scores force plenty of ties.
        scores = np.round(rng.uniform(0, 1, n), 2)
        labels = rng.integers(0, 2, n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        assert auc_roc(scores, labels) == pytest.approx(
            pair_count_auc(scores, labels), abs=1e-12
        )

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(9)
        scores = rng.uniform(0, 1, 100)
        labels = rng.integers(0, 2, 100)
        labels[0], labels[1] = 0, 1
        base = auc_roc(scores, labels)
        assert auc_roc(np.exp(3 * scores), labels) == pytest.approx(base, abs=1e-12)
        assert auc_roc(scores**3 + 7, labels) == pytest.approx(base, abs=1e-12)

    def test_score_flip_complements_auc(self):
        rng = np.random.default_rng(10)
        scores = rng.uniform(0, 1, 80)  # continuous, ties almost surely absent
        labels = rng.integers(0, 2, 80)
        labels[0], labels[1] = 0, 1
        assert auc_roc(1 - scores, labels) == pytest.approx(
            1 - auc_roc(scores, labels), abs=1e-12
        )


class TestRocCurve:
    def test_perfect_separation_passes_through_top_left(self):
        points = roc_curve([0.9, 0.8, 0.3, 0.2], [1, 1, 0, 0])
        assert (0.0, 1.0) in points

    def test_all_scores_equal_is_diagonal(self):
        points = roc_curve([0.4, 0.4, 0.4], [1, 0, 1])
        assert points == [(0.0, 0.0), (1.0, 1.0)]
        assert trapezoid_area(points) == 0.5

    def test_endpoints_and_monotonicity(self):
        rng = np.random.default_rng(11)
        scores = np.round(rng.uniform(0, 1, 60), 1)
        labels = rng.integers(0, 2, 60)
        labels[0], labels[1] = 0, 1
        points = roc_curve(scores, labels)
        assert points[0] == (0.0, 0.0)
        assert points[-1] == (1.0, 1.0)
        xs, ys = zip(*points)
        assert all(a <= b for a, b in zip(xs, xs[1:]))
        assert all(a <= b for a, b in zip(ys, ys[1:]))

    def test_trapezoid_area_matches_pair_counting_50_points(self):
        rng = np.random.default_rng(12)
        scores = np.round(rng.uniform(0, 1, 50), 1)
        labels = rng.integers(0, 2, 50)
        labels[0], labels[1] = 0, 1
        area = trapezoid_area(roc_curve(scores, labels))
        assert area == pytest.approx(pair_count_auc(scores, labels), abs=1e-12)
        assert area == pytest.approx(auc_roc(scores, labels), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=200),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    quantize=st.booleans(),
)
def test_rank_trapezoid_and_pair_counting_agree(n, seed, quantize):
    rng = np.random.default_rng(seed)
    scores = rng.uniform(0, 1, n)
    if quantize:
        scores = np.round(scores, 1)
    labels = rng.integers(0, 2, n)
    labels[0], labels[-1] = 0, 1
    want = pair_count_auc(scores, labels)
    assert auc_roc(scores, labels) == pytest.approx(want, abs=1e-12)
    assert trapezoid_area(roc_curve(scores, labels)) == pytest.approx(want, abs=1e-12)


class TestEvalReport:
    def test_fields_consistent(self):
        rng = np.random.default_rng(13)
        p = rng.uniform(0, 1, 40)
        labels = rng.integers(0, 2, 40)
        labels[0], labels[1] = 0, 1
        report = evaluate_scores(p, labels)
        assert report.n == 40
        assert report.confusion.sum() == 40
        assert report.accuracy == np.trace(report.confusion) / 40
        assert report.roc_points[0] == (0.0, 0.0)
        assert report.roc_points[-1] == (1.0, 1.0)
        assert 0.0 <= report.auc_roc <= 1.0

    def test_threshold_changes_confusion_not_auc(self):
        p = [0.1, 0.4, 0.6, 0.9]
        labels = [0, 0, 1, 1]
        low = evaluate_scores(p, labels, threshold=0.3)
        high = evaluate_scores(p, labels, threshold=0.7)
        assert low.auc_roc == high.auc_roc
        assert low.confusion[0, 1] > high.confusion[0, 1]
