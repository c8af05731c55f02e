import numpy as np
import pytest

from seqnet.errors import MissingScoresError, UndefinedMetricError
from seqnet.evalmetrics import (
    calinski_harabasz,
    classification_report,
    cluster_quality,
    davies_bouldin,
    roc_auc_ovr,
    silhouette,
)

FOUR_POINTS = np.array([[0.0], [1.0], [10.0], [11.0]])
FOUR_LABELS = np.array([0, 0, 1, 1])


def silhouette_oracle(x, labels):
    """Textbook O(n^2) double loop, written independently of the module."""
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    keep = labels != -1
    x, labels = x[keep], labels[keep]
    values = []
    for i in range(len(x)):
        same = [j for j in range(len(x)) if labels[j] == labels[i] and j != i]
        if not same:
            values.append(0.0)
            continue
        a = np.mean([np.linalg.norm(x[i] - x[j]) for j in same])
        b = np.inf
        for other in set(labels.tolist()) - {labels[i]}:
            members = [j for j in range(len(x)) if labels[j] == other]
            b = min(b, np.mean([np.linalg.norm(x[i] - x[j]) for j in members]))
        denom = max(a, b)
        values.append(0.0 if denom == 0 else (b - a) / denom)
    return float(np.mean(values))


class TestSilhouette:
    def test_two_pair_instance(self):
        # hand computation: a=1 everywhere, b in {9.5, 10.5} per point
        assert silhouette(FOUR_POINTS, FOUR_LABELS) == pytest.approx(0.899749, abs=1e-6)

    def test_coincident_duplicate_clusters_score_zero(self):
        x = np.zeros((4, 2))
        labels = [0, 0, 1, 1]
        assert silhouette(x, labels) == 0.0

    def test_far_blobs_approach_one(self):
        rng = np.random.default_rng(0)
        x = np.vstack([rng.normal(0, 0.01, (20, 3)), rng.normal(100, 0.01, (20, 3))])
        labels = [0] * 20 + [1] * 20
        assert silhouette(x, labels) > 0.999

    def test_single_cluster_undefined(self):
        with pytest.raises(UndefinedMetricError):
            silhouette(FOUR_POINTS, [0, 0, 0, 0])

    def test_noise_points_excluded(self):
        x = np.array([[0.0], [1.0], [10.0], [11.0], [500.0]])
        labels = [0, 0, 1, 1, -1]
        assert silhouette(x, labels) == pytest.approx(0.899749, abs=1e-6)

    def test_singleton_cluster_scores_zero(self):
        x = np.array([[0.0], [0.5], [9.0]])
        labels = [0, 0, 1]
        assert silhouette(x, labels) == pytest.approx(silhouette_oracle(x, labels), abs=1e-12)

    def test_matches_oracle_random(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n = int(rng.integers(5, 60))
            k = int(rng.integers(2, 5))
            x = rng.normal(size=(n, 3))
            labels = rng.integers(0, k, size=n)
            if len(np.unique(labels)) < 2:
                continue
            assert silhouette(x, labels) == pytest.approx(
                silhouette_oracle(x, labels), abs=1e-9
            )

    def test_bounded(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            x = rng.normal(size=(30, 2))
            labels = rng.integers(0, 3, size=30)
            if len(np.unique(labels)) < 2:
                continue
            assert -1.0 <= silhouette(x, labels) <= 1.0


class TestCalinskiHarabasz:
    def test_two_pair_instance(self):
        # B = 100, W = 1, n = 4, k = 2 -> (100/1) / (1/2) = 200
        assert calinski_harabasz(FOUR_POINTS, FOUR_LABELS) == pytest.approx(200.0, abs=1e-6)

    def test_zero_within_dispersion_is_inf(self):
        x = np.array([[0.0], [0.0], [5.0], [5.0]])
        assert calinski_harabasz(x, [0, 0, 1, 1]) == float("inf")

    def test_translation_invariant(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(40, 4))
        labels = rng.integers(0, 3, size=40)
        shifted = x + 123.4
        assert calinski_harabasz(x, labels) == pytest.approx(
            calinski_harabasz(shifted, labels), rel=1e-9
        )

    def test_scale_invariant(self):
        # both dispersions scale by s^2, so their ratio is unchanged
        rng = np.random.default_rng(4)
        x = rng.normal(size=(40, 4))
        labels = rng.integers(0, 3, size=40)
        assert calinski_harabasz(x * 7.5, labels) == pytest.approx(
            calinski_harabasz(x, labels), rel=1e-9
        )

    def test_degenerate_counts(self):
        with pytest.raises(UndefinedMetricError):
            calinski_harabasz(FOUR_POINTS, [0, 0, 0, 0])
        with pytest.raises(UndefinedMetricError):
            calinski_harabasz(FOUR_POINTS, [0, 1, 2, 3])


class TestDaviesBouldin:
    def test_two_pair_instance(self):
        # S = 0.5 each, centroid distance 10 -> (0.5 + 0.5) / 10 = 0.1
        assert davies_bouldin(FOUR_POINTS, FOUR_LABELS) == pytest.approx(0.1, abs=1e-6)

    def test_tighter_clusters_score_lower(self):
        tight = np.array([[0.0], [0.2], [10.0], [10.2]])
        assert davies_bouldin(tight, FOUR_LABELS) < davies_bouldin(
            FOUR_POINTS, FOUR_LABELS
        )

    def test_scale_invariant(self):
        assert davies_bouldin(FOUR_POINTS * 2, FOUR_LABELS) == pytest.approx(
            davies_bouldin(FOUR_POINTS, FOUR_LABELS), rel=1e-12
        )

    def test_coincident_centroids_undefined(self):
        x = np.array([[0.0], [2.0], [0.5], [1.5]])
        with pytest.raises(UndefinedMetricError):
            davies_bouldin(x, [0, 0, 1, 1])

    def test_quality_report_bundle(self):
        report = cluster_quality(FOUR_POINTS, FOUR_LABELS, runtime_sec=1.5)
        assert report.silhouette == pytest.approx(0.899749, abs=1e-6)
        assert report.calinski_harabasz == pytest.approx(200.0, abs=1e-6)
        assert report.davies_bouldin == pytest.approx(0.1, abs=1e-6)
        assert report.runtime_sec == 1.5


class TestClassificationReport:
    def test_hand_confusion_example(self):
        rep = classification_report([0, 0, 1, 1], [0, 1, 1, 1], auc=False)
        assert rep.accuracy == pytest.approx(0.75)
        assert rep.f1_macro == pytest.approx((2 / 3 + 0.8) / 2, abs=1e-6)
        assert rep.f1_weighted == pytest.approx(0.733333, abs=1e-6)
        assert rep.confusion.tolist() == [[1, 1], [0, 2]]

    def test_perfect_prediction(self):
        y = [0, 1, 2, 0, 1, 2]
        scores = np.eye(3)[np.asarray(y)]
        rep = classification_report(y, y, scores=scores)
        assert rep.accuracy == 1.0
        assert rep.precision_weighted == 1.0
        assert rep.recall_weighted == 1.0
        assert rep.f1_weighted == 1.0
        assert rep.f1_macro == 1.0
        assert rep.roc_auc_ovr == 1.0

    def test_binary_auc_three_of_four_concordant(self):
        y = [1, 1, 0, 0]
        pos_scores = np.array([0.9, 0.4, 0.5, 0.1])
        scores = np.column_stack([1 - pos_scores, pos_scores])
        rep = classification_report(y, [1, 1, 0, 0], scores=scores)
        assert rep.roc_auc_ovr == pytest.approx(0.75)

    def test_constant_scores_auc_half(self):
        rng = np.random.default_rng(0)
        y = rng.integers(0, 3, size=60)
        scores = np.full((60, 3), 0.5)
        assert roc_auc_ovr(y, scores, classes=[0, 1, 2]) == pytest.approx(0.5)

    def test_confusion_row_sums_are_support(self):
        rng = np.random.default_rng(5)
        y_true = rng.integers(0, 4, size=100)
        y_pred = rng.integers(0, 4, size=100)
        rep = classification_report(y_true, y_pred, auc=False)
        for i, cls in enumerate(rep.classes):
            assert rep.confusion[i].sum() == (y_true == cls).sum()
        assert rep.accuracy == pytest.approx(
            np.trace(rep.confusion) / len(y_true)
        )

    def test_permutation_invariant(self):
        rng = np.random.default_rng(8)
        y_true = rng.integers(0, 3, size=50)
        y_pred = rng.integers(0, 3, size=50)
        perm = rng.permutation(50)
        a = classification_report(y_true, y_pred, auc=False)
        b = classification_report(y_true[perm], y_pred[perm], auc=False)
        assert a.accuracy == b.accuracy
        assert a.f1_weighted == pytest.approx(b.f1_weighted)
        assert a.f1_macro == pytest.approx(b.f1_macro)

    def test_zero_denominator_scores_zero(self):
        # class 2 never predicted and never true-positive
        rep = classification_report([0, 0, 2], [0, 0, 0], auc=False)
        assert rep.accuracy == pytest.approx(2 / 3)
        assert np.isfinite(rep.f1_macro)

    def test_missing_scores_raise(self):
        with pytest.raises(MissingScoresError):
            classification_report([0, 1], [0, 1])

    def test_midrank_tie_handling(self):
        # all four scores tied -> every pair gets half credit -> AUC 0.5
        y = [1, 1, 0, 0]
        scores = np.column_stack([np.zeros(4), np.full(4, 0.7)])
        assert roc_auc_ovr(y, scores, classes=[0, 1]) == pytest.approx(0.5)
