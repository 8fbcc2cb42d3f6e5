import numpy as np
import pytest

from sdcil.cil import pair_payload
from sdcil.kernels import kernel_matrix
from sdcil.pairwise import (
    CvConfig,
    PairwiseClassifier,
    decision_pair,
    predict_pair,
    train_pair,
)
from sdcil.smo import SolverConfig

CFG = SolverConfig(kkt_tolerance=1e-5)
CV = CvConfig(folds=3, cost_grid=(0.5, 8.0, 64.0), width_grid=(0.3, 1.0, 3.0))


def two_blobs(n=40, gap=6.0, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, 2))
    b = rng.normal(size=(n, 2)) + np.array([gap, 0.0])
    return a, b


class TestTrainPair:
    def test_separated_blobs_high_cv_accuracy(self):
        a, b = two_blobs()
        clf = train_pair(a, 0, b, 1, CV, CFG)
        assert clf.cv_accuracy >= 0.95
        assert clf.train_accuracy >= 0.95
        assert clf.label_a == 0 and clf.label_b == 1

    def test_mirrored_instance_boundary_through_origin(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(30, 2)) + np.array([2.0, 1.0])
        b = -a  # mirror through the origin with labels swapped
        clf = train_pair(a, 0, b, 1, CV, CFG)
        assert abs(decision_pair(clf, np.zeros(2))) <= 0.1

    def test_mirrored_instance_antisymmetric_labels(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(30, 2)) + np.array([2.0, 1.0])
        b = -a
        clf = train_pair(a, 0, b, 1, CV, CFG)
        for x in a[:10]:
            if abs(decision_pair(clf, x)) > 0.05:  # off the boundary
                assert predict_pair(clf, x) != predict_pair(clf, -x)

    def test_singleton_grid_chosen_without_search(self):
        a, b = two_blobs(20)
        cv = CvConfig(folds=3, cost_grid=(4.0,), width_grid=(1.7,))
        clf = train_pair(a, 0, b, 1, cv, CFG)
        assert clf.cost == 4.0 and clf.width == 1.7

    def test_labels_normalized_to_ascending(self):
        a, b = two_blobs(15)
        clf = train_pair(a, 7, b, 2, CV, CFG)
        assert (clf.label_a, clf.label_b) == (2, 7)
        # class 7's vectors are on the negative side now
        preds = {predict_pair(clf, x) for x in a[:5]}
        assert preds == {7}

    def test_too_few_vectors(self):
        a, b = two_blobs(5)
        with pytest.raises(ValueError, match="at least 2"):
            train_pair(a[:1], 0, b, 1, CV, CFG)

    def test_same_labels_rejected(self):
        a, b = two_blobs(5)
        with pytest.raises(ValueError, match="differ"):
            train_pair(a, 3, b, 3, CV, CFG)

    def test_leave_one_out_on_tiny_sets(self):
        a, b = two_blobs(3, seed=9)
        clf = train_pair(a[:3], 0, b[:2], 1, CvConfig(folds=5, cost_grid=(8.0,), width_grid=(1.0,)), CFG)
        assert clf.vectors.shape[0] == 5
        assert 0.0 <= clf.cv_accuracy <= 1.0

    def test_reproducible_given_seed(self):
        a, b = two_blobs(25, seed=6)
        cv = CvConfig(folds=4, cost_grid=(0.5, 8.0), width_grid=(0.5, 2.0), seed=11)
        c1 = train_pair(a, 0, b, 1, cv, CFG)
        c2 = train_pair(a, 0, b, 1, cv, CFG)
        assert pair_payload(c1) == pair_payload(c2)

    def test_tie_break_prefers_smaller_cost_then_width(self):
        # perfectly separable points: every grid combo scores accuracy 1,
        # so the winner must be the smallest cost, then smallest width
        a = np.array([[0.0, 0.0], [0.2, 0.1], [0.1, -0.2], [-0.1, 0.1]])
        b = a + np.array([50.0, 0.0])
        cv = CvConfig(folds=2, cost_grid=(8.0, 0.5, 64.0), width_grid=(5.0, 2.0))
        clf = train_pair(a, 0, b, 1, cv, CFG)
        assert clf.cost == 0.5 and clf.width == 2.0

    def test_train_accuracy_recomputable(self):
        a, b = two_blobs(20, seed=12)
        clf = train_pair(a, 0, b, 1, CV, CFG)
        dec = kernel_matrix(clf.vectors, clf.vectors, clf.width) @ clf.coeffs + clf.bias
        y = np.concatenate([np.ones(20), -np.ones(20)])
        agree = np.mean(np.where(dec > 0, 1.0, -1.0) == y)
        assert agree == pytest.approx(clf.train_accuracy, abs=1e-12)


class TestPredictPair:
    def test_training_vector_of_class_a(self):
        a, b = two_blobs(30, seed=1)
        clf = train_pair(a, 0, b, 1, CV, CFG)
        assert predict_pair(clf, a[0]) == 0
        assert predict_pair(clf, b[0]) == 1

    def test_exact_zero_goes_to_label_b(self):
        clf = PairwiseClassifier(
            label_a=0, label_b=1,
            vectors=np.array([[0.0, 0.0], [1.0, 1.0]]),
            coeffs=np.array([0.0, 0.0]),
            bias=0.0, width=1.0, cost=1.0, cv_accuracy=1.0, train_accuracy=1.0,
        )
        assert decision_pair(clf, np.array([5.0, 5.0])) == 0.0
        assert predict_pair(clf, np.array([5.0, 5.0])) == 1

    def test_pure_function(self):
        a, b = two_blobs(15, seed=2)
        clf = train_pair(a, 0, b, 1, CV, CFG)
        x = np.array([0.3, -0.7])
        assert len({predict_pair(clf, x) for _ in range(5)}) == 1

    def test_dimension_mismatch(self):
        a, b = two_blobs(10, seed=3)
        clf = train_pair(a, 0, b, 1, CV, CFG)
        with pytest.raises(ValueError, match="dimension"):
            predict_pair(clf, np.zeros(5))
