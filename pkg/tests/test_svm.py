import itertools

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from lonelytext.errors import (DimensionMismatch, NonFiniteFeature, SingleClassTraining,
                               WrongFeatureKind)
from lonelytext.features import Vocabulary, build_vocabulary, count_matrix, tfidf_transform
from lonelytext.svm import (SvmModel, class_costs, dual_objective, kkt_residuals,
                            primal_objective, rank_words_by_weight, svm_predict, svm_train)


def dual_oracle(X, labels, cs):
    """Minimum of 0.5 a'Qa - sum(a) over 0 <= a <= cs by active-set enumeration.

    Every dual coordinate is at 0, at its upper bound, or free; for each of
    the 3^n patterns the free block solves its stationarity equations and the
    candidate is kept when it satisfies the full KKT conditions. Returns the
    negated minimum, i.e. the dual objective value, or None.
    """
    Xt = np.hstack([X, np.ones((len(X), 1))])
    y = np.where(np.asarray(labels) == 1, 1.0, -1.0)
    Z = y[:, None] * Xt
    Q = Z @ Z.T
    n = len(y)
    best = None
    for states in itertools.product(range(3), repeat=n):
        a = np.where(np.array(states) == 1, cs, 0.0)
        free = [i for i in range(n) if states[i] == 2]
        if free:
            fixed = [i for i in range(n) if states[i] != 2]
            rhs = 1.0 - Q[np.ix_(free, fixed)] @ a[fixed]
            sol = np.linalg.lstsq(Q[np.ix_(free, free)], rhs, rcond=None)[0]
            if np.abs(Q[np.ix_(free, free)] @ sol - rhs).max() > 1e-9:
                continue
            a[free] = sol
        if np.any(a < -1e-12) or np.any(a > cs + 1e-12):
            continue
        g = Q @ a - 1.0
        pg = np.where(a <= 1e-12, np.minimum(g, 0), np.where(a >= cs - 1e-12, np.maximum(g, 0), g))
        if np.abs(pg).max() > 1e-9:
            continue
        f = a.sum() - 0.5 * a @ Q @ a
        if best is None or f > best:
            best = f
    return best


def random_instance(rng, n_max=8, d_max=3):
    n = int(rng.integers(2, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    X = rng.normal(size=(n, d))
    y = rng.integers(0, 2, n)
    y[0], y[1] = 1, 0
    return X, y


class TestOracle:
    def test_oracle_on_hard_margin_pair(self):
        # points +1 / -1 with C large: a = (0.5, 0.5) and the dual value is 0.5
        X = np.array([[1.0], [-1.0]])
        np.testing.assert_allclose(dual_oracle(X, [1, 0], np.array([1e6, 1e6])), 0.5)

    def test_six_point_instance(self):
        X = np.array([[2.0, 1.0], [1.5, 2.0], [3.0, 0.5], [-1.0, -0.5], [-2.0, 0.5], [0.5, -2.0]])
        y = np.array([1, 1, 1, 0, 0, 0])
        m = svm_train(X, y, C=1.0, cost_factor=1.0, tol=1e-8)
        oracle = dual_oracle(X, y, class_costs(y, 1.0, 1.0))
        assert abs(dual_objective(m) - oracle) < 1e-6

    def test_random_instances(self):
        rng = np.random.default_rng(0)
        for k in range(25):
            X, y = random_instance(rng)
            C = float(rng.choice([0.1, 1.0, 10.0]))
            m = svm_train(X, y, C=C, seed=k)
            oracle = dual_oracle(X, y, class_costs(y, C, m.cost_factor))
            assert oracle is not None
            assert abs(dual_objective(m) - oracle) < 1e-6
            assert kkt_residuals(m, X, y).max() <= 1e-3


class TestTraining:
    def test_hard_margin_1d(self):
        X = np.array([[1.0], [-1.0]])
        m = svm_train(X, [1, 0], C=1e6, cost_factor=1.0)
        np.testing.assert_allclose(m.w, [1.0], atol=1e-9)
        assert abs(m.bias) < 1e-9
        _, scores = svm_predict(m, X)
        assert scores[0] >= 1 - 1e-9 and scores[1] <= -1 + 1e-9

    def test_flipped_labels_negate(self):
        X = np.array([[1.0], [-1.0]])
        a = svm_train(X, [1, 0], C=1e6, cost_factor=1.0)
        b = svm_train(X, [0, 1], C=1e6, cost_factor=1.0)
        np.testing.assert_allclose(b.w, -a.w, atol=1e-9)
        np.testing.assert_allclose(b.bias, -a.bias, atol=1e-9)

    def test_auto_cost_factor(self):
        X = np.arange(5.0)[:, None]
        m = svm_train(X, [1, 0, 0, 0, 0])
        assert m.cost_factor == 4.0

    def test_box_and_kkt(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(60, 5))
        y = (X[:, 0] + 0.5 * rng.normal(size=60) > 0.3).astype(int)
        m = svm_train(X, y, C=0.5)
        cs = class_costs(y, 0.5, m.cost_factor)
        assert np.all(m.dual_coef >= 0) and np.all(m.dual_coef <= cs)
        assert kkt_residuals(m, X, y).max() < 1e-3

    def test_duality_gap(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            X = rng.normal(size=(40, 4))
            y = (rng.random(40) < 0.3).astype(int)
            y[:2] = (1, 0)
            m = svm_train(X, y, C=1.0, tol=1e-6)
            primal = primal_objective(m, X, y)
            assert primal - dual_objective(m) <= 1e-4 * (1 + abs(primal))
            assert primal - dual_objective(m) >= -1e-9

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        X = sp.random(50, 30, density=0.2, random_state=4, format="csr")
        y = rng.integers(0, 2, 50)
        a = svm_train(X, y, seed=7)
        b = svm_train(X, y, seed=7)
        assert a.w.tobytes() == b.w.tobytes() and a.bias == b.bias

    def test_doubling_c_separable(self):
        X = np.array([[2.0, 1.0], [1.0, 3.0], [-1.0, -1.0], [-2.0, 0.5]])
        y = np.array([1, 1, 0, 0])
        a, _ = svm_predict(svm_train(X, y, C=1.0), X)
        b, _ = svm_predict(svm_train(X, y, C=2.0), X)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(a, y)

    def test_single_class(self):
        with pytest.raises(SingleClassTraining):
            svm_train(np.eye(3), [1, 1, 1])

    def test_non_finite(self):
        with pytest.raises(NonFiniteFeature):
            svm_train(np.array([[np.nan], [1.0]]), [1, 0])

    def test_label_length(self):
        with pytest.raises(DimensionMismatch):
            svm_train(np.eye(3), [1, 0])


class TestPredict:
    def test_zero_weights_predict_negative(self):
        m = SvmModel(np.zeros(3), 0.0, 1.0, 1.0)
        labels, scores = svm_predict(m, np.eye(3))
        np.testing.assert_array_equal(labels, 0)
        np.testing.assert_array_equal(scores, 0.0)

    def test_training_accuracy_separable(self):
        X = np.array([[1.0], [-1.0]])
        labels, _ = svm_predict(svm_train(X, [1, 0], C=1e6, cost_factor=1.0), X)
        np.testing.assert_array_equal(labels, [1, 0])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.integers(0, 1000))
    def test_scaling_inputs_without_bias(self, w, seed):
        m = SvmModel(np.array(w), 0.0, 1.0, 1.0)
        X = np.random.default_rng(seed).normal(size=(10, 3))
        np.testing.assert_array_equal(svm_predict(m, X)[0], svm_predict(m, 2 * X)[0])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            svm_predict(SvmModel(np.zeros(3), 0.0, 1.0, 1.0), np.eye(2))


class TestRankWords:
    def test_two_words(self):
        m = SvmModel(np.array([0.5, -0.2]), 0.3, 1.0, 1.0)
        vocab = Vocabulary(("damn", "hi"), (1, 1))
        assert rank_words_by_weight(m, vocab) == [("damn", 0.5), ("hi", -0.2)]

    def test_zero_weights_lexicographic(self):
        m = SvmModel(np.zeros(3), 0.0, 1.0, 1.0)
        vocab = Vocabulary(("bb", "cc", "aa"), (1, 1, 1))
        assert rank_words_by_weight(m, vocab) == [("aa", 0.0), ("bb", 0.0), ("cc", 0.0)]

    def test_topic_model_rejected(self):
        m = SvmModel(np.zeros(3), 0.0, 1.0, 1.0, feature_kind="topic")
        with pytest.raises(WrongFeatureKind):
            rank_words_by_weight(m)

    def test_injected_word_ranks_high(self):
        rng = np.random.default_rng(0)
        words = [f"w{i:02d}" for i in range(50)]
        docs, labels = [], []
        for d in range(200):
            y = int(rng.random() < 0.2)
            doc = list(rng.choice(words, size=20))
            if y:
                doc += ["come"] * 2
            docs.append(doc)
            labels.append(y)
        vocab = build_vocabulary(docs)
        m = svm_train(tfidf_transform(count_matrix(docs, vocab, labels)))
        top5 = [t for t, _ in rank_words_by_weight(m, vocab)[:5]]
        assert "come" in top5

    def test_json_roundtrip(self, tmp_path):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(20, 4))
        y = (X[:, 0] > 0).astype(int)
        m = svm_train(X, y, seed=3)
        m.save(tmp_path / "svm.json")
        back = SvmModel.load(tmp_path / "svm.json")
        np.testing.assert_array_equal(back.w, m.w)
        assert (back.bias, back.C, back.cost_factor, back.seed) == (m.bias, m.C, m.cost_factor, 3)
