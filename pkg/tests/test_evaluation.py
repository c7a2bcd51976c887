import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PUBLISHED_EOD, PUBLISHED_RT, two_group_docs
from lonelytext import evaluation
from lonelytext.errors import EmptyInput, LengthMismatch, TooFewExamples, TooShort
from lonelytext.evaluation import (PipelineConfig, compute_metrics, confidence_halfwidth,
                                   majority_baseline, make_folds, paired_t_test, run_cv,
                                   sweep_topics)
from lonelytext.ingest import Dataset, LabeledDocument


def make_dataset(token_docs, labels, pids=None):
    pids = pids or [f"p{i}" for i in range(len(token_docs))]
    docs = [LabeledDocument(p, dt.date(2020, 1, 1), "RT", "", int(y), 100.0 * y, tuple(t))
            for p, t, y in zip(pids, token_docs, labels)]
    return Dataset(tuple(docs), "RT")


def baseline_f1(p):
    return (1 - p) * 2 * (1 - p) / (2 - p)


class TestFolds:
    def test_stratified_sizes(self):
        labels = [1] * 4 + [0] * 16
        plan = make_folds(labels, k=10, seed=3)
        sizes = [len(plan.test_indices(f)) for f in range(10)]
        pos = [sum(labels[i] for i in plan.test_indices(f)) for f in range(10)]
        assert sizes == [2] * 10
        assert max(pos) - min(pos) <= 1

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 1), min_size=10, max_size=80), st.integers(2, 10),
           st.integers(0, 2**31))
    def test_balance_property(self, labels, k, seed):
        plan = make_folds(labels, k=k, seed=seed)
        sizes = [len(plan.test_indices(f)) for f in range(k)]
        pos = [sum(labels[i] for i in plan.test_indices(f)) for f in range(k)]
        assert max(sizes) - min(sizes) <= 1
        assert max(pos) - min(pos) <= 1
        assert sorted(i for f in range(k) for i in plan.test_indices(f)) == list(range(len(labels)))

    def test_grouped_two_participants(self):
        d = make_dataset([["a"]] * 6, [0, 1, 0, 0, 1, 0], ["x", "x", "x", "y", "y", "y"])
        plan = make_folds(d, k=2, group_by_participant=True, seed=1)
        assert plan.assignments[:3] in ((0, 0, 0), (1, 1, 1))
        assert len(set(plan.assignments[3:])) == 1
        assert plan.assignments[0] != plan.assignments[3]

    def test_deterministic(self):
        labels = np.random.default_rng(0).integers(0, 2, 50)
        assert make_folds(labels, seed=9) == make_folds(labels, seed=9)
        assert make_folds(labels, seed=9).assignments != make_folds(labels, seed=10).assignments

    def test_too_few(self):
        with pytest.raises(TooFewExamples):
            make_folds([0, 1, 0], k=5)
        with pytest.raises(TooFewExamples):
            make_folds([0, 1, 0], k=1)
        d = make_dataset([["a"]] * 4, [0, 1, 0, 1], ["x", "x", "y", "y"])
        with pytest.raises(TooFewExamples):
            make_folds(d, k=3, group_by_participant=True)


class TestMetrics:
    def test_golden(self):
        m = compute_metrics([0, 0, 0, 1], [0, 0, 0, 0])
        assert m.accuracy == 0.75
        np.testing.assert_allclose(m.f1, 0.75 * (2 * 0.75 / 1.75))
        np.testing.assert_allclose(m.f1, 0.6429, atol=5e-5)
        assert m.per_class[1]["precision"] == 0.0

    def test_perfect(self):
        m = compute_metrics([0, 1, 1, 0], [0, 1, 1, 0])
        assert (m.accuracy, m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0, 1.0)

    @pytest.mark.parametrize("p, expected", [(0.1752, 0.745), (0.1585, 0.769)])
    def test_all_negative_formula(self, p, expected):
        n = 10000
        y = np.zeros(n, dtype=int)
        y[:int(round(p * n))] = 1
        m = compute_metrics(y, np.zeros(n, dtype=int))
        np.testing.assert_allclose(m.f1, baseline_f1(p), rtol=1e-12)
        assert abs(m.f1 - expected) <= 1e-3

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
    def test_recall_equals_accuracy(self, pairs):
        y, p = zip(*pairs)
        m = compute_metrics(y, p)
        assert m.recall == m.accuracy
        assert 0.0 <= m.f1 <= 1.0 and 0.0 <= m.precision <= 1.0

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            compute_metrics([0, 1], [0])
        with pytest.raises(EmptyInput):
            compute_metrics([], [])


class TestBaseline:
    def test_fold_without_positives(self):
        labels = [0] * 10 + [1]
        plan = make_folds(labels, k=2, seed=0)
        rows = majority_baseline(labels, plan)
        no_pos = [f for f in range(2) if sum(labels[i] for i in plan.test_indices(f)) == 0]
        assert no_pos and all(rows[f].f1 == 1.0 for f in no_pos)

    def test_table_column_means(self):
        assert round(float(np.mean(PUBLISHED_RT[0])), 4) == 0.7452
        assert round(float(np.mean(PUBLISHED_EOD[0])), 4) == 0.7688

    def test_cl_of_constant(self):
        assert confidence_halfwidth([0.7] * 10) == 0.0

    def test_cl_value(self):
        # sd 1, n 4, t(0.975, 3) = 3.182446305284263
        v = [-1.5, -0.5, 0.5, 1.5]
        sd = np.std(v, ddof=1)
        np.testing.assert_allclose(confidence_halfwidth(v), 3.182446305284263 * sd / 2, rtol=1e-12)


class TestTTest:
    def test_eod_table(self):
        r = paired_t_test(*PUBLISHED_EOD)
        assert r.df == 9
        np.testing.assert_allclose(r.t, -1.499, atol=1e-3)
        assert abs(r.p - 0.168) <= 0.005

    def test_rt_table(self):
        r = paired_t_test(*PUBLISHED_RT)
        assert abs(r.p - 0.471) <= 0.010
        np.testing.assert_allclose(r.p, 0.466, atol=1e-3)

    def test_identical(self):
        r = paired_t_test([0.1, 0.2, 0.3], [0.1, 0.2, 0.3])
        assert (r.t, r.p, r.degenerate) == (0.0, 1.0, True)

    def test_constant_shift(self):
        r = paired_t_test([1.0, 2.0, 3.0], [3.0, 4.0, 5.0])
        assert r.p == 0.0 and r.degenerate and r.t == np.inf

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=30))
    def test_antisymmetry(self, pairs):
        a, b = map(list, zip(*pairs))
        r1, r2 = paired_t_test(a, b), paired_t_test(b, a)
        assert r1.t == -r2.t
        assert r1.p == r2.p

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            paired_t_test([1, 2, 3], [1, 2])
        with pytest.raises(TooShort):
            paired_t_test([1], [2])


def group_dataset(seed=0, n_docs=60):
    docs = two_group_docs(seed, n_docs=n_docs, length=20)
    return make_dataset(docs, [d % 2 for d in range(n_docs)])


class TestRunCv:
    def test_separable_beats_baseline(self):
        d = group_dataset()
        rep = run_cv(d, PipelineConfig(), make_folds(d, k=5, seed=0), seed=0)
        assert rep.mean()["f1"] == 1.0
        assert rep.ttest.p < 0.05

    @pytest.mark.parametrize("weighting", ["count", "tfidf"])
    def test_constant_features(self, weighting):
        labels = [int(i % 6 == 0) for i in range(60)]
        d = make_dataset([("hello", "world", "hello")] * 60, labels)
        cfg = PipelineConfig(max_df_fraction=1.0, weighting=weighting)
        rep = run_cv(d, cfg, make_folds(d, k=10, seed=0))
        assert rep.ttest.p >= 0.05
        if weighting == "count":
            assert rep.mean() == rep.mean(rep.baseline)

    def test_no_leakage(self, monkeypatch):
        fitted = {}
        original = evaluation.fit_pipeline

        def spy(docs, labels, config, seed):
            model = original(docs, labels, config, seed)
            fitted.setdefault(seed, []).append(model.svm.w.tobytes() + model.svm.bias.hex().encode())
            return model

        monkeypatch.setattr(evaluation, "fit_pipeline", spy)
        d = group_dataset(1)
        folds = make_folds(d, k=5, seed=0)
        cfg = PipelineConfig(min_df=1)
        run_cv(d, cfg, folds, seed=4)
        # scramble the held-out documents of fold 0: its model must not move
        junk = list(d.documents)
        for i in folds.test_indices(0):
            junk[i] = LabeledDocument(junk[i].participant_id, junk[i].date, "RT", "",
                                      1 - junk[i].label, 0.0, ("zz", "a0", "b0"))
        run_cv(d.with_documents(junk), cfg, folds, seed=4)
        key = evaluation.derive_seed(4, "fold", 0)
        assert len(fitted[key]) == 2
        assert fitted[key][0] == fitted[key][1]

    def test_report_deterministic(self):
        import json

        d = group_dataset(2)
        folds = make_folds(d, k=5, seed=1)
        cfg = PipelineConfig(features="topics", n_topics=2, lda_max_iter=20)
        a = json.dumps(run_cv(d, cfg, folds, seed=5).to_dict())
        b = json.dumps(run_cv(d, cfg, folds, seed=5, threads=3).to_dict())
        assert a == b

    def test_recall_equals_accuracy_per_fold(self):
        d = group_dataset(3)
        rep = run_cv(d, PipelineConfig(), make_folds(d, k=5, seed=0))
        assert all(r.recall == r.accuracy for r in rep.folds + rep.baseline)


class TestSweep:
    def test_single_value(self):
        d = group_dataset(4, n_docs=40)
        s = sweep_topics(d, PipelineConfig(lda_max_iter=20), make_folds(d, k=4, seed=0),
                         t_min=5, t_max=5)
        assert s.best == 5 and [t for t, _ in s.rows] == [5]

    def test_ties_to_smaller(self, monkeypatch):
        class Rep:
            def __init__(self, f1):
                self.f1 = f1

            def mean(self):
                return {"f1": self.f1}

        scores = {5: 0.8, 10: 0.9, 15: 0.9, 20: 0.85}
        monkeypatch.setattr(evaluation, "run_cv",
                            lambda d, cfg, folds, seed, threads: Rep(scores[cfg.n_topics]))
        s = sweep_topics(None, PipelineConfig(), None, t_min=5, t_max=20, step=5)
        assert s.best == 10
        assert s.rows == [(5, 0.8), (10, 0.9), (15, 0.9), (20, 0.85)]

    def test_bad_range(self):
        with pytest.raises(ValueError):
            sweep_topics(None, PipelineConfig(), None, t_min=0, t_max=5)

    def test_oracle_corpus_prefers_enough_topics(self):
        from lonelytext.synth import LabelLink, SynthSpec, corpus_to_dataset, generate_corpus

        spec = SynthSpec(10, 500, 300, doc_length=50, alpha=0.1,
                         label_link=LabelLink((1.0,) + (0.0,) * 9, positive_rate=0.175), seed=0)
        d = corpus_to_dataset(generate_corpus(spec))
        s = sweep_topics(d, PipelineConfig(lda_max_iter=50), make_folds(d, k=5, seed=0),
                         t_values=[5, 10, 15, 20], seed=0)
        assert s.best in (10, 15, 20)
        f1 = dict(s.rows)
        assert f1[5] < min(f1[10], f1[15], f1[20])
