"""Cross-validation, weighted metrics, majority baseline, paired t-test, topic sweep."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import stats

from .errors import EmptyInput, LengthMismatch, TooFewExamples, TooShort
from .features import (build_vocabulary, count_matrix, fit_idf, tfidf_transform,
                       topic_feature_matrix)
from .lda import lda_fit
from .preprocess import PreprocessConfig, prune_by_frequency
from .seeding import derive_seed, substream
from .special import t_two_sided_pvalue
from .svm import svm_predict, svm_train

METRICS = ("accuracy", "precision", "recall", "f1")


# ---------------------------------------------------------------- folds


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: tuple
    stratified: bool = True
    group_by_participant: bool = False
    seed: int = 0

    def test_indices(self, fold):
        return [i for i, f in enumerate(self.assignments) if f == fold]

    def train_indices(self, fold):
        return [i for i, f in enumerate(self.assignments) if f != fold]


def make_folds(dataset, k=10, stratified=True, group_by_participant=False, seed=0):
    """Assign every document to one of ``k`` folds, deterministically from ``seed``.

    Stratified mode shuffles each class and deals it round-robin, the
    negatives continuing where the positives stopped, so fold sizes and
    per-fold positive counts each differ by at most one. Grouped mode
    keeps each participant's documents together, placing larger groups
    first into the currently smallest fold.
    """
    labels = np.asarray(dataset.labels if hasattr(dataset, "labels") else dataset)
    n = labels.shape[0]
    if k < 2:
        raise TooFewExamples("k must be at least 2")
    rng = substream(seed, "folds")
    assign = np.full(n, -1, dtype=np.int64)

    if group_by_participant:
        pids = [d.participant_id for d in dataset.documents]
        groups = sorted(set(pids))
        if len(groups) < k:
            raise TooFewExamples(f"{len(groups)} participants cannot fill {k} folds")
        members = {g: [i for i, p in enumerate(pids) if p == g] for g in groups}
        order = [groups[i] for i in rng.permutation(len(groups))]
        order.sort(key=lambda g: -len(members[g]))
        sizes = np.zeros(k, dtype=np.int64)
        pos = np.zeros(k, dtype=np.int64)
        for g in order:
            idx = members[g]
            # fewest documents first, then fewest positives when stratifying
            key = sizes * (n + 1) + (pos if stratified else 0)
            f = int(np.argmin(key))
            assign[idx] = f
            sizes[f] += len(idx)
            pos[f] += int(labels[idx].sum())
    else:
        if n < k:
            raise TooFewExamples(f"{n} documents cannot fill {k} folds")
        if stratified:
            start = 0
            for cls in (1, 0):
                idx = np.flatnonzero(labels == cls)
                idx = idx[rng.permutation(idx.size)]
                assign[idx] = (start + np.arange(idx.size)) % k
                start = (start + idx.size) % k
        else:
            assign[rng.permutation(n)] = np.arange(n) % k
    return FoldPlan(k, tuple(int(a) for a in assign), stratified, group_by_participant, seed)


# -------------------------------------------------------------- metrics


@dataclass(frozen=True)
class MetricsRow:
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class: dict = field(default_factory=dict, compare=False)

    def as_dict(self):
        return {m: getattr(self, m) for m in METRICS}


def _ratio(a, b):
    return a / b if b else 0.0


def compute_metrics(y_true, y_pred):
    """Accuracy and support-weighted precision, recall and F1 over both classes.

    Weighted recall is sum_c tp_c / n, which is the accuracy; it is
    computed from that expression so the identity holds bit-for-bit.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise LengthMismatch(f"{y_true.shape[0]} labels vs {y_pred.shape[0]} predictions")
    n = y_true.shape[0]
    if n == 0:
        raise EmptyInput("no labels")
    per_class = {}
    tp_total = 0
    wp = wf = 0.0
    for c in (0, 1):
        tp = int(np.sum((y_true == c) & (y_pred == c)))
        support = int(np.sum(y_true == c))
        predicted = int(np.sum(y_pred == c))
        p = _ratio(tp, predicted)
        r = _ratio(tp, support)
        f = _ratio(2 * p * r, p + r)
        per_class[c] = {"precision": p, "recall": r, "f1": f, "support": support}
        tp_total += tp
        wp += support * p
        wf += support * f
    acc = tp_total / n
    return MetricsRow(acc, wp / n, tp_total / n, wf / n, per_class)


def majority_baseline(dataset, folds):
    """Metrics of the constant not-lonely predictor on each test fold."""
    labels = np.asarray(dataset.labels if hasattr(dataset, "labels") else dataset)
    rows = []
    for f in range(folds.k):
        y = labels[folds.test_indices(f)]
        rows.append(compute_metrics(y, np.zeros_like(y)))
    return rows


def confidence_halfwidth(values, level=0.95):
    """Half-width of the two-sided t confidence interval of the mean."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return 0.0
    sd = float(np.std(v, ddof=1))
    if sd == 0.0:
        return 0.0
    q = float(stats.t.ppf(0.5 + level / 2.0, v.size - 1))
    return q * sd / math.sqrt(v.size)


# --------------------------------------------------------------- t-test


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p: float
    degenerate: bool = False

    def as_dict(self):
        return {"t": self.t, "df": self.df, "p": self.p, "degenerate": self.degenerate}


def paired_t_test(a, b):
    """Two-sided paired Student t-test on the differences b - a."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"paired samples differ in length: {a.size} vs {b.size}")
    n = a.size
    if n < 2:
        raise TooShort("paired t-test needs at least two pairs")
    d = b - a
    mean = float(np.mean(d))
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, n - 1, 1.0, True)
        return TTestResult(math.copysign(math.inf, mean), n - 1, 0.0, True)
    t = mean / (sd / math.sqrt(n))
    return TTestResult(t, n - 1, t_two_sided_pvalue(t, n - 1))


# --------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class PipelineConfig:
    features: str = "unigram"
    weighting: str = "tfidf"
    n_topics: int = 10
    min_df: int = 2
    max_df_fraction: float = 0.95
    lda_alpha: float = None
    lda_eta: float = None
    lda_max_iter: int = 100
    lda_tol: float = 1e-4
    lda_restarts: int = 1
    C: float = 1.0
    cost_factor: object = "auto"
    svm_max_epochs: int = 1000
    svm_tol: float = 1e-3
    confidence: float = 0.95

    def __post_init__(self):
        if self.features not in ("unigram", "bigram", "topics"):
            raise ValueError("features must be unigram, bigram or topics")
        if self.weighting not in ("tfidf", "count"):
            raise ValueError("weighting must be tfidf or count")


@dataclass
class FittedPipeline:
    config: PipelineConfig
    vocabulary: object
    idf: np.ndarray = None
    lda: object = None
    svm: object = None

    def features(self, token_docs, labels=None):
        counts = count_matrix(token_docs, self.vocabulary, labels)
        if self.lda is not None:
            return topic_feature_matrix(counts, self.lda)
        if self.config.weighting == "tfidf":
            return tfidf_transform(counts, self.idf)
        return counts

    def predict(self, token_docs):
        return svm_predict(self.svm, self.features(token_docs))


def fit_pipeline(token_docs, labels, config, seed):
    """Fit pruning, vocabulary, idf or LDA topics, and the SVM on one training split."""
    pruned, _ = prune_by_frequency(
        token_docs, PreprocessConfig(min_df=config.min_df, max_df_fraction=config.max_df_fraction))
    vocab = build_vocabulary(pruned, 2 if config.features == "bigram" else 1)
    counts = count_matrix(pruned, vocab, labels)
    fitted = FittedPipeline(config, vocab)
    if config.features == "topics":
        fitted.lda, _ = lda_fit(counts, config.n_topics, config.lda_alpha, config.lda_eta,
                                config.lda_max_iter, config.lda_tol,
                                seed=derive_seed(seed, "lda"), n_restarts=config.lda_restarts)
        kind = "topic"
    else:
        fitted.idf = fit_idf(counts)
        kind = config.features
    X = fitted.features(pruned, labels)
    fitted.svm = svm_train(X, C=config.C, cost_factor=config.cost_factor,
                           max_epochs=config.svm_max_epochs, tol=config.svm_tol,
                           seed=derive_seed(seed, "svm"), feature_kind=kind)
    return fitted


@dataclass
class EvalReport:
    config: dict
    folds: list
    baseline: list
    ttest: TTestResult
    confidence: float = 0.95

    def mean(self, rows=None):
        rows = self.folds if rows is None else rows
        return {m: float(np.mean([getattr(r, m) for r in rows])) for m in METRICS}

    def cl(self, rows=None):
        rows = self.folds if rows is None else rows
        return {m: confidence_halfwidth([getattr(r, m) for r in rows], self.confidence)
                for m in METRICS}

    def to_dict(self):
        def fold_rows(rows):
            return [{"fold": i, **r.as_dict()} for i, r in enumerate(rows)]

        return {
            "config": self.config,
            "folds": fold_rows(self.folds),
            "mean": self.mean(),
            "cl": self.cl(),
            "baseline": {
                "folds": fold_rows(self.baseline),
                "mean": self.mean(self.baseline),
                "cl": self.cl(self.baseline),
            },
            "ttest": self.ttest.as_dict(),
        }

    def table_rows(self, label):
        """One summary row per feature set: mean and CL per metric."""
        mean, cl = self.mean(), self.cl()
        row = {"features": label}
        for m in METRICS:
            row[f"{m}_M"] = mean[m]
            row[f"{m}_CL"] = cl[m]
        return [row]


def _run_fold(dataset, config, folds, seed, f):
    train = folds.train_indices(f)
    test = folds.test_indices(f)
    docs = dataset.tokens
    labels = np.asarray(dataset.labels)
    fitted = fit_pipeline([docs[i] for i in train], labels[train], config,
                          derive_seed(seed, "fold", f))
    pred, _ = fitted.predict([docs[i] for i in test])
    return compute_metrics(labels[test], pred)


def run_cv(dataset, config, folds, seed=0, threads=1):
    """k-fold evaluation; every fitted component sees only its training split.

    The report pairs each fold's model F1 with the majority baseline's F1 on
    the same test fold in a two-sided paired t-test.
    """
    fold_ids = range(folds.k)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda f: _run_fold(dataset, config, folds, seed, f), fold_ids))
    else:
        rows = [_run_fold(dataset, config, folds, seed, f) for f in fold_ids]
    base = majority_baseline(dataset, folds)
    ttest = paired_t_test([r.f1 for r in base], [r.f1 for r in rows])
    cfg = {**asdict(config), "folds": folds.k, "stratified": folds.stratified,
           "group_by_participant": folds.group_by_participant, "seed": seed}
    return EvalReport(cfg, rows, base, ttest, config.confidence)


@dataclass
class SweepResult:
    rows: list  # (n_topics, mean F1)
    best: int
    reports: dict = field(default_factory=dict, repr=False)


def sweep_topics(dataset, config, folds, t_min=5, t_max=200, step=5, seed=0, threads=1,
                 t_values=None):
    """Cross-validated mean F1 of topic features for each topic count.

    The best count maximizes mean F1; ties go to the smaller count.
    """
    if t_values is None:
        if t_min < 1 or step < 1 or t_max < t_min:
            raise ValueError("need 1 <= t_min <= t_max and step >= 1")
        t_values = list(range(t_min, t_max + 1, step))
    rows, reports = [], {}
    for T in t_values:
        rep = run_cv(dataset, replace(config, features="topics", n_topics=int(T)), folds,
                     seed, threads)
        reports[int(T)] = rep
        rows.append((int(T), rep.mean()["f1"]))
    best = min(rows, key=lambda r: (-r[1], r[0]))[0]
    return SweepResult(rows, best, reports)
