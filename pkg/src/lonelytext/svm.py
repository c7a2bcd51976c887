"""L2-regularized L1-hinge linear SVM trained by dual coordinate descent.

The bias is learned as the weight of an appended constant feature equal
to 1, so it is regularized together with the other weights and the dual
has only box constraints 0 <= a_i <= C_i. Positive examples get
C_i = C * cost_factor, negatives C_i = C.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np
import scipy.sparse as sp

from .errors import (DimensionMismatch, NonFiniteFeature, SingleClassTraining,
                     WrongFeatureKind)
from .features import DocTermMatrix

FEATURE_KINDS = ("unigram", "bigram", "topic")


@numba.njit(cache=True, nogil=True)
def _projected_gradient(g, a, c):
    if a <= 0.0:
        return min(g, 0.0)
    if a >= c:
        return max(g, 0.0)
    return g


@numba.njit(cache=True, nogil=True)
def _cd_epoch(indptr, indices, data, y, cs, qdiag, a, w, order):
    """One pass of coordinate updates in ``order``; w[-1] is the bias weight.

    Returns the largest |projected gradient| met during the pass.
    """
    bias = w.shape[0] - 1
    worst = 0.0
    for i in order:
        wx = w[bias]
        for p in range(indptr[i], indptr[i + 1]):
            wx += w[indices[p]] * data[p]
        g = y[i] * wx - 1.0
        pg = _projected_gradient(g, a[i], cs[i])
        if abs(pg) > worst:
            worst = abs(pg)
        if pg != 0.0:
            old = a[i]
            new = min(max(old - g / qdiag[i], 0.0), cs[i])
            a[i] = new
            step = (new - old) * y[i]
            if step != 0.0:
                for p in range(indptr[i], indptr[i + 1]):
                    w[indices[p]] += step * data[p]
                w[bias] += step
    return worst


@numba.njit(cache=True, nogil=True)
def _kkt_residuals(indptr, indices, data, y, cs, a, w):
    bias = w.shape[0] - 1
    out = np.empty(y.shape[0])
    for i in range(y.shape[0]):
        wx = w[bias]
        for p in range(indptr[i], indptr[i + 1]):
            wx += w[indices[p]] * data[p]
        out[i] = abs(_projected_gradient(y[i] * wx - 1.0, a[i], cs[i]))
    return out


@dataclass
class SvmModel:
    w: np.ndarray
    bias: float
    C: float
    cost_factor: float
    feature_kind: str = "unigram"
    seed: int = 0
    dual_coef: np.ndarray = None
    n_epochs: int = 0
    terms: tuple = None

    @property
    def n_features(self):
        return self.w.shape[0]

    def to_dict(self):
        nz = np.flatnonzero(np.abs(self.w) > 1e-12)
        return {
            "feature_kind": self.feature_kind,
            "C": self.C,
            "cost_factor": self.cost_factor,
            "seed": self.seed,
            "bias": self.bias,
            "n_features": int(self.n_features),
            "weights": [[int(j), float(self.w[j])] for j in nz],
        }

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        w = np.zeros(int(d["n_features"]))
        for j, v in d["weights"]:
            w[int(j)] = float(v)
        return cls(w, float(d["bias"]), float(d["C"]), float(d["cost_factor"]),
                   d["feature_kind"], int(d["seed"]))


def _design(m):
    X = m.X if isinstance(m, DocTermMatrix) else m
    X = sp.csr_matrix(X, dtype=np.float64)
    X.sort_indices()
    return X


def _signed(labels):
    labels = np.asarray(labels)
    return np.where(labels == 1, 1.0, -1.0)


def class_costs(labels, C, cost_factor):
    return np.where(np.asarray(labels) == 1, C * cost_factor, C).astype(np.float64)


def svm_train(m, labels=None, C=1.0, cost_factor="auto", max_epochs=1000, tol=1e-3,
              seed=0, feature_kind="unigram"):
    """Train on a DocTermMatrix (labels taken from it unless given).

    ``cost_factor="auto"`` sets it to n_negative / n_positive. Each epoch
    visits the examples in a fresh permutation drawn from ``seed``; training
    stops once the largest projected-gradient violation, measured at the
    final weights, is below ``tol``, or after ``max_epochs``.
    """
    if feature_kind not in FEATURE_KINDS:
        raise ValueError(f"feature_kind must be one of {FEATURE_KINDS}")
    X = _design(m)
    if labels is None:
        labels = m.labels
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (X.shape[0],):
        raise DimensionMismatch("one label per row required")
    n_pos = int(np.sum(labels == 1))
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassTraining("training data must contain both classes")
    if not np.all(np.isfinite(X.data)):
        raise NonFiniteFeature("feature matrix has NaN or infinite entries")
    if cost_factor == "auto":
        cost_factor = n_neg / n_pos
    cost_factor = float(cost_factor)
    if C <= 0 or cost_factor <= 0:
        raise ValueError("C and cost_factor must be positive")

    y = _signed(labels)
    cs = class_costs(labels, C, cost_factor)
    qdiag = np.asarray(X.multiply(X).sum(axis=1)).ravel() + 1.0
    a = np.zeros(X.shape[0])
    w = np.zeros(X.shape[1] + 1)
    indptr = X.indptr.astype(np.int64)
    indices = X.indices.astype(np.int64)
    rng = np.random.default_rng(seed)

    epoch = 0
    for epoch in range(1, max_epochs + 1):
        worst = _cd_epoch(indptr, indices, X.data, y, cs, qdiag, a, w,
                          rng.permutation(X.shape[0]))
        if worst < tol:
            final = _kkt_residuals(indptr, indices, X.data, y, cs, a, w)
            if final.max() < tol:
                break
    terms = getattr(m, "terms", None) if feature_kind != "topic" else None
    return SvmModel(w[:-1].copy(), float(w[-1]), float(C), cost_factor, feature_kind, seed,
                    a, epoch, terms)


def decision_function(model, m):
    X = _design(m)
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(f"model has {model.n_features} features, input has {X.shape[1]}")
    return np.asarray(X @ model.w).ravel() + model.bias


def svm_predict(model, m):
    """(labels, decision values); a decision value of exactly 0 predicts 0."""
    scores = decision_function(model, m)
    return (scores > 0).astype(np.int64), scores


def kkt_residuals(model, m, labels=None):
    X = _design(m)
    labels = m.labels if labels is None else labels
    w = np.append(model.w, model.bias)
    return _kkt_residuals(X.indptr.astype(np.int64), X.indices.astype(np.int64), X.data,
                          _signed(labels), class_costs(labels, model.C, model.cost_factor),
                          model.dual_coef, w)


def primal_objective(model, m, labels=None):
    X = _design(m)
    labels = m.labels if labels is None else labels
    margins = _signed(labels) * decision_function(model, X)
    cs = class_costs(labels, model.C, model.cost_factor)
    reg = 0.5 * (model.w @ model.w + model.bias ** 2)
    return float(reg + np.sum(cs * np.maximum(0.0, 1.0 - margins)))


def dual_objective(model):
    """Dual value sum(a) - 0.5 ||w~||^2 at the stored dual coefficients."""
    return float(np.sum(model.dual_coef) - 0.5 * (model.w @ model.w + model.bias ** 2))


def rank_words_by_weight(model, vocab=None):
    """Terms by descending signed weight (positive = lonely-indicative)."""
    if model.feature_kind == "topic":
        raise WrongFeatureKind("word ranking needs an n-gram model, not topic features")
    terms = list(vocab.terms) if vocab is not None else (
        list(model.terms) if model.terms is not None else [str(j) for j in range(model.n_features)])
    if len(terms) != model.n_features:
        raise DimensionMismatch(f"{len(terms)} terms for {model.n_features} weights")
    order = sorted(range(len(terms)), key=lambda j: (-model.w[j], terms[j]))
    return [(terms[j], float(model.w[j])) for j in order]
