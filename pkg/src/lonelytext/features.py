"""Vocabulary, sparse count / tf-idf matrices and topic-proportion features."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import EmptyVocabulary

WEIGHTINGS = ("count", "tfidf", "topic_proportion")


def ngrams(tokens, ngram_max):
    """Unigrams, plus adjacent "w1 w2" pairs when ``ngram_max`` is 2."""
    out = list(tokens)
    if ngram_max >= 2:
        out.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    return out


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple
    df: tuple
    ngram_max: int = 1

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self):
        return len(self.terms)

    def to_tsv(self, path):
        lines = [f"{t}\t{i}\t{d}" for i, (t, d) in enumerate(zip(self.terms, self.df))]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def from_tsv(cls, path):
        terms, df = [], []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            term, col, d = line.split("\t")
            if int(col) != len(terms):
                raise ValueError(f"{path}: column ids must be 0..V-1 in order")
            terms.append(term)
            df.append(int(d))
        ngram_max = 2 if any(" " in t for t in terms) else 1
        return cls(tuple(terms), tuple(df), ngram_max)


def build_vocabulary(docs, ngram_max=1):
    """Sorted term list over all documents with per-term document frequency."""
    if ngram_max not in (1, 2):
        raise ValueError("ngram_max must be 1 or 2")
    df = {}
    for doc in docs:
        for term in set(ngrams(list(doc), ngram_max)):
            df[term] = df.get(term, 0) + 1
    if not df:
        raise EmptyVocabulary("no terms in the training documents")
    terms = tuple(sorted(df))
    return Vocabulary(terms, tuple(df[t] for t in terms), ngram_max)


@dataclass(frozen=True)
class DocTermMatrix:
    """Sparse document-by-feature matrix with its weighting and labels."""

    X: sp.csr_matrix
    weighting: str = "count"
    labels: np.ndarray = None
    terms: tuple = None

    def __post_init__(self):
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"unknown weighting {self.weighting!r}")
        X = sp.csr_matrix(self.X, dtype=np.float64)
        X.sort_indices()
        object.__setattr__(self, "X", X)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (X.shape[0],):
                raise ValueError("labels must have one entry per document")
            object.__setattr__(self, "labels", labels)

    @property
    def n_docs(self):
        return self.X.shape[0]

    @property
    def n_terms(self):
        return self.X.shape[1]

    def rows(self):
        """Per-document lists of (column id, value)."""
        X = self.X
        return [list(zip(X.indices[X.indptr[d]:X.indptr[d + 1]].tolist(),
                         X.data[X.indptr[d]:X.indptr[d + 1]].tolist()))
                for d in range(X.shape[0])]

    def take(self, indices):
        labels = None if self.labels is None else self.labels[indices]
        return DocTermMatrix(self.X[indices], self.weighting, labels, self.terms)


def count_matrix(docs, vocab, labels=None):
    """Term counts; tokens (or bigrams) outside ``vocab`` are ignored."""
    index = vocab.index
    indptr, indices, data = [0], [], []
    for doc in docs:
        counts = {}
        for term in ngrams(list(doc), vocab.ngram_max):
            col = index.get(term)
            if col is not None:
                counts[col] = counts.get(col, 0) + 1
        cols = sorted(counts)
        indices.extend(cols)
        data.extend(counts[c] for c in cols)
        indptr.append(len(indices))
    X = sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), indptr),
        shape=(len(indptr) - 1, len(vocab)),
    )
    return DocTermMatrix(X, "count", labels, vocab.terms)


def fit_idf(m):
    """Smoothed idf: ln((1 + D) / (1 + df)) + 1, from a count matrix."""
    df = np.bincount(m.X.indices, minlength=m.n_terms)
    return np.log((1.0 + m.n_docs) / (1.0 + df)) + 1.0


def tfidf_transform(m, idf=None):
    """Raw counts times idf, each row scaled to unit Euclidean norm.

    Pass the ``idf`` fitted on a training split to transform held-out rows.
    """
    if m.weighting != "count":
        raise ValueError("tfidf_transform expects a count matrix")
    if idf is None:
        idf = fit_idf(m)
    X = m.X.copy()
    X.data = X.data * idf[X.indices]
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    X = sp.diags(scale) @ X
    return DocTermMatrix(X.tocsr(), "tfidf", m.labels, m.terms)


def topic_feature_matrix(m, lda):
    """Normalized variational topic proportions gamma_d / sum(gamma_d)."""
    from .lda import lda_transform

    gamma = lda_transform(m, lda)
    props = gamma / gamma.sum(axis=1, keepdims=True)
    names = tuple(f"topic_{t}" for t in range(props.shape[1]))
    return DocTermMatrix(sp.csr_matrix(props), "topic_proportion", m.labels, names)


def write_matrix_market(m, path):
    field = "integer" if m.weighting == "count" else "real"
    X = m.X.astype(np.int64) if field == "integer" else m.X
    scipy.io.mmwrite(str(path), X.tocoo(), field=field, precision=17)


def read_matrix_market(path, weighting="count", labels=None, terms=None):
    X = scipy.io.mmread(str(path))
    return DocTermMatrix(sp.csr_matrix(X, dtype=np.float64), weighting, labels, terms)
