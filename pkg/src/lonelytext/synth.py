"""Synthetic corpora drawn from the LDA generative process, with ground truth."""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, InvalidSpec
from .features import DocTermMatrix
from .seeding import substream


@dataclass(frozen=True)
class LabelLink:
    """label = 1 iff weights . theta > threshold.

    Give ``positive_rate`` instead of ``threshold`` to calibrate the
    threshold to that empirical quantile of the generated scores.
    """

    weights: tuple
    threshold: float = None
    positive_rate: float = None

    def __post_init__(self):
        if (self.threshold is None) == (self.positive_rate is None):
            raise InvalidSpec("label link needs exactly one of threshold, positive_rate")
        if self.positive_rate is not None and not 0.0 < self.positive_rate < 1.0:
            raise InvalidSpec("positive_rate must lie in (0, 1)")


@dataclass(frozen=True)
class SynthSpec:
    n_topics: int
    n_terms: int
    n_docs: int
    doc_length: float = 100.0
    fixed_length: bool = False
    alpha: float = 0.1
    topic_sparsity: float = 0.05
    true_topics: np.ndarray = None
    label_link: LabelLink = None
    seed: int = 0

    def validate(self):
        if self.n_topics < 1 or self.n_terms < 1 or self.n_docs < 1:
            raise InvalidSpec("n_topics, n_terms and n_docs must be >= 1")
        if self.doc_length <= 0 or self.alpha <= 0 or self.topic_sparsity <= 0:
            raise InvalidSpec("doc_length, alpha and topic_sparsity must be positive")
        if self.true_topics is not None:
            B = np.asarray(self.true_topics, dtype=np.float64)
            if B.shape != (self.n_topics, self.n_terms):
                raise InvalidSpec(f"true_topics must be {self.n_topics} x {self.n_terms}")
            if np.any(B < 0) or not np.allclose(B.sum(axis=1), 1.0, atol=1e-9):
                raise InvalidSpec("true_topics rows must lie on the simplex")
        if self.label_link is not None and len(self.label_link.weights) != self.n_topics:
            raise InvalidSpec("label link needs one weight per topic")

    def to_dict(self):
        d = asdict(self)
        if self.true_topics is not None:
            d["true_topics"] = np.asarray(self.true_topics).tolist()
        if self.label_link is not None:
            d["label_link"] = {**asdict(self.label_link),
                               "weights": list(self.label_link.weights)}
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise InvalidSpec(f"unknown spec keys: {', '.join(sorted(unknown))}")
        if d.get("true_topics") is not None:
            d["true_topics"] = np.asarray(d["true_topics"], dtype=np.float64)
        if d.get("label_link") is not None:
            link = dict(d["label_link"])
            link["weights"] = tuple(float(w) for w in link["weights"])
            try:
                d["label_link"] = LabelLink(**link)
            except TypeError as exc:
                raise InvalidSpec(str(exc)) from None
        try:
            spec = cls(**d)
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from None
        spec.validate()
        return spec


@dataclass
class SynthCorpus:
    counts: DocTermMatrix
    theta: np.ndarray
    z: list
    words: list
    topics: np.ndarray
    labels: np.ndarray = None
    threshold: float = None
    terms: tuple = field(default=None)


def term_names(n_terms):
    width = len(str(n_terms - 1))
    return tuple(f"w{v:0{width}d}" for v in range(n_terms))


def sample_topics(n_topics, n_terms, sparsity, rng):
    return rng.dirichlet(np.full(n_terms, sparsity), size=n_topics)


def generate_corpus(spec):
    """Draw documents: theta_d ~ Dir(alpha), z ~ Mult(theta_d), w ~ Mult(topic_z).

    Topics, document draws and labels use separate named substreams of
    ``spec.seed``, so turning the label link on or off leaves the corpus
    itself byte-identical.
    """
    spec.validate()
    T, V, D = spec.n_topics, spec.n_terms, spec.n_docs
    if spec.true_topics is not None:
        topics = np.asarray(spec.true_topics, dtype=np.float64)
    else:
        topics = sample_topics(T, V, spec.topic_sparsity, substream(spec.seed, "synth", "topics"))
    rng = substream(spec.seed, "synth", "documents")
    theta = rng.dirichlet(np.full(T, spec.alpha), size=D)
    cum_topics = np.cumsum(topics, axis=1)
    cum_topics[:, -1] = 1.0
    zs, ws = [], []
    indptr, indices, data = [0], [], []
    for d in range(D):
        n = int(spec.doc_length) if spec.fixed_length else int(rng.poisson(spec.doc_length))
        z = rng.choice(T, size=n, p=theta[d]) if n else np.zeros(0, dtype=np.int64)
        u = rng.random(n)
        w = np.empty(n, dtype=np.int64)
        for t in np.unique(z):
            sel = z == t
            w[sel] = np.searchsorted(cum_topics[t], u[sel], side="right")
        zs.append(z)
        ws.append(w)
        cols, cnt = np.unique(w, return_counts=True)
        indices.extend(cols.tolist())
        data.extend(cnt.tolist())
        indptr.append(len(indices))
    X = sp.csr_matrix((np.asarray(data, dtype=np.float64),
                       np.asarray(indices, dtype=np.int64), indptr), shape=(D, V))
    names = term_names(V)
    corpus = SynthCorpus(DocTermMatrix(X, "count", None, names), theta, zs, ws, topics,
                         terms=names)
    if spec.label_link is not None:
        labels, thr = generate_labels(theta, spec.label_link, return_threshold=True)
        corpus.labels = labels
        corpus.threshold = thr
        corpus.counts = DocTermMatrix(X, "count", labels, names)
    return corpus


def generate_labels(theta, link, return_threshold=False):
    """Binary labels from topic proportions through a linear threshold."""
    theta = np.asarray(theta, dtype=np.float64)
    w = np.asarray(link.weights, dtype=np.float64)
    if theta.ndim != 2 or theta.shape[1] != w.shape[0]:
        raise DimensionMismatch(f"weights have length {w.shape[0]}, theta is {theta.shape}")
    score = theta @ w
    if link.threshold is not None:
        thr = float(link.threshold)
    else:
        thr = float(np.quantile(score, 1.0 - link.positive_rate, method="lower"))
    labels = (score > thr).astype(np.int64)
    return (labels, thr) if return_threshold else labels


def align_topics(learned, true_topics):
    """Greedy maximum-cosine matching of learned to true topics.

    ``learned`` is an LdaModel or a T x V stochastic matrix. Returns
    (perm, tv) with perm[k] the learned topic matched to true topic k and
    tv[k] their total-variation distance.
    """
    L = learned.topics() if hasattr(learned, "topics") else np.asarray(learned, dtype=np.float64)
    B = np.asarray(true_topics, dtype=np.float64)
    if L.shape != B.shape:
        raise DimensionMismatch(f"learned {L.shape} vs true {B.shape}")
    Ln = L / np.linalg.norm(L, axis=1, keepdims=True)
    Bn = B / np.linalg.norm(B, axis=1, keepdims=True)
    cos = Bn @ Ln.T
    T = B.shape[0]
    perm = np.full(T, -1, dtype=np.int64)
    free_true = np.ones(T, dtype=bool)
    free_learned = np.ones(T, dtype=bool)
    for _ in range(T):
        masked = np.where(free_true[:, None] & free_learned[None, :], cos, -np.inf)
        k, j = np.unravel_index(np.argmax(masked), masked.shape)
        perm[k] = j
        free_true[k] = False
        free_learned[j] = False
    tv = 0.5 * np.abs(B - L[perm]).sum(axis=1)
    return perm, tv


def save_corpus(corpus, spec, out_dir):
    """Matrix Market counts, labels CSV, vocabulary TSV and truth files."""
    from .features import Vocabulary, write_matrix_market

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_market(corpus.counts, out / "corpus.mtx")
    df = np.bincount(corpus.counts.X.indices, minlength=corpus.counts.n_terms)
    Vocabulary(corpus.terms, tuple(int(x) for x in df)).to_tsv(out / "vocabulary.tsv")
    if corpus.labels is not None:
        lines = ["doc,label"] + [f"{d},{int(y)}" for d, y in enumerate(corpus.labels)]
        (out / "labels.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    np.savetxt(out / "true_theta.csv", corpus.theta, delimiter=",", fmt="%.17g")
    np.savetxt(out / "true_topics.csv", corpus.topics, delimiter=",", fmt="%.17g")
    with open(out / "true_z.txt", "w", encoding="utf-8") as fh:
        for z in corpus.z:
            fh.write(" ".join(map(str, z.tolist())) + "\n")
    (out / "spec.json").write_text(json.dumps(spec.to_dict(), indent=1) + "\n", encoding="utf-8")


def corpus_to_dataset(corpus, kind="RT"):
    """Labeled synthetic corpus as a Dataset of pre-tokenized documents.

    Each document becomes its own participant on a fixed date; tokens are
    the generated term names in generation order.
    """
    import datetime as dt

    from .ingest import Dataset, LabeledDocument

    if corpus.labels is None:
        raise InvalidSpec("corpus has no labels; give the spec a label link")
    day = dt.date(2000, 1, 1)
    width = len(str(len(corpus.words) - 1))
    docs = []
    for d, (w, y) in enumerate(zip(corpus.words, corpus.labels)):
        docs.append(LabeledDocument(
            participant_id=f"s{d:0{width}d}",
            date=day,
            kind=kind,
            raw_text="",
            label=int(y),
            raw_score=100.0 if y else 0.0,
            tokens=tuple(corpus.terms[v] for v in w),
        ))
    return Dataset(tuple(docs), kind)
