"""Smoothed LDA fitted by batch mean-field variational inference.

Notation follows the usual variational treatment: ``lam`` (T x V) are the
Dirichlet parameters of q(topic-word rows), ``gamma`` (D x T) those of
q(document-topic proportions), and ``phi`` holds one T-vector of topic
responsibilities per distinct (document, term) cell of the count matrix,
in CSR order.
"""

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np
from scipy.special import gammaln

from .errors import InvalidTopicCount, ModelVocabMismatch, NumericalFailure
from .features import DocTermMatrix
from .seeding import derive_seed
from .special import digamma, digamma_scalar

MATRIX_MAGIC = b"LDAMAT\x00\x00"


def dirichlet_expectation(params):
    """E[log x] under Dir(params), row-wise for 2-D input."""
    if params.ndim == 1:
        return digamma(params) - digamma(params.sum())
    return digamma(params) - digamma(params.sum(axis=1))[:, np.newaxis]


@dataclass
class LdaModel:
    lam: np.ndarray
    alpha: float
    eta: float
    seed: int = 0
    n_iter: int = 0
    terms: tuple = None

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=np.float64)
        self.expected_log_beta = dirichlet_expectation(self.lam)

    @property
    def n_topics(self):
        return self.lam.shape[0]

    @property
    def n_terms(self):
        return self.lam.shape[1]

    def topics(self):
        """Point-estimate topic-word distributions (rows of lam, normalized)."""
        return self.lam / self.lam.sum(axis=1, keepdims=True)

    def term_names(self):
        if self.terms is not None:
            return list(self.terms)
        return [str(v) for v in range(self.n_terms)]

    def save(self, path):
        """Write ``path`` (metadata JSON) and ``path`` + ``.bin`` (lam)."""
        path = Path(path)
        bin_path = path.with_name(path.name + ".bin")
        T, V = self.lam.shape
        with open(bin_path, "wb") as fh:
            fh.write(MATRIX_MAGIC + struct.pack("<II", T, V))
            fh.write(np.ascontiguousarray(self.lam, dtype="<f8").tobytes())
        meta = {
            "T": T,
            "V": V,
            "alpha": self.alpha,
            "eta": self.eta,
            "seed": self.seed,
            "n_iter": self.n_iter,
            "matrix": bin_path.name,
            "terms": None if self.terms is None else list(self.terms),
        }
        path.write_text(json.dumps(meta, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        path = Path(path)
        meta = json.loads(path.read_text(encoding="utf-8"))
        raw = path.with_name(meta["matrix"]).read_bytes()
        if raw[:8] != MATRIX_MAGIC:
            raise ValueError(f"{meta['matrix']}: not an LDA matrix file")
        T, V = struct.unpack("<II", raw[8:16])
        if (T, V) != (meta["T"], meta["V"]):
            raise ValueError("matrix header disagrees with metadata")
        lam = np.frombuffer(raw[16:], dtype="<f8").reshape(T, V).astype(np.float64)
        terms = None if meta.get("terms") is None else tuple(meta["terms"])
        return cls(lam, meta["alpha"], meta["eta"], meta["seed"], meta["n_iter"], terms)


@dataclass
class VariationalState:
    gamma: np.ndarray
    phi: np.ndarray = None
    elbo_trace: list = field(default_factory=list)


def _counts(m):
    if isinstance(m, DocTermMatrix):
        if m.weighting != "count":
            raise ValueError("LDA needs a count matrix")
        return m.X
    return DocTermMatrix(m).X


def _doc_index(X):
    return np.repeat(np.arange(X.shape[0]), np.diff(X.indptr))


def _responsibilities(log_beta_cells, elog_theta_cells):
    logphi = log_beta_cells + elog_theta_cells
    logphi -= logphi.max(axis=1, keepdims=True)
    phi = np.exp(logphi)
    phi /= phi.sum(axis=1, keepdims=True)
    return phi


@numba.njit(cache=True, nogil=True)
def _estep_kernel(indptr, indices, data, elog_beta_t, alpha, gamma, phi, max_iter, tol):
    D, T = gamma.shape
    elog_theta = np.empty(T)
    new = np.empty(T)
    s = np.empty(T)
    for d in range(D):
        lo, hi = indptr[d], indptr[d + 1]
        if lo == hi:
            continue
        for _ in range(max_iter):
            total = 0.0
            for t in range(T):
                total += gamma[d, t]
            psi_total = digamma_scalar(total)
            for t in range(T):
                elog_theta[t] = digamma_scalar(gamma[d, t]) - psi_total
                new[t] = alpha
            for p in range(lo, hi):
                v = indices[p]
                top = -np.inf
                for t in range(T):
                    s[t] = elog_beta_t[v, t] + elog_theta[t]
                    if s[t] > top:
                        top = s[t]
                norm = 0.0
                for t in range(T):
                    s[t] = math.exp(s[t] - top)
                    norm += s[t]
                for t in range(T):
                    phi[p, t] = s[t] / norm
                    new[t] += data[p] * phi[p, t]
            change = 0.0
            for t in range(T):
                change += abs(new[t] - gamma[d, t])
                gamma[d, t] = new[t]
            if change / T < tol:
                break


def e_step(X, elog_beta, alpha, gamma, max_iter=100, tol=1e-3):
    """Per-document coordinate ascent on (phi, gamma) with topics fixed.

    ``gamma`` is the starting point and is not modified. Each document is
    iterated until its mean absolute gamma change drops below ``tol`` or
    ``max_iter`` updates. Documents are independent, so the result does
    not depend on document order. Returns (gamma, phi).
    """
    gamma = np.array(gamma, dtype=np.float64, copy=True, order="C")
    phi = np.full((X.nnz, gamma.shape[1]), 1.0 / gamma.shape[1])
    _estep_kernel(X.indptr.astype(np.int64), X.indices.astype(np.int64),
                  np.ascontiguousarray(X.data, dtype=np.float64),
                  np.ascontiguousarray(elog_beta.T), float(alpha), gamma, phi,
                  int(max_iter), float(tol))
    return gamma, phi


def _sufficient_stats(X, phi, T):
    V = X.shape[1]
    weighted = X.data[:, np.newaxis] * phi
    return np.stack([np.bincount(X.indices, weights=weighted[:, t], minlength=V)
                     for t in range(T)])


def _prior_terms(gamma, lam, alpha, eta):
    D, T = gamma.shape
    V = lam.shape[1]
    elog_theta = dirichlet_expectation(gamma)
    elog_beta = dirichlet_expectation(lam)
    doc = D * (gammaln(T * alpha) - T * gammaln(alpha))
    doc += np.sum((alpha - gamma) * elog_theta)
    doc += np.sum(gammaln(gamma)) - np.sum(gammaln(gamma.sum(axis=1)))
    top = T * (gammaln(V * eta) - V * gammaln(eta))
    top += np.sum((eta - lam) * elog_beta)
    top += np.sum(gammaln(lam)) - np.sum(gammaln(lam.sum(axis=1)))
    return doc + top, elog_theta, elog_beta


def elbo(m, model, state):
    """Evidence lower bound of smoothed LDA at (model.lam, state.gamma, state.phi).

    When ``state.phi`` is None the bound is evaluated at the optimal phi for
    the given gamma and lam, which collapses the word terms to a log-sum-exp.
    """
    X = _counts(m)
    gamma = np.asarray(state.gamma, dtype=np.float64)
    prior, elog_theta, elog_beta = _prior_terms(gamma, model.lam, model.alpha, model.eta)
    rows = _doc_index(X)
    s = elog_theta[rows] + elog_beta.T[X.indices]
    if state.phi is None:
        top = s.max(axis=1)
        lse = top + np.log(np.exp(s - top[:, np.newaxis]).sum(axis=1))
        words = np.dot(X.data, lse)
    else:
        phi = np.asarray(state.phi)
        logphi = np.log(np.where(phi > 0, phi, 1.0))
        words = np.dot(X.data, np.sum(phi * (s - logphi), axis=1))
    value = float(prior + words)
    if not np.isfinite(value):
        raise NumericalFailure("ELBO is not finite")
    return value


def lda_fit(m, n_topics, alpha=None, eta=None, max_iter=100, tol=1e-4, seed=0,
            estep_max_iter=100, estep_tol=1e-3, terms=None, n_restarts=1):
    """Fit smoothed LDA by alternating E- and M-steps.

    Stops when the relative ELBO change falls below ``tol`` or after
    ``max_iter`` outer iterations, then runs one more E-step against the
    final topics so the returned gamma and phi are exactly what
    :func:`lda_transform` gives for the training documents. Every E-step
    starts each document from gamma = alpha + N_d / T. ``elbo_trace`` holds
    one value per outer iteration, each at the optimal phi.

    With ``n_restarts`` > 1 the fit is repeated from independent random
    topic initializations and the run with the highest last traced ELBO is kept;
    restart 0 is the single-run fit for ``seed``.
    Returns (LdaModel, VariationalState).
    """
    if n_restarts > 1:
        best = None
        for r in range(n_restarts):
            init_seed = seed if r == 0 else derive_seed(seed, "lda-restart", r)
            model, state = lda_fit(m, n_topics, alpha, eta, max_iter, tol, init_seed,
                                   estep_max_iter, estep_tol, terms)
            if best is None or state.elbo_trace[-1] > best[1].elbo_trace[-1]:
                best = (model, state)
        best[0].seed = seed
        return best
    if int(n_topics) != n_topics or n_topics < 1:
        raise InvalidTopicCount(f"topic count must be a positive integer, got {n_topics}")
    T = int(n_topics)
    alpha = 1.0 / T if alpha is None else float(alpha)
    eta = 1.0 / T if eta is None else float(eta)
    if alpha <= 0 or eta <= 0:
        raise ValueError("alpha and eta must be positive")
    X = _counts(m)
    if terms is None and isinstance(m, DocTermMatrix):
        terms = m.terms
    D, V = X.shape

    rng = np.random.default_rng(seed)
    lam = rng.gamma(100.0, 0.01, size=(T, V))
    elog_beta = dirichlet_expectation(lam)
    n_d = np.asarray(X.sum(axis=1)).ravel()
    gamma0 = alpha + np.repeat(n_d[:, np.newaxis] / T, T, axis=1)

    trace = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        gamma, phi = e_step(X, elog_beta, alpha, gamma0, estep_max_iter, estep_tol)
        lam = eta + _sufficient_stats(X, phi, T)
        model = LdaModel(lam, alpha, eta, seed, n_iter, terms)
        elog_beta = model.expected_log_beta
        trace.append(elbo(X, model, VariationalState(gamma)))
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) < tol * abs(trace[-2]):
            break

    model = LdaModel(lam, alpha, eta, seed, n_iter, terms)
    gamma, phi = e_step(X, elog_beta, alpha, gamma0, estep_max_iter, estep_tol)
    # phi is refreshed once more so that it is the optimum for the final gamma
    rows = _doc_index(X)
    phi = _responsibilities(elog_beta.T[X.indices], dirichlet_expectation(gamma)[rows])
    return model, VariationalState(gamma, phi, trace)


def _check_vocab(m, model):
    X = _counts(m)
    if X.shape[1] != model.n_terms:
        raise ModelVocabMismatch(f"matrix has {X.shape[1]} terms, model has {model.n_terms}")
    if (isinstance(m, DocTermMatrix) and m.terms is not None and model.terms is not None
            and tuple(m.terms) != tuple(model.terms)):
        raise ModelVocabMismatch("matrix and model vocabularies differ")
    return X


def lda_transform(m, model, max_iter=100, tol=1e-3):
    """Variational gamma for each document with the topics held fixed."""
    X = _check_vocab(m, model)
    T = model.n_topics
    n_d = np.asarray(X.sum(axis=1)).ravel()
    gamma0 = model.alpha + np.repeat(n_d[:, np.newaxis] / T, T, axis=1)
    gamma, _ = e_step(X, model.expected_log_beta, model.alpha, gamma0, max_iter, tol)
    return gamma


def topic_top_words(model, n):
    """Top ``n`` (term, probability) pairs per topic; ties go to the smaller term."""
    names = model.term_names()
    if n <= 0:
        return [[] for _ in range(model.n_topics)]
    out = []
    for row in model.topics():
        order = sorted(range(len(names)), key=lambda v: (-row[v], names[v]))
        out.append([(names[v], float(row[v])) for v in order[:n]])
    return out


def topic_entropy(model, t):
    p = model.topics()[t]
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))
