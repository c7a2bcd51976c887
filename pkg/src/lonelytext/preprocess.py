"""Tokenizing, chat-jargon normalization, stopwords, stemming, df pruning."""

import hashlib
import re
from functools import lru_cache
from collections import Counter
from dataclasses import dataclass, field, replace
from importlib import resources
from itertools import groupby

from .errors import EmptyDataset
from .porter import stem_word

RESOURCE_VERSION = "1"
RESOURCE_SHA256 = {
    "stopwords.txt": "d06860f2f3fb5200fbdc82afb230a5b6623fb7501065a9e809c6089db8b51e7a",
    "jargon.tsv": "457d566805ae57fd2a1db8b096ffc7aca1e3933572b6714c1100f483401916a1",
}

_SPLIT = re.compile(r"[\W_]+", re.UNICODE)


def _read_resource(name):
    data = resources.files("lonelytext.resources").joinpath(name).read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    if digest != RESOURCE_SHA256[name]:
        raise RuntimeError(f"resource {name} checksum mismatch ({digest})")
    return data.decode("utf-8")


def _content_lines(text):
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            yield line


@lru_cache(maxsize=None)
def load_stopwords(path=None):
    text = _read_resource("stopwords.txt") if path is None else open(path, encoding="utf-8").read()
    return frozenset(line.strip().lower() for line in _content_lines(text))


@dataclass(frozen=True)
class JargonMap:
    """Surface form -> canonical token, plus an elongation cap."""

    entries: dict
    max_repeat: int = 2

    def __post_init__(self):
        canon = set(self.entries.values())
        for surface, target in self.entries.items():
            if target != target.lower() or len(target) < 2:
                raise ValueError(f"canonical form {target!r} must be lowercase, length >= 2")
            if target in self.entries and self.entries[target] != target:
                raise ValueError(f"jargon map is cyclic at {target!r}")
        object.__setattr__(self, "_canonical", frozenset(canon))

    @classmethod
    def load(cls, path=None, max_repeat=2):
        text = _read_resource("jargon.tsv") if path is None else open(path, encoding="utf-8").read()
        entries = {}
        for line in _content_lines(text):
            surface, canonical = line.rstrip("\n").split("\t")
            entries[surface.strip().lower()] = canonical.strip()
        return cls(entries, max_repeat)

    def lookup(self, token):
        if token in self.entries:
            return self.entries[token]
        if token in self._canonical:
            return token
        return None


def collapse_runs(token, cap):
    return "".join(ch * min(len(list(run)), cap) for ch, run in groupby(token))


def normalize_jargon(tokens, jm):
    """Map chat jargon to standard tokens, order preserved.

    Exact entries are replaced first. A token with a character run longer
    than the cap is collapsed to the cap, then to single letters, and the
    first form found in the map wins; otherwise the capped form is kept
    ("loooolll" -> "lol", "yessss" -> "yess").
    """
    out = []
    for tok in tokens:
        hit = jm.lookup(tok)
        if hit is None and any(len(list(r)) > jm.max_repeat for _, r in groupby(tok)):
            capped = collapse_runs(tok, jm.max_repeat)
            hit = jm.lookup(capped) or jm.lookup(collapse_runs(tok, 1)) or capped
        out.append(tok if hit is None else hit)
    return out


@dataclass(frozen=True)
class PreprocessConfig:
    stopword_list: frozenset = field(default_factory=load_stopwords)
    stemmer: str = "porter"
    min_token_len: int = 2
    min_df: int = 2
    max_df_fraction: float = 0.95
    drop_tokens: frozenset = frozenset({"nan"})

    def __post_init__(self):
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")
        if self.min_df < 1:
            raise ValueError("min_df must be >= 1")
        if not 0.0 < self.max_df_fraction <= 1.0:
            raise ValueError("max_df_fraction must lie in (0, 1]")
        if self.stemmer not in ("none", "porter"):
            raise ValueError("stemmer must be 'none' or 'porter'")


def tokenize(text, min_token_len=2, jargon=None):
    """Lowercase, split on non-alphanumeric runs, drop short tokens.

    When ``jargon`` is given it is applied before the length filter, so a
    surface form like "u" can still become "you".
    """
    tokens = [t for t in _SPLIT.split(text.lower()) if t]
    if jargon is not None:
        tokens = normalize_jargon(tokens, jargon)
    return [t for t in tokens if len(t) >= min_token_len]


def remove_stopwords(tokens, config):
    stop = config.stopword_list
    drop = config.drop_tokens
    return [t for t in tokens if t not in stop and t not in drop]


def stem(tokens, config):
    if config.stemmer == "none":
        return list(tokens)
    return [stem_word(t) for t in tokens]


def preprocess_text(text, config=None, jargon=None):
    """Full per-document pipeline: tokenize, jargon, stopwords, stem.

    Stemming can shorten a token or turn it into a stopword, so the length
    and stopword filters run again afterwards.
    """
    config = config or PreprocessConfig()
    tokens = tokenize(text, config.min_token_len, jargon)
    tokens = stem(remove_stopwords(tokens, config), config)
    return [t for t in remove_stopwords(tokens, config) if len(t) >= config.min_token_len]


def preprocess_dataset(dataset, config=None, jargon=None):
    """Dataset with every document's ``tokens`` filled from its raw text."""
    config = config or PreprocessConfig()
    return dataset.with_documents(
        replace(d, tokens=tuple(preprocess_text(d.raw_text, config, jargon)))
        for d in dataset.documents
    )


@dataclass
class PruneReport:
    n_documents: int
    removed_tail: dict  # token -> df, df < min_df
    removed_head: dict  # token -> df, df / D > max_df_fraction

    @property
    def removed(self):
        return {**self.removed_tail, **self.removed_head}


def document_frequency(docs):
    df = Counter()
    for doc in docs:
        df.update(set(doc))
    return df


def prune_by_frequency(docs, config):
    """Drop rare (tail) and ubiquitous (head) tokens by document frequency."""
    docs = [list(d) for d in docs]
    if not docs:
        raise EmptyDataset("cannot prune an empty corpus")
    n = len(docs)
    df = document_frequency(docs)
    tail = {t: c for t, c in sorted(df.items()) if c < config.min_df}
    head = {t: c for t, c in sorted(df.items())
            if c >= config.min_df and c / n > config.max_df_fraction}
    if not tail and not head:
        return docs, PruneReport(n, tail, head)
    gone = tail.keys() | head.keys()
    return [[t for t in d if t not in gone] for d in docs], PruneReport(n, tail, head)
