"""Message logs and EMA responses to labeled one-day documents."""

import csv
import datetime as dt
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import EmptyDataset, MalformedRecord, ScoreOutOfRange, UnknownChannel

CHANNELS = ("sms", "facebook")
DIRECTIONS = ("sent", "received")
KINDS = ("RT", "EOD")
MESSAGE_FIELDS = ("participant_id", "timestamp", "channel", "direction", "text")
EMA_FIELDS = ("participant_id", "timestamp", "kind", "score")

# Facebook exports write empty rows as the literal string "nan".
EMPTY_TEXTS = frozenset({"", "nan"})


@dataclass(frozen=True)
class Message:
    participant_id: str
    timestamp: dt.datetime
    channel: str
    direction: str
    text: str


@dataclass(frozen=True)
class EmaResponse:
    participant_id: str
    timestamp: dt.datetime
    kind: str
    score: float


@dataclass(frozen=True)
class LabeledDocument:
    participant_id: str
    date: dt.date
    kind: str
    raw_text: str
    label: int
    raw_score: float
    tokens: tuple = ()

    def to_dict(self):
        return {
            "participant_id": self.participant_id,
            "date": self.date.isoformat(),
            "kind": self.kind,
            "label": self.label,
            "raw_score": self.raw_score,
            "raw_text": self.raw_text,
            "tokens": list(self.tokens),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            participant_id=str(d["participant_id"]),
            date=dt.date.fromisoformat(d["date"]),
            kind=d["kind"],
            raw_text=d.get("raw_text", ""),
            label=int(d["label"]),
            raw_score=float(d["raw_score"]),
            tokens=tuple(d.get("tokens", ())),
        )


@dataclass(frozen=True)
class Dataset:
    """Immutable collection of documents sharing one label kind."""

    documents: tuple
    kind: str
    positive_rate: float = field(init=False)

    def __post_init__(self):
        docs = tuple(self.documents)
        object.__setattr__(self, "documents", docs)
        for doc in docs:
            if doc.kind != self.kind:
                raise ValueError(f"document kind {doc.kind} != dataset kind {self.kind}")
        rate = sum(d.label for d in docs) / len(docs) if docs else 0.0
        object.__setattr__(self, "positive_rate", rate)

    def __len__(self):
        return len(self.documents)

    @property
    def labels(self):
        return [d.label for d in self.documents]

    @property
    def tokens(self):
        return [list(d.tokens) for d in self.documents]

    def subset(self, indices):
        return Dataset(tuple(self.documents[i] for i in indices), self.kind)

    def with_documents(self, documents):
        return Dataset(tuple(documents), self.kind)

    def to_dict(self):
        return {
            "kind": self.kind,
            "positive_rate": self.positive_rate,
            "documents": [d.to_dict() for d in self.documents],
        }

    @classmethod
    def from_dict(cls, d):
        docs = tuple(LabeledDocument.from_dict(x) for x in d["documents"])
        return cls(docs, d["kind"])

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, ensure_ascii=False) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def parse_timestamp(value):
    """RFC 3339 timestamp to an aware UTC datetime (naive input is taken as UTC)."""
    if not isinstance(value, str) or not value.strip():
        raise ValueError("empty timestamp")
    value = value.strip()
    if value[-1] in "zZ":
        value = value[:-1] + "+00:00"
    ts = dt.datetime.fromisoformat(value.replace(" ", "T", 1))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=dt.timezone.utc)
    return ts.astimezone(dt.timezone.utc)


def _message_from_record(rec, line):
    if not isinstance(rec, dict):
        raise MalformedRecord(line, "record is not an object")
    missing = [k for k in MESSAGE_FIELDS if k not in rec or rec[k] is None]
    if missing:
        raise MalformedRecord(line, f"missing field(s) {', '.join(missing)}")
    pid = str(rec["participant_id"])
    if not pid:
        raise MalformedRecord(line, "empty participant_id")
    try:
        ts = parse_timestamp(rec["timestamp"])
    except (TypeError, ValueError) as exc:
        raise MalformedRecord(line, f"bad timestamp: {exc}") from None
    channel = str(rec["channel"]).lower()
    if channel not in CHANNELS:
        raise UnknownChannel(line, f"unknown channel {rec['channel']!r}")
    direction = str(rec["direction"]).lower()
    if direction not in DIRECTIONS:
        raise MalformedRecord(line, f"unknown direction {rec['direction']!r}")
    return Message(pid, ts, channel, direction, str(rec["text"]))


def parse_messages(path, format=None):
    """Read messages from a JSONL or CSV file, keeping file order.

    ``format`` defaults to the file suffix. Text is kept verbatim, so empty
    strings and the literal "nan" survive until windowing.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    messages = []
    with path.open(encoding="utf-8", newline="") as fh:
        if fmt == "jsonl":
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedRecord(lineno, f"invalid JSON: {exc.msg}") from None
                messages.append(_message_from_record(rec, lineno))
        elif fmt == "csv":
            for lineno, rec in enumerate(csv.DictReader(fh), start=2):
                messages.append(_message_from_record(rec, lineno))
        else:
            raise ValueError(f"unsupported message format {fmt!r}")
    return messages


def parse_ema(path):
    """Read EMA responses from ``participant_id,timestamp,kind,score`` CSV."""
    responses = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(EMA_FIELDS) <= set(reader.fieldnames):
            raise MalformedRecord(1, f"header must contain {','.join(EMA_FIELDS)}")
        for lineno, rec in enumerate(reader, start=2):
            missing = [k for k in EMA_FIELDS if not (rec.get(k) or "").strip()]
            if missing:
                raise MalformedRecord(lineno, f"missing field(s) {', '.join(missing)}")
            try:
                ts = parse_timestamp(rec["timestamp"])
            except ValueError as exc:
                raise MalformedRecord(lineno, f"bad timestamp: {exc}") from None
            kind = rec["kind"].strip().upper()
            if kind not in KINDS:
                raise MalformedRecord(lineno, f"unknown kind {rec['kind']!r}")
            try:
                score = float(rec["score"])
            except ValueError:
                raise MalformedRecord(lineno, f"score {rec['score']!r} is not a number") from None
            if not (math.isfinite(score) and 0.0 <= score <= 100.0):
                raise ScoreOutOfRange(lineno, f"score {score} outside [0, 100]")
            responses.append(EmaResponse(rec["participant_id"].strip(), ts, kind, score))
    return responses


def _local_date(ts, tz_offset_hours):
    return (ts + dt.timedelta(hours=tz_offset_hours)).date()


def is_empty_text(text):
    return text.strip().lower() in EMPTY_TEXTS


def window_by_day(messages, ema, kind, binarize_threshold=50.0, tz_offset_hours=0.0,
                  sent_only=False):
    """Pair each participant-day of messages with that day's EMA label.

    RT scores on a day are averaged; for EOD the latest response wins. A day
    is kept only when it has at least one non-empty message and at least one
    response of ``kind``. Label is 1 iff the aggregated score is strictly
    above ``binarize_threshold``.
    """
    kind = kind.upper()
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if not 0.0 <= binarize_threshold < 100.0:
        raise ValueError("binarize_threshold must lie in [0, 100)")

    texts = defaultdict(list)
    for m in messages:
        if sent_only and m.direction != "sent":
            continue
        if is_empty_text(m.text):
            continue
        texts[(m.participant_id, _local_date(m.timestamp, tz_offset_hours))].append(m)

    scores = defaultdict(list)
    for r in ema:
        if r.kind == kind:
            scores[(r.participant_id, _local_date(r.timestamp, tz_offset_hours))].append(r)

    docs = []
    for key in sorted(set(texts) & set(scores)):
        day_scores = scores[key]
        if kind == "RT":
            raw = sum(r.score for r in day_scores) / len(day_scores)
        else:
            # stable sort: among equal timestamps the later row wins
            raw = sorted(day_scores, key=lambda r: r.timestamp)[-1].score
        day_msgs = sorted(texts[key], key=lambda m: m.timestamp)
        docs.append(LabeledDocument(
            participant_id=key[0],
            date=key[1],
            kind=kind,
            raw_text="\n".join(m.text for m in day_msgs),
            label=int(raw > binarize_threshold),
            raw_score=float(raw),
        ))
    if not docs:
        raise EmptyDataset("no participant-day has both messages and EMA responses")
    return Dataset(tuple(docs), kind)


def relabel(dataset, binarize_threshold):
    """Same documents, labels recomputed for a new threshold."""
    return dataset.with_documents(
        replace(d, label=int(d.raw_score > binarize_threshold)) for d in dataset.documents
    )


def dataset_stats(dataset):
    n = len(dataset)
    if n == 0:
        raise EmptyDataset("dataset has no documents")
    return {
        "n_documents": n,
        "n_participants": len({d.participant_id for d in dataset.documents}),
        "positive_rate": sum(d.label for d in dataset.documents) / n,
    }


def load_count_corpus(mtx_path, kind="RT"):
    """Dataset from a Matrix Market count matrix with sibling labels.csv and vocabulary.tsv.

    Token order inside a document is lost in the count format; tokens are
    emitted in column order.
    """
    from .features import Vocabulary, read_matrix_market

    mtx_path = Path(mtx_path)
    vocab = Vocabulary.from_tsv(mtx_path.with_name("vocabulary.tsv"))
    X = read_matrix_market(mtx_path).X
    labels = {}
    with mtx_path.with_name("labels.csv").open(encoding="utf-8", newline="") as fh:
        for lineno, rec in enumerate(csv.DictReader(fh), start=2):
            try:
                labels[int(rec["doc"])] = int(rec["label"])
            except (KeyError, TypeError, ValueError):
                raise MalformedRecord(lineno, "labels.csv rows need integer doc,label") from None
    if len(labels) != X.shape[0]:
        raise MalformedRecord(1, f"{len(labels)} labels for {X.shape[0]} documents")
    day = dt.date(2000, 1, 1)
    docs = []
    for d in range(X.shape[0]):
        lo, hi = X.indptr[d], X.indptr[d + 1]
        tokens = []
        for col, cnt in zip(X.indices[lo:hi], X.data[lo:hi]):
            tokens.extend([vocab.terms[col]] * int(round(cnt)))
        y = labels[d]
        docs.append(LabeledDocument(f"doc{d}", day, kind, "", y, 100.0 if y else 0.0,
                                    tuple(tokens)))
    return Dataset(tuple(docs), kind)


def load_dataset(path):
    """Dataset JSON, a Matrix Market corpus, or a directory holding either."""
    path = Path(path)
    if path.is_dir():
        path = path / "dataset.json" if (path / "dataset.json").exists() else path / "corpus.mtx"
    if not path.exists():
        raise FileNotFoundError(str(path))
    if path.suffix == ".mtx":
        return load_count_corpus(path)
    try:
        return Dataset.load(path)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MalformedRecord(0, f"{path}: not a dataset file ({exc})") from None
