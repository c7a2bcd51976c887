"""
From chat messages to a tf-idf matrix
=====================================

Messages and EMA responses are paired per participant-day, cleaned,
stemmed, and turned into a sparse document-term matrix.
"""

from pathlib import Path

import numpy as np

from lonelytext.features import build_vocabulary, count_matrix, fit_idf, tfidf_transform
from lonelytext.ingest import parse_ema, parse_messages, window_by_day
from lonelytext.preprocess import JargonMap, PreprocessConfig, preprocess_dataset, preprocess_text

data = Path(__file__).resolve().parents[1] / "tests" / "data"

# one sentence through the whole text pipeline
jargon = JargonMap.load()
print(preprocess_text("Lollll u were SO right about the meeting!!", PreprocessConfig(), jargon))

# day documents labeled by the real-time EMA score (lonely iff > 50)
messages = parse_messages(data / "messages.jsonl")
ema = parse_ema(data / "ema.csv")
dataset = window_by_day(messages, ema, "RT")
dataset = preprocess_dataset(dataset, PreprocessConfig(), jargon)
for doc in dataset.documents:
    print(doc.participant_id, doc.date, doc.label, doc.tokens)

# unigram counts, then l2-normalized tf-idf rows
vocab = build_vocabulary(dataset.tokens)
counts = count_matrix(dataset.tokens, vocab, dataset.labels)
tfidf = tfidf_transform(counts, fit_idf(counts))
print("vocabulary size", len(vocab))
print("row norms", np.round(np.sqrt(tfidf.X.multiply(tfidf.X).sum(axis=1)).A.ravel(), 6))
