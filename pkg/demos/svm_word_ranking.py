"""
Which words push a day toward "lonely"
======================================

Train the cost-weighted linear SVM on tf-idf features of a synthetic
corpus in which positive days mention "come", and rank the vocabulary
by weight.
"""

import numpy as np

from lonelytext.features import build_vocabulary, count_matrix, tfidf_transform
from lonelytext.svm import dual_objective, primal_objective, rank_words_by_weight, svm_train

rng = np.random.default_rng(0)
words = [f"w{i:02d}" for i in range(50)]
docs, labels = [], []
for _ in range(200):
    y = int(rng.random() < 0.2)
    doc = list(rng.choice(words, size=20))
    if y:
        doc += ["come", "come"]
    docs.append(doc)
    labels.append(y)

vocab = build_vocabulary(docs)
X = tfidf_transform(count_matrix(docs, vocab, labels))
model = svm_train(X, tol=1e-6)
print("positive-class cost factor", model.cost_factor)
print("duality gap", primal_objective(model, X) - dual_objective(model))
for term, weight in rank_words_by_weight(model, vocab)[:5]:
    print(f"{term:6s} {weight:+.4f}")
