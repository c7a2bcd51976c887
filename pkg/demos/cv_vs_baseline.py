"""
Topic features against the majority baseline
============================================

Labels follow one topic's share of each day, at about the observed
loneliness rate. Ten-fold cross-validation compares the topic-feature
SVM with always predicting "not lonely".
"""

from lonelytext.evaluation import PipelineConfig, make_folds, run_cv
from lonelytext.synth import LabelLink, SynthSpec, corpus_to_dataset, generate_corpus

spec = SynthSpec(10, 500, 1000, doc_length=50, alpha=0.1,
                 label_link=LabelLink((1.0,) + (0.0,) * 9, positive_rate=0.175), seed=0)
dataset = corpus_to_dataset(generate_corpus(spec))
report = run_cv(dataset, PipelineConfig(features="topics", n_topics=10),
                make_folds(dataset, 10, seed=0), seed=0)

mean, cl = report.mean(), report.cl()
base = report.mean(report.baseline)
for m in ("accuracy", "precision", "recall", "f1"):
    print(f"{m:9s} model {mean[m]:.3f} +/- {cl[m]:.3f}   baseline {base[m]:.3f}")
print("paired t-test on fold F1:", report.ttest.as_dict())
