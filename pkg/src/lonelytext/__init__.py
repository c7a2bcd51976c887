"""Text mining of daily message logs against self-reported loneliness.

Day-windowed message documents, tokenization and stemming, n-gram and
LDA topic features, a cost-weighted linear SVM, and cross-validated
evaluation against a majority baseline.
"""

from .errors import ContractError, DataError, LonelyTextError, NumericalFailure
from .evaluation import (PipelineConfig, compute_metrics, make_folds, majority_baseline,
                         paired_t_test, run_cv, sweep_topics)
from .features import (Vocabulary, build_vocabulary, count_matrix, tfidf_transform,
                       topic_feature_matrix)
from .ingest import Dataset, load_dataset, parse_ema, parse_messages, window_by_day
from .lda import LdaModel, elbo, lda_fit, lda_transform, topic_entropy, topic_top_words
from .preprocess import PreprocessConfig, preprocess_dataset, preprocess_text, tokenize
from .svm import SvmModel, rank_words_by_weight, svm_predict, svm_train
from .synth import LabelLink, SynthSpec, align_topics, generate_corpus

__version__ = "0.1.0"
