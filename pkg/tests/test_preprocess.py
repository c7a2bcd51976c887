import hashlib
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lonelytext.errors import EmptyDataset
from lonelytext.preprocess import (RESOURCE_SHA256, JargonMap, PreprocessConfig, collapse_runs,
                                   document_frequency, load_stopwords, normalize_jargon,
                                   preprocess_text, prune_by_frequency, remove_stopwords, stem,
                                   tokenize)
from lonelytext.porter import stem_word


@pytest.fixture(scope="module")
def jargon():
    return JargonMap.load()


@pytest.fixture(scope="module")
def config():
    return PreprocessConfig()


def _porter_vectors(data_dir):
    pairs = []
    for line in (data_dir / "porter_vectors.tsv").read_text(encoding="utf-8").splitlines():
        if line and not line.startswith("#"):
            word, expected = line.split("\t")
            pairs.append((word, expected))
    return pairs


class TestResources:
    @pytest.mark.parametrize("name", sorted(RESOURCE_SHA256))
    def test_checksums_pinned(self, name):
        data = resources.files("lonelytext.resources").joinpath(name).read_bytes()
        assert hashlib.sha256(data).hexdigest() == RESOURCE_SHA256[name]

    def test_stopwords_lowercase(self):
        words = load_stopwords()
        assert {"the", "and", "is"} <= words
        assert all(w == w.lower() for w in words)

    def test_jargon_invariants(self, jargon):
        for target in jargon.entries.values():
            assert target == target.lower() and len(target) >= 2
            # canonical forms are fixed points
            assert normalize_jargon([target], jargon) == [target]

    def test_cyclic_map_rejected(self):
        with pytest.raises(ValueError):
            JargonMap({"aa": "bb", "bb": "aa"})

    def test_short_canonical_rejected(self):
        with pytest.raises(ValueError):
            JargonMap({"kk": "k"})


class TestTokenize:
    def test_short_tokens_dropped(self):
        assert tokenize("Hi!! that's FUN") == ["hi", "that", "fun"]

    def test_empty(self):
        assert tokenize("") == []

    def test_alphanumeric_kept_whole(self):
        assert tokenize("a1b2") == ["a1b2"]

    def test_underscore_splits(self):
        assert tokenize("snake_case words") == ["snake", "case", "words"]

    def test_jargon_before_length_filter(self, jargon):
        assert tokenize("u there", jargon=jargon) == ["you", "there"]


class TestJargon:
    def test_elongated_lol(self, jargon):
        assert normalize_jargon(["loooolll"], jargon) == ["lol"]
        assert normalize_jargon(["lollll"], jargon) == ["lol"]

    def test_fixed_point(self, jargon):
        assert normalize_jargon(["lol"], jargon) == ["lol"]

    def test_run_cap(self, jargon):
        assert normalize_jargon(["yessss"], jargon) == ["yess"]

    def test_collapse_runs(self):
        assert collapse_runs("aaabccccd", 2) == "aabccd"
        assert collapse_runs("aaabccccd", 1) == "abcd"

    def test_order_preserved(self, jargon):
        assert normalize_jargon(["zzz", "lolll", "plain"], jargon) == ["zz", "lol", "plain"]

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.text(alphabet="lohaeysuk", min_size=1, max_size=9), max_size=8))
    def test_idempotent(self, tokens):
        jm = JargonMap.load()
        once = normalize_jargon(tokens, jm)
        assert normalize_jargon(once, jm) == once


class TestStopwordsAndStem:
    def test_stopword_removed(self, config):
        assert remove_stopwords(["the", "lol"], config) == ["lol"]

    def test_nan_dropped(self, config):
        assert remove_stopwords(["nan"], config) == []

    def test_empty(self, config):
        assert remove_stopwords([], config) == []

    @pytest.mark.parametrize("word,expected", [
        ("learning", "learn"), ("lol", "lol"), ("kissing", "kiss"),
        ("caresses", "caress"), ("ponies", "poni"), ("relational", "relat"),
        ("hopping", "hop"), ("filing", "file"), ("generalizations", "gener"),
        ("controlling", "control"), ("roll", "roll"),
    ])
    def test_porter_examples(self, word, expected):
        assert stem_word(word) == expected

    def test_porter_golden_vectors(self, data_dir):
        pairs = _porter_vectors(data_dir)
        assert len(pairs) > 10000
        wrong = [(w, e, stem_word(w)) for w, e in pairs if stem_word(w) != e]
        assert wrong == []

    def test_stemmer_none(self):
        cfg = PreprocessConfig(stemmer="none")
        assert stem(["learning"], cfg) == ["learning"]

    def test_bad_config(self):
        with pytest.raises(ValueError):
            PreprocessConfig(min_token_len=0)
        with pytest.raises(ValueError):
            PreprocessConfig(min_df=0)
        with pytest.raises(ValueError):
            PreprocessConfig(stemmer="lancaster")


class TestPipeline:
    def test_example_sentence(self, config, jargon):
        assert preprocess_text("Lollll u were SO right about the meeting!!", config, jargon) == \
            ["lol", "right", "meet"]

    @settings(max_examples=200, deadline=None)
    @given(st.text(max_size=80))
    def test_output_invariants(self, text):
        cfg = PreprocessConfig()
        jm = JargonMap.load()
        out = preprocess_text(text, cfg, jm)
        assert all(len(t) >= cfg.min_token_len for t in out)
        assert not set(out) & (cfg.stopword_list | cfg.drop_tokens)
        assert out == preprocess_text(text, cfg, jm)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.sampled_from(["alpha", "beta", "gamma", "delta", "the", "x"]),
                    max_size=12))
    def test_order_stable(self, words):
        cfg = PreprocessConfig(stemmer="none")
        out = preprocess_text(" ".join(words), cfg)
        kept = [w for w in words if w not in cfg.stopword_list and len(w) >= 2]
        assert out == kept


class TestPrune:
    def test_head_removed(self):
        docs = [["common", f"t{i}", f"t{i}"] for i in range(10)]
        pruned, report = prune_by_frequency(docs, PreprocessConfig(min_df=1))
        assert report.removed_head == {"common": 10}
        assert all("common" not in d for d in pruned)

    def test_tail_removed(self):
        docs = [["a1", "b2"], ["a1", "c3"], ["a1", "b2"]]
        pruned, report = prune_by_frequency(docs, PreprocessConfig(min_df=2, max_df_fraction=1.0))
        assert report.removed_tail == {"c3": 1}
        assert pruned == [["a1", "b2"], ["a1"], ["a1", "b2"]]

    def test_identity(self):
        docs = [["a1", "b2", "a1"], ["c3"]]
        pruned, report = prune_by_frequency(docs, PreprocessConfig(min_df=1, max_df_fraction=1.0))
        assert pruned == docs and report.removed == {}

    def test_empty_corpus(self):
        with pytest.raises(EmptyDataset):
            prune_by_frequency([], PreprocessConfig())

    def test_document_frequency_counts_once(self):
        assert document_frequency([["a", "a", "b"], ["a"]]) == {"a": 2, "b": 1}

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.lists(st.sampled_from("abcdefgh"), max_size=6), min_size=1, max_size=12),
           st.integers(1, 4), st.floats(0.1, 1.0))
    def test_bounds_hold(self, docs, min_df, max_df):
        cfg = PreprocessConfig(min_df=min_df, max_df_fraction=max_df)
        pruned, _ = prune_by_frequency(docs, cfg)
        df = document_frequency(docs)
        for d in pruned:
            for t in d:
                assert df[t] >= min_df and df[t] / len(docs) <= max_df
