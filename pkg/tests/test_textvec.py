from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blogfluence.textvec import (
    TermVector,
    TokenizerConfig,
    build_vocabulary,
    cosine,
    shared_terms,
    tokenize,
    vectorize,
)


class TestTokenize:
    def test_stopword_removed(self):
        cfg = TokenizerConfig(stopwords=frozenset({"the"}))
        assert tokenize("The cat saw the cat", cfg) == ["cat", "saw", "cat"]

    def test_empty(self):
        assert tokenize("") == []

    def test_min_len_and_lowercase(self):
        cfg = TokenizerConfig(stopwords=frozenset(), min_len=2)
        assert tokenize("A1 b2 A1", cfg) == ["a1", "b2", "a1"]
        assert tokenize("a b c", cfg) == []


class TestVocabulary:
    def test_tie_break_lexicographic(self):
        vocab = build_vocabulary([["a", "b"], ["a", "c"]], max_size=2)
        assert vocab.terms == ["a", "b"]
        assert vocab.doc_freq == [2, 1]

    def test_no_truncation_when_large(self):
        vocab = build_vocabulary([["a", "b"], ["c"]], max_size=10)
        assert sorted(vocab.terms) == ["a", "b", "c"]

    def test_kept_df_dominates_dropped(self):
        rng = np.random.default_rng(7)
        docs = [
            [f"w{rng.integers(0, 60)}" for _ in range(12)]
            for _ in range(1000)
        ]
        df = Counter()
        for doc in docs:
            df.update(set(doc))
        vocab = build_vocabulary(docs, max_size=25)
        kept_min = min(df[t] for t in vocab.terms)
        dropped = set(df) - set(vocab.terms)
        assert all(df[t] <= kept_min for t in dropped)


class TestCosine:
    def test_identical(self):
        u = TermVector({0: 2, 3: 1}, 3)
        assert cosine(u, u) == pytest.approx(1.0)

    def test_hand_arithmetic(self):
        u = TermVector({0: 1, 1: 1}, 2)
        v = TermVector({0: 1, 2: 1}, 2)
        assert cosine(u, v) == pytest.approx(0.5)

    def test_zero_vector(self):
        assert cosine(TermVector({}, 0), TermVector({0: 3}, 3)) == 0.0

    @settings(max_examples=100, deadline=None)
    @given(
        u=st.dictionaries(st.integers(0, 8), st.integers(1, 9), max_size=6),
        v=st.dictionaries(st.integers(0, 8), st.integers(1, 9), max_size=6),
    )
    def test_symmetric_and_bounded(self, u, v):
        tu = TermVector(u, sum(u.values()))
        tv = TermVector(v, sum(v.values()))
        s = cosine(tu, tv)
        assert s == pytest.approx(cosine(tv, tu))
        assert 0.0 <= s <= 1.0 + 1e-12
        if u:
            assert cosine(tu, tu) == pytest.approx(1.0)


def test_idf_weights_reduce_to_plain_cosine_when_uniform():
    u = TermVector({0: 2, 1: 1}, 3)
    v = TermVector({0: 1, 2: 2}, 3)
    assert cosine(u, v, idf=[1.0, 1.0, 1.0]) == pytest.approx(cosine(u, v))
    # a zero weight on the only shared term drives the similarity to zero
    assert cosine(u, v, idf=[0.0, 1.0, 1.0]) == pytest.approx(0.0)


def test_vectorize_counts_kept_tokens():
    vocab = build_vocabulary([["aa", "bb"], ["aa"]], max_size=1)
    vec = vectorize(["aa", "bb", "aa", "zz"], vocab)
    assert vec.entries == {0: 2}
    assert vec.token_count == 2


def test_shared_terms_sorted_intersection():
    u = TermVector({4: 1, 1: 2, 7: 1}, 4)
    v = TermVector({1: 1, 7: 3, 9: 1}, 5)
    assert shared_terms(u, v) == [1, 7]
