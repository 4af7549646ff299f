"""In-memory composition of the detection pipeline.

The CLI, the experiment scripts, and the test suite all run the same
sequence: clean the corpus, vectorize the posts, build implicit links,
attach similarities, run the forward and reversed bucket tests, and
extract the influence network.  This module keeps that sequence in one
place so every entry point agrees on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from blogfluence.causality import (
    InfluenceNetwork,
    ZReport,
    annotate_similarity,
    extract_influence,
    forward_z_test,
    reversed_z_test,
)
from blogfluence.corpus import CleaningRules, Corpus, clean_accesses
from blogfluence.implicit import ImplicitNetwork, build_implicit_links
from blogfluence.textvec import TermVector, TokenizerConfig, Vocabulary, build_vocabulary, tokenize, vectorize


@dataclass
class VectorSpace:
    vocab: Vocabulary
    vectors: dict[str, TermVector]  # post url -> term vector


def build_vectors(
    corpus: Corpus,
    max_size: int,
    tokenizer: TokenizerConfig | None = None,
) -> VectorSpace:
    """Tokenize every post, build the capped vocabulary, vectorize."""
    token_lists = {post.url: tokenize(post.body, tokenizer) for post in corpus.posts}
    vocab = build_vocabulary((token_lists[post.url] for post in corpus.posts), max_size)
    vectors = {url: vectorize(tokens, vocab) for url, tokens in sorted(token_lists.items())}
    return VectorSpace(vocab=vocab, vectors=vectors)


@dataclass
class DetectionResult:
    cleaned: Corpus
    space: VectorSpace
    implicit: ImplicitNetwork
    forward_report: ZReport
    reversed_report: ZReport
    influence: InfluenceNetwork


def run_detection(
    corpus: Corpus,
    *,
    window_hours: int = 12,
    tau_hours: int = 2,
    vocab_max_size: int = 2000,
    min_tokens: int = 10,
    min_bucket_n: int = 30,
    seed: int = 0,
    rules: CleaningRules | None = None,
    tokenizer: TokenizerConfig | None = None,
) -> DetectionResult:
    """Run cleaning through influence extraction on a parsed corpus.

    All randomness (coin tie faces) comes from one generator derived from
    ``seed``, so a run is bit-reproducible.
    """
    cleaned, _ = clean_accesses(corpus, rules or CleaningRules(window_hours=window_hours))
    space = build_vectors(cleaned, vocab_max_size, tokenizer)
    net = build_implicit_links(cleaned, window_hours)
    annotate_similarity(net, space.vectors, min_tokens)
    rng = np.random.default_rng([seed, 1])
    forward = forward_z_test(net, rng, min_bucket_n)
    reversed_ = reversed_z_test(net, rng, min_bucket_n)
    influence = extract_influence(net, tau_hours)
    return DetectionResult(
        cleaned=cleaned,
        space=space,
        implicit=net,
        forward_report=forward,
        reversed_report=reversed_,
        influence=influence,
    )
