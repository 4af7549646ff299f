"""Influence diversity, the edge-holdout protocol, recommenders, and recall.

The recommenders answer "which blogger, among those A has not read, will
most influence A on keywords W".  The global one ranks the same list for
everybody given W; the personalized ones condition on A through the
fitted factor models.  Recall-at-N over held-out influence edges is the
extrinsic yardstick; candidates always exclude A itself and A's training
out-neighbors to avoid recommending already-read bloggers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from blogfluence.causality import InfluenceNetwork
from blogfluence.factor import BloggerGraph, IolapModel, PcldcModel, PclModel
from blogfluence.textvec import TermVector, Vocabulary, shared_terms
from blogfluence.topics import TopicModel


class UnanswerableQuery(Exception):
    """No query keyword is in the model vocabulary (or no keywords at all)."""


# --------------------------------------------------------------------------
# influence diversity ratio

def idr(rankings: Sequence[Sequence[tuple[str, float]]], n: int) -> float:
    """Diversity of per-topic top-n influencer lists, scaled to [0, 1].

    With K topics and C the number of distinct bloggers among all the
    per-topic top-n lists, returns (C - n) / (n (K - 1)): 0 when every
    topic ranks the same n bloggers on top, 1 when no two topics share
    any of them.
    """
    k = len(rankings)
    if k < 2:
        raise ValueError("need at least two topic rankings")
    if n < 1:
        raise ValueError("n must be >= 1")
    for ranking in rankings:
        if len(ranking) < n:
            raise ValueError(f"a ranking has fewer than {n} entries")
    union: set[str] = set()
    for ranking in rankings:
        union.update(b for b, _ in ranking[:n])
    return (len(union) - n) / (n * (k - 1))


def idr_curve(rankings: Sequence[Sequence[tuple[str, float]]], n_max: int) -> list[tuple[int, float]]:
    limit = min(n_max, min(len(r) for r in rankings))
    return [(n, idr(rankings, n)) for n in range(1, limit + 1)]


# --------------------------------------------------------------------------
# train/test split

@dataclass
class TrainTestSplit:
    train_edges: dict[tuple[str, str], int]
    test: list[tuple[str, str, frozenset[str]]]  # (A, B, held-out keyword set)
    nodes: list[str]  # bloggers appearing in the training graph


def split_train_test(
    influence_net: InfluenceNetwork,
    vectors: dict[str, TermVector],
    vocab: Vocabulary,
    seed: int | Sequence[int] = 0,
) -> TrainTestSplit:
    """Hold out one random out-edge per blogger with out-degree >= 2.

    The held-out keyword set is the union of shared vocabulary terms over
    all post-level influence pairs underlying the removed blogger edge.
    Bloggers with a single out-edge keep it (removing it would leave them
    unusable in training), so every test source retains at least one
    training out-edge.
    """
    links_by_pair: dict[tuple[str, str], list] = {}
    for link in influence_net.links:
        links_by_pair.setdefault((link.reader, link.author), []).append(link)
    out: dict[str, list[str]] = {}
    for a, b in links_by_pair:
        out.setdefault(a, []).append(b)
    for targets in out.values():
        targets.sort()
    if not any(len(t) >= 2 for t in out.values()):
        raise ValueError("no blogger has out-degree >= 2; nothing to hold out")

    rng = np.random.default_rng(seed)
    train_edges = {pair: len(links) for pair, links in sorted(links_by_pair.items())}
    test: list[tuple[str, str, frozenset[str]]] = []
    for a in sorted(out):
        targets = out[a]
        if len(targets) < 2:
            continue
        b = targets[int(rng.integers(len(targets)))]
        keywords: set[str] = set()
        for link in links_by_pair[(a, b)]:
            for k in shared_terms(vectors[link.q], vectors[link.p]):
                keywords.add(vocab.terms[k])
        test.append((a, b, frozenset(keywords)))
        del train_edges[(a, b)]
    nodes = sorted({x for pair in train_edges for x in pair})
    return TrainTestSplit(train_edges=train_edges, test=test, nodes=nodes)


def train_graph(split: TrainTestSplit) -> BloggerGraph:
    return BloggerGraph.from_edge_weights(
        {pair: float(w) for pair, w in split.train_edges.items()}
    )


def write_split(split: TrainTestSplit, train_path: str, test_path: str,
                header: str | None = None) -> None:
    with open(train_path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(header + "\n")
        fh.write("src\tdst\tweight\n")
        for (a, b), w in sorted(split.train_edges.items()):
            fh.write(f"{a}\t{b}\t{w}\n")
    with open(test_path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(header + "\n")
        fh.write("src\tdst\tkeywords\n")
        for a, b, kws in split.test:
            fh.write(f"{a}\t{b}\t{','.join(sorted(kws))}\n")


def read_split(train_path: str, test_path: str) -> TrainTestSplit:
    train_edges: dict[tuple[str, str], int] = {}
    with open(train_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip() or line.startswith("#") or line.startswith("src\t"):
                continue
            a, b, w = line.rstrip("\n").split("\t")
            train_edges[(a, b)] = int(w)
    test: list[tuple[str, str, frozenset[str]]] = []
    with open(test_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip() or line.startswith("#") or line.startswith("src\t"):
                continue
            a, b, kws = line.rstrip("\n").split("\t")
            test.append((a, b, frozenset(k for k in kws.split(",") if k)))
    nodes = sorted({x for pair in train_edges for x in pair})
    return TrainTestSplit(train_edges=train_edges, test=test, nodes=nodes)


# --------------------------------------------------------------------------
# recommenders

def _keyword_indices(terms: Sequence[str], keywords: Iterable[str]) -> list[int]:
    index = {t: i for i, t in enumerate(terms)}
    found = sorted({index[w] for w in keywords if w in index})
    if not found:
        raise UnanswerableQuery("no query keyword is in the model vocabulary")
    return found


def topic_posterior(topic_model: TopicModel, keywords: Iterable[str]) -> np.ndarray:
    """P(topic | keywords) with a naive-Bayes keyword likelihood and the
    fitted topic prior, computed in the log domain."""
    kw = _keyword_indices(topic_model.terms, keywords)
    with np.errstate(divide="ignore"):
        log_post = np.log(topic_model.p_t) + np.log(topic_model.p_w_given_t[:, kw]).sum(axis=1)
    shift = log_post.max()
    if not np.isfinite(shift):
        raise UnanswerableQuery("query keywords have zero probability in every topic")
    post = np.exp(log_post - shift)
    return post / post.sum()


def _rank_candidates(
    bloggers: Sequence[str], scores: np.ndarray, exclude: set[str], n: int
) -> list[tuple[str, float]]:
    candidates = [i for i, b in enumerate(bloggers) if b not in exclude]
    if not candidates:
        return []
    total = float(scores[candidates].sum())
    if total > 0:
        normalized = scores / total
    else:
        normalized = np.full(len(bloggers), 1.0 / len(candidates))
    ranked = sorted(candidates, key=lambda i: (-normalized[i], i))
    return [(bloggers[i], float(normalized[i])) for i in ranked[:n]]


def influencer_topic_matrix(model: IolapModel) -> np.ndarray:
    """Column t holds P(influencer blogger | topic t); columns sum to one."""
    pi = model.core.sum(axis=0)  # (J, K)
    sums = pi.sum(axis=0)
    pi = np.divide(pi, sums, out=np.full_like(pi, 1.0 / pi.shape[0]), where=sums > 0)
    return model.influencer_factors @ pi


def recommend_tg(
    iolap_model: IolapModel,
    topic_model: TopicModel,
    keywords: Iterable[str],
    n: int,
    exclude: Iterable[str] = (),
) -> list[tuple[str, float]]:
    """Topic-specific global recommendation: P(B|W) = sum_t P(B|t) P(t|W).

    The ranking depends only on the keywords, never on who is asking.
    """
    if iolap_model.n_topics != topic_model.n_topics:
        raise ValueError("tensor model and topic model disagree on topic count")
    post = topic_posterior(topic_model, keywords)
    scores = influencer_topic_matrix(iolap_model) @ post
    return _rank_candidates(iolap_model.bloggers, scores, set(exclude), n)


def recommend_iolap(
    model: IolapModel,
    member: str,
    keywords: Iterable[str],
    n: int,
    exclude: Iterable[str] = (),
) -> list[tuple[str, float]]:
    """Personalized ranking from the joint tensor model: score(B) is the
    model mass on (member, B, w) summed over the query keywords."""
    try:
        a = model.bloggers.index(member)
    except ValueError:
        raise KeyError(f"unknown member {member!r}") from None
    kw = _keyword_indices(model.terms, keywords)
    term_mass = model.topic_factors[kw, :].sum(axis=0)  # (K,)
    member_core = np.einsum("a,abc->bc", model.influenced_factors[a], model.core)
    scores = model.influencer_factors @ (member_core @ term_mass)
    return _rank_candidates(model.bloggers, scores, set(exclude), n)


def _pcl_family_scores(
    model: PcldcModel | PclModel, community_posterior: np.ndarray, exclude: set[str]
) -> np.ndarray:
    candidates = np.array([b not in exclude for b in model.nodes])
    weighted = model.memberships * model.popularity[:, None]  # (b, K)
    denom = (weighted * candidates[:, None]).sum(axis=0)
    frac = np.divide(weighted, denom, out=np.zeros_like(weighted), where=denom > 0)
    return frac @ community_posterior


def recommend_pcldc(
    model: PcldcModel,
    member: str,
    keywords: Iterable[str],
    n: int,
    exclude: Iterable[str] = (),
) -> list[tuple[str, float]]:
    """Personalized ranking from the content-tied block model.

    P(k|member, W) combines the member's memberships with the per-topic
    keyword likelihood (content weight columns renormalized by softmax
    over the vocabulary); candidates are then scored by their
    membership-weighted popularity within each community.
    """
    try:
        a = model.nodes.index(member)
    except ValueError:
        raise KeyError(f"unknown member {member!r}") from None
    kw = _keyword_indices(model.terms, keywords)
    logits = model.content_weights - model.content_weights.max(axis=0, keepdims=True)
    log_norm = np.log(np.exp(logits).sum(axis=0))
    log_kw = (logits[kw, :] - log_norm).sum(axis=0)
    with np.errstate(divide="ignore"):
        log_post = np.log(model.memberships[a]) + log_kw
    shift = log_post.max()
    if not np.isfinite(shift):
        raise UnanswerableQuery("query keywords have zero weight in every community")
    post = np.exp(log_post - shift)
    post /= post.sum()
    scores = _pcl_family_scores(model, post, set(exclude))
    return _rank_candidates(model.nodes, scores, set(exclude), n)


def recommend_pcl(
    model: PclModel,
    member: str,
    keywords: Iterable[str],
    n: int,
    exclude: Iterable[str] = (),
) -> list[tuple[str, float]]:
    """Content-free variant: the community posterior is the member's
    membership row alone, so the keywords cannot steer the ranking."""
    try:
        a = model.nodes.index(member)
    except ValueError:
        raise KeyError(f"unknown member {member!r}") from None
    post = model.memberships[a] / model.memberships[a].sum()
    scores = _pcl_family_scores(model, post, set(exclude))
    return _rank_candidates(model.nodes, scores, set(exclude), n)


# --------------------------------------------------------------------------
# evaluation

Recommender = Callable[[str, list[str], int, set[str]], list[tuple[str, float]]]


def recall_at_n(split: TrainTestSplit, recommender: Recommender, n: int) -> float:
    """Fraction of held-out (A, B) pairs with B in the top-n list for
    (A, held-out keywords).  A query the recommender cannot answer counts
    as a miss."""
    if not split.test:
        raise ValueError("empty test set")
    out_neighbors: dict[str, set[str]] = {}
    for a, b in split.train_edges:
        out_neighbors.setdefault(a, set()).add(b)
    hits = 0
    for a, b, keywords in split.test:
        exclude = {a} | out_neighbors.get(a, set())
        try:
            recs = recommender(a, sorted(keywords), n, exclude)
        except UnanswerableQuery:
            continue
        if any(name == b for name, _ in recs[:n]):
            hits += 1
    return hits / len(split.test)
