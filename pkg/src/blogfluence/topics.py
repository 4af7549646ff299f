"""Shared K-topic aspect model (PLSA) fitted by EM.

Both downstream factor models consume the same fitted topics so their
per-topic results stay comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from blogfluence.textvec import TermVector

DEFAULT_TOPICS = 50
DEFAULT_TOL = 1e-7


@dataclass
class DocTermMatrix:
    """Sparse document-term counts as aligned nonzero triplets."""

    doc_ids: list[str]
    n_terms: int
    rows: np.ndarray  # document index per nonzero
    cols: np.ndarray  # term index per nonzero
    counts: np.ndarray  # float64 counts per nonzero
    doc_totals: np.ndarray  # tokens per document

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)


def build_doc_term(vectors: dict[str, TermVector] | Iterable[tuple[str, TermVector]],
                   n_terms: int) -> DocTermMatrix:
    items = sorted(vectors.items()) if isinstance(vectors, dict) else list(vectors)
    doc_ids = [doc_id for doc_id, _ in items]
    rows: list[int] = []
    cols: list[int] = []
    counts: list[float] = []
    totals = np.zeros(len(items))
    for d, (_, vec) in enumerate(items):
        for term_idx in sorted(vec.entries):
            rows.append(d)
            cols.append(term_idx)
            counts.append(float(vec.entries[term_idx]))
        totals[d] = float(sum(vec.entries.values()))
    return DocTermMatrix(
        doc_ids=doc_ids,
        n_terms=n_terms,
        rows=np.asarray(rows, dtype=np.int64),
        cols=np.asarray(cols, dtype=np.int64),
        counts=np.asarray(counts, dtype=np.float64),
        doc_totals=totals,
    )


@dataclass
class TopicModel:
    n_topics: int
    p_w_given_t: np.ndarray  # K x V, rows sum to 1
    p_t: np.ndarray  # length K, token-mass-weighted topic prior
    p_t_given_d: np.ndarray  # D x K, rows sum to 1
    loglik_trace: list[float]
    terms: list[str]
    doc_ids: list[str]


def _scatter_columns(index: np.ndarray, weighted: np.ndarray, size: int) -> np.ndarray:
    """Sum nnz x K rows into size x K by an index array (bincount per column)."""
    out = np.empty((size, weighted.shape[1]))
    for k in range(weighted.shape[1]):
        out[:, k] = np.bincount(index, weights=weighted[:, k], minlength=size)
    return out


def fit_plsa(
    doc_term: DocTermMatrix,
    n_topics: int,
    max_iter: int = 200,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    terms: list[str] | None = None,
) -> TopicModel:
    """EM for the aspect model: P(w|d) = sum_t P(t|d) P(w|t).

    Distributions start from seeded Dirichlet(1) rows.  The loglik trace
    is non-decreasing (EM guarantee); iteration stops at ``max_iter`` or
    when the relative loglik change drops below ``tol``.
    """
    if doc_term.rows.size == 0 or doc_term.n_docs == 0:
        raise ValueError("empty document-term matrix")
    if n_topics < 1:
        raise ValueError("n_topics must be >= 1")
    if n_topics > doc_term.n_docs:
        raise ValueError(f"n_topics={n_topics} exceeds document count {doc_term.n_docs}")
    if np.any(doc_term.doc_totals <= 0):
        raise ValueError("every document must contain at least one token")

    rng = np.random.default_rng(seed)
    n_docs, n_terms = doc_term.n_docs, doc_term.n_terms
    word_topic = rng.dirichlet(np.ones(n_terms), size=n_topics)  # K x V
    doc_topic = rng.dirichlet(np.ones(n_topics), size=n_docs)  # D x K
    rows, cols, counts = doc_term.rows, doc_term.cols, doc_term.counts

    trace: list[float] = []
    prev = None
    for _ in range(max_iter):
        joint = doc_topic[rows] * word_topic[:, cols].T  # nnz x K
        prob = joint.sum(axis=1)
        loglik = float(counts @ np.log(prob))
        trace.append(loglik)
        weighted = joint * (counts / prob)[:, None]
        term_mass = _scatter_columns(cols, weighted, n_terms)  # V x K
        doc_mass = _scatter_columns(rows, weighted, n_docs)  # D x K
        topic_totals = term_mass.sum(axis=0)
        word_topic = (term_mass / np.maximum(topic_totals, 1e-300)).T
        doc_topic = doc_mass / doc_term.doc_totals[:, None]
        if prev is not None and abs(loglik - prev) <= tol * abs(prev):
            break
        prev = loglik

    joint = doc_topic[rows] * word_topic[:, cols].T
    final = float(counts @ np.log(joint.sum(axis=1)))
    trace.append(final)
    if not np.isfinite(final):
        raise ArithmeticError("non-finite log-likelihood after PLSA fit")

    p_t = (doc_term.doc_totals[:, None] * doc_topic).sum(axis=0) / doc_term.doc_totals.sum()
    return TopicModel(
        n_topics=n_topics,
        p_w_given_t=word_topic,
        p_t=p_t,
        p_t_given_d=doc_topic,
        loglik_trace=trace,
        terms=list(terms) if terms is not None else [str(i) for i in range(n_terms)],
        doc_ids=list(doc_term.doc_ids),
    )


def top_keywords(model: TopicModel, topic: int, n: int) -> list[str]:
    """The ``n`` highest-probability terms of a topic; ties lexicographic."""
    if not 0 <= topic < model.n_topics:
        raise IndexError(f"topic {topic} out of range 0..{model.n_topics - 1}")
    if n <= 0:
        return []
    probs = model.p_w_given_t[topic]
    order = sorted(range(len(model.terms)), key=lambda w: (-probs[w], model.terms[w]))
    return [model.terms[w] for w in order[:n]]


def write_topic_model(model: TopicModel, path: str, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(header + "\n")
        fh.write(f"[meta]\nn_topics\t{model.n_topics}\n")
        fh.write("[p_t]\n")
        for k in range(model.n_topics):
            fh.write(f"{k}\t{float(model.p_t[k])!r}\n")
        fh.write("[p_w_given_t]\n")
        for k in range(model.n_topics):
            for w, term in enumerate(model.terms):
                fh.write(f"{k}\t{term}\t{float(model.p_w_given_t[k, w])!r}\n")


def read_topic_model(model_path: str, terms: list[str]) -> TopicModel:
    """Load the exported topic-term blocks; document rows are not exported."""
    index = {t: i for i, t in enumerate(terms)}
    n_topics = 0
    section = None
    p_t: dict[int, float] = {}
    rows: list[tuple[int, int, float]] = []
    with open(model_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if line.startswith("["):
                section = line.strip("[]")
                continue
            parts = line.split("\t")
            if section == "meta" and parts[0] == "n_topics":
                n_topics = int(parts[1])
            elif section == "p_t":
                p_t[int(parts[0])] = float(parts[1])
            elif section == "p_w_given_t":
                rows.append((int(parts[0]), index[parts[1]], float(parts[2])))
    word_topic = np.zeros((n_topics, len(terms)))
    for k, w, value in rows:
        word_topic[k, w] = value
    prior = np.array([p_t[k] for k in range(n_topics)])
    return TopicModel(
        n_topics=n_topics,
        p_w_given_t=word_topic,
        p_t=prior,
        p_t_given_d=np.zeros((0, n_topics)),
        loglik_trace=[],
        terms=list(terms),
        doc_ids=[],
    )
