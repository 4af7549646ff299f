"""Topic-aware influence models fitted on the extracted influence network.

Two model families are implemented:

* ``fit_iolap``: a probabilistic nonnegative Tucker decomposition of the
  sparse (influenced blogger, influencing blogger, keyword) count tensor,
  fitted by EM on the multinomial log-likelihood.  The keyword-mode
  factor can be pinned to a previously fitted topic model so that every
  downstream per-topic result uses the same topics.
* ``fit_pcldc`` / ``fit_pcl``: a conditional link model with a per-blogger
  popularity weight and community memberships; memberships are either
  tied to blogger content through a softmax ("pcldc") or left as free
  row-stochastic parameters updated by EM ("pcl").

Every fitter keeps a trace of its objective, which is non-decreasing per
iteration (EM / minorize-maximize guarantee; gradient steps on the
content weights only accept improving moves).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from blogfluence.textvec import TermVector, shared_terms
from blogfluence.topics import TopicModel

DEFAULT_TOL = 1e-7


# --------------------------------------------------------------------------
# influence tensor

@dataclass
class InfluenceTensor:
    """Sparse counts: entry (i, j, k) is how often blogger i was influenced
    by blogger j on vocabulary term k (one count per link sharing the term)."""

    bloggers: list[str]
    n_terms: int
    influenced: np.ndarray  # i index per nonzero
    influencer: np.ndarray  # j index per nonzero
    term: np.ndarray  # k index per nonzero
    counts: np.ndarray  # float64
    n_links_no_shared: int = 0

    @property
    def n_bloggers(self) -> int:
        return len(self.bloggers)

    def total(self) -> float:
        return float(self.counts.sum())

    def to_dict(self) -> dict[tuple[int, int, int], int]:
        return {
            (int(i), int(j), int(k)): int(c)
            for i, j, k, c in zip(self.influenced, self.influencer, self.term, self.counts)
        }


def build_influence_tensor(net, vectors: dict[str, TermVector], n_terms: int) -> InfluenceTensor:
    """Accumulate one count per (influence link, shared vocabulary term).

    ``net`` may be an influence network or a plain list of its links (to
    build a tensor from a training subset).  Links whose posts share no
    in-vocabulary term after truncation contribute nothing and are
    counted in ``n_links_no_shared``.
    """
    links = getattr(net, "links", net)
    bloggers = sorted({l.reader for l in links} | {l.author for l in links})
    bmap = {b: i for i, b in enumerate(bloggers)}
    acc: dict[tuple[int, int, int], int] = {}
    no_shared = 0
    for link in sorted(links, key=lambda l: (l.q, l.p)):
        terms = shared_terms(vectors[link.q], vectors[link.p])
        if not terms:
            no_shared += 1
            continue
        i, j = bmap[link.reader], bmap[link.author]
        for k in terms:
            key = (i, j, k)
            acc[key] = acc.get(key, 0) + 1
    keys = sorted(acc)
    return InfluenceTensor(
        bloggers=bloggers,
        n_terms=n_terms,
        influenced=np.array([k[0] for k in keys], dtype=np.int64),
        influencer=np.array([k[1] for k in keys], dtype=np.int64),
        term=np.array([k[2] for k in keys], dtype=np.int64),
        counts=np.array([float(acc[k]) for k in keys]),
        n_links_no_shared=no_shared,
    )


def write_tensor_tsv(tensor: InfluenceTensor, path: str, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(header + "\n")
        fh.write("[bloggers]\n")
        for b in tensor.bloggers:
            fh.write(b + "\n")
        fh.write(f"[dims]\nn_terms\t{tensor.n_terms}\n")
        fh.write("[entries]\n")
        for i, j, k, c in zip(tensor.influenced, tensor.influencer, tensor.term, tensor.counts):
            fh.write(f"{i}\t{j}\t{k}\t{int(c)}\n")


def read_tensor_tsv(path: str) -> InfluenceTensor:
    bloggers: list[str] = []
    n_terms = 0
    rows: list[tuple[int, int, int, float]] = []
    section = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if line.startswith("["):
                section = line.strip("[]")
                continue
            if section == "bloggers":
                bloggers.append(line)
            elif section == "dims":
                key, value = line.split("\t")
                if key == "n_terms":
                    n_terms = int(value)
            elif section == "entries":
                i, j, k, c = line.split("\t")
                rows.append((int(i), int(j), int(k), float(c)))
    return InfluenceTensor(
        bloggers=bloggers,
        n_terms=n_terms,
        influenced=np.array([r[0] for r in rows], dtype=np.int64),
        influencer=np.array([r[1] for r in rows], dtype=np.int64),
        term=np.array([r[2] for r in rows], dtype=np.int64),
        counts=np.array([r[3] for r in rows]),
    )


# --------------------------------------------------------------------------
# probabilistic Tucker decomposition

@dataclass
class IolapModel:
    core: np.ndarray  # (I, J, K), sums to 1
    influenced_factors: np.ndarray  # (b, I), columns sum to 1
    influencer_factors: np.ndarray  # (b, J), columns sum to 1
    topic_factors: np.ndarray  # (v, K), columns sum to 1
    topics_fixed: bool
    loglik_trace: list[float]
    bloggers: list[str]
    terms: list[str]

    @property
    def n_topics(self) -> int:
        return self.core.shape[2]


def _column_stochastic(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.dirichlet(np.ones(rows), size=cols).T


def _scatter_rows(index: np.ndarray, values: np.ndarray, size: int) -> np.ndarray:
    out = np.empty((size, values.shape[1]))
    for c in range(values.shape[1]):
        out[:, c] = np.bincount(index, weights=values[:, c], minlength=size)
    return out


def topic_factors_from_model(topic_model: TopicModel) -> np.ndarray:
    """Keyword-mode factor columns from fitted topic-term rows."""
    z = topic_model.p_w_given_t.T.copy()  # v x K
    sums = z.sum(axis=0)
    return z / np.maximum(sums, 1e-300)


def fit_iolap(
    tensor: InfluenceTensor,
    n_influenced_groups: int,
    n_influencer_groups: int,
    *,
    topic_model: TopicModel | None = None,
    n_topics: int | None = None,
    fix_topics: bool = True,
    max_iter: int = 200,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    init: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> IolapModel:
    """EM for P(i,j,k) = sum_{abc} core_abc X_ia Y_jb Z_kc on sparse counts.

    The keyword factor Z comes from ``topic_model`` and is held fixed by
    default (``fix_topics``), so the tensor groups interact through the
    shared topics; pass ``n_topics`` without a topic model to fit a free
    Z from a random start.  All factors stay nonnegative and column
    stochastic after every step.
    """
    if tensor.counts.size == 0:
        raise ValueError("empty influence tensor")
    if n_influenced_groups < 1 or n_influencer_groups < 1:
        raise ValueError("group counts must be >= 1")
    n_bloggers, n_terms = tensor.n_bloggers, tensor.n_terms
    if topic_model is not None:
        if len(topic_model.terms) != n_terms:
            raise ValueError("topic model vocabulary does not match tensor terms")
        n_topics = topic_model.n_topics
        terms = list(topic_model.terms)
    else:
        if n_topics is None:
            raise ValueError("n_topics required when no topic model is given")
        if fix_topics:
            raise ValueError("fixing the topic factor requires a topic model")
        terms = [str(i) for i in range(n_terms)]

    rng = np.random.default_rng(seed)
    if init is not None:
        core, x_fac, y_fac, z_fac = (np.array(m, dtype=float) for m in init)
    else:
        core = rng.dirichlet(np.ones(n_influenced_groups * n_influencer_groups * n_topics))
        core = core.reshape(n_influenced_groups, n_influencer_groups, n_topics)
        x_fac = _column_stochastic(rng, n_bloggers, n_influenced_groups)
        y_fac = _column_stochastic(rng, n_bloggers, n_influencer_groups)
        if topic_model is not None:
            z_fac = topic_factors_from_model(topic_model)
        else:
            z_fac = _column_stochastic(rng, n_terms, n_topics)
    z_frozen = z_fac.copy() if fix_topics else None

    ii, jj, kk, counts = tensor.influenced, tensor.influencer, tensor.term, tensor.counts
    trace: list[float] = []
    prev = None
    for iteration in range(max_iter):
        xi, yj, zk = x_fac[ii], y_fac[jj], z_fac[kk]
        prob = np.einsum("abc,na,nb,nc->n", core, xi, yj, zk, optimize=True)
        loglik = float(counts @ np.log(prob))
        if not np.isfinite(loglik):
            raise ArithmeticError(f"non-finite log-likelihood at iteration {iteration}")
        trace.append(loglik)
        w = counts / prob

        core_new = core * np.einsum("n,na,nb,nc->abc", w, xi, yj, zk, optimize=True)
        core_new /= core_new.sum()
        marg_x = np.einsum("abc,nb,nc->na", core, yj, zk, optimize=True)
        x_num = _scatter_rows(ii, w[:, None] * xi * marg_x, n_bloggers)
        marg_y = np.einsum("abc,na,nc->nb", core, xi, zk, optimize=True)
        y_num = _scatter_rows(jj, w[:, None] * yj * marg_y, n_bloggers)
        if not fix_topics:
            marg_z = np.einsum("abc,na,nb->nc", core, xi, yj, optimize=True)
            z_num = _scatter_rows(kk, w[:, None] * zk * marg_z, n_terms)
            z_sums = z_num.sum(axis=0)
            z_fac = np.where(z_sums > 0, z_num / np.maximum(z_sums, 1e-300), z_fac)
        x_sums = x_num.sum(axis=0)
        x_fac = np.where(x_sums > 0, x_num / np.maximum(x_sums, 1e-300), x_fac)
        y_sums = y_num.sum(axis=0)
        y_fac = np.where(y_sums > 0, y_num / np.maximum(y_sums, 1e-300), y_fac)
        core = core_new

        if prev is not None and abs(loglik - prev) <= tol * abs(prev):
            break
        prev = loglik

    prob = np.einsum(
        "abc,na,nb,nc->n", core, x_fac[ii], y_fac[jj], z_fac[kk], optimize=True
    )
    final = float(counts @ np.log(prob))
    if not np.isfinite(final):
        raise ArithmeticError("non-finite log-likelihood after final step")
    trace.append(final)

    if fix_topics:
        z_fac = z_frozen  # bit-identical to the input factor
    return IolapModel(
        core=core,
        influenced_factors=x_fac,
        influencer_factors=y_fac,
        topic_factors=z_fac,
        topics_fixed=fix_topics,
        loglik_trace=trace,
        bloggers=list(tensor.bloggers),
        terms=terms,
    )


def iolap_topic_influencers(
    model: IolapModel, topic: int, n: int | None = None
) -> list[tuple[str, float]]:
    """Bloggers ranked by P(influencer | topic); scores sum to one.

    P(j | t) = sum_b Y_jb pi(b | t) with pi(b | t) proportional to the
    core mass sum_a core_abt.
    """
    if not 0 <= topic < model.n_topics:
        raise IndexError(f"topic {topic} out of range 0..{model.n_topics - 1}")
    pi = model.core[:, :, topic].sum(axis=0)
    total = pi.sum()
    pi = pi / total if total > 0 else np.full(pi.shape, 1.0 / pi.size)
    scores = model.influencer_factors @ pi
    order = sorted(range(len(model.bloggers)), key=lambda b: (-scores[b], b))
    if n is not None:
        order = order[:n]
    return [(model.bloggers[b], float(scores[b])) for b in order]


# --------------------------------------------------------------------------
# conditional link models (popularity + communities)

@dataclass
class BloggerGraph:
    """Directed blogger graph with integer link multiplicities as weights."""

    nodes: list[str]
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    node_index: dict[str, int]

    @classmethod
    def from_edge_weights(cls, edges: dict[tuple[str, str], float]) -> "BloggerGraph":
        nodes = sorted({a for a, _ in edges} | {b for _, b in edges})
        index = {b: i for i, b in enumerate(nodes)}
        items = sorted(edges.items())
        return cls(
            nodes=nodes,
            src=np.array([index[a] for (a, _), _ in items], dtype=np.int64),
            dst=np.array([index[b] for (_, b), _ in items], dtype=np.int64),
            weight=np.array([float(w) for _, w in items]),
            node_index=index,
        )

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.n_nodes).astype(float)

    def in_weight(self) -> np.ndarray:
        return np.bincount(self.dst, weights=self.weight, minlength=self.n_nodes)

    def out_neighbors(self, node: str) -> set[str]:
        i = self.node_index[node]
        return {self.nodes[int(j)] for j in self.dst[self.src == i]}


def blogger_content_matrix(
    nodes: list[str], post_vectors: Iterable[tuple[str, TermVector]], n_terms: int
) -> np.ndarray:
    """Per-blogger L1-normalized aggregate term counts, rows aligned to nodes."""
    index = {b: i for i, b in enumerate(nodes)}
    mat = np.zeros((len(nodes), n_terms))
    for author, vec in post_vectors:
        row = index.get(author)
        if row is None:
            continue
        for k, c in vec.entries.items():
            mat[row, k] += c
    sums = mat.sum(axis=1, keepdims=True)
    return np.divide(mat, sums, out=np.zeros_like(mat), where=sums > 0)


@dataclass
class PcldcModel:
    popularity: np.ndarray  # per-blogger positive weight
    content_weights: np.ndarray  # (v, K) softmax weights tying topics to terms
    memberships: np.ndarray  # (b, K) rows sum to 1, derived from content
    blogger_content: np.ndarray  # (b, v) input content rows
    objective_trace: list[float]
    nodes: list[str]
    terms: list[str]

    @property
    def n_communities(self) -> int:
        return self.memberships.shape[1]


@dataclass
class PclModel:
    popularity: np.ndarray
    memberships: np.ndarray  # free row-stochastic parameters
    objective_trace: list[float]
    nodes: list[str]

    @property
    def n_communities(self) -> int:
        return self.memberships.shape[1]


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _mixture_terms(y: np.ndarray, bpop: np.ndarray, src: np.ndarray, dst: np.ndarray):
    """Per-edge community components and the out-neighborhood normalizers.

    Returns (denom, comp, p_edge) with denom[i, k] = sum over i's
    out-neighbors j of y_jk b_j, comp[e, k] the k-th mixture component of
    edge e, and p_edge its sum over k.
    """
    n, k = y.shape
    denom = np.zeros((n, k))
    np.add.at(denom, src, y[dst] * bpop[dst][:, None])
    num = y[src] * y[dst] * bpop[dst][:, None]
    comp = np.divide(num, denom[src], out=np.zeros_like(num), where=denom[src] > 0)
    return denom, comp, comp.sum(axis=1)


def conditional_link_objective(graph: BloggerGraph, y: np.ndarray, bpop: np.ndarray) -> float:
    """Weighted log-likelihood of observed links under the mixture model.

    Each edge (i -> j) contributes s_ij log sum_k y_ik y_jk b_j / D_ik,
    where D_ik normalizes over i's out-neighborhood.
    """
    _, _, p_edge = _mixture_terms(y, bpop, graph.src, graph.dst)
    with np.errstate(divide="ignore"):
        logp = np.log(p_edge)
    return float(graph.weight @ logp)


def _posterior_masses(graph: BloggerGraph, y: np.ndarray, bpop: np.ndarray):
    """E-step aggregates shared by the popularity and membership updates."""
    denom, comp, p_edge = _mixture_terms(y, bpop, graph.src, graph.dst)
    if np.any(p_edge <= 0):
        raise ArithmeticError("zero-probability edge in conditional link model")
    q = comp / p_edge[:, None]
    wq = graph.weight[:, None] * q
    n, k = y.shape
    out_mass = np.zeros((n, k))  # sum of posterior link mass leaving i
    np.add.at(out_mass, graph.src, wq)
    in_mass = np.zeros((n, k))  # sum of posterior link mass entering j
    np.add.at(in_mass, graph.dst, wq)
    ratio = np.divide(out_mass, denom, out=np.zeros_like(out_mass), where=denom > 0)
    denom_mass = np.zeros((n, k))  # sum over i with j in LO(i) of out_mass/denom
    np.add.at(denom_mass, graph.dst, ratio[graph.src])
    return out_mass, in_mass, denom_mass


def _update_popularity(graph: BloggerGraph, y: np.ndarray, bpop: np.ndarray) -> np.ndarray:
    """Closed-form minorize-maximize update of the popularity weights.

    b_j = (weighted in-degree of j) / sum_k y_jk sum_{i: j in LO(i)}
    out_mass_ik / denom_ik; nodes without in-links keep their value (they
    never appear as link targets, so their popularity is unidentified).
    The objective is invariant to a global rescaling, so the result is
    normalized to mean one.
    """
    _, _, denom_mass = _posterior_masses(graph, y, bpop)
    d = (y * denom_mass).sum(axis=1)
    in_w = graph.in_weight()
    new = np.where(d > 0, in_w / np.maximum(d, 1e-300), bpop)
    return new / new.mean()


def _solve_membership_rows(alpha: np.ndarray, cost: np.ndarray, y_old: np.ndarray) -> np.ndarray:
    """Per-row maximize sum_k alpha log y - cost y on the probability simplex.

    The stationarity condition y_k = alpha_k / (lam + cost_k) is solved by
    bisection on the row multiplier lam; entries with (numerically) zero
    alpha get zero mass.  Rows with no mass at all keep their old values.
    """
    y = y_old.copy()
    totals = alpha.sum(axis=1)
    live = np.flatnonzero(totals > 0)
    if live.size == 0:
        return y
    a = alpha[live]
    tot = totals[live][:, None]
    act = a > tot * 1e-15
    a = np.where(act, a, 0.0)
    c = np.where(act, cost[live], np.inf)
    cmin = c.min(axis=1, keepdims=True)
    near_min = c <= cmin + 1e-12 * (1.0 + np.abs(cmin))
    mass_at_min = (a * near_min).sum(axis=1, keepdims=True)
    lo = -cmin + 0.5 * mass_at_min  # h(lo) >= 2
    hi = -cmin + tot  # h(hi) <= 1
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        h = (a / (mid + c)).sum(axis=1, keepdims=True)
        too_big = h > 1.0
        lo = np.where(too_big, mid, lo)
        hi = np.where(too_big, hi, mid)
    lam = 0.5 * (lo + hi)
    rows = np.where(act, a / (lam + c), 0.0)
    rows /= rows.sum(axis=1, keepdims=True)
    y[live] = rows
    return y


def fit_pcl(
    graph: BloggerGraph,
    n_communities: int,
    *,
    max_iter: int = 200,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    init: tuple[np.ndarray, np.ndarray] | None = None,
) -> PclModel:
    """Fit the content-free conditional link model by EM.

    Memberships start from seeded Dirichlet(1) rows and popularity from
    in-degree + 1.  Each outer iteration applies the closed-form
    popularity update and an exact membership M-step, so the objective
    trace is non-decreasing.
    """
    if n_communities < 1:
        raise ValueError("n_communities must be >= 1")
    rng = np.random.default_rng(seed)
    if init is not None:
        y, bpop = (np.array(m, dtype=float) for m in init)
    else:
        y = rng.dirichlet(np.ones(n_communities), size=graph.n_nodes)
        bpop = graph.in_degree() + 1.0
    trace = [conditional_link_objective(graph, y, bpop)]
    for iteration in range(max_iter):
        bpop = _update_popularity(graph, y, bpop)
        out_mass, in_mass, denom_mass = _posterior_masses(graph, y, bpop)
        alpha = out_mass + in_mass
        cost = bpop[:, None] * denom_mass
        y = _solve_membership_rows(alpha, cost, y)
        y = np.maximum(y, 1e-12)
        y /= y.sum(axis=1, keepdims=True)
        obj = conditional_link_objective(graph, y, bpop)
        if not np.isfinite(obj):
            raise ArithmeticError(f"non-finite objective at iteration {iteration}")
        trace.append(obj)
        if abs(trace[-1] - trace[-2]) <= tol * abs(trace[-2]):
            break
    return PclModel(popularity=bpop, memberships=y, objective_trace=trace, nodes=list(graph.nodes))


def pcldc_objective(
    graph: BloggerGraph,
    content: np.ndarray,
    weights: np.ndarray,
    bpop: np.ndarray,
    l2: float = 0.0,
) -> float:
    """Link objective with memberships tied to content via softmax, minus
    an optional L2 penalty on the content weights."""
    y = _softmax_rows(content @ weights)
    obj = conditional_link_objective(graph, y, bpop)
    if l2 > 0.0:
        obj -= 0.5 * l2 * float((weights**2).sum())
    return obj


def pcldc_content_gradient(
    graph: BloggerGraph,
    content: np.ndarray,
    weights: np.ndarray,
    bpop: np.ndarray,
    l2: float = 0.0,
) -> np.ndarray:
    """Exact gradient of ``pcldc_objective`` with respect to the weights.

    The membership gradient has three parts: posterior mass of the node
    as link source, as link target, and (negatively) its appearances in
    other nodes' out-neighborhood normalizers; it is then pushed through
    the softmax Jacobian and the content rows.
    """
    y = _softmax_rows(content @ weights)
    out_mass, in_mass, denom_mass = _posterior_masses(graph, y, bpop)
    g_y = (out_mass + in_mass) / y - bpop[:, None] * denom_mass
    inner = (y * g_y).sum(axis=1, keepdims=True)
    g_logits = y * (g_y - inner)
    grad = content.T @ g_logits
    if l2 > 0.0:
        grad -= l2 * weights
    return grad


def fit_pcldc(
    graph: BloggerGraph,
    content: np.ndarray,
    n_communities: int,
    *,
    max_iter: int = 100,
    inner_steps: int = 5,
    tol: float = DEFAULT_TOL,
    l2: float = 0.0,
    seed: int = 0,
    init: tuple[np.ndarray, np.ndarray] | None = None,
    terms: list[str] | None = None,
) -> PcldcModel:
    """Fit the content-tied conditional link model.

    Alternates the closed-form popularity update with a bounded number of
    gradient-ascent steps on the content weights; each step backtracks by
    halving from step size 1.0 and is only accepted if the objective does
    not decrease, keeping the trace monotone.
    """
    if n_communities < 1:
        raise ValueError("n_communities must be >= 1")
    if content.shape[0] != graph.n_nodes:
        raise ValueError("content rows must align with graph nodes")
    rng = np.random.default_rng(seed)
    n_terms = content.shape[1]
    if init is not None:
        weights, bpop = (np.array(m, dtype=float) for m in init)
    else:
        weights = 0.01 * rng.standard_normal((n_terms, n_communities))
        bpop = graph.in_degree() + 1.0

    trace = [pcldc_objective(graph, content, weights, bpop, l2)]
    for iteration in range(max_iter):
        y = _softmax_rows(content @ weights)
        bpop = _update_popularity(graph, y, bpop)
        base = pcldc_objective(graph, content, weights, bpop, l2)
        for _ in range(inner_steps):
            grad = pcldc_content_gradient(graph, content, weights, bpop, l2)
            step = 1.0
            accepted = False
            for _ in range(30):
                trial = weights + step * grad
                value = pcldc_objective(graph, content, trial, bpop, l2)
                if np.isfinite(value) and value >= base:
                    weights = trial
                    base = value
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
        if not np.isfinite(base):
            raise ArithmeticError(f"non-finite objective at iteration {iteration}")
        trace.append(base)
        if abs(trace[-1] - trace[-2]) <= tol * abs(trace[-2]):
            break
    memberships = _softmax_rows(content @ weights)
    return PcldcModel(
        popularity=bpop,
        content_weights=weights,
        memberships=memberships,
        blogger_content=content,
        objective_trace=trace,
        nodes=list(graph.nodes),
        terms=list(terms) if terms is not None else [str(i) for i in range(n_terms)],
    )


def pcldc_topic_influencers(
    model: PcldcModel | PclModel, community: int, n: int | None = None
) -> list[tuple[str, float]]:
    """Bloggers ranked by membership-weighted popularity in one community."""
    if not 0 <= community < model.n_communities:
        raise IndexError(f"community {community} out of range")
    scores = model.memberships[:, community] * model.popularity
    total = scores.sum()
    if total > 0:
        scores = scores / total
    order = sorted(range(len(model.nodes)), key=lambda b: (-scores[b], b))
    if n is not None:
        order = order[:n]
    return [(model.nodes[b], float(scores[b])) for b in order]


# --------------------------------------------------------------------------
# model checkpoints

def _write_matrix(fh, name: str, labels: list[str], matrix: np.ndarray) -> None:
    fh.write(f"[{name}]\n")
    for row, label in enumerate(labels):
        for col in range(matrix.shape[1]):
            fh.write(f"{label}\t{col}\t{float(matrix[row, col])!r}\n")


def _read_sections(path: str) -> dict[str, list[list[str]]]:
    sections: dict[str, list[list[str]]] = {}
    current: list[list[str]] | None = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if line.startswith("["):
                current = sections.setdefault(line.strip("[]"), [])
                continue
            if current is not None:
                current.append(line.split("\t"))
    return sections


def write_iolap_model(model: IolapModel, path: str, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(header + "\n")
        shape = model.core.shape
        fh.write(f"[meta]\nshape\t{shape[0]}\t{shape[1]}\t{shape[2]}\n")
        fh.write(f"topics_fixed\t{int(model.topics_fixed)}\n")
        fh.write("[core]\n")
        for a in range(shape[0]):
            for b in range(shape[1]):
                for c in range(shape[2]):
                    fh.write(f"{a}\t{b}\t{c}\t{float(model.core[a, b, c])!r}\n")
        _write_matrix(fh, "influenced_factors", model.bloggers, model.influenced_factors)
        _write_matrix(fh, "influencer_factors", model.bloggers, model.influencer_factors)
        _write_matrix(fh, "topic_factors", model.terms, model.topic_factors)


def read_iolap_model(path: str) -> IolapModel:
    sections = _read_sections(path)
    meta = {row[0]: row[1:] for row in sections["meta"]}
    shape = tuple(int(v) for v in meta["shape"])
    core = np.zeros(shape)
    for a, b, c, v in sections["core"]:
        core[int(a), int(b), int(c)] = float(v)

    def matrix(name: str) -> tuple[list[str], np.ndarray]:
        rows = sections[name]
        labels = list(dict.fromkeys(r[0] for r in rows))
        index = {l: i for i, l in enumerate(labels)}
        n_cols = max(int(r[1]) for r in rows) + 1
        mat = np.zeros((len(labels), n_cols))
        for label, col, value in rows:
            mat[index[label], int(col)] = float(value)
        return labels, mat

    bloggers, x_fac = matrix("influenced_factors")
    _, y_fac = matrix("influencer_factors")
    terms, z_fac = matrix("topic_factors")
    return IolapModel(
        core=core,
        influenced_factors=x_fac,
        influencer_factors=y_fac,
        topic_factors=z_fac,
        topics_fixed=bool(int(meta["topics_fixed"][0])),
        loglik_trace=[],
        bloggers=bloggers,
        terms=terms,
    )


def write_pcldc_model(model: PcldcModel, path: str, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(header + "\n")
        fh.write("[popularity]\n")
        for node, b in zip(model.nodes, model.popularity):
            fh.write(f"{node}\t{float(b)!r}\n")
        _write_matrix(fh, "memberships", model.nodes, model.memberships)
        _write_matrix(fh, "content_weights", model.terms, model.content_weights)


def read_pcldc_model(path: str) -> PcldcModel:
    sections = _read_sections(path)
    nodes = [row[0] for row in sections["popularity"]]
    popularity = np.array([float(row[1]) for row in sections["popularity"]])

    def matrix(name: str, labels: list[str]) -> np.ndarray:
        rows = sections[name]
        index = {l: i for i, l in enumerate(labels)}
        n_cols = max(int(r[1]) for r in rows) + 1
        mat = np.zeros((len(labels), n_cols))
        for label, col, value in rows:
            mat[index[label], int(col)] = float(value)
        return mat

    memberships = matrix("memberships", nodes)
    terms = list(dict.fromkeys(r[0] for r in sections["content_weights"]))
    weights = matrix("content_weights", terms)
    return PcldcModel(
        popularity=popularity,
        content_weights=weights,
        memberships=memberships,
        blogger_content=np.zeros((len(nodes), len(terms))),
        objective_trace=[],
        nodes=nodes,
        terms=terms,
    )


def write_pcl_model(model: PclModel, path: str, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(header + "\n")
        fh.write("[popularity]\n")
        for node, b in zip(model.nodes, model.popularity):
            fh.write(f"{node}\t{float(b)!r}\n")
        _write_matrix(fh, "memberships", model.nodes, model.memberships)


def read_pcl_model(path: str) -> PclModel:
    sections = _read_sections(path)
    nodes = [row[0] for row in sections["popularity"]]
    popularity = np.array([float(row[1]) for row in sections["popularity"]])
    rows = sections["memberships"]
    index = {l: i for i, l in enumerate(nodes)}
    n_cols = max(int(r[1]) for r in rows) + 1
    memberships = np.zeros((len(nodes), n_cols))
    for label, col, value in rows:
        memberships[index[label], int(col)] = float(value)
    return PclModel(
        popularity=popularity, memberships=memberships, objective_trace=[], nodes=nodes
    )
