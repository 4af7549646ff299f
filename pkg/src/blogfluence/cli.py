"""Command-line pipeline: synth -> ingest -> links -> causality -> influence
-> topics -> split -> tensor -> iolap -> pcldc -> pcl -> idr -> recommend
-> eval -> report.

Every subcommand reads its declared inputs from the output directory,
writes versioned artifacts whose first line records the tool version,
subcommand, config hash, and seed, and prints a one-line summary.
Configuration comes from flat ``key = value`` files ("synth." keys reach
the generator); command-line flags override file values.  Re-running a
subcommand with unchanged inputs and seed reproduces its outputs byte
for byte.

Exit codes: 0 ok, 1 config or input error, 2 missing upstream artifact,
3 numeric failure.

When a train/test split exists in the output directory, ``tensor``,
``pcldc``, and ``pcl`` fit on the training edges only (run ``split``
first when the goal is ``eval``); without a split they fit on the full
influence network, which is what ``idr`` wants.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import shutil
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from blogfluence import __version__, analysis, causality, factor, implicit, synth, topics
from blogfluence.corpus import (
    CleaningRules,
    Corpus,
    FormatError,
    IngestError,
    access_line,
    activity_histograms,
    clean_accesses,
    content_line,
    parse_access_log,
    parse_content_file,
)
from blogfluence.pipeline import build_vectors
from blogfluence.textvec import write_vocabulary


class ConfigError(Exception):
    pass


class MissingArtifact(Exception):
    pass


# Per-stage offsets mixed into the seed so stages draw independent streams.
_STAGE_SEED = {"synth": 0, "causality": 1, "topics": 2, "iolap": 3, "pcldc": 4, "pcl": 5, "split": 6}

_ART = {
    "posts": "posts.tsv",
    "access": "access.log",
    "truth": "truth.tsv",
    "experts": "experts.tsv",
    "clean_posts": "clean_posts.tsv",
    "clean_access": "clean_accesses.tsv",
    "links": "links.tsv",
    "gap_hist": "gap_hist.tsv",
    "vocab": "vocab.tsv",
    "z_forward": "zreport_forward.tsv",
    "z_reversed": "zreport_reversed.tsv",
    "influence": "influence.tsv",
    "plsa": "plsa_model.tsv",
    "train": "train.tsv",
    "test": "test.tsv",
    "tensor": "tensor.tsv",
    "iolap": "iolap_model.tsv",
    "pcldc": "pcldc_model.tsv",
    "pcl": "pcl_model.tsv",
    "idr": "idr.tsv",
    "recall": "recall.tsv",
}


@dataclass
class PipelineConfig:
    out_dir: str = "out"
    content_path: str = ""  # defaults to <out_dir>/posts.tsv
    access_path: str = ""  # defaults to <out_dir>/access.log
    window_hours: int = 12
    tau_hours: int = 2
    vocab_max_size: int = 2000
    min_tokens: int = 10
    min_bucket_n: int = 30
    tz_offset_hours: int = 9
    n_topics: int = 50
    rank_influenced: int = 8
    rank_influencer: int = 8
    n_communities: int = 0  # 0 -> follow n_topics
    plsa_docs: str = "influence"  # or "all"
    plsa_max_iter: int = 200
    iolap_max_iter: int = 200
    pcldc_max_iter: int = 60
    pcl_max_iter: int = 200
    tol: float = 1e-7
    l2: float = 0.0
    top_n: int = 10
    seed: int = 0
    threads: int = 1
    synth: synth.SynthConfig = field(default_factory=synth.SynthConfig)

    def validate(self) -> None:
        if self.window_hours < 1 or self.tau_hours < 1:
            raise ConfigError("window_hours and tau_hours must be >= 1")
        if self.tau_hours > self.window_hours:
            raise ConfigError("tau_hours cannot exceed window_hours")
        if self.vocab_max_size < 1 or self.top_n < 1 or self.n_topics < 1:
            raise ConfigError("vocab_max_size, top_n, n_topics must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.plsa_docs not in ("influence", "all"):
            raise ConfigError("plsa_docs must be 'influence' or 'all'")

    def communities(self) -> int:
        return self.n_communities if self.n_communities > 0 else self.n_topics

    def config_hash(self) -> str:
        # Path-like and runtime-only fields stay out of the hash so the
        # same semantic run is recognizable across directories.
        skip = {"out_dir", "content_path", "access_path", "threads"}
        parts = []
        for f in sorted(dataclasses.fields(self), key=lambda f: f.name):
            if f.name in skip:
                continue
            value = getattr(self, f.name)
            if dataclasses.is_dataclass(value):
                for sf in sorted(dataclasses.fields(value), key=lambda sf: sf.name):
                    parts.append(f"synth.{sf.name}={getattr(value, sf.name)!r}")
            else:
                parts.append(f"{f.name}={value!r}")
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()[:12]


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _convert(raw: str, annotation: type):
    if annotation is bool:
        low = raw.strip().lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if annotation is int:
        return int(raw)
    if annotation is float:
        return float(raw)
    if annotation is str:
        return raw
    # tuple-of-float profiles
    return tuple(float(x) for x in raw.split(","))


def load_config(path: str | None, overrides: dict[str, object]) -> PipelineConfig:
    cfg = PipelineConfig()
    synth_fields = {f.name: f for f in dataclasses.fields(synth.SynthConfig)}
    top_fields = {f.name: f for f in dataclasses.fields(PipelineConfig)}
    if path:
        if not Path(path).exists():
            raise ConfigError(f"config file not found: {path}")
        synth_updates: dict[str, object] = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            try:
                if key.startswith("synth."):
                    name = key[len("synth."):]
                    if name not in synth_fields:
                        raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                    synth_updates[name] = _convert(value, _field_type(synth_fields[name]))
                elif key in top_fields and key != "synth":
                    setattr(cfg, key, _convert(value, _field_type(top_fields[key])))
                else:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
        if synth_updates:
            try:
                cfg.synth = replace(cfg.synth, **synth_updates)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
    for key, value in overrides.items():
        if value is None:
            continue
        setattr(cfg, key, value)
    cfg.validate()
    return cfg


def _field_type(f: dataclasses.Field) -> type:
    mapping = {"int": int, "float": float, "str": str, "bool": bool}
    name = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", "")
    return mapping.get(name, tuple)


# --------------------------------------------------------------------------
# artifact plumbing

def _path(cfg: PipelineConfig, name: str) -> Path:
    return Path(cfg.out_dir) / _ART[name]


def _require(path: Path) -> Path:
    if not path.exists():
        raise MissingArtifact(str(path))
    return path


def _header(cfg: PipelineConfig, subcommand: str) -> str:
    return (
        f"# blogfluence {__version__} subcommand={subcommand} "
        f"config={cfg.config_hash()} seed={cfg.seed}"
    )


def _write_tsv(path: Path, header: str, column_names: str | None, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        if column_names:
            fh.write(column_names + "\n")
        for row in rows:
            fh.write("\t".join(str(v) for v in row) + "\n")


def _load_clean(cfg: PipelineConfig) -> Corpus:
    posts_path = _require(_path(cfg, "clean_posts"))
    access_path = _require(_path(cfg, "clean_access"))
    with open(posts_path, encoding="utf-8") as fh:
        posts, _ = parse_content_file(fh)
    with open(access_path, encoding="utf-8") as fh:
        accesses, _ = parse_access_log(fh)
    return Corpus.from_records(posts, accesses)


def _load_influence_links(cfg: PipelineConfig, train_only: bool):
    """Influence links, optionally filtered to blogger pairs in train.tsv."""
    net = causality.read_influence_tsv(_require(_path(cfg, "influence")), cfg.tau_hours)
    links = net.links
    used_split = False
    if train_only and _path(cfg, "train").exists():
        split = analysis.read_split(_path(cfg, "train"), _path(cfg, "test"))
        pairs = set(split.train_edges)
        links = [l for l in links if (l.reader, l.author) in pairs]
        used_split = True
    return net, links, used_split


# --------------------------------------------------------------------------
# subcommands

def cmd_synth(cfg: PipelineConfig, args) -> int:
    corpus, truth = synth.generate(replace(cfg.synth, seed=cfg.seed))
    header = _header(cfg, "synth")
    with open(_path(cfg, "posts"), "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for post in corpus.posts:
            fh.write(content_line(post) + "\n")
    with open(_path(cfg, "access"), "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for rec in corpus.accesses:
            fh.write(access_line(rec) + "\n")
    synth.write_truth_tsv(truth, _path(cfg, "truth"), header)
    synth.write_experts_tsv(truth, _path(cfg, "experts"), header)
    print(
        f"synth: {len(corpus.posts)} posts, {len(corpus.accesses)} accesses, "
        f"{len(truth.influence_pairs)} planted pairs -> {cfg.out_dir}"
    )
    return 0


def cmd_ingest(cfg: PipelineConfig, args) -> int:
    content = Path(cfg.content_path) if cfg.content_path else _path(cfg, "posts")
    access = Path(cfg.access_path) if cfg.access_path else _path(cfg, "access")
    _require(content)
    _require(access)
    with open(content, encoding="utf-8") as fh:
        posts, posts_report = parse_content_file(fh)
    with open(access, encoding="utf-8") as fh:
        accesses, access_report = parse_access_log(fh)
    corpus = Corpus.from_records(posts, accesses)
    rules = CleaningRules(window_hours=cfg.window_hours)
    cleaned, removal = clean_accesses(corpus, rules)
    header = _header(cfg, "ingest")
    with open(_path(cfg, "clean_posts"), "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for post in cleaned.posts:
            fh.write(content_line(post) + "\n")
    with open(_path(cfg, "clean_access"), "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for rec in cleaned.accesses:
            fh.write(access_line(rec) + "\n")
    print(
        f"ingest: {posts_report.n_ok} posts ({posts_report.n_skipped} skipped), "
        f"{access_report.n_ok} accesses ({access_report.n_skipped} skipped), "
        f"{removal.total()} removed by cleaning -> {len(cleaned.accesses)} kept"
    )
    return 0


def cmd_links(cfg: PipelineConfig, args) -> int:
    corpus = _load_clean(cfg)
    net = implicit.build_implicit_links(corpus, cfg.window_hours)
    header = _header(cfg, "links")
    implicit.write_links_tsv(net.links, _path(cfg, "links"), header)
    hist = implicit.gap_histogram(net)
    _write_tsv(_path(cfg, "gap_hist"), header, "bin\tcount",
               ((h + 1, c) for h, c in enumerate(hist)))
    print(
        f"links: {net.post_link_count} post links, {net.blogger_link_count} blogger links, "
        f"{net.post_count} posts, {net.blogger_count} bloggers -> {_path(cfg, 'links')}"
    )
    return 0


def cmd_causality(cfg: PipelineConfig, args) -> int:
    corpus = _load_clean(cfg)
    net = implicit.read_links_tsv(_require(_path(cfg, "links")), cfg.window_hours)
    space = build_vectors(corpus, cfg.vocab_max_size)
    causality.annotate_similarity(net, space.vectors, cfg.min_tokens)
    rng = np.random.default_rng([cfg.seed, _STAGE_SEED["causality"]])
    forward = causality.forward_z_test(net, rng, cfg.min_bucket_n)
    reversed_ = causality.reversed_z_test(net, rng, cfg.min_bucket_n)
    header = _header(cfg, "causality")
    write_vocabulary(space.vocab, _path(cfg, "vocab"), header)
    causality.write_zreport_tsv(forward, _path(cfg, "z_forward"), header)
    causality.write_zreport_tsv(reversed_, _path(cfg, "z_reversed"), header)
    sig_f = [b.bucket for b in forward.available() if b.one_sided_significant]
    sig_r = [b.bucket for b in reversed_.available() if b.one_sided_significant]
    print(
        f"causality: forward heads-enriched buckets {sig_f or 'none'}, "
        f"reversed {sig_r or 'none'} -> {_path(cfg, 'z_forward')}"
    )
    return 0


def cmd_influence(cfg: PipelineConfig, args) -> int:
    corpus = _load_clean(cfg)
    net = implicit.read_links_tsv(_require(_path(cfg, "links")), cfg.window_hours)
    space = build_vectors(corpus, cfg.vocab_max_size)
    causality.annotate_similarity(net, space.vectors, cfg.min_tokens)
    influence = causality.extract_influence(net, cfg.tau_hours)
    causality.write_influence_tsv(influence, _path(cfg, "influence"), _header(cfg, "influence"))
    print(
        f"influence: {influence.post_link_count} post links, "
        f"{influence.blogger_link_count} blogger links, {influence.post_count} posts, "
        f"{influence.blogger_count} bloggers -> {_path(cfg, 'influence')}"
    )
    return 0


def cmd_topics(cfg: PipelineConfig, args) -> int:
    corpus = _load_clean(cfg)
    influence = causality.read_influence_tsv(_require(_path(cfg, "influence")), cfg.tau_hours)
    space = build_vectors(corpus, cfg.vocab_max_size)
    if cfg.plsa_docs == "influence":
        doc_urls = sorted({l.q for l in influence.links} | {l.p for l in influence.links})
    else:
        doc_urls = sorted(post.url for post in corpus.posts)
    docs = {url: space.vectors[url] for url in doc_urls if space.vectors[url].token_count > 0}
    doc_term = topics.build_doc_term(docs, len(space.vocab))
    try:
        model = topics.fit_plsa(
            doc_term,
            cfg.n_topics,
            max_iter=cfg.plsa_max_iter,
            tol=cfg.tol,
            seed=[cfg.seed, _STAGE_SEED["topics"]],
            terms=space.vocab.terms,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    topics.write_topic_model(model, _path(cfg, "plsa"), _header(cfg, "topics"))
    print(
        f"topics: {model.n_topics} topics over {doc_term.n_docs} docs, "
        f"loglik {model.loglik_trace[-1]:.2f} -> {_path(cfg, 'plsa')}"
    )
    return 0


def cmd_split(cfg: PipelineConfig, args) -> int:
    corpus = _load_clean(cfg)
    influence = causality.read_influence_tsv(_require(_path(cfg, "influence")), cfg.tau_hours)
    space = build_vectors(corpus, cfg.vocab_max_size)
    try:
        split = analysis.split_train_test(
            influence, space.vectors, space.vocab, seed=[cfg.seed, _STAGE_SEED["split"]]
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    analysis.write_split(split, _path(cfg, "train"), _path(cfg, "test"), _header(cfg, "split"))
    print(
        f"split: {len(split.train_edges)} train edges, {len(split.test)} test pairs "
        f"-> {_path(cfg, 'train')}"
    )
    return 0


def cmd_tensor(cfg: PipelineConfig, args) -> int:
    corpus = _load_clean(cfg)
    _, links, used_split = _load_influence_links(cfg, train_only=True)
    space = build_vectors(corpus, cfg.vocab_max_size)
    tensor = factor.build_influence_tensor(links, space.vectors, len(space.vocab))
    factor.write_tensor_tsv(tensor, _path(cfg, "tensor"), _header(cfg, "tensor"))
    source = "train edges" if used_split else "full influence network"
    print(
        f"tensor: {tensor.counts.size} nonzeros, total {tensor.total():.0f}, "
        f"{tensor.n_bloggers} bloggers x {tensor.n_terms} terms ({source}) "
        f"-> {_path(cfg, 'tensor')}"
    )
    return 0


def cmd_iolap(cfg: PipelineConfig, args) -> int:
    corpus = _load_clean(cfg)
    tensor = factor.read_tensor_tsv(_require(_path(cfg, "tensor")))
    space = build_vectors(corpus, cfg.vocab_max_size)
    topic_model = topics.read_topic_model(_require(_path(cfg, "plsa")), space.vocab.terms)
    model = factor.fit_iolap(
        tensor,
        cfg.rank_influenced,
        cfg.rank_influencer,
        topic_model=topic_model,
        fix_topics=True,
        max_iter=cfg.iolap_max_iter,
        tol=cfg.tol,
        seed=[cfg.seed, _STAGE_SEED["iolap"]],
    )
    factor.write_iolap_model(model, _path(cfg, "iolap"), _header(cfg, "iolap"))
    print(
        f"iolap: rank {cfg.rank_influenced}x{cfg.rank_influencer}x{model.n_topics}, "
        f"loglik {model.loglik_trace[-1]:.2f} ({len(model.loglik_trace)} evals) "
        f"-> {_path(cfg, 'iolap')}"
    )
    return 0


def _blogger_graph_and_content(cfg: PipelineConfig, corpus: Corpus, links):
    edges: dict[tuple[str, str], float] = {}
    for l in links:
        edges[(l.reader, l.author)] = edges.get((l.reader, l.author), 0.0) + 1.0
    if not edges:
        raise ConfigError("influence network has no links; nothing to fit")
    graph = factor.BloggerGraph.from_edge_weights(edges)
    space = build_vectors(corpus, cfg.vocab_max_size)
    content = factor.blogger_content_matrix(
        graph.nodes,
        ((post.user_id, space.vectors[post.url]) for post in corpus.posts),
        len(space.vocab),
    )
    return graph, content, space


def cmd_pcldc(cfg: PipelineConfig, args) -> int:
    corpus = _load_clean(cfg)
    _, links, used_split = _load_influence_links(cfg, train_only=True)
    graph, content, space = _blogger_graph_and_content(cfg, corpus, links)
    model = factor.fit_pcldc(
        graph,
        content,
        cfg.communities(),
        max_iter=cfg.pcldc_max_iter,
        tol=cfg.tol,
        l2=cfg.l2,
        seed=[cfg.seed, _STAGE_SEED["pcldc"]],
        terms=space.vocab.terms,
    )
    factor.write_pcldc_model(model, _path(cfg, "pcldc"), _header(cfg, "pcldc"))
    source = "train edges" if used_split else "full influence network"
    print(
        f"pcldc: {model.n_communities} communities over {graph.n_nodes} bloggers ({source}), "
        f"objective {model.objective_trace[-1]:.2f} -> {_path(cfg, 'pcldc')}"
    )
    return 0


def cmd_pcl(cfg: PipelineConfig, args) -> int:
    corpus = _load_clean(cfg)
    _, links, used_split = _load_influence_links(cfg, train_only=True)
    graph, _, _ = _blogger_graph_and_content(cfg, corpus, links)
    model = factor.fit_pcl(
        graph,
        cfg.communities(),
        max_iter=cfg.pcl_max_iter,
        tol=cfg.tol,
        seed=[cfg.seed, _STAGE_SEED["pcl"]],
    )
    factor.write_pcl_model(model, _path(cfg, "pcl"), _header(cfg, "pcl"))
    source = "train edges" if used_split else "full influence network"
    print(
        f"pcl: {model.n_communities} communities over {graph.n_nodes} bloggers ({source}), "
        f"objective {model.objective_trace[-1]:.2f} -> {_path(cfg, 'pcl')}"
    )
    return 0


def cmd_idr(cfg: PipelineConfig, args) -> int:
    iolap_model = factor.read_iolap_model(_require(_path(cfg, "iolap")))
    pcldc_model = factor.read_pcldc_model(_require(_path(cfg, "pcldc")))
    if iolap_model.n_topics < 2 or pcldc_model.n_communities < 2:
        raise ConfigError("diversity needs at least two topics")
    rows = []
    rankings = [
        factor.iolap_topic_influencers(iolap_model, t) for t in range(iolap_model.n_topics)
    ]
    for n, value in analysis.idr_curve(rankings, cfg.top_n):
        rows.append(("iolap", n, repr(value)))
    rankings = [
        factor.pcldc_topic_influencers(pcldc_model, k) for k in range(pcldc_model.n_communities)
    ]
    for n, value in analysis.idr_curve(rankings, cfg.top_n):
        rows.append(("pcldc", n, repr(value)))
    _write_tsv(_path(cfg, "idr"), _header(cfg, "idr"), "method\tN\tidr", rows)
    print(f"idr: {len(rows)} rows for methods iolap, pcldc -> {_path(cfg, 'idr')}")
    return 0


def _recommenders(cfg: PipelineConfig):
    """Closures for every method, loading models lazily from artifacts."""
    corpus = _load_clean(cfg)
    space = build_vectors(corpus, cfg.vocab_max_size)
    iolap_model = factor.read_iolap_model(_require(_path(cfg, "iolap")))
    topic_model = topics.read_topic_model(_require(_path(cfg, "plsa")), space.vocab.terms)
    pcldc_model = factor.read_pcldc_model(_require(_path(cfg, "pcldc")))
    pcl_model = factor.read_pcl_model(_require(_path(cfg, "pcl")))
    return {
        "tg": lambda member, kw, n, excl: analysis.recommend_tg(
            iolap_model, topic_model, kw, n, excl
        ),
        "iolap": lambda member, kw, n, excl: analysis.recommend_iolap(
            iolap_model, member, kw, n, excl
        ),
        "pcldc": lambda member, kw, n, excl: analysis.recommend_pcldc(
            pcldc_model, member, kw, n, excl
        ),
        "pcl": lambda member, kw, n, excl: analysis.recommend_pcl(
            pcl_model, member, kw, n, excl
        ),
    }


def cmd_recommend(cfg: PipelineConfig, args) -> int:
    method = args.method
    keywords = [w for w in (args.keywords or "").split(",") if w]
    if method != "tg" and not args.member:
        raise ConfigError(f"--member is required for method {method!r}")
    if method != "pcl" and not keywords:
        raise ConfigError("--keywords is required (comma separated)")
    recommenders = _recommenders(cfg)
    exclude: set[str] = set()
    if args.member:
        exclude.add(args.member)
        if _path(cfg, "train").exists():
            split = analysis.read_split(_path(cfg, "train"), _path(cfg, "test"))
            exclude |= {b for (a, b) in split.train_edges if a == args.member}
        elif _path(cfg, "influence").exists():
            net = causality.read_influence_tsv(_path(cfg, "influence"), cfg.tau_hours)
            exclude |= {l.author for l in net.links if l.reader == args.member}
    try:
        ranked = recommenders[method](args.member, keywords, cfg.top_n, exclude)
    except analysis.UnanswerableQuery as exc:
        raise ConfigError(f"unanswerable query: {exc}") from exc
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(cfg.out_dir) / f"recommend_{method}.tsv"
    _write_tsv(out, _header(cfg, "recommend"), "rank\tblogger\tscore",
               ((i + 1, b, repr(s)) for i, (b, s) in enumerate(ranked)))
    for i, (blogger, score) in enumerate(ranked):
        print(f"{i + 1}\t{blogger}\t{score:.6f}")
    print(f"recommend: {method} top-{cfg.top_n} -> {out}")
    return 0


def cmd_eval(cfg: PipelineConfig, args) -> int:
    split = analysis.read_split(
        _require(_path(cfg, "train")), _require(_path(cfg, "test"))
    )
    recommenders = _recommenders(cfg)
    rows = []
    summary = []
    for method in ("tg", "iolap", "pcldc", "pcl"):
        rec = recommenders[method]
        for n in range(1, cfg.top_n + 1):
            value = analysis.recall_at_n(split, rec, n)
            rows.append((method, n, repr(value)))
            if n == cfg.top_n:
                summary.append(f"{method}={value:.3f}")
    _write_tsv(_path(cfg, "recall"), _header(cfg, "eval"), "method\tN\trecall", rows)
    print(f"eval: recall@{cfg.top_n} {' '.join(summary)} -> {_path(cfg, 'recall')}")
    return 0


def cmd_report(cfg: PipelineConfig, args) -> int:
    corpus = _load_clean(cfg)
    report_dir = Path(cfg.out_dir) / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    header = _header(cfg, "report")
    hist = activity_histograms(corpus, cfg.tz_offset_hours)
    tables = {
        "hist_posts_hour.tsv": enumerate(hist.posts_by_hour),
        "hist_posts_weekday.tsv": enumerate(hist.posts_by_weekday),
        "hist_access_hour.tsv": enumerate(hist.accesses_by_hour),
        "hist_access_weekday.tsv": enumerate(hist.accesses_by_weekday),
    }
    for name, rows in tables.items():
        _write_tsv(report_dir / name, header, "bin\tcount", rows)
    _write_tsv(
        report_dir / "hist_posts_per_blogger.tsv",
        header,
        "stat\tvalue",
        [
            ("mean", repr(hist.posts_per_blogger_mean)),
            ("median", repr(hist.posts_per_blogger_median)),
            ("q1", repr(hist.posts_per_blogger_q1)),
            ("q3", repr(hist.posts_per_blogger_q3)),
            ("bloggers", hist.n_bloggers),
        ],
    )
    bundled = ["activity histograms"]
    for name in ("gap_hist", "z_forward", "z_reversed", "idr", "recall"):
        src = _path(cfg, name)
        if src.exists():
            shutil.copyfile(src, report_dir / src.name)
            bundled.append(src.name)
    if _path(cfg, "links").exists() and _path(cfg, "influence").exists():
        links_net = implicit.read_links_tsv(_path(cfg, "links"), cfg.window_hours)
        influence = causality.read_influence_tsv(_path(cfg, "influence"), cfg.tau_hours)
        shift = causality.rank_shift_report(corpus.posts, links_net, influence)
        _write_tsv(
            report_dir / "rankshift_themes.tsv",
            header,
            "item\trank_all\trank_influence",
            ((r.item, r.rank_base, r.rank_influence) for r in shift.themes),
        )
        _write_tsv(
            report_dir / "rankshift_bloggers.tsv",
            header,
            "item\trank_implicit\trank_influence",
            ((r.item, r.rank_base, r.rank_influence) for r in shift.bloggers),
        )
        bundled.append("rank shifts")
    print(f"report: bundled {', '.join(bundled)} -> {report_dir}")
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "links": cmd_links,
    "causality": cmd_causality,
    "influence": cmd_influence,
    "topics": cmd_topics,
    "split": cmd_split,
    "tensor": cmd_tensor,
    "iolap": cmd_iolap,
    "pcldc": cmd_pcldc,
    "pcl": cmd_pcl,
    "idr": cmd_idr,
    "recommend": cmd_recommend,
    "eval": cmd_eval,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None, help="cap on internal workers")
    common.add_argument("--out-dir", default=None)
    common.add_argument("--window-hours", type=int, default=None)
    common.add_argument("--tau-hours", type=int, default=None)
    common.add_argument("--topics", dest="n_topics", type=int, default=None)
    common.add_argument("--rank", default=None, help="tensor group counts as I,J")
    common.add_argument("--top-n", type=int, default=None)
    common.add_argument("--vocab-max-size", type=int, default=None)

    parser = argparse.ArgumentParser(
        prog="blogfluence",
        description="influence detection and topic-aware influence models for blog event logs",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        sub = subparsers.add_parser(name, parents=[common])
        if name == "ingest":
            sub.add_argument("--content", default=None, help="posts TSV path")
            sub.add_argument("--access", default=None, help="Apache combined log path")
        if name == "recommend":
            sub.add_argument("--method", choices=("tg", "iolap", "pcldc", "pcl"), required=True)
            sub.add_argument("--member", default=None)
            sub.add_argument("--keywords", default=None, help="comma separated query keywords")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides: dict[str, object] = {
        "seed": args.seed,
        "threads": args.threads,
        "out_dir": args.out_dir,
        "window_hours": args.window_hours,
        "tau_hours": args.tau_hours,
        "n_topics": args.n_topics,
        "top_n": args.top_n,
        "vocab_max_size": args.vocab_max_size,
    }
    if getattr(args, "content", None):
        overrides["content_path"] = args.content
    if getattr(args, "access", None):
        overrides["access_path"] = args.access
    try:
        if args.rank is not None:
            try:
                i, j = (int(x) for x in args.rank.split(","))
            except ValueError as exc:
                raise ConfigError("--rank expects two integers as I,J") from exc
            overrides["rank_influenced"] = i
            overrides["rank_influencer"] = j
        cfg = load_config(args.config, overrides)
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.subcommand](cfg, args)
    except MissingArtifact as exc:
        print(f"missing upstream artifact: {exc} (run the producing subcommand first)",
              file=sys.stderr)
        return 2
    except (ConfigError, FormatError, IngestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
