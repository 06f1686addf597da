"""Command-line surface: build-graph -> embed -> citances -> train ->
eval -> significance.

Exit codes: 0 success, 1 usage/config error, 2 data validation error,
3 numerical failure.
"""

from __future__ import annotations

import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np

from .citance import (build_idf, citation_tfidf, extract_citances,
                      IdfTable, append_citance_sections, load_citance_cache,
                      load_citing_docs, save_citance_cache)
from .config import build_run_config, RunConfig
from .corpus import Document, load_corpus
from .embed import EmbeddingTable, generate_walks, train_skipgram
from .errors import (AmbiguityError, CitescopeError, ConfigError,
                     NumericalError, ParseError, StoreIntegrityError,
                     ValidationError)
from .graph import BuildReport, CitationGraph, build_graph, degree_stats
from .linkage import load_store
from .metrics import doc_level_relation_metric, mention_f1
from .models import (DocFeatures, IEPipeline, ModelConfig, TrainConfig,
                     load_checkpoint, save_checkpoint, train_model,
                     validation_f1)
from .reports import doc_scores, load_report, write_report
from .bootstrap import hierarchical_bootstrap

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


def _config(ctx, inputs=(), **overrides) -> RunConfig:
    merged = dict(ctx.obj or {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    config_path = merged.pop("config_path", None)
    seed = merged.pop("seed", None)
    if seed is not None:
        merged["seeds"] = (int(seed),)
    cfg = build_run_config(config_path, merged)
    cfg.validate_inputs(inputs)
    return cfg


def _require(cfg: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) is None:
            raise ConfigError(f"missing required setting: {name}")


@click.group()
@click.option("--config", "config_path", type=str, default=None,
              help="key-value config file; flags override it")
@click.option("--seed", type=int, default=None,
              help="single seed overriding the configured seed list")
@click.option("--jobs", type=int, default=None,
              help="parallel per-seed workers")
@click.option("--deterministic/--no-deterministic", default=None,
              help="force single-threaded deterministic execution")
@click.pass_context
def cli(ctx, config_path, seed, jobs, deterministic):
    """Citation-aware scientific information extraction toolkit."""
    ctx.obj = {"config_path": config_path, "seed": seed, "jobs": jobs,
               "deterministic": deterministic}


@cli.command("build-graph")
@click.option("--store", type=str, default=None,
              help="metadata store (JSON lines)")
@click.option("--seeds-file", type=str, default=None,
              help="file of seed record ids, one per line (default: all)")
@click.option("--graph-nodes", type=str, default=None,
              help="output node list path")
@click.option("--graph-edges", type=str, default=None,
              help="output edge list path")
@click.option("--report", type=str, default=None,
              help="output degree report path")
@click.pass_context
def cmd_build_graph(ctx, **kw):
    """Build the radius-2 citation graph around the seed documents."""
    cfg = _config(ctx, inputs=("store", "seeds_file"), **kw)
    _require(cfg, "store", "graph_nodes", "graph_edges")
    store = load_store(cfg.store)
    if len(store) == 0:
        click.echo("warning: metadata store is empty; writing an empty "
                   "graph", err=True)
        graph = CitationGraph([], [])
        seed_ids = []
        build_report = BuildReport()
    else:
        if cfg.seeds_file is not None:
            seed_ids = [ln.strip()
                        for ln in Path(cfg.seeds_file).read_text(
                            encoding="utf-8").splitlines() if ln.strip()]
        else:
            seed_ids = sorted(store.records)
        build_report = BuildReport()
        graph = build_graph(seed_ids, store, build_report)
    graph.save_node_list(cfg.graph_nodes)
    graph.save_edge_list(cfg.graph_edges)
    stats = degree_stats(graph, seed_ids)
    rows = [{"bucket": b, "citation_count": stats.citation_hist.get(b, 0),
             "reference_count": stats.reference_hist.get(b, 0)}
            for b in sorted(set(stats.citation_hist)
                            | set(stats.reference_hist))]
    summary = {
        "n_nodes": graph.n_nodes, "n_edges": graph.n_edges,
        "n_seeds": len(seed_ids),
        "dropped_edges": build_report.dropped_edges,
        "unresolved_endpoints": build_report.unresolved_endpoints,
        "zero_degree_seeds": sorted(
            d for d in seed_ids
            if stats.citations.get(d, 0) == 0
            and stats.references.get(d, 0) == 0),
        "missing_from_graph": stats.missing,
    }
    if cfg.report:
        write_report(cfg.report, cfg.settings(), rows, summary)
    click.echo(f"graph: {graph.n_nodes} nodes, {graph.n_edges} edges")


@cli.command("embed")
@click.option("--graph-nodes", type=str, default=None)
@click.option("--graph-edges", type=str, default=None)
@click.option("--embeddings", type=str, default=None,
              help="output embedding table path (text format)")
@click.option("--dim", type=int, default=None)
@click.option("--walks-per-node", type=int, default=None)
@click.option("--walk-length", type=int, default=None)
@click.option("--window", type=int, default=None)
@click.option("--negatives", type=int, default=None)
@click.option("--embed-epochs", type=int, default=None)
@click.option("--embed-lr", type=float, default=None)
@click.pass_context
def cmd_embed(ctx, **kw):
    """Train node embeddings over the citation graph (random walks plus
    skip-gram with negative sampling)."""
    cfg = _config(ctx, inputs=("graph_nodes", "graph_edges"), **kw)
    _require(cfg, "graph_nodes", "graph_edges", "embeddings")
    graph = CitationGraph.load(cfg.graph_nodes, cfg.graph_edges)
    seed = cfg.seeds[0]
    walks = generate_walks(graph, cfg.walks_per_node, cfg.walk_length,
                           seed=seed)
    table, losses = train_skipgram(
        walks, dim=cfg.dim, window=cfg.window, negatives=cfg.negatives,
        epochs=cfg.embed_epochs, lr=cfg.embed_lr, seed=seed)
    table.save_text(cfg.embeddings)
    click.echo(f"embeddings: {graph.n_nodes} nodes x {cfg.dim} dims, "
               f"final epoch loss {losses[-1]:.6f}")


@cli.command("citances")
@click.option("--corpus", type=str, default=None)
@click.option("--citing", type=str, default=None,
              help="citing documents (JSON lines)")
@click.option("--citance-cache", type=str, default=None,
              help="output citance cache path")
@click.option("--idf", type=str, default=None,
              help="output IDF table path")
@click.option("--max-citing", type=int, default=None)
@click.pass_context
def cmd_citances(ctx, **kw):
    """Extract citances for every corpus document and fit the IDF table."""
    cfg = _config(ctx, inputs=("corpus", "citing"), **kw)
    _require(cfg, "corpus", "citing", "citance_cache")
    docs = load_corpus(cfg.corpus)
    citing_docs = load_citing_docs(cfg.citing)
    cache = {}
    for doc in docs:
        citances = extract_citances(doc.doc_id, citing_docs,
                                    max_citing=cfg.max_citing,
                                    seed=cfg.seeds[0])
        if citances:
            cache[doc.doc_id] = citances
    save_citance_cache(cache, cfg.citance_cache)
    n_citances = sum(len(v) for v in cache.values())
    if cfg.idf:
        idf = build_idf(c for v in cache.values() for c in v)
        idf.save_text(cfg.idf)
    click.echo(f"citances: {n_citances} citances for {len(cache)} of "
               f"{len(docs)} documents")


def _model_config(cfg: RunConfig, tasks) -> ModelConfig:
    fusion = {"fusion_mention": "none", "fusion_saliency": "none",
              "fusion_relation": "none"}
    if cfg.use_graph and cfg.fusion != "none":
        for task in tasks:
            fusion[f"fusion_{task}"] = cfg.fusion
    return ModelConfig(
        d_tok=cfg.d_tok, d_ctx=cfg.d_ctx, hidden=cfg.hidden,
        d_span=cfg.d_span, d_rel=cfg.d_rel, graph_dim=cfg.dim,
        section_cap=cfg.section_cap, use_tfidf=cfg.use_tfidf,
        use_citances=cfg.use_citances, **fusion)


def _train_config(cfg: RunConfig, seed: int) -> TrainConfig:
    return TrainConfig(lr=cfg.lr, epochs=cfg.epochs, patience=cfg.patience,
                       batch_size=cfg.batch_size, grad_clip=cfg.grad_clip,
                       negative_ratio=cfg.negative_ratio, seed=seed)


def _load_features(cfg: RunConfig, docs) -> tuple[list[Document],
                                                  DocFeatures]:
    """Apply the citation-side inputs selected by the feature toggles."""
    features = DocFeatures()
    citances = {}
    if (cfg.use_citances or cfg.use_tfidf) and cfg.citance_cache:
        citances = load_citance_cache(cfg.citance_cache)
    if cfg.use_citances:
        docs = [append_citance_sections(d, citances[d.doc_id])
                if d.doc_id in citances else d for d in docs]
    if cfg.use_tfidf:
        idf = IdfTable.load_text(cfg.idf) if cfg.idf else IdfTable()
        for doc in docs:
            features.tfidf[doc.doc_id] = citation_tfidf(
                doc.all_tokens(), citances.get(doc.doc_id, []), idf)
    if cfg.use_graph and cfg.embeddings:
        table = EmbeddingTable.load_text(cfg.embeddings)
        for doc in docs:
            if doc.doc_id in table:
                features.graph_vecs[doc.doc_id] = table.lookup(doc.doc_id)
    return docs, features


def _tasks_for(cfg: RunConfig) -> tuple[str, ...]:
    if cfg.task == "all":
        return ("mention", "saliency", "relation")
    return (cfg.task,)


def _train_one_seed(args):
    """Module-level so per-seed fan-out can run in worker processes."""
    (seed, train_docs, val_docs, tasks, mcfg, tcfg_dict, features,
     checkpoint_path) = args
    tcfg = TrainConfig(**tcfg_dict, seed=seed)
    result = train_model(train_docs, val_docs, tasks, mcfg, tcfg,
                         features=features)
    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, result.model, tcfg,
                        result.thresholds)
    metric_task = next(t for t in ("relation", "saliency", "mention")
                       if t in tasks)
    theta = result.thresholds.get(metric_task, 0.5)
    f1 = validation_f1(result.model, val_docs, metric_task, features,
                       threshold=theta, seed=seed)
    return {"seed": seed, "task": metric_task, "val_f1": f1,
            "threshold": theta, "epochs_run": len(result.history),
            "checkpoint": str(checkpoint_path) if checkpoint_path else None}


@cli.command("train")
@click.option("--corpus", type=str, default=None)
@click.option("--task", type=click.Choice(
    ["mention", "saliency", "relation", "all"]), default=None)
@click.option("--fusion", type=click.Choice(["none", "stage1", "stage2"]),
              default=None)
@click.option("--use-citances/--no-citances", default=None)
@click.option("--use-tfidf/--no-tfidf", default=None)
@click.option("--use-graph/--no-graph", default=None)
@click.option("--embeddings", type=str, default=None)
@click.option("--citance-cache", type=str, default=None)
@click.option("--idf", type=str, default=None)
@click.option("--checkpoint-dir", type=str, default=None)
@click.option("--report", type=str, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--patience", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--val-fraction", type=float, default=None)
@click.pass_context
def cmd_train(ctx, **kw):
    """Train the selected task(s) once per configured seed."""
    cfg = _config(ctx, inputs=("corpus", "embeddings", "citance_cache",
                                "idf"), **kw)
    _require(cfg, "corpus")
    docs = load_corpus(cfg.corpus)
    docs, features = _load_features(cfg, docs)
    n_val = max(1, int(round(cfg.val_fraction * len(docs))))
    if n_val >= len(docs):
        raise ValidationError("corpus too small for a validation split")
    train_docs, val_docs = docs[:-n_val], docs[-n_val:]
    tasks = _tasks_for(cfg)
    mcfg = _model_config(cfg, tasks)
    tcfg_dict = dict(lr=cfg.lr, epochs=cfg.epochs, patience=cfg.patience,
                     batch_size=cfg.batch_size, grad_clip=cfg.grad_clip,
                     negative_ratio=cfg.negative_ratio)
    if cfg.checkpoint_dir:
        Path(cfg.checkpoint_dir).mkdir(parents=True, exist_ok=True)
    jobs = []
    for seed in cfg.seeds:
        ckpt = (Path(cfg.checkpoint_dir) / f"{cfg.task}_seed{seed}.pt"
                if cfg.checkpoint_dir else None)
        jobs.append((seed, train_docs, val_docs, tasks, mcfg, tcfg_dict,
                     features, ckpt))
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_train_one_seed, jobs))
    else:
        rows = [_train_one_seed(j) for j in jobs]
    mean_f1 = float(np.mean([r["val_f1"] for r in rows]))
    if cfg.report:
        write_report(cfg.report, cfg.settings(), rows,
                     summary={"mean_val_f1": mean_f1,
                              "n_seeds": len(cfg.seeds)})
    for row in rows:
        click.echo(f"seed {row['seed']}: val {row['task']} F1 = "
                   f"{row['val_f1']:.4f}")
    click.echo(f"mean val F1 over {len(cfg.seeds)} seeds: {mean_f1:.4f}")


def _relation_key(rel, clusters, mentions):
    """Cluster-name-independent identity for a 4-ary relation: each slot
    becomes the frozenset of its cluster's mention spans."""
    key = []
    for _etype, cid in rel.typed_items():
        idxs = clusters.get(cid, ())
        key.append(frozenset((mentions[i].start, mentions[i].end)
                             for i in idxs))
    return tuple(key)


@cli.command("eval")
@click.option("--corpus", type=str, default=None)
@click.option("--checkpoint", type=str, default=None)
@click.option("--use-citances/--no-citances", default=None)
@click.option("--use-tfidf/--no-tfidf", default=None)
@click.option("--use-graph/--no-graph", default=None)
@click.option("--embeddings", type=str, default=None)
@click.option("--citance-cache", type=str, default=None)
@click.option("--idf", type=str, default=None)
@click.option("--report", type=str, default=None)
@click.pass_context
def cmd_eval(ctx, **kw):
    """Run the end-to-end pipeline on a corpus and score it against the
    gold annotations."""
    cfg = _config(ctx, inputs=("corpus", "checkpoint", "embeddings",
                                "citance_cache", "idf"), **kw)
    _require(cfg, "corpus", "checkpoint")
    docs = load_corpus(cfg.corpus)
    docs, features = _load_features(cfg, docs)
    model, _tcfg, thresholds = load_checkpoint(cfg.checkpoint)
    pipe = IEPipeline(model,
                      saliency_threshold=thresholds.get("saliency", 0.5),
                      relation_threshold=thresholds.get("relation", 0.5))
    rows = []
    pred_mentions, gold_mentions = {}, {}
    for doc in docs:
        out = pipe.predict(doc, features.graph_vecs.get(doc.doc_id),
                           features.tfidf_for(doc.doc_id))
        pred_mentions[doc.doc_id] = out.mentions
        gold_mentions[doc.doc_id] = list(doc.mentions)
        pred_keys = {_relation_key(r, out.clusters, out.mentions)
                     for r in out.relations}
        gold_keys = {_relation_key(r, doc.clusters, doc.mentions)
                     for r in doc.relations}
        prf = doc_level_relation_metric({doc.doc_id: pred_keys},
                                        {doc.doc_id: gold_keys})
        rows.append({"doc_id": doc.doc_id, "score": prf.f1,
                     "precision": prf.precision, "recall": prf.recall,
                     "n_pred": len(pred_keys), "n_gold": len(gold_keys)})
    _per_type, mention_macro = mention_f1(pred_mentions, gold_mentions)
    relation_macro = float(np.mean([r["score"] for r in rows]))
    summary = {"doc_level_relation_f1": relation_macro,
               "mention_f1": mention_macro.f1, "n_docs": len(docs)}
    if cfg.report:
        write_report(cfg.report, cfg.settings(), rows, summary)
    click.echo(f"doc-level relation F1: {relation_macro:.4f}  "
               f"mention F1: {mention_macro.f1:.4f}")


@cli.command("significance")
@click.option("--a", "reports_a", type=str, multiple=True, required=True,
              help="report file(s) for the proposed system (one per seed)")
@click.option("--b", "reports_b", type=str, multiple=True, required=True,
              help="report file(s) for the baseline system")
@click.option("--resamples", type=int, default=None)
@click.option("--two-sided/--one-sided", default=None)
@click.option("--report", type=str, default=None,
              help="optional output report path for the p-value")
@click.pass_context
def cmd_significance(ctx, reports_a, reports_b, **kw):
    """Hierarchical bootstrap over stored per-document scores; the paired
    test is the single-seed case."""
    cfg = _config(ctx, **kw)
    for path in (*reports_a, *reports_b):
        if not Path(path).exists():
            raise ConfigError(f"report does not exist: {path}")

    def load_system(paths):
        per_seed, ids = [], None
        for path in paths:
            _header, rows = load_report(path)
            scores = doc_scores(rows)
            if ids is None:
                ids = sorted(scores)
            elif sorted(scores) != ids:
                raise ValidationError(
                    f"{path}: doc_id set differs within one system")
            per_seed.append([scores[d] for d in ids])
        return per_seed, ids

    per_seed_a, ids_a = load_system(reports_a)
    per_seed_b, ids_b = load_system(reports_b)
    if ids_a != ids_b:
        raise ValidationError(
            "test sets do not match between the two systems")
    result = hierarchical_bootstrap(
        per_seed_a, per_seed_b, lambda xs: float(np.mean(xs)),
        n_resamples=cfg.resamples, seed=cfg.seeds[0],
        two_sided=cfg.two_sided)
    if cfg.report:
        write_report(cfg.report, cfg.settings(), [], summary={
            "p_value": result.p_value, "n_resamples": result.n_resamples,
            "seed": result.seed, "two_sided": result.two_sided,
            "tie_convention": result.tie_convention,
            "n_docs": len(ids_a)})
    click.echo(f"p-value: {result.p_value:.6f}  "
               f"({result.n_resamples} resamples, seed {result.seed}, "
               f"{'two' if result.two_sided else 'one'}-sided; "
               f"{result.tie_convention})")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING)
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Abort:
        return EXIT_CONFIG
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except (ParseError, ValidationError, StoreIntegrityError,
            AmbiguityError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except NumericalError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return EXIT_NUMERIC
    except CitescopeError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
