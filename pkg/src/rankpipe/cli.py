"""Command-line interface: ingest, index, run, eval, fuse, tune-weights."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import evalkit, pipeline, ranking
from .corpus import CorpusStore, ingest_directory
from .lexical import InvertedIndex, build_index_from_store


@click.group()
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool):
    """Multistage document retrieval and evaluation."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--input", "input_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def ingest(input_dir: str, manifest: str, out_dir: str):
    """Ingest raw XML documents into per-language corpus stores."""
    stats_by_lang = ingest_directory(input_dir, manifest, out_dir)
    for lang, stats in sorted(stats_by_lang.items()):
        click.echo(f"{lang}: {stats.doc_count} docs, avgdl={stats.avgdl:.2f}, "
                   f"avg_sentences={stats.avg_sentences:.2f}")


@main.group()
def index():
    """Build and query BM25 indexes."""


@index.command("build")
@click.option("--corpus", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Corpus store directory.")
@click.option("--lang", required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def index_build(corpus: str, lang: str, out_path: str):
    store = CorpusStore(corpus, lang)
    idx = build_index_from_store(store)
    idx.save(out_path)
    click.echo(f"indexed {idx.doc_count} documents, "
               f"{len(idx.postings)} terms -> {out_path}")


@index.command("search")
@click.option("--index", "index_path", required=True,
              type=click.Path(exists=True))
@click.option("--query", required=True)
@click.option("--k", default=1000, show_default=True)
@click.option("--query-id", default="Q0", show_default=True)
@click.option("--format", "fmt", default="trec",
              type=click.Choice(["trec", "plain"]), show_default=True)
@click.option("--run-tag", default="bm25", show_default=True)
def index_search(index_path: str, query: str, k: int, query_id: str,
                 fmt: str, run_tag: str):
    idx = InvertedIndex.load(index_path)
    ranked = idx.retrieve_topk(query, query_id, k)
    for e in ranked.entries:
        if fmt == "trec":
            click.echo(f"{query_id} Q0 {e.doc_id} {e.rank} "
                       f"{e.score:.6f} {run_tag}")
        else:
            click.echo(f"{e.rank}\t{e.doc_id}\t{e.score:.6f}")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--keep-stages", is_flag=True,
              help="Also write per-stage run files.")
def run(config_path: str, keep_stages: bool):
    """Execute a full pipeline run from a declarative config file."""
    cfg = pipeline.load_config(config_path)
    problems = pipeline.validate_config(cfg)
    if problems:
        for p in problems:
            click.echo(f"config error: {p}", err=True)
        sys.exit(2)
    out_path, failures = pipeline.run_pipeline(cfg, keep_stages=keep_stages)
    click.echo(f"run file: {out_path}")
    if failures:
        click.echo(f"failed topics: {', '.join(failures)}", err=True)
        sys.exit(1)


@main.command("eval")
@click.option("--run", "run_path", required=True, type=click.Path(exists=True))
@click.option("--qrels", "qrels_path", required=True,
              type=click.Path(exists=True))
@click.option("--run-b", "run_b_path", type=click.Path(exists=True))
@click.option("--format", "fmt", default="tsv",
              type=click.Choice(["tsv", "markdown"]), show_default=True)
def eval_cmd(run_path: str, qrels_path: str, run_b_path: str | None,
             fmt: str):
    """Evaluate run file(s) against qrels; add paired t-tests for two runs."""
    qrels = evalkit.parse_qrels(qrels_path)
    runs_a = evalkit.parse_run(run_path)
    report_a = evalkit.evaluate_run(runs_a, qrels)
    reports = {Path(run_path).name: report_a}
    ttests = None
    if run_b_path:
        runs_b = evalkit.parse_run(run_b_path)
        report_b = evalkit.evaluate_run(runs_b, qrels)
        reports[Path(run_b_path).name] = report_b
        shared = sorted(set(report_a.per_query) & set(report_b.per_query))
        ttests = {
            name: evalkit.paired_t_test(
                [report_a.per_query[q][name] for q in shared],
                [report_b.per_query[q][name] for q in shared])
            for name in evalkit.METRIC_NAMES
        }
    click.echo(evalkit.comparison_table(reports, ttests, fmt=fmt))
    excluded = reports[Path(run_path).name].excluded_queries
    if excluded:
        click.echo(f"# {len(excluded)} quer(ies) with no relevant documents "
                   f"excluded from means: {', '.join(excluded)}")


@main.command()
@click.option("--method", required=True,
              type=click.Choice(["rrf", "borda", "wcombsum"]))
@click.option("--bm25", "bm25_path", type=click.Path(exists=True),
              help="Required for wcombsum.")
@click.option("--refine", "refine_path", required=True,
              type=click.Path(exists=True))
@click.option("--rerank", "rerank_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--alpha", default=0.5, show_default=True)
@click.option("--beta", default=0.4, show_default=True)
@click.option("--rrf-k", default=60.0, show_default=True)
@click.option("--run-tag", default="fused", show_default=True)
def fuse(method: str, bm25_path: str | None, refine_path: str,
         rerank_path: str, out_path: str, alpha: float, beta: float,
         rrf_k: float, run_tag: str):
    """Fuse previously persisted per-stage run files."""
    cfg = ranking.FusionConfig(alpha=alpha, beta=beta, rrf_k=rrf_k,
                               method=method)
    problems = cfg.diagnostics()
    if problems:
        for p in problems:
            click.echo(f"fusion error: {p}", err=True)
        sys.exit(2)
    refine_runs = evalkit.parse_run(refine_path)
    rerank_runs = evalkit.parse_run(rerank_path)
    bm25_runs = evalkit.parse_run(bm25_path) if bm25_path else {}
    if method == "wcombsum" and not bm25_runs:
        click.echo("wcombsum requires --bm25", err=True)
        sys.exit(2)
    fused = {}
    for qid in sorted(rerank_runs):
        cross = rerank_runs[qid]
        bi = refine_runs[qid]
        lexical = bm25_runs.get(qid, bi)
        fused[qid] = ranking.fuse(lexical, bi, cross, cfg)
    evalkit.write_run(fused, out_path, run_tag)
    click.echo(f"fused run file: {out_path}")


@main.command("tune-weights")
@click.option("--grid", "grid_path", required=True,
              type=click.Path(exists=True),
              help="JSON list of weight triples.")
@click.option("--qrels", "qrels_path", required=True,
              type=click.Path(exists=True))
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
def tune_weights(grid_path: str, qrels_path: str, config_path: str):
    """Exhaustive grid search of aggregation weights on dev topics."""
    grid_raw = json.loads(Path(grid_path).read_text(encoding="utf-8"))
    grid = [ranking.AggregationWeights(tuple(w)) for w in grid_raw]
    qrels = evalkit.parse_qrels(qrels_path)
    cfg = pipeline.load_config(config_path)

    def dev_run_fn(weights):
        results, _ = pipeline.execute_all(cfg, weights_override=weights)
        return {qid: out.fused for qid, out in results.items()}

    best = ranking.grid_search_weights(grid, qrels, dev_run_fn)
    click.echo(f"best weights: {list(best.w)}")


if __name__ == "__main__":
    main()
