"""Evaluation kit: qrels and run file I/O, ranking metrics, paired
significance testing, and comparison tables.

Metric semantics follow trec_eval conventions: gain 2^grade - 1 with a
log2(i+1) discount for NDCG, unjudged documents count as non-relevant,
and queries with no relevant documents are excluded from metric means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from scipy import stats as scipy_stats

from .errors import DuplicateDoc, MalformedRow
from .lexical import RankedList, RankEntry

METRIC_NAMES = ("P@5", "P@10", "MAP", "NDCG@10", "NDCG", "Rprec", "Recall")


@dataclass
class Qrels:
    """Graded relevance judgments keyed by (query_id, doc_id)."""

    judgments: dict[tuple[str, str], int] = field(default_factory=dict)

    def grade(self, query_id: str, doc_id: str) -> int:
        return self.judgments.get((query_id, doc_id), 0)

    def relevant_docs(self, query_id: str) -> set[str]:
        return {doc for (qid, doc), g in self.judgments.items()
                if qid == query_id and g > 0}

    def relevant_count(self, query_id: str) -> int:
        return len(self.relevant_docs(query_id))

    def grades_for(self, query_id: str) -> list[int]:
        return [g for (qid, _), g in self.judgments.items()
                if qid == query_id and g > 0]

    def query_ids(self) -> set[str]:
        return {qid for qid, _ in self.judgments}


def precision_at_k(run: RankedList, qrels: Qrels, k: int) -> float:
    """Fraction of the top k that is relevant; short runs pad the
    denominator with misses."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for e in run.entries[:k]
               if qrels.grade(run.query_id, e.doc_id) > 0)
    return hits / k


def average_precision(run: RankedList, qrels: Qrels) -> float:
    r = qrels.relevant_count(run.query_id)
    if r == 0:
        return 0.0
    hits = 0
    total = 0.0
    for e in run.entries:
        if qrels.grade(run.query_id, e.doc_id) > 0:
            hits += 1
            total += hits / e.rank
    return total / r


def mean_average_precision(runs: Mapping[str, RankedList],
                           qrels: Qrels) -> float:
    values = [average_precision(run, qrels)
              for qid, run in sorted(runs.items())
              if qrels.relevant_count(qid) > 0]
    return sum(values) / len(values) if values else 0.0


def _dcg(grades: Iterable[int]) -> float:
    return sum((2 ** g - 1) / math.log2(i + 1)
               for i, g in enumerate(grades, start=1))


def ndcg_at_k(run: RankedList, qrels: Qrels, k: int) -> float:
    gains = [qrels.grade(run.query_id, e.doc_id) for e in run.entries[:k]]
    ideal = sorted(qrels.grades_for(run.query_id), reverse=True)[:k]
    idcg = _dcg(ideal)
    if idcg == 0.0:
        return 0.0
    return _dcg(gains) / idcg


def ndcg(run: RankedList, qrels: Qrels) -> float:
    """Full-depth NDCG over every retrieved document."""
    return ndcg_at_k(run, qrels, len(run.entries)) if run.entries else 0.0


def rprec(run: RankedList, qrels: Qrels) -> float:
    r = qrels.relevant_count(run.query_id)
    if r == 0:
        return 0.0
    hits = sum(1 for e in run.entries[:r]
               if qrels.grade(run.query_id, e.doc_id) > 0)
    return hits / r


def recall(run: RankedList, qrels: Qrels) -> float:
    r = qrels.relevant_count(run.query_id)
    if r == 0:
        return 0.0
    hits = sum(1 for e in run.entries
               if qrels.grade(run.query_id, e.doc_id) > 0)
    return hits / r


@dataclass
class MetricReport:
    """Per-query metric values plus means over judged queries."""

    per_query: dict[str, dict[str, float]]
    means: dict[str, float]
    excluded_queries: list[str]  # queries with zero relevant docs


def evaluate_run(runs: Mapping[str, RankedList], qrels: Qrels) -> MetricReport:
    per_query: dict[str, dict[str, float]] = {}
    excluded: list[str] = []
    for qid in sorted(runs):
        if qrels.relevant_count(qid) == 0:
            excluded.append(qid)
            continue
        run = runs[qid]
        per_query[qid] = {
            "P@5": precision_at_k(run, qrels, 5),
            "P@10": precision_at_k(run, qrels, 10),
            "MAP": average_precision(run, qrels),
            "NDCG@10": ndcg_at_k(run, qrels, 10),
            "NDCG": ndcg(run, qrels),
            "Rprec": rprec(run, qrels),
            "Recall": recall(run, qrels),
        }
    means = {}
    for name in METRIC_NAMES:
        values = [m[name] for m in per_query.values()]
        means[name] = sum(values) / len(values) if values else 0.0
    return MetricReport(per_query=per_query, means=means,
                        excluded_queries=excluded)


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    degenerate: bool = False


def paired_t_test(per_query_a: Sequence[float],
                  per_query_b: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test on per-query metric values."""
    if len(per_query_a) != len(per_query_b):
        raise ValueError("paired samples must have equal length")
    n = len(per_query_a)
    if n < 2:
        raise ValueError("paired t-test requires at least 2 samples")
    diffs = [a - b for a, b in zip(per_query_a, per_query_b)]
    if all(d == 0.0 for d in diffs):
        return TTestResult(t=0.0, p=1.0, degenerate=True)
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    se = math.sqrt(var / n)
    t = mean / se
    p = 2.0 * float(scipy_stats.t.sf(abs(t), n - 1))
    return TTestResult(t=t, p=p)


# ---------------------------------------------------------------------------
# TREC-style file I/O
# ---------------------------------------------------------------------------

def write_run(runs: Mapping[str, RankedList], path: str | Path,
              run_tag: str) -> None:
    """Write run rows ``query_id Q0 doc_id rank score run_tag`` with the
    score at 6 decimal places."""
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(runs):
            for e in runs[qid].entries:
                fh.write(f"{qid} Q0 {e.doc_id} {e.rank} "
                         f"{e.score:.6f} {run_tag}\n")


def parse_run(path: str | Path) -> dict[str, RankedList]:
    by_query: dict[str, list[RankEntry]] = {}
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != 6 or parts[1] != "Q0":
                raise MalformedRow(f"bad run row: {line!r}", line_number=line_no)
            qid, _, doc_id, rank_s, score_s, _tag = parts
            try:
                rank = int(rank_s)
                score = float(score_s)
            except ValueError:
                raise MalformedRow(f"bad rank/score: {line!r}",
                                   line_number=line_no) from None
            if (qid, doc_id) in seen:
                raise DuplicateDoc(f"duplicate ({qid}, {doc_id}) "
                                   f"at line {line_no}")
            seen.add((qid, doc_id))
            by_query.setdefault(qid, []).append(RankEntry(doc_id, score, rank))
    return {
        qid: RankedList(qid, "fused", sorted(entries, key=lambda e: e.rank))
        for qid, entries in by_query.items()
    }


def parse_qrels(path: str | Path) -> Qrels:
    qrels = Qrels()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != 4:
                raise MalformedRow(f"bad qrels row: {line!r}",
                                   line_number=line_no)
            qid, _, doc_id, grade_s = parts
            try:
                grade = int(grade_s)
            except ValueError:
                raise MalformedRow(f"bad grade: {line!r}",
                                   line_number=line_no) from None
            if grade < 0:
                raise MalformedRow(f"negative grade: {line!r}",
                                   line_number=line_no)
            qrels.judgments[(qid, doc_id)] = grade
    return qrels


def write_qrels(qrels: Qrels, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (qid, doc_id), grade in sorted(qrels.judgments.items()):
            fh.write(f"{qid} 0 {doc_id} {grade}\n")


def comparison_table(reports: Mapping[str, MetricReport],
                     ttests: Mapping[str, TTestResult] | None = None,
                     fmt: str = "tsv") -> str:
    """Aligned metric table for one or more runs; optional t-test row."""
    header = ["run", *METRIC_NAMES]
    rows = [[label, *(f"{report.means[m]:.4f}" for m in METRIC_NAMES)]
            for label, report in reports.items()]
    if ttests:
        rows.append(["t-stat", *(f"{ttests[m].t:.4f}" for m in METRIC_NAMES)])
        rows.append(["p-value", *(f"{ttests[m].p:.4g}" for m in METRIC_NAMES)])
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |",
                 "|" + "|".join("---" for _ in header) + "|"]
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        return "\n".join(lines)
    if fmt == "tsv":
        return "\n".join("\t".join(row) for row in [header, *rows])
    raise ValueError(f"unknown format {fmt!r}")
