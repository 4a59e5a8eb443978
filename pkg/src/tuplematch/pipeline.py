"""End-to-end run: load, select attributes, embed, merge, prune, score, write.

Produces a run manifest (JSON) describing the configuration, per-stage wall
times, the attribute report, tuple counts before and after pruning, and —
when ground truth is supplied — both scoring views.  The tuples file itself
is deterministic for a fixed seed: same bytes at any parallelism.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from tuplematch import _kernels
from tuplematch.config import PipelineConfig
from tuplematch.embedding import AttributeReport, embed_dataset, select_attributes
from tuplematch.evaluation import TruthSet, evaluate
from tuplematch.index import SearchCounter
from tuplematch.io import read_table_csv, write_json, write_tuples_jsonl
from tuplematch.merging import (extract_candidate_tuples, hierarchical_merge,
                                init_working_tables)
from tuplematch.model import validate_dataset
from tuplematch.pruning import prune_tuples

logger = logging.getLogger(__name__)

__all__ = ["RunManifest", "run_pipeline"]


@dataclass
class RunManifest:
    """Everything worth knowing about one pipeline run."""

    config: dict
    inputs: list[str]
    kernels: str = "pure"
    stages: list[dict] = field(default_factory=list)
    attributes: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    score: dict | None = None
    outputs: dict = field(default_factory=dict)
    total_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "inputs": self.inputs,
            "kernels": self.kernels,
            "stages": self.stages,
            "attributes": self.attributes,
            "counts": self.counts,
            "score": self.score,
            "outputs": self.outputs,
            "total_seconds": self.total_seconds,
        }


class _StageClock:
    """Accumulates named stage durations for the manifest."""

    def __init__(self) -> None:
        self.records: list[dict] = []

    def run(self, name: str, fn):
        start = time.perf_counter()
        result = fn()
        elapsed = time.perf_counter() - start
        self.records.append({"name": name, "seconds": elapsed})
        logger.info("stage %-18s %.3fs", name, elapsed)
        return result


def run_pipeline(table_paths: list[str | Path], cfg: PipelineConfig,
                 out_dir: str | Path, truth_path: str | Path | None = None,
                 trace: bool = False) -> RunManifest:
    """Match entities across the given tables and write results to ``out_dir``.

    Writes ``tuples.jsonl`` (the predictions), ``manifest.json``, and — with
    ``trace=True`` — ``trace.jsonl`` recording per-merge match counts.
    """
    cfg.validate()
    total_start = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    clock = _StageClock()
    manifest = RunManifest(
        config=cfg.to_dict(),
        inputs=[str(p) for p in table_paths],
        kernels="compiled" if _kernels.USING_COMPILED else "pure",
    )

    dataset = clock.run("load", lambda: validate_dataset(
        [read_table_csv(p) for p in table_paths]))
    manifest.counts["tables"] = dataset.num_tables
    manifest.counts["rows"] = dataset.total_rows

    report: AttributeReport = clock.run("select_attributes",
                                        lambda: select_attributes(dataset, cfg))
    manifest.attributes = report.to_dict()
    logger.info("selected attributes: %s", report.selected)

    store = clock.run("embed", lambda: embed_dataset(
        dataset, report.selected, cfg.embedder, cfg.parallelism))
    tables = init_working_tables(dataset, store)

    counter = SearchCounter()
    trace_rows: list[dict] | None = [] if trace else None
    final = clock.run("merge", lambda: hierarchical_merge(
        tables, cfg, counter, trace_rows))
    manifest.counts["distance_evals"] = counter.distance_evals
    manifest.counts["matched_pairs"] = counter.pairs_found

    candidates = clock.run("extract", lambda: extract_candidate_tuples(final))
    manifest.counts["candidate_tuples"] = len(candidates)

    pruned, stats = clock.run("prune", lambda: prune_tuples(
        candidates, store, cfg.epsilon, cfg.min_pts, cfg.parallelism))
    manifest.counts["pruning"] = stats.to_dict()
    manifest.counts["final_tuples"] = len(pruned)

    pred = [frozenset(g.members) for g in pruned]
    if truth_path is not None:
        def _score():
            truth = TruthSet.from_file(truth_path)
            return evaluate(pred, truth)
        score = clock.run("score", _score)
        manifest.score = score.to_dict()
        logger.info("tuple F1 %.4f, pair F1 %.4f", score.tuple_f1, score.pair_f1)

    def _write():
        tuples_path = out_dir / "tuples.jsonl"
        write_tuples_jsonl(tuples_path, pred)
        manifest.outputs["tuples"] = str(tuples_path)
        if trace_rows is not None:
            trace_path = out_dir / "trace.jsonl"
            with open(trace_path, "w", encoding="utf-8") as fh:
                for row in trace_rows:
                    fh.write(json.dumps(row) + "\n")
            manifest.outputs["trace"] = str(trace_path)
    clock.run("write", _write)

    manifest.stages = clock.records
    manifest.total_seconds = time.perf_counter() - total_start
    manifest_path = out_dir / "manifest.json"
    write_json(manifest_path, manifest.to_dict())
    manifest.outputs["manifest"] = str(manifest_path)
    return manifest
