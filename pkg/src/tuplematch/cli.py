"""Command-line interface.

Subcommands: ``match`` (run the pipeline), ``gen`` (synthetic data),
``bench`` (strategy scaling report or ``--kernels`` micro-benchmark) and
``score`` (re-score an existing prediction file).  Settings come from a TOML
config file, overridable by ``TUPLEMATCH_*`` environment variables, then by
command-line flags.  Failures print a one-line JSON error object to stderr
and exit 1; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from tuplematch.config import apply_env_overrides, load_config
from tuplematch.errors import TupleMatchError
from tuplematch.evaluation import TruthSet, evaluate
from tuplematch.io import read_tuples_jsonl, write_json
from tuplematch.kernelbench import format_report, kernel_report
from tuplematch.pipeline import run_pipeline
from tuplematch.strategies import (BenchConfig, load_bench_config, scaling_report,
                                   write_report_csv)
from tuplematch.synth import generate_synthetic

logger = logging.getLogger(__name__)

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tuplematch",
        description="Match equivalent entities across relational tables.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_match = sub.add_parser("match", help="run the matching pipeline")
    p_match.add_argument("--config", help="TOML config file")
    p_match.add_argument("--tables", nargs="+",
                         help="input CSV paths (default: [io].tables from the config)")
    p_match.add_argument("--truth", help="ground-truth JSONL for scoring")
    p_match.add_argument("--out", help="output directory (default: [io].out or ./out)")
    p_match.add_argument("--seed", type=int, help="override the seed")
    p_match.add_argument("--parallelism", type=int, help="worker threads")
    p_match.add_argument("--embedder", choices=["hashing", "remote"],
                         help="override the embedder kind")
    p_match.add_argument("--trace", action="store_true",
                         help="also write per-merge trace.jsonl")

    p_gen = sub.add_parser("gen", help="generate a synthetic dataset")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--tables", type=int, default=4, help="number of tables")
    p_gen.add_argument("--rows", type=int, default=100, help="rows per table")
    p_gen.add_argument("--clusters", type=int, default=50,
                       help="planted duplicate groups")
    p_gen.add_argument("--noise", type=float, default=0.05,
                       help="character noise rate within a group")
    p_gen.add_argument("--seed", type=int, default=0)

    p_bench = sub.add_parser("bench", help="benchmark merge strategies or kernels")
    p_bench.add_argument("--config", help="TOML config file with a [bench] section")
    p_bench.add_argument("--out", default="bench.csv", help="CSV report path")
    p_bench.add_argument("--repeats", type=int, help="override timing repeats")
    p_bench.add_argument("--kernels", action="store_true",
                         help="compare compiled kernels against the pure fallbacks")
    p_bench.add_argument("--size", type=int,
                         help="problem size for --kernels (default: full sizes)")

    p_score = sub.add_parser("score", help="score a prediction file against truth")
    p_score.add_argument("--pred", required=True, help="predicted tuples JSONL")
    p_score.add_argument("--truth", required=True, help="ground-truth JSONL")
    p_score.add_argument("--out", help="write the report JSON here (default: stdout)")
    return parser


def _cmd_match(args: argparse.Namespace) -> int:
    cfg, io_section = load_config(args.config)
    apply_env_overrides(cfg)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.parallelism is not None:
        cfg.parallelism = args.parallelism
    if args.embedder is not None:
        cfg.embedder.kind = args.embedder
    cfg.validate()

    tables = args.tables or io_section.get("tables")
    if not tables:
        print("error: no input tables (pass --tables or set [io].tables)", file=sys.stderr)
        return 2
    truth = args.truth or io_section.get("truth")
    out_dir = args.out or io_section.get("out", "out")

    manifest = run_pipeline(tables, cfg, out_dir, truth, trace=args.trace)
    summary = {
        "tuples": manifest.counts.get("final_tuples"),
        "out": manifest.outputs.get("tuples"),
        "manifest": manifest.outputs.get("manifest"),
    }
    if manifest.score is not None:
        summary["tuple_f1"] = manifest.score["tuple_f1"]
        summary["pair_f1"] = manifest.score["pair_f1"]
    print(json.dumps(summary))
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    result = generate_synthetic(args.out, args.tables, args.rows, args.clusters,
                                args.noise, args.seed)
    print(json.dumps(result.to_dict()))
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.kernels:
        kwargs = {"hash_rows": args.size, "graph_rows": args.size} if args.size else {}
        print(format_report(kernel_report(**kwargs)))
        return 0
    if args.config:
        bench, cfg = load_bench_config(args.config)
    else:
        bench, cfg = BenchConfig(), None
    if args.repeats is not None:
        bench.repeats = args.repeats
    rows = scaling_report(bench, cfg)
    write_report_csv(args.out, rows)
    for row in rows:
        print(f"{row.strategy:<13} S={row.num_tables:<3} n={row.rows_per_table} "
              f"median={row.median_seconds:.3f}s evals={row.distance_evals} "
              f"pairs={row.pairs_found}")
    print(f"wrote {args.out}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    pred = read_tuples_jsonl(args.pred)
    truth = TruthSet.from_file(args.truth)
    report = evaluate(pred, truth)
    payload = report.to_dict()
    if args.out:
        write_json(args.out, payload)
    print(json.dumps(payload, sort_keys=True))
    return 0


_COMMANDS = {
    "match": _cmd_match,
    "gen": _cmd_gen,
    "bench": _cmd_bench,
    "score": _cmd_score,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except TupleMatchError as exc:
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
              file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": {"type": "OSError", "message": str(exc)}}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
