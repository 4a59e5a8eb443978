"""tuplematch: unsupervised matching of equivalent entities across tables.

Given S relational tables over a shared schema, the pipeline embeds each row,
merges tables hierarchically via mutual top-k joins over group centroids, and
density-prunes the resulting candidate tuples.  See the README for the CLI
and the data formats.
"""

from tuplematch.config import EmbedderSpec, IndexParams, PipelineConfig
from tuplematch.embedding import (AttributeReport, EmbeddingStore, embed_batch,
                                  embed_dataset, select_attributes,
                                  serialize_entity)
from tuplematch.errors import (DimensionMismatch, EmptyTable, InvalidParams,
                               RemoteUnavailable, SchemaMismatch, TooFewTables,
                               TupleMatchError, TupleTooSmall, TruthOverlap)
from tuplematch.evaluation import (ScoreReport, TruthSet, evaluate,
                                   pairs_to_tuples, score_pairs, score_tuples,
                                   tuples_to_pairs)
from tuplematch.index import (Neighbor, SearchCounter, build_index, mutual_topk,
                              query_topk)
from tuplematch.merging import (EntityGroup, WorkingTable,
                                extract_candidate_tuples, hierarchical_merge,
                                init_working_tables, merge_two_tables)
from tuplematch.model import Dataset, Entity, EntityRef, validate_dataset
from tuplematch.pipeline import RunManifest, run_pipeline
from tuplematch.pruning import classify_entities, prune_tuples
from tuplematch.strategies import (StrategyRun, run_chain, run_hierarchical,
                                   run_pairwise, scaling_report)
from tuplematch.synth import generate_synthetic, make_bench_tables

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "EntityRef", "Entity", "Dataset", "validate_dataset",
    # config
    "PipelineConfig", "EmbedderSpec", "IndexParams",
    # embedding
    "serialize_entity", "embed_batch", "embed_dataset", "select_attributes",
    "AttributeReport", "EmbeddingStore",
    # index
    "Neighbor", "SearchCounter", "build_index", "query_topk", "mutual_topk",
    # merging
    "EntityGroup", "WorkingTable", "init_working_tables", "merge_two_tables",
    "hierarchical_merge", "extract_candidate_tuples",
    # pruning
    "classify_entities", "prune_tuples",
    # evaluation
    "TruthSet", "ScoreReport", "score_tuples", "score_pairs", "tuples_to_pairs",
    "pairs_to_tuples", "evaluate",
    # strategies / synth / pipeline
    "StrategyRun", "run_pairwise", "run_chain", "run_hierarchical",
    "scaling_report", "generate_synthetic", "make_bench_tables",
    "RunManifest", "run_pipeline",
    # errors
    "TupleMatchError", "SchemaMismatch", "EmptyTable", "TooFewTables",
    "RemoteUnavailable", "DimensionMismatch", "TupleTooSmall", "TruthOverlap",
    "InvalidParams",
]
