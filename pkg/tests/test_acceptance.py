"""Acceptance gate: every release-blocking behavior, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.  Each
check carries a wall-clock budget; blowing the budget fails the check.
"""

import functools
import math
import time

import numpy as np
import pytest

from tuplematch.config import IndexParams, PipelineConfig
from tuplematch.embedding import EmbeddingStore, select_attributes
from tuplematch.evaluation import evaluate, score_pairs, score_tuples
from tuplematch.index import ExactIndex, GraphIndex, mutual_topk
from tuplematch.io import read_table_csv
from tuplematch.merging import (EntityGroup, WorkingTable, extract_candidate_tuples,
                                hierarchical_merge)
from tuplematch.model import EntityRef, validate_dataset
from tuplematch.pipeline import run_pipeline
from tuplematch.pruning import CORE, OUTLIER, REACHABLE, classify_entities, prune_tuples
from tuplematch.strategies import BenchConfig, scaling_report
from tuplematch.synth import generate_synthetic, make_bench_tables

# Frozen after the one-time calibration sweep recorded in docs/calibration.md:
# the match threshold sits mid-plateau and the selection threshold is the
# package default.
FROZEN_M = 0.50
FROZEN_GAMMA = 0.9
FROZEN_GEN_SEED = 7

EXACT = IndexParams(backend="exact")


def criterion(num, name, budget_seconds):
    """Time the check, enforce its budget, and print one PASS/FAIL line."""
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                fn(*args, **kwargs)
                elapsed = time.perf_counter() - start
                assert elapsed < budget_seconds, \
                    f"{name}: took {elapsed:.1f}s, budget {budget_seconds}s"
            except BaseException:
                elapsed = time.perf_counter() - start
                print(f"criterion {num:2d} {name:<28} FAIL  ({elapsed:.1f}s)")
                raise
            print(f"criterion {num:2d} {name:<28} PASS  "
                  f"({elapsed:.1f}s / {budget_seconds:.0f}s)")
        return wrapper
    return deco


@criterion(1, "pair-f1-worked-example", 1)
def test_pair_f1_worked_example():
    pred = [frozenset({EntityRef(0, 1), EntityRef(1, 2), EntityRef(2, 4)})]
    truth = [frozenset({EntityRef(0, 1), EntityRef(1, 2), EntityRef(2, 3)})]
    pairs = score_pairs(pred, truth)
    assert pairs.precision == 1 / 3
    assert pairs.recall == 1 / 3
    assert pairs.f1 == 1 / 3
    assert score_tuples(pred, truth).f1 == 0.0


@criterion(2, "mutual-topk-oracle", 30)
def test_mutual_topk_matches_brute_predicate():
    rng = np.random.default_rng(20260822)
    ks = [1, 2, 5]
    ms = [0.1, 0.5, 1.0]
    for trial in range(200):
        nl = int(rng.integers(1, 201))
        nr = int(rng.integers(1, 201))
        dim = int(rng.integers(16, 129))
        k = ks[trial % 3]
        m = ms[(trial // 3) % 3]
        left = rng.standard_normal((nl, dim))
        left /= np.linalg.norm(left, axis=1, keepdims=True)
        right = rng.standard_normal((nr, dim))
        right /= np.linalg.norm(right, axis=1, keepdims=True)
        if trial % 4 == 0 and nl > 1 and nr > 1:  # duplicate rows stress ties
            right[0] = left[0]
            right[-1] = left[0]

        # direct evaluation of the pair predicate
        dist = 1.0 - left @ right.T
        np.maximum(dist, 0.0, out=dist)
        in_right_top = np.zeros((nl, nr), dtype=bool)
        cols = np.argsort(dist, axis=1, kind="stable")[:, :min(k, nr)]
        np.put_along_axis(in_right_top, cols, True, axis=1)
        in_left_top = np.zeros((nr, nl), dtype=bool)
        rows = np.argsort(dist.T, axis=1, kind="stable")[:, :min(k, nl)]
        np.put_along_axis(in_left_top, rows, True, axis=1)
        keep = in_right_top & in_left_top.T & (dist <= m)
        want = [(int(i), int(j), float(dist[i, j])) for i, j in np.argwhere(keep)]

        got = mutual_topk(left, right, k, m, EXACT)
        assert got == want, (trial, nl, nr, dim, k, m)


@criterion(3, "graph-backend-recall", 60)
def test_graph_backend_recall():
    for seed in range(5):
        rng = np.random.default_rng(9000 + seed)
        vecs = rng.standard_normal((2000, 48))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        graph = GraphIndex(vecs, IndexParams(), seed=seed)
        g_ids, _ = graph.query_batch(vecs, 10)
        e_ids, _ = ExactIndex(vecs).query_batch(vecs, 10)
        recall = np.mean([
            len(set(a.tolist()) & set(b.tolist())) / 10
            for a, b in zip(g_ids, e_ids)
        ])
        assert recall >= 0.95, (seed, recall)


@criterion(4, "pruning-oracle", 10)
def test_pruning_matches_brute_classifier():
    def brute(vectors, epsilon, min_pts):
        n = len(vectors)
        dist = [[math.dist(vectors[i], vectors[j]) for j in range(n)] for i in range(n)]
        core = [sum(d <= epsilon for d in dist[i]) >= min_pts for i in range(n)]
        out = []
        for i in range(n):
            if core[i]:
                out.append(CORE)
            elif any(core[j] and dist[i][j] <= epsilon for j in range(n)):
                out.append(REACHABLE)
            else:
                out.append(OUTLIER)
        return out

    rng = np.random.default_rng(411)
    for trial in range(500):
        n = int(rng.integers(1, 31))
        dim = int(rng.integers(2, 9))
        vecs = rng.standard_normal((n, dim))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        epsilon = float(rng.uniform(0.1, 2.0))
        min_pts = int(rng.integers(1, 6))
        got = classify_entities(vecs, epsilon, min_pts)
        assert got == brute(vecs.tolist(), epsilon, min_pts), (trial, n, epsilon, min_pts)


def _planted_orthogonal(num_tables, clusters, jitter, seed):
    """Clusters on orthogonal basis directions: inter-cluster cosine distance
    is 1.0 and the jitter keeps intra-cluster distance far below it."""
    rng = np.random.default_rng(seed)
    dim = clusters + 4
    sizes = rng.integers(2, num_tables + 1, size=clusters)
    sizes[0] = num_tables  # make sure the max possible size occurs
    staged = [[] for _ in range(num_tables)]
    truth = []
    for c in range(clusters):
        proto = np.zeros(dim)
        proto[c] = 1.0
        chosen = rng.choice(num_tables, size=int(sizes[c]), replace=False)
        members = []
        for t in chosen:
            noise = rng.standard_normal(dim) * jitter
            noise[c] = 0.0
            vec = proto + noise
            vec /= np.linalg.norm(vec)
            members.append(EntityRef(int(t), len(staged[t])))
            staged[t].append(vec)
        truth.append(frozenset(members))
    tables = []
    for t in range(num_tables):
        mat = np.ascontiguousarray(np.stack(staged[t]))
        groups = [EntityGroup((EntityRef(t, r),), mat[r], mat[r])
                  for r in range(mat.shape[0])]
        tables.append(WorkingTable(groups=groups, level=0))
    return tables, truth, int(sizes.max())


@criterion(5, "planted-cluster-exactness", 60)
def test_planted_clusters_recovered_exactly():
    m = 0.35
    for num_tables in (2, 4, 5, 8):
        tables, truth, k = _planted_orthogonal(num_tables, clusters=50,
                                               jitter=0.04, seed=num_tables)
        store = EmbeddingStore([np.stack([g.centroid for g in t.groups])
                                for t in tables])

        # verify the construction really satisfies the separation premises:
        # within a cluster every pairwise distance < m/2, across clusters > 2m
        cluster_of = {}
        for c, members in enumerate(truth):
            for ref in members:
                cluster_of[ref] = c
        refs = sorted(cluster_of)
        vecs = store.gather(refs)
        dist = 1.0 - vecs @ vecs.T
        same = np.array([[cluster_of[a] == cluster_of[b] for b in refs] for a in refs])
        off_diag = ~np.eye(len(refs), dtype=bool)
        assert dist[same & off_diag].max() < m / 2
        assert dist[~same].min() > 2 * m

        cfg = PipelineConfig(k=k, m=m, index=EXACT)
        final = hierarchical_merge(tables, cfg)
        candidates = extract_candidate_tuples(final)
        pruned, _ = prune_tuples(candidates, store, cfg.epsilon, cfg.min_pts)
        pred = [frozenset(g.members) for g in pruned]
        report = evaluate(pred, truth)
        assert report.tuple_f1 == 1.0, (num_tables, report)


@criterion(6, "end-to-end-text-pipeline", 60)
def test_end_to_end_text_pipeline(tmp_path):
    gen = generate_synthetic(tmp_path / "data", num_tables=4, rows=100,
                             clusters=50, noise=0.05, seed=FROZEN_GEN_SEED)
    cfg = PipelineConfig(m=FROZEN_M, gamma=FROZEN_GAMMA, seed=0)
    manifest = run_pipeline(gen.table_paths, cfg, tmp_path / "out", gen.truth_path)
    assert manifest.score["tuple_f1"] == 1.0, manifest.score


@criterion(7, "attribute-selection", 10)
def test_attribute_selection_on_synthetic_columns(tmp_path):
    gen = generate_synthetic(tmp_path / "data", num_tables=4, rows=100,
                             clusters=50, noise=0.05, seed=FROZEN_GEN_SEED)
    ds = validate_dataset([read_table_csv(p) for p in gen.table_paths])
    report = select_attributes(ds, PipelineConfig(gamma=FROZEN_GAMMA, seed=0))
    by_name = {s.name: s for s in report.scores}
    assert not by_name["id"].selected, by_name["id"]
    assert by_name["id"].shuffle_similarity >= FROZEN_GAMMA
    assert by_name["name"].selected
    assert by_name["city"].selected
    assert report.selected == ["name", "city"]


@criterion(8, "strategy-scaling-trend", 300)
def test_strategy_scaling_trend():
    bench = BenchConfig(table_counts=[4, 8, 16], rows=500, dim=128,
                        cluster_fraction=0.8, repeats=1, seed=0)
    rows = scaling_report(bench)
    evals = {(r.strategy, r.num_tables): r.distance_evals for r in rows}

    def factors(strategy):
        return [evals[(strategy, 8)] / evals[(strategy, 4)],
                evals[(strategy, 16)] / evals[(strategy, 8)]]

    pairwise = factors("pairwise")
    hierarchical = factors("hierarchical")
    chain = factors("chain")
    for f in pairwise:
        assert 3.3 <= f <= 4.7, ("pairwise", pairwise)
    for f in hierarchical:
        assert 1.8 <= f <= 2.8, ("hierarchical", hierarchical)
    assert chain[1] > hierarchical[1], (chain, hierarchical)


@criterion(9, "parallel-determinism", 120)
def test_outputs_identical_across_parallelism(tmp_path):
    gen = generate_synthetic(tmp_path / "data", num_tables=4, rows=100,
                             clusters=50, noise=0.05, seed=FROZEN_GEN_SEED)
    outputs = {}
    for workers in (1, 4):
        cfg = PipelineConfig(m=FROZEN_M, gamma=FROZEN_GAMMA, seed=0,
                             parallelism=workers)
        out = tmp_path / f"p{workers}"
        run_pipeline(gen.table_paths, cfg, out, trace=True)
        outputs[workers] = ((out / "tuples.jsonl").read_bytes(),
                            (out / "trace.jsonl").read_bytes())
    assert outputs[1] == outputs[4]


@criterion(10, "conservation-invariants", 60)
def test_conservation_invariants():
    rng = np.random.default_rng(606)
    for trial in range(30):
        num_tables = int(rng.integers(2, 7))
        rows = int(rng.integers(5, 40))
        tables, _ = make_bench_tables(num_tables, rows, dim=48,
                                      cluster_fraction=float(rng.uniform(0, 1)),
                                      seed=trial)
        refs_in = set()
        for t in tables:
            refs_in |= t.all_refs()
        assert len(refs_in) == num_tables * rows

        cfg = PipelineConfig(k=int(rng.integers(1, 5)), m=float(rng.uniform(0.1, 0.9)),
                             index=EXACT)
        final = hierarchical_merge(tables, cfg)
        # merging conserves the entity set and keeps groups disjoint
        assert final.all_refs() == refs_in
        final.check_disjoint()

        candidates = extract_candidate_tuples(final)
        for g in candidates:
            assert g.size >= 2

        # classification partitions every tuple: each member gets exactly one
        # of the three labels, and dropping outliers never invents members
        mats = [np.stack([g.centroid for g in t.groups]) for t in tables]
        store = EmbeddingStore(mats)
        epsilon, min_pts = float(rng.uniform(0.3, 1.5)), int(rng.integers(1, 4))
        for g in candidates:
            labels = classify_entities(store.gather(g.members), epsilon, min_pts)
            assert len(labels) == g.size
            assert all(lab in (CORE, REACHABLE, OUTLIER) for lab in labels)
        pruned, stats = prune_tuples(candidates, store, epsilon, min_pts)
        kept_refs = set()
        for g in pruned:
            assert g.size >= 2
            for ref in g.members:
                assert ref not in kept_refs
                kept_refs.add(ref)
        assert kept_refs <= {ref for g in candidates for ref in g.members}
        assert stats.members_out == len(kept_refs)
        assert stats.tuples_in - stats.tuples_out >= 0
