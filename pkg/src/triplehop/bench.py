"""Benchmark harness: query-time/timeout metrics, fidelity grids, and
the scaling sweeps (hops, batch size, cache size, semantics).

Workloads are generated from a seeded PRNG (``random.Random``; each
query draws a seed count uniformly from the configured range, then
samples that many distinct entities without replacement), so two runs
with the same seed and config execute identical workloads on any
machine. Timings of course differ; the workload and fidelity columns do
not.

Timed-out queries are excluded from the mean query time and counted
only in the timeout rate; this censoring rule is restated in the report
notes so readers do not mistake QT for an uncensored mean.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import platform
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .engine import (
    BatchQuery,
    PartitionedGraph,
    _partitioned_expand,
    cross_graph_k_hop,
    plan_batch,
    run_batch,
)
from .incidence import (
    EntityVector,
    HopSemantics,
    HopTrace,
    IncidenceGraph,
    _expand,
    jaccard,
    run_hops,
)
from .oracle import WALK_ORACLE_MAX_ENTITIES, oracle_bfs, oracle_walk
from .triples import Triple

DEFAULT_DEPTHS = (1, 2, 3, 4, 5)
DEFAULT_TIMEOUTS_MS = (2000.0, 4000.0, 6000.0, 8000.0, 10000.0)

CSV_COLUMNS = ("factor", "value", "qt_ms", "tr_pct", "jaccard", "loads", "evictions")


class QueryTimedOut(Exception):
    pass


@dataclass
class BenchConfig:
    depths: Sequence[int] = DEFAULT_DEPTHS
    timeout_ms: Sequence[float] | None = DEFAULT_TIMEOUTS_MS
    queries_per_depth: int = 20
    seed_entities: tuple[int, int] = (1, 20)
    seed: int = 0
    semantics: HopSemantics = HopSemantics.FRONTIER
    repetitions: int = 1
    oracle: str = "auto"  # auto | on | off
    parallel_workers: int = 1  # >1 adds an opt-in throughput pass

    def limit_for(self, depth_index: int) -> float | None:
        if self.timeout_ms is None:
            return None
        return float(self.timeout_ms[min(depth_index, len(self.timeout_ms) - 1)])


def make_workload(
    n_entities: int, depths: Sequence[int], queries_per_depth: int,
    seed_entities: tuple[int, int], seed: int,
) -> dict[int, list[list[int]]]:
    """Seeded random query sets, one list per depth."""
    lo, hi = seed_entities
    if not 1 <= lo <= hi:
        raise ValueError("seed entity range must satisfy 1 <= lo <= hi")
    rng = random.Random(seed)
    out: dict[int, list[list[int]]] = {}
    for depth in depths:
        queries = []
        for _ in range(queries_per_depth):
            n = rng.randint(lo, min(hi, n_entities))
            queries.append(sorted(rng.sample(range(n_entities), n)))
        out[depth] = queries
    return out


# --- benchmark targets -------------------------------------------------------


class SingleGraphTarget:
    kind = "single"

    def __init__(self, graph: IncidenceGraph):
        self.graph = graph
        self.n_entities = graph.n_entities
        self.n_triples = graph.n_triples
        self.cache = None

    def expand(self, frontier):
        return _expand(self.graph, frontier)

    def triples(self) -> list[Triple]:
        g = self.graph
        return [Triple(*t) for t in zip(g.subj.tolist(), g.rel.tolist(), g.obj.tolist())]


class PartitionedTarget:
    kind = "partitioned"

    def __init__(self, pg: PartitionedGraph):
        self.pg = pg
        self.n_entities = pg.n_entities
        self.n_triples = pg.n_triples
        self.cache = pg.cache

    def expand(self, frontier):
        return _partitioned_expand(self.pg, frontier)

    def triples(self) -> list[Triple]:
        out: list[Triple] = []
        for p in range(self.pg.store.m):
            sg = self.pg.store.load(p)
            g = sg.graph
            subj = sg.ent_to_global[g.subj]
            obj = sg.ent_to_global[g.obj]
            out.extend(Triple(*t) for t in zip(subj.tolist(), g.rel.tolist(), obj.tolist()))
        return out


def _run_query(target, seeds: list[int], k: int, semantics: HopSemantics,
               limit_ms: float | None) -> tuple[HopTrace | None, float, bool]:
    """Execute one query under a cooperative deadline.

    The deadline is checked between hops; the elapsed time is compared
    against the limit afterwards as well, so a slow final hop still
    counts as a timeout.
    """
    q0 = EntityVector(np.asarray(seeds, dtype=np.int64), target.n_entities)
    start = time.perf_counter()
    deadline = None if limit_ms is None else start + limit_ms / 1000.0

    def guarded(frontier):
        if deadline is not None and time.perf_counter() > deadline:
            raise QueryTimedOut
        return target.expand(frontier)

    trace: HopTrace | None = None
    try:
        trace = run_hops(guarded, q0, k, target.n_entities, target.n_triples, semantics)
    except QueryTimedOut:
        pass
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    timed_out = trace is None or (limit_ms is not None and elapsed_ms > limit_ms)
    return (None if timed_out else trace), elapsed_ms, timed_out


# --- oracle comparison -------------------------------------------------------


def _oracle_layers(
    seeds: list[int], k: int, triples: list[Triple], n_entities: int,
    semantics: HopSemantics,
) -> list[list[int]]:
    if semantics is HopSemantics.EXACT_WALK:
        return [oracle_walk(seeds, h, triples, n_entities) for h in range(1, k + 1)]
    layers, cumulative = oracle_bfs(seeds, k, triples)
    return cumulative if semantics is HopSemantics.CUMULATIVE else layers

def trace_fidelity(
    trace: HopTrace, seeds: list[int], triples: list[Triple], n_entities: int
) -> float:
    """Worst per-hop Jaccard between a trace and its matching oracle."""
    expected = _oracle_layers(seeds, trace.k, triples, n_entities, trace.semantics)
    return min(
        jaccard(step.frontier, layer) for step, layer in zip(trace.steps, expected)
    )


def _oracle_enabled(cfg: BenchConfig, target, semantics: HopSemantics) -> bool:
    if cfg.oracle == "off":
        return False
    if cfg.oracle == "on":
        return True
    if target.n_triples > 200_000:
        return False
    if semantics is HopSemantics.EXACT_WALK and target.n_entities > WALK_ORACLE_MAX_ENTITIES:
        return False
    return True


# --- reports -------------------------------------------------------------


@dataclass
class Row:
    factor: str
    value: object
    qt_ms: float | None
    tr_pct: float
    jaccard: float | None
    loads: int | None
    evictions: int | None
    trace: list[int] | None = None  # cache access trace; not part of the CSV

    def csv_cells(self) -> list[str]:
        def fmt(x, pattern):
            return "" if x is None else format(x, pattern)

        return [
            self.factor,
            str(self.value),
            fmt(self.qt_ms, ".3f"),
            fmt(self.tr_pct, ".2f"),
            fmt(self.jaccard, ".6f"),
            "" if self.loads is None else str(self.loads),
            "" if self.evictions is None else str(self.evictions),
        ]


@dataclass
class Report:
    rows: list[Row]
    fingerprint: dict
    notes: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(row.csv_cells())
        return buf.getvalue()

    def to_text(self) -> str:
        widths = [10, 12, 12, 8, 10, 8, 10]
        lines = [" | ".join(h.ljust(w) for h, w in zip(CSV_COLUMNS, widths))]
        lines.append("-+-".join("-" * w for w in widths))
        for row in self.rows:
            lines.append(
                " | ".join(c.ljust(w) for c, w in zip(row.csv_cells(), widths))
            )
        for note in self.notes:
            lines.append(f"# {note}")
        return "\n".join(lines)


def machine_fingerprint(config: dict) -> dict:
    return {
        "package": f"triplehop {__version__}",
        "platform": platform.platform(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": config,
    }


# --- the benchmark proper ------------------------------------------------


def run_benchmark(cfg: BenchConfig, target) -> Report:
    """Per-depth mean query time, timeout rate, and oracle fidelity."""
    workload = make_workload(
        target.n_entities, cfg.depths, cfg.queries_per_depth, cfg.seed_entities, cfg.seed
    )
    use_oracle = _oracle_enabled(cfg, target, cfg.semantics)
    triples = target.triples() if use_oracle else None

    rows: list[Row] = []
    notes = [
        "timed-out queries are excluded from qt_ms and counted only in tr_pct",
    ]
    for depth_index, depth in enumerate(cfg.depths):
        limit = cfg.limit_for(depth_index)
        before = None if target.cache is None else target.cache.snapshot_counters()
        times: list[float] = []
        fidelities: list[float] = []
        timeouts = 0
        total = 0
        for _ in range(cfg.repetitions):
            for seeds in workload[depth]:
                trace, elapsed, timed_out = _run_query(
                    target, seeds, depth, cfg.semantics, limit
                )
                total += 1
                if timed_out:
                    timeouts += 1
                    continue
                times.append(elapsed)
                if triples is not None:
                    fidelities.append(
                        trace_fidelity(trace, seeds, triples, target.n_entities)
                    )
        after = None if target.cache is None else target.cache.snapshot_counters()
        rows.append(
            Row(
                factor="hops",
                value=depth,
                qt_ms=(sum(times) / len(times)) if times else None,
                tr_pct=100.0 * timeouts / total if total else 0.0,
                jaccard=(sum(fidelities) / len(fidelities)) if fidelities else None,
                loads=None if after is None else after.loads - before.loads,
                evictions=None if after is None else after.evictions - before.evictions,
            )
        )

    if cfg.parallel_workers > 1:
        qps = _measure_throughput(cfg, target, workload)
        notes.append(
            f"parallel throughput ({cfg.parallel_workers} workers): {qps:.1f} queries/s;"
            " excluded from qt_ms"
        )

    config = {
        "depths": list(cfg.depths),
        "timeout_ms": list(cfg.timeout_ms) if cfg.timeout_ms else None,
        "queries_per_depth": cfg.queries_per_depth,
        "seed_entities": list(cfg.seed_entities),
        "seed": cfg.seed,
        "semantics": cfg.semantics.value,
        "repetitions": cfg.repetitions,
        "target": target.kind,
    }
    return Report(rows, machine_fingerprint(config), notes)


def _measure_throughput(cfg: BenchConfig, target, workload) -> float:
    jobs = [(seeds, depth) for depth in cfg.depths for seeds in workload[depth]]
    start = time.perf_counter()
    with concurrent.futures.ThreadPoolExecutor(cfg.parallel_workers) as pool:
        list(
            pool.map(
                lambda job: _run_query(target, job[0], job[1], cfg.semantics, None), jobs
            )
        )
    wall = time.perf_counter() - start
    return len(jobs) / wall if wall > 0 else float("inf")


# --- scaling sweeps ----------------------------------------------------------


@dataclass
class ScaleConfig:
    hops: Sequence[int] = DEFAULT_DEPTHS
    batch_sizes: Sequence[int] = (1, 10, 25, 50)
    cache_sizes: Sequence[int] = (1, 2, 4, 8, 16)
    base_hops: int = 2
    base_batch: int = 50
    base_cache: int = 16
    queries: int = 50
    seed_entities: tuple[int, int] = (1, 20)
    seed: int = 0
    semantics: HopSemantics = HopSemantics.FRONTIER
    semantics_sweep: bool = True


def _run_batched(
    pg: PartitionedGraph, queries: list[BatchQuery], batch_size: int,
    semantics: HopSemantics,
) -> float:
    """Run the workload in planned batches; returns mean ms per query."""
    start = time.perf_counter()
    for at in range(0, len(queries), batch_size):
        chunk = queries[at : at + batch_size]
        batch = plan_batch(chunk, pg.plan)
        results = run_batch(batch, pg, semantics)
        for r in results:
            if r.error is not None:
                raise RuntimeError(f"query {r.query_id} failed: {r.error}")
    wall_ms = (time.perf_counter() - start) * 1000.0
    return wall_ms / len(queries) if queries else 0.0


def run_scaling_suite(
    open_target: Callable[[int], PartitionedGraph], cfg: ScaleConfig
) -> Report:
    """Four sweeps over a partitioned graph: hops, batch size, cache
    size, and hop semantics, each on a fresh cache.

    ``open_target`` must return a fresh PartitionedGraph whose cache has
    the requested capacity and records its access trace; the trace is
    attached to each row so the counters can be replayed offline.
    """

    n_entities = open_target(cfg.base_cache).n_entities

    def workload(k: int) -> list[BatchQuery]:
        queries = make_workload(
            n_entities, (k,), cfg.queries, cfg.seed_entities, cfg.seed
        )[k]
        return [
            BatchQuery(i, EntityVector(np.asarray(s, dtype=np.int64), n_entities), k)
            for i, s in enumerate(queries)
        ]

    rows: list[Row] = []

    def sweep(factor: str, value, pg: PartitionedGraph, queries, batch_size, semantics):
        qt = _run_batched(pg, queries, batch_size, semantics)
        counters = pg.cache.snapshot_counters()
        rows.append(
            Row(
                factor=factor,
                value=value,
                qt_ms=qt,
                tr_pct=0.0,
                jaccard=None,
                loads=counters.loads,
                evictions=counters.evictions,
                trace=list(pg.cache.trace or []),
            )
        )

    for k in cfg.hops:
        sweep("hops", k, open_target(cfg.base_cache), workload(k), cfg.base_batch, cfg.semantics)
    base_queries = workload(cfg.base_hops)
    for b in cfg.batch_sizes:
        sweep("batch_size", b, open_target(cfg.base_cache), base_queries, b, cfg.semantics)
    for n in cfg.cache_sizes:
        sweep("cache_size", n, open_target(n), base_queries, cfg.base_batch, cfg.semantics)
    if cfg.semantics_sweep:
        for mode in HopSemantics:
            sweep("semantics", mode.value, open_target(cfg.base_cache), base_queries,
                  cfg.base_batch, mode)

    config = {
        "hops": list(cfg.hops),
        "batch_sizes": list(cfg.batch_sizes),
        "cache_sizes": list(cfg.cache_sizes),
        "base": [cfg.base_hops, cfg.base_batch, cfg.base_cache],
        "queries": cfg.queries,
        "seed": cfg.seed,
        "semantics": cfg.semantics.value,
    }
    return Report(rows, machine_fingerprint(config), [])


# --- fidelity verification -----------------------------------------------


@dataclass
class FidelityRow:
    mode: str
    depth: int
    query: int
    jaccard: float
    cross_jaccard: float | None  # None when no partitioned graph given


@dataclass
class FidelityReport:
    rows: list[FidelityRow]
    skipped_modes: list[str]

    @property
    def ok(self) -> bool:
        return all(
            r.jaccard == 1.0 and (r.cross_jaccard is None or r.cross_jaccard == 1.0)
            for r in self.rows
        )


def verify_fidelity(
    graph: IncidenceGraph,
    pg: PartitionedGraph | None,
    queries: int,
    seed: int,
    depths: Sequence[int] = DEFAULT_DEPTHS,
    modes: Sequence[HopSemantics] = tuple(HopSemantics),
    seed_entities: tuple[int, int] = (1, 20),
) -> FidelityReport:
    """Engine-vs-oracle (and engine-vs-engine) fidelity grid.

    For every query and mode: the single-graph trace is checked per hop
    against its matching oracle, and, when a partitioned graph is given,
    the cross-graph trace is checked per hop against the single-graph
    one. All Jaccard values must be exactly 1.0.
    """
    k = max(depths)
    target = SingleGraphTarget(graph)
    triples = target.triples()
    workload = make_workload(graph.n_entities, (k,), queries, seed_entities, seed)[k]

    rows: list[FidelityRow] = []
    skipped: list[str] = []
    for mode in modes:
        if mode is HopSemantics.EXACT_WALK and graph.n_entities > WALK_ORACLE_MAX_ENTITIES:
            skipped.append(mode.value)
            continue
        for qi, seeds in enumerate(workload):
            q0 = EntityVector(np.asarray(seeds, dtype=np.int64), graph.n_entities)
            trace = run_hops(target.expand, q0, k, graph.n_entities, graph.n_triples, mode)
            expected = _oracle_layers(seeds, k, triples, graph.n_entities, mode)
            cross_by_hop = None
            if pg is not None:
                cross_trace = cross_graph_k_hop(q0, k, pg, mode)
                cross_by_hop = [
                    jaccard(a.frontier, b.frontier)
                    for a, b in zip(trace.steps, cross_trace.steps)
                ]
            for depth in depths:
                rows.append(
                    FidelityRow(
                        mode=mode.value,
                        depth=depth,
                        query=qi,
                        jaccard=jaccard(trace.frontier(depth), expected[depth - 1]),
                        cross_jaccard=None if cross_by_hop is None else cross_by_hop[depth - 1],
                    )
                )
    return FidelityReport(rows, skipped)
