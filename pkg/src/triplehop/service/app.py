"""FastAPI service wrapping the retrieval engine.

The service is the one long-lived owner of loaded graphs: a registry
memoizes graph directories (and partitioned directories per cache
capacity) so repeated queries reuse resident structures and the LRU
cache keeps its state between requests. The CLI is a thin client of
these endpoints.
"""

from __future__ import annotations

import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..archive import load_graph_dir, open_partitioned, save_graph_dir, save_partition_dir
from ..bench import (
    BenchConfig,
    PartitionedTarget,
    Report,
    ScaleConfig,
    SingleGraphTarget,
    run_benchmark,
    run_scaling_suite,
    verify_fidelity,
)
from ..engine import PartitionedGraph, cross_graph_k_hop, cross_graph_paths
from ..errors import DataError, UsageError
from ..incidence import (
    EntityVector,
    HopSemantics,
    HopTrace,
    PathResult,
    build_incidence,
    k_hop,
    reconstruct_paths,
)
from ..partition import materialize_subgraphs, plan_partitions
from ..triples import Dictionary, ingest_path, lookup_entities
from .models import (
    BenchRequest,
    BuildRequest,
    BuildResponse,
    CacheOut,
    HealthResponse,
    HopOut,
    PartitionRequest,
    PartitionResponse,
    QueryRequest,
    QueryResponse,
    ReportResponse,
    RowOut,
    ScaleRequest,
    VerifyRequest,
    VerifyResponse,
    VerifyRow,
)


class GraphRegistry:
    """Memoizes loaded graphs by resolved path (and cache capacity)."""

    def __init__(self):
        self._graphs: dict[Path, tuple] = {}
        self._partitioned: dict[tuple[Path, int], tuple] = {}
        self._lock = threading.Lock()

    def graph(self, graph_dir: str):
        key = Path(graph_dir).resolve()
        with self._lock:
            if key not in self._graphs:
                self._graphs[key] = load_graph_dir(key)
            return self._graphs[key]

    def partitioned(self, part_dir: str, capacity: int):
        key = (Path(part_dir).resolve(), capacity)
        with self._lock:
            if key not in self._partitioned:
                self._partitioned[key] = open_partitioned(key[0], capacity)
            return self._partitioned[key]


def _error_payload(kind: str, message: str) -> dict:
    return {"detail": {"kind": kind, "message": message}}


def _hops_out(trace: HopTrace, entities: Dictionary) -> list[HopOut]:
    return [
        HopOut(
            hop=h,
            entities=[entities.label_of(e) for e in step.frontier],
            triple_count=len(step.activated),
        )
        for h, step in enumerate(trace.steps, start=1)
    ]


def _paths_out(result: PathResult, entities: Dictionary, relations: Dictionary):
    return [
        [
            (entities.label_of(s), relations.label_of(r), entities.label_of(o))
            for s, r, o in path
        ]
        for path in result.paths
    ]


def _report_response(report: Report) -> ReportResponse:
    rows = [
        RowOut(
            factor=r.factor,
            value=str(r.value),
            qt_ms=r.qt_ms,
            tr_pct=r.tr_pct,
            jaccard=r.jaccard,
            loads=r.loads,
            evictions=r.evictions,
        )
        for r in report.rows
    ]
    return ReportResponse(
        rows=rows,
        fingerprint=report.fingerprint,
        notes=report.notes,
        csv=report.to_csv(),
        text=report.to_text(),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="triplehop", version=__version__)
    registry = GraphRegistry()

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        message = "; ".join(
            ".".join(str(p) for p in err["loc"] if p != "body") + ": " + err["msg"]
            for err in exc.errors()
        )
        return JSONResponse(status_code=400, content=_error_payload("usage", message))

    @app.exception_handler(UsageError)
    async def _usage_error(request: Request, exc: UsageError):
        return JSONResponse(status_code=400, content=_error_payload("usage", str(exc)))

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content=_error_payload("usage", str(exc)))

    @app.exception_handler(DataError)
    async def _data_error(request: Request, exc: DataError):
        return JSONResponse(status_code=422, content=_error_payload("data", str(exc)))

    @app.exception_handler(FileNotFoundError)
    async def _missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(status_code=422, content=_error_payload("data", str(exc)))

    @app.get("/healthz", response_model=HealthResponse)
    def healthz():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/build", response_model=BuildResponse)
    def build(req: BuildRequest):
        ts = ingest_path(req.triples_path)
        graph = build_incidence(ts.triples, ts.n_entities, ts.n_relations)
        save_graph_dir(graph, ts.entities, ts.relations, req.out_dir)
        return BuildResponse(
            entities=ts.n_entities,
            relations=ts.n_relations,
            triples=ts.n_triples,
            out_dir=str(Path(req.out_dir)),
        )

    @app.post("/partition", response_model=PartitionResponse)
    def partition(req: PartitionRequest):
        graph, entities, relations = registry.graph(req.graph_dir)
        plan = plan_partitions((graph.subj, graph.n_entities), req.m, req.strategy)
        subgraphs = materialize_subgraphs(
            plan, (graph.subj, graph.rel, graph.obj, graph.n_entities, graph.n_relations)
        )
        save_partition_dir(
            plan, subgraphs, entities, relations, graph.n_relations, req.out_dir
        )
        return PartitionResponse(
            m=plan.m,
            strategy=plan.strategy,
            triple_counts=plan.loads.tolist(),
            out_dir=str(Path(req.out_dir)),
        )

    @app.post("/query", response_model=QueryResponse)
    def query(req: QueryRequest):
        semantics = HopSemantics.parse(req.semantics)
        if req.graph_dir is not None:
            graph, entities, relations = registry.graph(req.graph_dir)
            lookup = lookup_entities(req.entities, entities)
            q0 = EntityVector(np.asarray(lookup.ids, dtype=np.int64), graph.n_entities)
            trace = k_hop(q0, req.hops, graph, semantics)
            paths = (
                reconstruct_paths(q0, req.hops, graph, req.max_paths)
                if req.include_paths
                else None
            )
            cache_out = None
        else:
            pg, entities, relations = registry.partitioned(
                req.partitioned_dir, req.cache_capacity
            )
            lookup = lookup_entities(req.entities, entities)
            q0 = EntityVector(np.asarray(lookup.ids, dtype=np.int64), pg.n_entities)
            trace = cross_graph_k_hop(q0, req.hops, pg, semantics)
            paths = (
                cross_graph_paths(q0, req.hops, pg, req.max_paths)
                if req.include_paths
                else None
            )
            cache_out = CacheOut(**pg.cache.snapshot_counters().as_dict())
        return QueryResponse(
            hops=_hops_out(trace, entities),
            unknown=lookup.unknown,
            paths=None if paths is None else _paths_out(paths, entities, relations),
            paths_truncated=None if paths is None else paths.truncated,
            cache=cache_out,
        )

    @app.post("/bench", response_model=ReportResponse)
    def bench(req: BenchRequest):
        cfg = BenchConfig(
            depths=req.depths,
            timeout_ms=req.timeout_ms,
            queries_per_depth=req.queries,
            seed_entities=req.seed_entities,
            seed=req.seed,
            semantics=HopSemantics.parse(req.semantics),
            repetitions=req.repetitions,
            oracle=req.oracle,
            parallel_workers=req.parallel_workers,
        )
        if req.graph_dir is not None:
            graph, _, _ = load_graph_dir(req.graph_dir)
            target = SingleGraphTarget(graph)
        else:
            pg, _, _ = open_partitioned(req.partitioned_dir, req.cache_capacity)
            target = PartitionedTarget(pg)
        return _report_response(run_benchmark(cfg, target))

    @app.post("/scale", response_model=ReportResponse)
    def scale(req: ScaleRequest):
        cfg = ScaleConfig(
            hops=req.hops,
            batch_sizes=req.batch_sizes,
            cache_sizes=req.cache_sizes,
            base_hops=req.base_hops,
            base_batch=req.base_batch,
            base_cache=req.base_cache,
            queries=req.queries,
            seed=req.seed,
            semantics=HopSemantics.parse(req.semantics),
        )

        def open_target(capacity: int) -> PartitionedGraph:
            pg, _, _ = open_partitioned(
                req.partitioned_dir, capacity, record_trace=True
            )
            return pg

        return _report_response(run_scaling_suite(open_target, cfg))

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest):
        graph, _, _ = load_graph_dir(req.graph_dir)
        pg = None
        if req.partitioned_dir is not None:
            pg, _, _ = open_partitioned(req.partitioned_dir, req.cache_capacity)
        report = verify_fidelity(graph, pg, req.queries, req.seed, req.depths)
        return VerifyResponse(
            ok=report.ok,
            rows=[
                VerifyRow(
                    mode=r.mode,
                    depth=r.depth,
                    query=r.query,
                    jaccard=r.jaccard,
                    cross_jaccard=r.cross_jaccard,
                )
                for r in report.rows
            ],
            skipped_modes=report.skipped_modes,
        )

    return app
