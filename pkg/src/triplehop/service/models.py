"""Request/response schemas for the retrieval service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

Semantics = Literal["exact", "frontier", "cumulative"]


class BuildRequest(BaseModel):
    triples_path: str
    out_dir: str


class BuildResponse(BaseModel):
    entities: int
    relations: int
    triples: int
    out_dir: str


class PartitionRequest(BaseModel):
    graph_dir: str
    m: int = Field(ge=1)
    strategy: Literal["lpt", "hash"] = "lpt"
    out_dir: str


class PartitionResponse(BaseModel):
    m: int
    strategy: str
    triple_counts: list[int]
    out_dir: str


class _TargetMixin(BaseModel):
    graph_dir: str | None = None
    partitioned_dir: str | None = None

    @model_validator(mode="after")
    def _exactly_one_target(self):
        if (self.graph_dir is None) == (self.partitioned_dir is None):
            raise ValueError("exactly one of graph_dir or partitioned_dir is required")
        return self


class QueryRequest(_TargetMixin):
    entities: list[str]
    hops: int = Field(ge=1)
    semantics: Semantics = "frontier"
    cache_capacity: int = Field(default=16, ge=1)
    include_paths: bool = False
    max_paths: int = Field(default=10_000, ge=0)


class HopOut(BaseModel):
    hop: int
    entities: list[str]
    triple_count: int


class CacheOut(BaseModel):
    hits: int
    misses: int
    loads: int
    evictions: int
    hit_rate: float


class QueryResponse(BaseModel):
    hops: list[HopOut]
    unknown: list[str]
    paths: list[list[tuple[str, str, str]]] | None = None
    paths_truncated: bool | None = None
    cache: CacheOut | None = None


class BenchRequest(_TargetMixin):
    depths: list[int] = [1, 2, 3, 4, 5]
    queries: int = Field(default=20, ge=1)
    seed: int = 0
    semantics: Semantics = "frontier"
    timeout_ms: list[float] | None = [2000, 4000, 6000, 8000, 10000]
    seed_entities: tuple[int, int] = (1, 20)
    repetitions: int = Field(default=1, ge=1)
    oracle: Literal["auto", "on", "off"] = "auto"
    cache_capacity: int = Field(default=16, ge=1)
    parallel_workers: int = Field(default=1, ge=1)


class RowOut(BaseModel):
    factor: str
    value: str
    qt_ms: float | None
    tr_pct: float
    jaccard: float | None
    loads: int | None
    evictions: int | None


class ReportResponse(BaseModel):
    rows: list[RowOut]
    fingerprint: dict
    notes: list[str]
    csv: str
    text: str


class ScaleRequest(BaseModel):
    partitioned_dir: str
    hops: list[int] = [1, 2, 3, 4, 5]
    batch_sizes: list[int] = [1, 10, 25, 50]
    cache_sizes: list[int] = [1, 2, 4, 8, 16]
    base_hops: int = Field(default=2, ge=1)
    base_batch: int = Field(default=50, ge=1)
    base_cache: int = Field(default=16, ge=1)
    queries: int = Field(default=50, ge=1)
    seed: int = 0
    semantics: Semantics = "frontier"


class VerifyRequest(BaseModel):
    graph_dir: str
    partitioned_dir: str | None = None
    queries: int = Field(default=10, ge=1)
    seed: int = 0
    depths: list[int] = [1, 2, 3, 4, 5]
    cache_capacity: int = Field(default=16, ge=1)


class VerifyRow(BaseModel):
    mode: str
    depth: int
    query: int
    jaccard: float
    cross_jaccard: float | None


class VerifyResponse(BaseModel):
    ok: bool
    rows: list[VerifyRow]
    skipped_modes: list[str]


class HealthResponse(BaseModel):
    status: str
    version: str
