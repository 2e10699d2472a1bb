"""k-hop knowledge-graph retrieval over sparse incidence structures.

A graph of (subject, relation, object) triples is decomposed into a
subject CSR plus flat object/relation arrays; multi-hop traversal then
runs as boolean gathers rather than pointer chasing. Graphs that exceed
memory are split into degree-balanced subgraphs served through an LRU
cache, with per-hop routing keeping results identical to the
single-graph path.
"""

__version__ = "0.1.0"

from .cache import CacheCounters, CostModel, SubgraphCache, expected_cost, simulate_lru
from .engine import (
    BatchQuery,
    PartitionedGraph,
    QueryBatch,
    cross_graph_k_hop,
    cross_graph_paths,
    plan_batch,
    run_batch,
)
from .incidence import (
    EntityVector,
    HopSemantics,
    HopTrace,
    IncidenceGraph,
    PathResult,
    TripleVector,
    build_incidence,
    jaccard,
    k_hop,
    one_hop,
    reconstruct_paths,
)
from .partition import (
    PartitionPlan,
    RouteResult,
    Subgraph,
    materialize_subgraphs,
    plan_partitions,
    route,
)
from .triples import (
    Dictionary,
    LookupResult,
    Triple,
    TripleSet,
    ingest_path,
    ingest_triples,
    lookup_entities,
)

__all__ = [
    "BatchQuery",
    "CacheCounters",
    "CostModel",
    "Dictionary",
    "EntityVector",
    "HopSemantics",
    "HopTrace",
    "IncidenceGraph",
    "LookupResult",
    "PartitionPlan",
    "PartitionedGraph",
    "PathResult",
    "QueryBatch",
    "RouteResult",
    "Subgraph",
    "SubgraphCache",
    "Triple",
    "TripleSet",
    "TripleVector",
    "build_incidence",
    "cross_graph_k_hop",
    "cross_graph_paths",
    "expected_cost",
    "ingest_path",
    "ingest_triples",
    "jaccard",
    "k_hop",
    "lookup_entities",
    "materialize_subgraphs",
    "one_hop",
    "plan_batch",
    "plan_partitions",
    "reconstruct_paths",
    "route",
    "run_batch",
    "simulate_lru",
]
