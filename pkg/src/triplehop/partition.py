"""Degree-aware partitioning into balanced subgraphs.

All triples sharing a subject go to one partition, so each subgraph can
answer the out-edges of its subjects locally. The default strategy is
greedy LPT: subjects sorted by out-degree descending (ties by ascending
entity id) are assigned one by one to the currently lightest partition
(ties to the lowest index). That spreads hub subjects evenly and runs
in O(|E| log |E| + |T|). A multiplicative-hash strategy is kept as a
second built-in for testing alternative placements.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .incidence import EntityVector, IncidenceGraph, _unique_sorted, build_incidence
from .triples import TripleSet

UNASSIGNED = -1

STRATEGIES = ("lpt", "hash")


@dataclass(frozen=True)
class PartitionPlan:
    """Subject -> partition assignment plus per-partition triple loads."""

    m: int
    assignment: np.ndarray  # int32 per entity id; UNASSIGNED for non-subjects
    loads: np.ndarray  # int64 per partition, triples assigned
    strategy: str

    @property
    def n_entities(self) -> int:
        return int(self.assignment.size)

    def partition_of(self, entity: int) -> int:
        return int(self.assignment[entity])


def _subject_degrees(subj: np.ndarray, n_entities: int) -> np.ndarray:
    return np.bincount(subj, minlength=n_entities).astype(np.int64)


def plan_partitions(
    triples: TripleSet | tuple[np.ndarray, int],
    m: int,
    strategy: str = "lpt",
) -> PartitionPlan:
    """Assign every subject entity to one of m partitions.

    Accepts a TripleSet or a prebuilt (subject column, entity count)
    pair. m must be between 1 and the number of distinct subjects.
    """
    if isinstance(triples, TripleSet):
        subj, _, _ = triples.arrays()
        n_entities = triples.n_entities
    else:
        subj, n_entities = triples
        subj = np.asarray(subj, dtype=np.int64)

    degrees = _subject_degrees(subj, n_entities)
    subjects = np.flatnonzero(degrees)
    if m < 1:
        raise UsageError("partition count must be >= 1")
    if m > subjects.size:
        raise UsageError(
            f"partition count {m} exceeds distinct subject count {subjects.size}"
        )
    if strategy not in STRATEGIES:
        raise UsageError(f"unknown partition strategy {strategy!r}")

    assignment = np.full(n_entities, UNASSIGNED, dtype=np.int32)
    loads = np.zeros(m, dtype=np.int64)

    if strategy == "hash":
        # Fibonacci-style multiplicative hash; deterministic across runs.
        buckets = ((subjects * 0x9E3779B1) & 0xFFFFFFFF) % m
        assignment[subjects] = buckets.astype(np.int32)
        np.add.at(loads, buckets, degrees[subjects])
    else:
        # Heaviest subjects first, each to the least-loaded partition.
        order = np.lexsort((subjects, -degrees[subjects]))
        heap = [(0, p) for p in range(m)]
        for e in subjects[order].tolist():
            load, p = heapq.heappop(heap)
            assignment[e] = p
            load += int(degrees[e])
            loads[p] = load
            heapq.heappush(heap, (load, p))

    assignment.setflags(write=False)
    loads.setflags(write=False)
    return PartitionPlan(m, assignment, loads, strategy)


@dataclass(frozen=True)
class Subgraph:
    """One partition's local incidence graph plus its global id maps.

    Local sub rows exist only for subjects assigned to this partition.
    Objects keep their global identity through ``ent_to_global``, since
    they may live in other partitions.
    """

    index: int
    graph: IncidenceGraph
    ent_to_global: np.ndarray  # int64, sorted ascending; local -> global
    tid_to_global: np.ndarray  # int64, sorted ascending; local -> global

    def entities_to_local(self, global_ids: np.ndarray) -> np.ndarray:
        """Map global entity ids to local ones; ids not present are dropped."""
        if global_ids.size == 0 or self.ent_to_global.size == 0:
            return np.empty(0, dtype=np.int64)
        pos = np.searchsorted(self.ent_to_global, global_ids)
        pos = np.minimum(pos, self.ent_to_global.size - 1)
        found = self.ent_to_global[pos] == global_ids
        return pos[found]


def materialize_subgraphs(
    plan: PartitionPlan,
    triples: TripleSet | tuple[np.ndarray, np.ndarray, np.ndarray, int, int],
) -> list[Subgraph]:
    """Split the triple set into per-partition incidence graphs.

    The subgraphs' global triple sets partition the input exactly: every
    triple lands in the partition of its subject and nowhere else. Local
    entity ids are assigned in ascending global order, and local triple
    ids follow ascending global triple id. Accepts a TripleSet or a raw
    (subject, relation, object, entity count, relation count) tuple.
    """
    if isinstance(triples, TripleSet):
        subj, rel, obj = triples.arrays()
        n_entities, n_relations = triples.n_entities, triples.n_relations
    else:
        subj, rel, obj, n_entities, n_relations = triples
    part_of_triple = plan.assignment[subj]
    out = []
    for p in range(plan.m):
        g_tids = np.flatnonzero(part_of_triple == p).astype(np.int64)
        s, r, o = subj[g_tids], rel[g_tids], obj[g_tids]
        ents = _unique_sorted(np.concatenate([s, o]), n_entities)
        local_s = np.searchsorted(ents, s)
        local_o = np.searchsorted(ents, o)
        graph = build_incidence((local_s, r, local_o), int(ents.size), n_relations)
        ents.setflags(write=False)
        g_tids.setflags(write=False)
        out.append(Subgraph(p, graph, ents, g_tids))
    return out


@dataclass
class RouteResult:
    """Active entities grouped by partition; sink holds the unroutable ones.

    Entities that never appear as a subject have no partition entry and
    no outgoing edges, so routing drops them into ``sink`` rather than
    erroring: a frontier legitimately reaches such sink entities.
    """

    buckets: dict[int, EntityVector]
    sink: EntityVector


def route(q: EntityVector, plan: PartitionPlan) -> RouteResult:
    """Group the active entities of q by their assigned partition."""
    if q.width != plan.n_entities:
        raise ValueError(f"query width {q.width} != plan entity count {plan.n_entities}")
    parts = plan.assignment[q.ids]
    assigned = parts != UNASSIGNED
    buckets: dict[int, EntityVector] = {}
    for p in np.unique(parts[assigned]).tolist():
        ids = q.ids[parts == p]
        buckets[p] = EntityVector(ids, q.width, _canonical=True)
    sink = EntityVector(q.ids[~assigned], q.width, _canonical=True)
    return RouteResult(buckets, sink)
