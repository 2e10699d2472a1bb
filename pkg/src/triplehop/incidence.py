"""Sparse incidence representation and single-graph k-hop retrieval.

A graph is stored as three structures:

* ``sub``: CSR over entities, row i listing the triple ids whose subject
  is entity i (columns strictly sorted within each row);
* ``obj``: flat array, object entity of each triple;
* ``rel``: flat array, relation of each triple.

``obj`` and ``rel`` are flat because each triple has exactly one object
and one relation, so a general sparse matrix would waste half the
memory and the "multiply" is just a gather. Traversal is boolean: one
hop activates the union of sub rows over the active entities, then
gathers objects.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from itertools import islice
from typing import Callable, Iterator, Sequence

import numpy as np

from .triples import Triple

# Sparse frontiers switch to a dense bitmask once they are denser than
# 1/32 of the entity space; hub-heavy graphs hit that fast at depth.
_DENSE_FRACTION = 32

DEFAULT_MAX_PATHS = 10_000


def _as_id_array(ids) -> np.ndarray:
    arr = np.asarray(list(ids) if not isinstance(ids, np.ndarray) else ids, dtype=np.int64)
    return arr.reshape(-1)


def _unique_sorted(ids: np.ndarray, width: int) -> np.ndarray:
    """Deduplicate + sort, via a dense bitmask when the input is dense."""
    if ids.size == 0:
        return np.empty(0, dtype=np.int64)
    if width > 0 and ids.size >= width // _DENSE_FRACTION:
        mask = np.zeros(width, dtype=bool)
        mask[ids] = True
        return np.flatnonzero(mask)
    return np.unique(ids)


class HopSemantics(enum.Enum):
    """What the hop-h frontier means.

    EXACT_WALK: entities reachable by some walk of length exactly h.
    FRONTIER:   entities first reached at hop h (BFS distance h); seeds
                and anything seen at an earlier hop are excluded.
    CUMULATIVE: union of FRONTIER layers 1..h, i.e. reachability within
                h hops (seeds excluded).
    """

    EXACT_WALK = "exact"
    FRONTIER = "frontier"
    CUMULATIVE = "cumulative"

    @classmethod
    def parse(cls, name: str) -> "HopSemantics":
        key = name.strip().lower()
        if key in ("exact", "exact-walk", "exact_walk", "walk"):
            return cls.EXACT_WALK
        if key == "frontier":
            return cls.FRONTIER
        if key == "cumulative":
            return cls.CUMULATIVE
        raise ValueError(f"unknown hop semantics {name!r}")


class _IdVector:
    """Sorted duplicate-free id set over a fixed-width id space."""

    __slots__ = ("ids", "width")

    def __init__(self, ids, width: int, _canonical: bool = False):
        arr = _as_id_array(ids)
        if not _canonical:
            arr = _unique_sorted(arr, width)
        if arr.size and (arr[0] < 0 or arr[-1] >= width):
            raise ValueError(f"id out of range for width {width}")
        arr.setflags(write=False)
        self.ids = arr
        self.width = width

    def __len__(self) -> int:
        return int(self.ids.size)

    def __iter__(self) -> Iterator[int]:
        return iter(self.ids.tolist())

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, _IdVector)
            and self.width == other.width
            and np.array_equal(self.ids, other.ids)
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.ids.tolist()}, width={self.width})"

    def to_set(self) -> set[int]:
        return set(self.ids.tolist())


class EntityVector(_IdVector):
    """Sparse encoding of a boolean row vector over the entity space."""


class TripleVector(_IdVector):
    """Sparse encoding of a boolean row vector over the triple space."""


@dataclass(frozen=True)
class IncidenceGraph:
    """Immutable incidence structures for one graph (or one shard)."""

    indptr: np.ndarray  # int64, len n_entities + 1
    tids: np.ndarray  # int64, len n_triples; sub row columns, sorted per row
    obj: np.ndarray  # int64, len n_triples
    rel: np.ndarray  # int64, len n_triples
    n_entities: int
    n_relations: int
    n_triples: int

    @cached_property
    def subj(self) -> np.ndarray:
        """Subject entity of each triple, inverted from the CSR rows."""
        out = np.empty(self.n_triples, dtype=np.int64)
        rows = np.repeat(
            np.arange(self.n_entities, dtype=np.int64), np.diff(self.indptr)
        )
        out[self.tids] = rows
        out.setflags(write=False)
        return out

    def sub_row(self, entity: int) -> np.ndarray:
        return self.tids[self.indptr[entity] : self.indptr[entity + 1]]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def triple(self, tid: int) -> Triple:
        return Triple(int(self.subj[tid]), int(self.rel[tid]), int(self.obj[tid]))


def build_incidence(
    triples: Sequence[Triple] | tuple[np.ndarray, np.ndarray, np.ndarray],
    n_entities: int,
    n_relations: int,
) -> IncidenceGraph:
    """Build the incidence structures from a deduplicated triple list.

    Accepts either a sequence of Triple or a prebuilt (subject, relation,
    object) array tuple. One counting pass sizes the CSR rows; triples
    are then placed in id order, which keeps each row's columns sorted.
    """
    if isinstance(triples, tuple):
        subj, rel, obj = (np.asarray(a, dtype=np.int64) for a in triples)
    else:
        if triples:
            a = np.asarray(triples, dtype=np.int64)
            subj, rel, obj = a[:, 0], a[:, 1], a[:, 2]
        else:
            subj = rel = obj = np.empty(0, dtype=np.int64)
    n_triples = int(subj.size)

    for name, col, bound in (("subject", subj, n_entities),
                             ("relation", rel, n_relations),
                             ("object", obj, n_entities)):
        if col.size and (col.min() < 0 or col.max() >= bound):
            raise ValueError(f"{name} id out of range (bound {bound})")

    indptr = np.zeros(n_entities + 1, dtype=np.int64)
    if n_triples:
        indptr[1:] = np.bincount(subj, minlength=n_entities)
    np.cumsum(indptr, out=indptr)

    # A stable sort by subject concatenates the rows in entity order while
    # keeping each row's triple ids ascending.
    tids = np.argsort(subj, kind="stable").astype(np.int64)

    for arr in (indptr, tids):
        arr.setflags(write=False)
    obj = obj.copy()
    rel = rel.copy()
    obj.setflags(write=False)
    rel.setflags(write=False)
    return IncidenceGraph(indptr, tids, obj, rel, n_entities, n_relations, n_triples)


def _gather_rows(indptr: np.ndarray, data: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Concatenate CSR rows for the given row ids (vectorized)."""
    if rows.size == 0:
        return np.empty(0, dtype=data.dtype)
    starts = indptr[rows]
    counts = indptr[rows + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=data.dtype)
    before = np.zeros(rows.size, dtype=np.int64)
    np.cumsum(counts[:-1], out=before[1:])
    pos = np.arange(total, dtype=np.int64) + np.repeat(starts - before, counts)
    return data[pos]


def _expand(graph: IncidenceGraph, frontier: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw one-hop: (activated triple ids, next entity ids), both canonical."""
    gathered = _gather_rows(graph.indptr, graph.tids, frontier)
    # Triple ids never repeat across sub rows (one subject per triple),
    # so sorting alone canonicalizes the activated set.
    activated = np.sort(gathered)
    nxt = _unique_sorted(graph.obj[activated], graph.n_entities)
    return activated, nxt


def one_hop(q: EntityVector, graph: IncidenceGraph) -> tuple[TripleVector, EntityVector]:
    """Activate the triples whose subject is in q, then gather their objects."""
    if q.width != graph.n_entities:
        raise ValueError(f"query width {q.width} != graph entity count {graph.n_entities}")
    activated, nxt = _expand(graph, q.ids)
    return (
        TripleVector(activated, graph.n_triples, _canonical=True),
        EntityVector(nxt, graph.n_entities, _canonical=True),
    )


@dataclass(frozen=True)
class HopStep:
    frontier: EntityVector
    activated: TripleVector


@dataclass(frozen=True)
class HopTrace:
    """Per-hop frontiers and activated triple sets for one retrieval."""

    semantics: HopSemantics
    seeds: EntityVector
    steps: list[HopStep]

    @property
    def k(self) -> int:
        return len(self.steps)

    def frontier(self, hop: int) -> EntityVector:
        """Frontier after ``hop`` hops (1-based)."""
        return self.steps[hop - 1].frontier

    def activated(self, hop: int) -> TripleVector:
        return self.steps[hop - 1].activated

    @property
    def final_frontier(self) -> EntityVector:
        return self.steps[-1].frontier


ExpandFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def run_hops(
    expand: ExpandFn,
    q0: EntityVector,
    k: int,
    n_entities: int,
    n_triples: int,
    semantics: HopSemantics,
) -> HopTrace:
    """Drive a k-hop traversal over any one-hop expansion function.

    The expansion computes raw walk steps; this driver layers the chosen
    semantics on top, so single-graph and partitioned retrieval share
    the exact same frontier logic.
    """
    if k < 1:
        raise ValueError("hop count must be >= 1")
    steps: list[HopStep] = []

    def step(frontier: np.ndarray, activated: np.ndarray):
        steps.append(
            HopStep(
                EntityVector(frontier, n_entities, _canonical=True),
                TripleVector(activated, n_triples, _canonical=True),
            )
        )

    if semantics is HopSemantics.EXACT_WALK:
        cur = q0.ids
        for _ in range(k):
            activated, cur = expand(cur)
            step(cur, activated)
        return HopTrace(semantics, q0, steps)

    visited = np.zeros(n_entities, dtype=bool)
    visited[q0.ids] = True
    cumulative = np.empty(0, dtype=np.int64)
    cur = q0.ids
    for _ in range(k):
        activated, reached = expand(cur)
        new = reached[~visited[reached]]
        visited[new] = True
        if semantics is HopSemantics.CUMULATIVE:
            # Layers are disjoint, so a merge keeps the union sorted.
            cumulative = np.sort(np.concatenate([cumulative, new]))
            step(cumulative, activated)
        else:
            step(new, activated)
        cur = new
    return HopTrace(semantics, q0, steps)


def k_hop(
    q0: EntityVector,
    k: int,
    graph: IncidenceGraph,
    semantics: HopSemantics = HopSemantics.FRONTIER,
) -> HopTrace:
    """k-hop retrieval on a single graph."""
    if q0.width != graph.n_entities:
        raise ValueError(f"query width {q0.width} != graph entity count {graph.n_entities}")
    return run_hops(
        lambda f: _expand(graph, f), q0, k, graph.n_entities, graph.n_triples, semantics
    )


# --- path reconstruction ---------------------------------------------------

Path = tuple[Triple, ...]


@dataclass(frozen=True)
class PathResult:
    paths: list[Path]
    truncated: bool


class HopAdjacency:
    """Activated triples of one hop, grouped by subject, tid-ordered."""

    __slots__ = ("by_subject", "first")

    def __init__(self, tids, subj, rel, obj):
        order = np.argsort(tids, kind="stable")
        self.first: list[tuple[int, Triple]] = []
        self.by_subject: dict[int, list[tuple[int, Triple]]] = {}
        for t, s, r, o in zip(
            tids[order].tolist(), subj[order].tolist(), rel[order].tolist(), obj[order].tolist()
        ):
            entry = (t, Triple(s, r, o))
            self.first.append(entry)
            self.by_subject.setdefault(s, []).append(entry)


def assemble_paths(hops: list[HopAdjacency], max_paths: int | None) -> PathResult:
    """Chain per-hop activated triples into complete length-k paths.

    Enumeration is depth-first and ordered lexicographically by the
    triple-id sequence: the first step walks all hop-1 triples in tid
    order, and each later step walks the current endpoint's hop-h
    triples in tid order.
    """
    k = len(hops)

    def walk(depth: int, tail: int, prefix: list[Triple]) -> Iterator[Path]:
        if depth == k:
            yield tuple(prefix)
            return
        candidates = hops[depth].first if depth == 0 else hops[depth].by_subject.get(tail, [])
        for _, triple in candidates:
            prefix.append(triple)
            yield from walk(depth + 1, triple.object, prefix)
            prefix.pop()

    gen = walk(0, -1, [])
    if max_paths is None:
        return PathResult(list(gen), truncated=False)
    if max_paths < 0:
        raise ValueError("max_paths must be >= 0")
    paths = list(islice(gen, max_paths + 1))
    truncated = len(paths) > max_paths
    return PathResult(paths[:max_paths], truncated)


def reconstruct_paths(
    q0: EntityVector,
    k: int,
    graph: IncidenceGraph,
    max_paths: int | None = DEFAULT_MAX_PATHS,
) -> PathResult:
    """Enumerate all length-k walks from the seed set as (s, r, o) chains.

    Every step's triple is activated at its hop under exact-walk
    semantics; the set of final entities over all paths (uncapped)
    equals the exact-walk hop-k frontier.
    """
    trace = k_hop(q0, k, graph, HopSemantics.EXACT_WALK)
    hops = []
    for step in trace.steps:
        t = step.activated.ids
        hops.append(HopAdjacency(t, graph.subj[t], graph.rel[t], graph.obj[t]))
    return assemble_paths(hops, max_paths)


def jaccard(a, b) -> float:
    """Set overlap |a & b| / |a | b|; two empty sets count as identical."""
    sa = a.to_set() if isinstance(a, _IdVector) else set(a)
    sb = b.to_set() if isinstance(b, _IdVector) else set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)
