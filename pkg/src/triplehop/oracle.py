"""Reference traversals for fidelity checking.

Both oracles use data layouts deliberately unlike the incidence engine
(adjacency dict + queue, plain boolean lists) so agreement between the
two routes actually means something.
"""

from __future__ import annotations

from collections import defaultdict, deque
from typing import Iterable, Sequence

from .errors import OracleSizeError
from .triples import Triple

WALK_ORACLE_MAX_ENTITIES = 1_000


def oracle_bfs(
    seeds: Iterable[int], k: int, triples: Sequence[Triple]
) -> tuple[list[list[int]], list[list[int]]]:
    """Textbook BFS layers from the seed set.

    Returns (layers, cumulative): ``layers[h-1]`` holds the entities at
    distance exactly h, ``cumulative[h-1]`` everything within distance
    h; seeds (distance 0) appear in neither.
    """
    if k < 1:
        raise ValueError("hop count must be >= 1")
    adjacency: dict[int, list[int]] = defaultdict(list)
    for s, _, o in triples:
        adjacency[s].append(o)

    dist: dict[int, int] = {s: 0 for s in seeds}
    queue = deque(dist)
    while queue:
        u = queue.popleft()
        d = dist[u]
        if d >= k:
            continue
        for v in adjacency.get(u, ()):
            if v not in dist:
                dist[v] = d + 1
                queue.append(v)

    layers = [sorted(v for v, d in dist.items() if d == h) for h in range(1, k + 1)]
    cumulative: list[list[int]] = []
    acc: list[int] = []
    for layer in layers:
        acc = sorted(acc + layer)
        cumulative.append(list(acc))
    return layers, cumulative


def oracle_walk(
    seeds: Iterable[int], k: int, triples: Sequence[Triple], n_entities: int
) -> list[int]:
    """Entities reachable by some walk of length exactly k.

    Naive nested iteration over the triple list with dense boolean
    activity flags; guarded to small entity counts.
    """
    if k < 1:
        raise ValueError("hop count must be >= 1")
    if n_entities > WALK_ORACLE_MAX_ENTITIES:
        raise OracleSizeError(
            f"walk oracle limited to {WALK_ORACLE_MAX_ENTITIES} entities, got {n_entities}"
        )
    active = [False] * n_entities
    for s in seeds:
        active[s] = True
    for _ in range(k):
        nxt = [False] * n_entities
        for s, _, o in triples:
            if active[s]:
                nxt[o] = True
        active = nxt
    return [i for i, flag in enumerate(active) if flag]
