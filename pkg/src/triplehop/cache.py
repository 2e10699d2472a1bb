"""Fixed-capacity LRU cache over loaded subgraphs, plus the retrieval
cost model.

The cache unit is a whole subgraph (all incidence structures together),
counted in subgraphs rather than bytes. Recency refreshes on every
access. A loader failure leaves the cache untouched, so a transient I/O
error cannot corrupt recency state.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, TypeVar

T = TypeVar("T")


@dataclass
class CacheCounters:
    hits: int
    misses: int
    loads: int
    evictions: int
    hit_rate: float

    def as_dict(self) -> dict:
        return {
            "hits": self.hits,
            "misses": self.misses,
            "loads": self.loads,
            "evictions": self.evictions,
            "hit_rate": self.hit_rate,
        }


class SubgraphCache:
    """LRU map partition-index -> subgraph with hit/load/eviction counters.

    Access is serialized by an internal lock: one mutator at a time, and
    the cached values themselves are immutable, so returned subgraphs
    may be read concurrently.
    """

    def __init__(self, capacity: int, record_trace: bool = False):
        if capacity < 1:
            raise ValueError("cache capacity must be >= 1")
        self.capacity = capacity
        self._resident: OrderedDict[int, object] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        self.loads = 0
        self.evictions = 0
        self.trace: list[int] | None = [] if record_trace else None

    def __len__(self) -> int:
        return len(self._resident)

    def __contains__(self, idx: int) -> bool:
        return idx in self._resident

    def resident_indices(self) -> list[int]:
        return list(self._resident.keys())

    def get(self, idx: int, loader: Callable[[int], T]) -> T:
        """Return the subgraph for idx, loading (and evicting) as needed."""
        with self._lock:
            if self.trace is not None:
                self.trace.append(idx)
            if idx in self._resident:
                self.hits += 1
                self._resident.move_to_end(idx)
                return self._resident[idx]  # type: ignore[return-value]
            value = loader(idx)  # may raise; state is untouched if it does
            self.misses += 1
            self.loads += 1
            if len(self._resident) >= self.capacity:
                self._resident.popitem(last=False)
                self.evictions += 1
            self._resident[idx] = value
            return value

    def snapshot_counters(self) -> CacheCounters:
        with self._lock:
            accesses = self.hits + self.misses
            rate = self.hits / accesses if accesses else 0.0
            return CacheCounters(self.hits, self.misses, self.loads, self.evictions, rate)


def simulate_lru(trace: list[int], capacity: int) -> CacheCounters:
    """Replay an access trace through a naive list-based LRU model.

    Deliberately structured unlike SubgraphCache (plain list, no
    OrderedDict) so it can serve as an independent reference for the
    counters.
    """
    if capacity < 1:
        raise ValueError("cache capacity must be >= 1")
    resident: list[int] = []  # most recent first
    hits = misses = loads = evictions = 0
    for idx in trace:
        if idx in resident:
            hits += 1
            resident.remove(idx)
            resident.insert(0, idx)
        else:
            misses += 1
            loads += 1
            if len(resident) >= capacity:
                resident.pop()
                evictions += 1
            resident.insert(0, idx)
    accesses = hits + misses
    rate = hits / accesses if accesses else 0.0
    return CacheCounters(hits, misses, loads, evictions, rate)


@dataclass(frozen=True)
class CostModel:
    """Expected per-subgraph retrieval cost under a given hit rate."""

    hit_rate: float  # in [0, 1]
    tau_mm_ms: float  # in-memory multiply time
    tau_io_ms: float  # average disk load time

    def __post_init__(self):
        if not 0.0 <= self.hit_rate <= 1.0:
            raise ValueError("hit_rate must be in [0, 1]")
        if self.tau_mm_ms < 0 or self.tau_io_ms < 0:
            raise ValueError("times must be >= 0")


def expected_cost(model: CostModel) -> float:
    """Hits pay the multiply; misses additionally pay the disk load."""
    h = model.hit_rate
    return h * model.tau_mm_ms + (1.0 - h) * (model.tau_mm_ms + model.tau_io_ms)
