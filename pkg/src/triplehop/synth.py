"""Seeded synthetic graph generators used by the benchmark and test suites."""

from __future__ import annotations

import numpy as np

from .triples import Dictionary, Triple, TripleSet


def _dedup_triples(subj, rel, obj) -> np.ndarray:
    stacked = np.stack([subj, rel, obj], axis=1)
    return np.unique(stacked, axis=0)


def _to_triple_set(rows: np.ndarray, n_entities: int, n_relations: int) -> TripleSet:
    entities = Dictionary(f"e{i}" for i in range(n_entities))
    relations = Dictionary(f"r{i}" for i in range(n_relations))
    triples = [Triple(int(s), int(r), int(o)) for s, r, o in rows]
    return TripleSet(entities, relations, triples)


def erdos_renyi(
    n_entities: int, n_triples: int, n_relations: int, seed: int
) -> TripleSet:
    """Uniform random directed triples (duplicates collapsed)."""
    rng = np.random.default_rng(seed)
    subj = rng.integers(0, n_entities, n_triples)
    rel = rng.integers(0, n_relations, n_triples)
    obj = rng.integers(0, n_entities, n_triples)
    rows = _dedup_triples(subj, rel, obj)
    return _to_triple_set(rows, n_entities, n_relations)


def power_law(
    n_entities: int,
    n_triples: int,
    n_relations: int,
    seed: int,
    alpha: float = 1.5,
) -> TripleSet:
    """Random triples whose subjects follow a rank^-alpha hub distribution."""
    rng = np.random.default_rng(seed)
    weights = 1.0 / np.arange(1, n_entities + 1, dtype=np.float64) ** alpha
    weights /= weights.sum()
    subj = rng.choice(n_entities, size=n_triples, p=weights)
    rel = rng.integers(0, n_relations, n_triples)
    obj = rng.integers(0, n_entities, n_triples)
    rows = _dedup_triples(subj, rel, obj)
    return _to_triple_set(rows, n_entities, n_relations)


def to_tsv(ts: TripleSet) -> str:
    """Render a TripleSet back to the tab-separated ingest format."""
    lines = []
    for s, r, o in ts.triples:
        lines.append(
            f"{ts.entities.label_of(s)}\t{ts.relations.label_of(r)}\t{ts.entities.label_of(o)}"
        )
    return "\n".join(lines) + "\n"
