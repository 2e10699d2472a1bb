"""Triple ingestion and the label<->id dictionaries.

The input format is UTF-8 text, one triple per line, tab-separated
``subject<TAB>relation<TAB>object``. Ids are dense integers assigned in
first-seen order, so two ingests of the same byte stream produce
identical dictionaries and triple ordering. Duplicate (s, r, o) records
are dropped, keeping the first occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple

import numpy as np

from .errors import ParseError


class Triple(NamedTuple):
    subject: int
    relation: int
    object: int


class Dictionary:
    """Bijective label <-> dense id map. Ids are contiguous from 0."""

    def __init__(self, labels: Iterable[str] = ()):
        self._forward: dict[str, int] = {}
        self._reverse: list[str] = []
        for label in labels:
            self.add(label)

    def add(self, label: str) -> int:
        """Return the id for ``label``, assigning the next id if unseen."""
        idx = self._forward.get(label)
        if idx is None:
            idx = len(self._reverse)
            self._forward[label] = idx
            self._reverse.append(label)
        return idx

    def id_of(self, label: str) -> int | None:
        return self._forward.get(label)

    def label_of(self, idx: int) -> str:
        return self._reverse[idx]

    def labels(self) -> list[str]:
        return list(self._reverse)

    def __len__(self) -> int:
        return len(self._reverse)

    def __contains__(self, label: str) -> bool:
        return label in self._forward

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Dictionary) and self._reverse == other._reverse


@dataclass
class TripleSet:
    """Result of an ingest: dictionaries plus the deduplicated triple list."""

    entities: Dictionary
    relations: Dictionary
    triples: list[Triple]

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_relations(self) -> int:
        return len(self.relations)

    @property
    def n_triples(self) -> int:
        return len(self.triples)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Subject/relation/object columns as int64 arrays."""
        if not self.triples:
            z = np.empty(0, dtype=np.int64)
            return z, z.copy(), z.copy()
        a = np.asarray(self.triples, dtype=np.int64)
        return a[:, 0], a[:, 1], a[:, 2]


def ingest_triples(source: Iterable[str] | IO[str]) -> TripleSet:
    """Parse a line-oriented triple stream into a deduplicated TripleSet.

    Lines that are entirely empty (e.g. a trailing newline) are skipped;
    any other field-count or empty-field problem raises ParseError with
    the offending 1-based line number. An input with no triples at all is
    an error: a graph must have at least one edge.
    """
    entities = Dictionary()
    relations = Dictionary()
    triples: list[Triple] = []
    seen: set[Triple] = set()

    for line_no, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(line_no, f"expected 3 tab-separated fields, got {len(fields)}")
        if any(not f for f in fields):
            raise ParseError(line_no, "empty field")
        s, r, o = fields
        triple = Triple(entities.add(s), relations.add(r), entities.add(o))
        if triple not in seen:
            seen.add(triple)
            triples.append(triple)

    if not triples:
        raise ParseError(0, "input contains no triples")
    return TripleSet(entities, relations, triples)


def ingest_path(path) -> TripleSet:
    with open(path, "r", encoding="utf-8") as fh:
        return ingest_triples(fh)


@dataclass
class LookupResult:
    ids: list[int]
    unknown: list[str] = field(default_factory=list)


def lookup_entities(labels: Iterable[str], entities: Dictionary) -> LookupResult:
    """Resolve labels to entity ids. Unknown labels are reported, never fatal."""
    ids: set[int] = set()
    unknown: list[str] = []
    for label in labels:
        idx = entities.id_of(label)
        if idx is None:
            unknown.append(label)
        else:
            ids.add(idx)
    return LookupResult(sorted(ids), unknown)
