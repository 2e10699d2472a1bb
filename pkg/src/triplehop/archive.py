"""On-disk formats: binary graph archives, dictionaries, partition layout.

A graph archive is a single little-endian file:

    offset  size  field
    0       4     magic "LKG1"
    4       2     format version (u16)
    6       1     endianness flag (1 = little)
    7       1     id width in bytes for the payload id arrays (4 or 8)
    8       24    entity/relation/triple counts (u64 each)
    32      8     payload length in bytes (u64)
    40      ...   payload: indptr (u64 x E+1), sub columns, obj, rel
    end     4     CRC32 over header + payload

The id width is chosen from the counts at save time so small graphs pay
4 bytes per id while the format itself never caps scale. The CRC covers
the header as well as the payload so that any single corrupted byte is
detected on load.

A partitioned graph is a directory: ``manifest.json``, the subject ->
partition assignment array, label dictionaries, and one shard archive
(plus local->global id maps) per partition, so the cache's load unit is
exactly one shard file.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .cache import SubgraphCache
from .engine import PartitionedGraph
from .errors import (
    ArchiveError,
    BadMagicError,
    ChecksumError,
    IntegrityError,
    TruncatedError,
    VersionError,
)
from .incidence import IncidenceGraph
from .partition import UNASSIGNED, PartitionPlan, Subgraph
from .triples import Dictionary

MAGIC = b"LKG1"
VERSION = 1
_HEADER = struct.Struct("<4sHBBQQQQ")
_CRC = struct.Struct("<I")

GRAPH_FILE = "graph.lkg"
ENTITIES_FILE = "entities.txt"
RELATIONS_FILE = "relations.txt"
MANIFEST_FILE = "manifest.json"
ASSIGNMENT_FILE = "assignment.u32"
_ASSIGNMENT_SENTINEL = 0xFFFFFFFF


def _id_width(*counts: int) -> int:
    return 4 if max(counts) <= 0xFFFFFFFF else 8


def graph_to_bytes(g: IncidenceGraph) -> bytes:
    width = _id_width(g.n_entities, g.n_relations, g.n_triples)
    dtype = "<u4" if width == 4 else "<u8"
    payload = b"".join(
        [
            g.indptr.astype("<u8").tobytes(),
            g.tids.astype(dtype).tobytes(),
            g.obj.astype(dtype).tobytes(),
            g.rel.astype(dtype).tobytes(),
        ]
    )
    header = _HEADER.pack(
        MAGIC, VERSION, 1, width, g.n_entities, g.n_relations, g.n_triples, len(payload)
    )
    body = header + payload
    return body + _CRC.pack(zlib.crc32(body))


def graph_from_bytes(data: bytes) -> IncidenceGraph:
    if len(data) < _HEADER.size + _CRC.size:
        raise TruncatedError(f"archive too short ({len(data)} bytes)")
    magic, version, endian, width, n_e, n_r, n_t, payload_len = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise VersionError(f"unsupported archive version {version}")
    total = _HEADER.size + payload_len + _CRC.size
    if len(data) != total:
        raise TruncatedError(f"expected {total} bytes, file has {len(data)}")
    (stored,) = _CRC.unpack_from(data, total - _CRC.size)
    if zlib.crc32(data[: total - _CRC.size]) != stored:
        raise ChecksumError("archive checksum mismatch")
    if endian != 1:
        raise ArchiveError(f"unsupported endianness flag {endian}")
    if width not in (4, 8):
        raise ArchiveError(f"unsupported id width {width}")
    if payload_len != (n_e + 1) * 8 + 3 * n_t * width:
        raise ArchiveError("payload length inconsistent with counts")

    dtype = "<u4" if width == 4 else "<u8"
    off = _HEADER.size
    indptr = np.frombuffer(data, "<u8", n_e + 1, off).astype(np.int64)
    off += (n_e + 1) * 8
    tids = np.frombuffer(data, dtype, n_t, off).astype(np.int64)
    off += n_t * width
    obj = np.frombuffer(data, dtype, n_t, off).astype(np.int64)
    off += n_t * width
    rel = np.frombuffer(data, dtype, n_t, off).astype(np.int64)

    _validate_structure(indptr, tids, obj, rel, n_e, n_r, n_t)
    for arr in (indptr, tids, obj, rel):
        arr.setflags(write=False)
    return IncidenceGraph(indptr, tids, obj, rel, n_e, n_r, n_t)


def _validate_structure(indptr, tids, obj, rel, n_e, n_r, n_t):
    if indptr[0] != 0 or indptr[-1] != n_t or np.any(np.diff(indptr) < 0):
        raise ArchiveError("corrupt sub row offsets")
    if n_t:
        if np.any(np.bincount(tids, minlength=n_t) != 1):
            raise ArchiveError("sub columns are not a permutation of the triple ids")
        if obj.max() >= n_e or rel.max() >= n_r:
            raise ArchiveError("object or relation id out of range")
        starts = np.zeros(n_t, dtype=bool)
        inner = indptr[1:-1]
        starts[inner[inner < n_t]] = True
        if n_t > 1 and np.any((np.diff(tids) <= 0) & ~starts[1:]):
            raise ArchiveError("sub row columns not strictly sorted")


def save_graph(g: IncidenceGraph, path) -> None:
    Path(path).write_bytes(graph_to_bytes(g))


def load_graph(path) -> IncidenceGraph:
    p = Path(path)
    if not p.exists():
        raise IntegrityError(f"no such archive: {p}")
    return graph_from_bytes(p.read_bytes())


# --- dictionaries ------------------------------------------------------------


def save_labels(labels: list[str], path) -> None:
    """Newline-delimited label file; line index = id."""
    Path(path).write_text("".join(f"{s}\n" for s in labels), encoding="utf-8")


def load_labels(path) -> Dictionary:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return Dictionary(lines)


# --- graph directories -------------------------------------------------------


def save_graph_dir(g: IncidenceGraph, entities: Dictionary, relations: Dictionary, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_graph(g, out / GRAPH_FILE)
    save_labels(entities.labels(), out / ENTITIES_FILE)
    save_labels(relations.labels(), out / RELATIONS_FILE)
    return out


def load_graph_dir(graph_dir) -> tuple[IncidenceGraph, Dictionary, Dictionary]:
    d = Path(graph_dir)
    g = load_graph(d / GRAPH_FILE)
    entities = load_labels(d / ENTITIES_FILE)
    relations = load_labels(d / RELATIONS_FILE)
    if len(entities) != g.n_entities or len(relations) != g.n_relations:
        raise IntegrityError("dictionary sizes disagree with the graph archive")
    return g, entities, relations


# --- partition directories ---------------------------------------------------


def _shard_name(index: int) -> str:
    return f"shard-{index:04d}"


def save_partition_dir(
    plan: PartitionPlan,
    subgraphs: list[Subgraph],
    entities: Dictionary,
    relations: Dictionary,
    n_relations: int,
    out_dir,
) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    assignment = plan.assignment.astype(np.int64)
    encoded = np.where(assignment == UNASSIGNED, _ASSIGNMENT_SENTINEL, assignment)
    (out / ASSIGNMENT_FILE).write_bytes(encoded.astype("<u4").tobytes())
    save_labels(entities.labels(), out / ENTITIES_FILE)
    save_labels(relations.labels(), out / RELATIONS_FILE)

    shards = []
    for sg in subgraphs:
        name = _shard_name(sg.index)
        save_graph(sg.graph, out / f"{name}.lkg")
        (out / f"{name}.ents.u64").write_bytes(sg.ent_to_global.astype("<u8").tobytes())
        (out / f"{name}.tids.u64").write_bytes(sg.tid_to_global.astype("<u8").tobytes())
        shards.append(
            {
                "index": sg.index,
                "shard_file": f"{name}.lkg",
                "entity_map_file": f"{name}.ents.u64",
                "triple_map_file": f"{name}.tids.u64",
                "triple_count": sg.graph.n_triples,
            }
        )

    manifest = {
        "format": "LKG-partition",
        "version": VERSION,
        "m": plan.m,
        "strategy": plan.strategy,
        "entity_count": plan.n_entities,
        "relation_count": n_relations,
        "triple_count": int(plan.loads.sum()),
        "assignment_file": ASSIGNMENT_FILE,
        "partitions": shards,
    }
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def _load_manifest(part_dir: Path) -> dict:
    path = part_dir / MANIFEST_FILE
    if not path.exists():
        raise IntegrityError(f"no partition manifest at {path}")
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"unreadable manifest: {exc}") from exc
    if manifest.get("format") != "LKG-partition":
        raise IntegrityError("not a partition manifest")
    shards = manifest["partitions"]
    if len(shards) != manifest["m"]:
        raise IntegrityError("manifest shard list disagrees with m")
    if sum(s["triple_count"] for s in shards) != manifest["triple_count"]:
        raise IntegrityError("per-partition triple counts do not sum to the total")
    return manifest


def load_partition_plan(part_dir) -> PartitionPlan:
    d = Path(part_dir)
    manifest = _load_manifest(d)
    raw = np.frombuffer((d / manifest["assignment_file"]).read_bytes(), "<u4")
    if raw.size != manifest["entity_count"]:
        raise IntegrityError("assignment array length disagrees with entity count")
    assignment = raw.astype(np.int64)
    assignment[assignment == _ASSIGNMENT_SENTINEL] = UNASSIGNED
    assignment = assignment.astype(np.int32)
    loads = np.zeros(manifest["m"], dtype=np.int64)
    for s in manifest["partitions"]:
        loads[s["index"]] = s["triple_count"]
    assignment.setflags(write=False)
    loads.setflags(write=False)
    return PartitionPlan(manifest["m"], assignment, loads, manifest.get("strategy", "lpt"))


class DirectoryStore:
    """Loads shard archives on demand from a partition directory."""

    def __init__(self, part_dir):
        self.dir = Path(part_dir)
        self.manifest = _load_manifest(self.dir)
        self.m = int(self.manifest["m"])
        self.n_entities = int(self.manifest["entity_count"])
        self.n_relations = int(self.manifest["relation_count"])
        self.n_triples = int(self.manifest["triple_count"])
        self._shards = {s["index"]: s for s in self.manifest["partitions"]}

    def load(self, index: int) -> Subgraph:
        entry = self._shards.get(index)
        if entry is None:
            raise IntegrityError(f"manifest has no partition {index}")
        shard_path = self.dir / entry["shard_file"]
        if not shard_path.exists():
            raise IntegrityError(f"partition {index}: missing shard file {shard_path.name}")
        graph = load_graph(shard_path)
        ents = np.frombuffer((self.dir / entry["entity_map_file"]).read_bytes(), "<u8").astype(np.int64)
        tids = np.frombuffer((self.dir / entry["triple_map_file"]).read_bytes(), "<u8").astype(np.int64)
        if ents.size != graph.n_entities or tids.size != graph.n_triples:
            raise IntegrityError(f"partition {index}: id map sizes disagree with shard")
        ents.setflags(write=False)
        tids.setflags(write=False)
        return Subgraph(index, graph, ents, tids)


def open_partitioned(
    part_dir, cache_capacity: int, record_trace: bool = False
) -> tuple[PartitionedGraph, Dictionary, Dictionary]:
    """Open a partition directory as a queryable PartitionedGraph."""
    d = Path(part_dir)
    plan = load_partition_plan(d)
    store = DirectoryStore(d)
    cache = SubgraphCache(cache_capacity, record_trace=record_trace)
    entities = load_labels(d / ENTITIES_FILE)
    relations = load_labels(d / RELATIONS_FILE)
    return PartitionedGraph(plan, store, cache), entities, relations
