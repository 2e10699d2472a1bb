import warnings

import pytest

from triplehop.service import create_app
from triplehop.synth import erdos_renyi, to_tsv

from conftest import TINY_LINES

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient


@pytest.fixture
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


@pytest.fixture
def tiny_dirs(client, tmp_path):
    tsv = tmp_path / "kg.tsv"
    tsv.write_text("\n".join(TINY_LINES) + "\n")
    graph_dir = str(tmp_path / "graph")
    part_dir = str(tmp_path / "parts")
    assert client.post("/build", json={"triples_path": str(tsv), "out_dir": graph_dir}).status_code == 200
    resp = client.post(
        "/partition", json={"graph_dir": graph_dir, "m": 2, "out_dir": part_dir}
    )
    assert resp.status_code == 200
    return graph_dir, part_dir


def test_healthz(client):
    body = client.get("/healthz").json()
    assert body["status"] == "ok"


def test_build_reports_counts(client, tmp_path):
    tsv = tmp_path / "kg.tsv"
    tsv.write_text("\n".join(TINY_LINES) + "\n")
    resp = client.post(
        "/build", json={"triples_path": str(tsv), "out_dir": str(tmp_path / "g")}
    )
    assert resp.status_code == 200
    body = resp.json()
    assert (body["entities"], body["relations"], body["triples"]) == (3, 3, 4)


def test_partition_reports_loads(client, tiny_dirs):
    graph_dir, _ = tiny_dirs
    resp = client.post(
        "/partition",
        json={"graph_dir": graph_dir, "m": 2, "out_dir": graph_dir + "-p2"},
    )
    assert resp.json()["triple_counts"] == [2, 2]


def test_query_single_graph(client, tiny_dirs):
    graph_dir, _ = tiny_dirs
    resp = client.post(
        "/query",
        json={"graph_dir": graph_dir, "entities": ["A"], "hops": 2, "semantics": "exact"},
    )
    body = resp.json()
    assert body["hops"][0]["entities"] == ["B", "C"]
    assert body["hops"][1]["entities"] == ["A", "C"]
    assert body["unknown"] == []
    assert body["cache"] is None


def test_query_partitioned_with_paths(client, tiny_dirs):
    _, part_dir = tiny_dirs
    resp = client.post(
        "/query",
        json={
            "partitioned_dir": part_dir,
            "entities": ["A", "nope"],
            "hops": 2,
            "semantics": "exact",
            "include_paths": True,
        },
    )
    body = resp.json()
    assert body["unknown"] == ["nope"]
    assert body["paths"] == [
        [["A", "r1", "B"], ["B", "r2", "C"]],
        [["A", "r1", "C"], ["C", "r3", "A"]],
    ]
    assert body["paths_truncated"] is False
    assert body["cache"]["loads"] >= 1


def test_cache_state_persists_across_requests(client, tiny_dirs):
    _, part_dir = tiny_dirs
    payload = {"partitioned_dir": part_dir, "entities": ["A"], "hops": 1}
    first = client.post("/query", json=payload).json()["cache"]
    second = client.post("/query", json=payload).json()["cache"]
    assert second["hits"] > first["hits"]  # resident shard reused


def test_query_validation_maps_to_400(client, tiny_dirs):
    graph_dir, part_dir = tiny_dirs
    resp = client.post(
        "/query", json={"graph_dir": graph_dir, "entities": ["A"], "hops": 0}
    )
    assert resp.status_code == 400
    assert resp.json()["detail"]["kind"] == "usage"
    resp = client.post(
        "/query",
        json={
            "graph_dir": graph_dir,
            "partitioned_dir": part_dir,
            "entities": ["A"],
            "hops": 1,
        },
    )
    assert resp.status_code == 400


def test_data_errors_map_to_422(client, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("A\tr1\n")
    resp = client.post(
        "/build", json={"triples_path": str(bad), "out_dir": str(tmp_path / "x")}
    )
    assert resp.status_code == 422
    assert resp.json()["detail"]["kind"] == "data"

    resp = client.post(
        "/query",
        json={"graph_dir": str(tmp_path / "missing"), "entities": ["A"], "hops": 1},
    )
    assert resp.status_code == 422


def test_bench_endpoint(client, tmp_path):
    ts = erdos_renyi(60, 200, 3, seed=31)
    tsv = tmp_path / "kg.tsv"
    tsv.write_text(to_tsv(ts))
    graph_dir = str(tmp_path / "g")
    client.post("/build", json={"triples_path": str(tsv), "out_dir": graph_dir})
    resp = client.post(
        "/bench",
        json={"graph_dir": graph_dir, "depths": [1, 2], "queries": 3, "oracle": "on"},
    )
    body = resp.json()
    assert body["csv"].splitlines()[0] == "factor,value,qt_ms,tr_pct,jaccard,loads,evictions"
    assert len(body["rows"]) == 2
    assert all(r["jaccard"] == 1.0 for r in body["rows"])


def test_scale_endpoint(client, tiny_dirs):
    _, part_dir = tiny_dirs
    resp = client.post(
        "/scale",
        json={
            "partitioned_dir": part_dir,
            "hops": [1],
            "batch_sizes": [2],
            "cache_sizes": [1, 2],
            "base_cache": 2,
            "queries": 4,
        },
    )
    factors = [r["factor"] for r in resp.json()["rows"]]
    assert factors.count("cache_size") == 2


def test_verify_endpoint(client, tiny_dirs):
    graph_dir, part_dir = tiny_dirs
    resp = client.post(
        "/verify",
        json={"graph_dir": graph_dir, "partitioned_dir": part_dir, "queries": 3, "depths": [1, 2]},
    )
    body = resp.json()
    assert body["ok"] is True
    assert all(r["jaccard"] == 1.0 for r in body["rows"])
    assert all(r["cross_jaccard"] == 1.0 for r in body["rows"])
