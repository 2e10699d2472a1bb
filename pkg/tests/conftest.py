import numpy as np
import pytest

from triplehop import build_incidence, ingest_triples

# t0=(A,r1,B)  t1=(B,r2,C)  t2=(A,r1,C)  t3=(C,r3,A)
TINY_LINES = ["A\tr1\tB", "B\tr2\tC", "A\tr1\tC", "C\tr3\tA"]
A, B, C = 0, 1, 2


@pytest.fixture
def tiny():
    return ingest_triples(TINY_LINES)


@pytest.fixture
def tiny_graph(tiny):
    return build_incidence(tiny.triples, tiny.n_entities, tiny.n_relations)


def dense_walk_frontier(triples, n_entities, seeds, k):
    """Boolean adjacency-matrix power, the dense exact-walk brute force."""
    adj = np.zeros((n_entities, n_entities), dtype=bool)
    for s, _, o in triples:
        adj[s, o] = True
    q = np.zeros(n_entities, dtype=bool)
    q[list(seeds)] = True
    for _ in range(k):
        q = q @ adj
    return sorted(np.flatnonzero(q).tolist())
