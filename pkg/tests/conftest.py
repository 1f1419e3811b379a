"""Brute-force oracles and hypothesis strategies shared by the test files."""
import itertools
from collections import deque

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hypb.metric_core import WeightedGraph

settings.register_profile("repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def bfs_distances(g: WeightedGraph) -> np.ndarray:
    nbrs = g.neighbors()
    n = len(g.vertices)
    D = np.full((n, n), np.inf)
    for s in range(n):
        D[s, s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in nbrs[u]:
                if D[s, v] == np.inf:
                    D[s, v] = D[s, u] + 1
                    q.append(v)
    return D


def delta_by_definition(D: np.ndarray) -> float:
    """Smallest delta with (x|y)_w >= min((x|z)_w, (y|z)_w) - delta for all x, y, z, w."""
    n = len(D)

    def gp(x, y, w):
        return 0.5 * (D[w, x] + D[w, y] - D[x, y])

    best = 0.0
    for w, x, y, z in itertools.product(range(n), repeat=4):
        best = max(best, min(gp(x, z, w), gp(y, z, w)) - gp(x, y, w))
    return best


def all_geodesics(D: np.ndarray, nbrs, x: int, y: int) -> list[tuple]:
    out = []

    def walk(path):
        u = path[-1]
        if u == y:
            out.append(tuple(path))
            return
        for v in nbrs[u]:
            if D[v, y] == D[u, y] - 1:
                walk(path + [v])

    walk([x])
    return out


def slim_by_enumeration(g: WeightedGraph) -> float:
    """Largest distance from a point of one side of a geodesic triangle to the other two sides."""
    D = bfs_distances(g)
    nbrs = g.neighbors()
    n = len(D)
    geo = {(i, j): all_geodesics(D, nbrs, i, j) for i in range(n) for j in range(n)}
    best = 0.0
    for x, y, z in itertools.product(range(n), repeat=3):
        for side in geo[x, y]:
            for g1 in geo[y, z]:
                for g2 in geo[x, z]:
                    rest = list(g1) + list(g2)
                    for v in side:
                        best = max(best, float(D[v, rest].min()))
    return best


def mst_bottleneck(D: np.ndarray) -> np.ndarray:
    """Minimax path distances read off a minimum spanning tree (Prim)."""
    n = len(D)
    in_tree = [0]
    parent = {}
    best = D[0].copy()
    src = np.zeros(n, dtype=int)
    left = set(range(1, n))
    while left:
        v = min(left, key=lambda j: best[j])
        parent[v] = int(src[v])
        left.remove(v)
        in_tree.append(v)
        for j in left:
            if D[v, j] < best[j]:
                best[j], src[j] = D[v, j], v
    adj = {i: [] for i in range(n)}
    for v, p in parent.items():
        adj[v].append((p, D[v, p]))
        adj[p].append((v, D[v, p]))
    B = np.zeros((n, n))
    for s in range(n):
        seen = {s: 0.0}
        stack = [s]
        while stack:
            u = stack.pop()
            for v, w in adj[u]:
                if v not in seen:
                    seen[v] = max(seen[u], w)
                    stack.append(v)
        for v, w in seen.items():
            B[s, v] = w
    return B


@st.composite
def connected_graphs(draw, min_n=2, max_n=8, weighted=False):
    n = draw(st.integers(min_n, max_n))
    edges = []
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.append((u, v, draw(st.integers(1, 5)) if weighted else 1))
    for i, j in itertools.combinations(range(n), 2):
        if draw(st.booleans()) and draw(st.booleans()):
            edges.append((i, j, draw(st.integers(1, 5)) if weighted else 1))
    return WeightedGraph.from_edges(edges, vertices=range(n))


@st.composite
def euclidean_points(draw, min_n=3, max_n=10, dim=2):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**31 - 1))
    X = np.random.default_rng(seed).uniform(-1, 1, size=(n, dim))
    return X


def euclid(X) -> np.ndarray:
    return np.linalg.norm(X[:, None] - X[None], axis=-1)
