"""Finite metric spaces, Gromov products and hyperbolicity constants.

Also holds the Poincare-disk utilities used for the angle metric alpha_p on
spheres around a basepoint.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Hashable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import CapExceeded, CertificateFailure, InputError

ATOL = 1e-9
FOUR_POINT_CAP = 120
GEODESIC_CAP = 1_000_000


def thread_count() -> int:
    """Worker threads allowed by ``HYPB_THREADS`` (default: 1)."""
    raw = os.environ.get("HYPB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"HYPB_THREADS must be an integer, got {raw!r}") from None


class FiniteMetricSpace:
    """Ordered point ids with a validated symmetric distance matrix.

    Parameters
    ----------
    points : sequence of hashable ids
    dist : (n, n) array_like
    validate : bool
        Check the metric axioms. Turning this off is only meant for
        matrices produced by code that already guarantees them.
    """

    __slots__ = ("points", "dist", "_index")

    def __init__(self, points: Sequence[Hashable], dist, validate: bool = True):
        points = tuple(points)
        D = np.array(dist, dtype=float)
        if D.shape != (len(points), len(points)):
            raise InputError(f"distance matrix shape {D.shape} does not match {len(points)} points")
        index = {}
        for i, p in enumerate(points):
            if p in index:
                raise InputError(f"duplicate point id {p!r}")
            index[p] = i
        if validate:
            check_metric(points, D)
        D.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dist", D)
        object.__setattr__(self, "_index", index)

    def __setattr__(self, name, value):
        raise AttributeError("FiniteMetricSpace is immutable")

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"FiniteMetricSpace(n={len(self)})"

    def index(self, x) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise InputError(f"unknown point id {x!r}") from None

    def d(self, x, y) -> float:
        return float(self.dist[self.index(x), self.index(y)])

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if len(self) else 0.0

    def subspace(self, ids: Iterable) -> "FiniteMetricSpace":
        idx = [self.index(x) for x in ids]
        return FiniteMetricSpace([self.points[i] for i in idx], self.dist[np.ix_(idx, idx)], validate=False)


def check_metric(points, D: np.ndarray, atol: float = ATOL) -> None:
    n = len(points)
    if n == 0:
        return
    if not np.all(np.isfinite(D)):
        raise InputError("distance matrix has non-finite entries")
    if np.any(np.diag(D) != 0):
        i = int(np.flatnonzero(np.diag(D))[0])
        raise InputError(f"d({points[i]!r},{points[i]!r}) must be 0")
    asym = np.argwhere(D != D.T)
    if len(asym):
        i, j = asym[0]
        raise InputError(f"asymmetric distances at ({points[i]!r},{points[j]!r})")
    off = D + np.eye(n)
    bad = np.argwhere(off <= 0)
    if len(bad):
        i, j = bad[0]
        raise InputError(f"nonpositive distance between distinct points {points[i]!r},{points[j]!r}")
    tol = atol + 1e-12 * float(D.max())
    for k in range(n):
        via = D[:, k, None] + D[None, k, :]
        viol = np.argwhere(D > via + tol)
        if len(viol):
            i, j = viol[0]
            raise InputError(
                f"triangle inequality fails: d({points[i]!r},{points[j]!r})={D[i, j]} > "
                f"d({points[i]!r},{points[k]!r})+d({points[k]!r},{points[j]!r})={via[i, j]}"
            )


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive edge lengths.

    Duplicate edges are merged keeping the shorter length.
    """

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        verts = tuple(self.vertices)
        known = set(verts)
        if len(known) != len(verts):
            raise InputError("duplicate vertex ids")
        merged = {}
        for e in self.edges:
            if len(e) == 2:
                u, v, w = e[0], e[1], 1
            elif len(e) == 3:
                u, v, w = e
            else:
                raise InputError(f"edge must be (u, v) or (u, v, length), got {e!r}")
            if u not in known or v not in known:
                raise InputError(f"edge {e!r} uses an unknown vertex")
            if u == v:
                raise InputError(f"self-loop at {u!r}")
            if not (isinstance(w, (int, float)) and math.isfinite(w) and w > 0):
                raise InputError(f"edge {u!r}-{v!r} needs a positive length, got {w!r}")
            key = (u, v) if verts.index(u) < verts.index(v) else (v, u)
            merged[key] = min(w, merged.get(key, math.inf))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple((u, v, w) for (u, v), w in merged.items()))

    @classmethod
    def from_edges(cls, edges, vertices=None) -> "WeightedGraph":
        edges = list(edges)
        if vertices is None:
            seen = {}
            for e in edges:
                seen.setdefault(e[0], None)
                seen.setdefault(e[1], None)
            vertices = list(seen)
        return cls(tuple(vertices), tuple(edges))

    @property
    def is_unweighted(self) -> bool:
        return all(w == 1 for _, _, w in self.edges)

    def neighbors(self) -> list[list[int]]:
        index = {v: i for i, v in enumerate(self.vertices)}
        adj = [[] for _ in self.vertices]
        for u, v, _ in self.edges:
            adj[index[u]].append(index[v])
            adj[index[v]].append(index[u])
        return adj


def graph_metric(g: WeightedGraph) -> FiniteMetricSpace:
    """All-pairs shortest-path metric of a connected weighted graph."""
    n = len(g.vertices)
    index = {v: i for i, v in enumerate(g.vertices)}
    rows = [index[u] for u, _, _ in g.edges]
    cols = [index[v] for _, v, _ in g.edges]
    lengths = [float(w) for _, _, w in g.edges]
    A = coo_matrix((lengths, (rows, cols)), shape=(n, n)).tocsr()
    D = shortest_path(A, method="D", directed=False)
    unreachable = np.argwhere(np.isinf(D))
    if len(unreachable):
        i, j = unreachable[0]
        raise InputError(f"graph is disconnected: no path from {g.vertices[i]!r} to {g.vertices[j]!r}")
    if all(float(w).is_integer() for w in lengths):
        D = np.rint(D)
    return FiniteMetricSpace(g.vertices, D, validate=False)


def distances_from(g: WeightedGraph, p) -> np.ndarray:
    """Single-source shortest-path distances, in vertex order."""
    index = {v: i for i, v in enumerate(g.vertices)}
    if p not in index:
        raise InputError(f"unknown vertex {p!r}")
    n = len(g.vertices)
    rows = [index[u] for u, _, _ in g.edges]
    cols = [index[v] for _, v, _ in g.edges]
    A = coo_matrix(([float(w) for _, _, w in g.edges], (rows, cols)), shape=(n, n)).tocsr()
    return shortest_path(A, method="D", directed=False, indices=index[p])


def gromov_product(m: FiniteMetricSpace, x, y, p) -> float:
    """(x|y)_p = (d(p,x) + d(p,y) - d(x,y)) / 2."""
    return 0.5 * (m.d(p, x) + m.d(p, y) - m.d(x, y))


def equiradial_decomposition(m: FiniteMetricSpace, p, x, y) -> tuple[float, float, float]:
    """Return ((x|y)_p, (p|x)_y, (p|y)_x).

    These are the distances from p, y, x to the internal points of the
    triangle, so e.g. d(x,p) = (x|y)_p + (p|y)_x.
    """
    if len({p, x, y}) < 3:
        raise InputError("equiradial decomposition needs three distinct points")
    return gromov_product(m, x, y, p), gromov_product(m, p, x, y), gromov_product(m, p, y, x)


def _quadruple_max(D: np.ndarray, i: int) -> float:
    # Quadruples whose smallest index is i. Letting (j, k, l) range over all
    # orderings, the gap between the two largest pair sums is the maximum of
    # a - max(b, c) over those orderings.
    S = D[i + 1 :, i + 1 :]
    r = D[i, i + 1 :]
    a = r[:, None, None] + S[None, :, :]
    b = r[None, :, None] + S[:, None, :]
    c = r[None, None, :] + S[:, :, None]
    np.maximum(b, c, out=b)
    a -= b
    return float(a.max()) / 2.0


def _scan_dtype(D: np.ndarray):
    # integer distances are exact in float32 below 2**23, which halves memory traffic
    if np.all(D == np.rint(D)) and D.max() < 2**22:
        return np.float32
    return np.float64


def four_point_delta(m: FiniteMetricSpace, max_points: int = FOUR_POINT_CAP) -> float:
    """Exact four-point hyperbolicity constant by exhaustive scan.

    The smallest delta with (x|y)_p >= min((x|z)_p, (y|z)_p) - delta for all
    p, x, y, z. Equivalently, for every quadruple the two largest of the
    three pair sums d(x,y)+d(z,p), d(x,z)+d(y,p), d(x,p)+d(y,z) differ by at
    most 2*delta.
    """
    n = len(m)
    if n > max_points:
        raise CapExceeded(
            f"{n} points exceed the exhaustive four-point cap {max_points}; "
            "use four_point_delta_estimate for a sampled lower estimate"
        )
    if n < 4:
        return 0.0
    D = m.dist.astype(_scan_dtype(m.dist))
    starts = range(n - 3)
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda i: _quadruple_max(D, i), starts))
    else:
        parts = [_quadruple_max(D, i) for i in starts]
    return max(0.0, max(parts))


def four_point_delta_estimate(m: FiniteMetricSpace, samples: int = 200_000, seed: int = 0) -> float:
    """Sampled lower estimate of four_point_delta for spaces above the cap."""
    n = len(m)
    if n < 4:
        return 0.0
    rng = np.random.default_rng(seed)
    Q = rng.integers(0, n, size=(samples, 4))
    D = m.dist
    x, y, z, p = Q.T
    a = D[x, y] + D[z, p]
    b = D[x, z] + D[y, p]
    c = D[x, p] + D[y, z]
    hi = np.maximum(np.maximum(a, b), c)
    mid = np.maximum(np.minimum(a, b), np.minimum(np.maximum(a, b), c))
    return float((hi - mid).max()) / 2.0


def _require_unweighted(g: WeightedGraph) -> None:
    if not g.is_unweighted:
        raise InputError("geodesic enumeration needs an unweighted graph (all lengths 1)")


def _interval_order(D: np.ndarray, x: int, y: int) -> np.ndarray:
    on = np.flatnonzero(D[x] + D[:, y] == D[x, y])
    return on[np.argsort(D[x, on], kind="stable")]


def geodesic_count(g: WeightedGraph, x, y, D: np.ndarray | None = None) -> int:
    """Number of distinct geodesic vertex paths from x to y."""
    _require_unweighted(g)
    index = {v: i for i, v in enumerate(g.vertices)}
    if D is None:
        D = graph_metric(g).dist
    adj = g.neighbors()
    xi, yi = index[x], index[y]
    count = {xi: 1}
    for w in _interval_order(D, xi, yi)[1:]:
        count[w] = sum(count.get(u, 0) for u in adj[w] if D[xi, u] == D[xi, w] - 1)
    return count[yi]


def geodesics(g: WeightedGraph, x, y, cap: int = GEODESIC_CAP) -> list[tuple]:
    """All geodesic vertex paths from x to y (as tuples of vertex ids)."""
    _require_unweighted(g)
    D = graph_metric(g).dist
    total = geodesic_count(g, x, y, D)
    if total > cap:
        raise CapExceeded(f"{total} geodesics from {x!r} to {y!r} exceed the cap {cap}; use four_point_delta instead")
    index = {v: i for i, v in enumerate(g.vertices)}
    adj = g.neighbors()
    xi, yi = index[x], index[y]
    paths = [[xi]]
    for _ in range(int(D[xi, yi])):
        paths = [
            p + [u] for p in paths for u in sorted(adj[p[-1]]) if D[xi, u] == D[xi, p[-1]] + 1 and D[u, yi] == D[p[-1], yi] - 1
        ]
    return [tuple(g.vertices[i] for i in p) for p in paths]


def _farthest_geodesic_profiles(g: WeightedGraph, D: np.ndarray, cap: int):
    """F[x, y, v] = max over geodesics [x,y] of the distance from v to that geodesic.

    Computed by a bottleneck recursion over the geodesic DAG, so individual
    geodesics are never listed. Also returns the total geodesic count, which
    is what the cap applies to.
    """
    n = len(g.vertices)
    adj = g.neighbors()
    F = np.zeros((n, n, n))
    total = 0
    for x in range(n):
        for y in range(x + 1, n):
            order = _interval_order(D, x, y)
            best = {x: D[:, x].copy()}
            count = {x: 1}
            for w in order[1:]:
                preds = [u for u in adj[w] if u in best and D[x, u] == D[x, w] - 1]
                reach = best[preds[0]].copy()
                for u in preds[1:]:
                    np.maximum(reach, best[u], out=reach)
                best[w] = np.minimum(D[:, w], reach)
                count[w] = sum(count[u] for u in preds)
            total += count[y]
            if total > cap:
                raise CapExceeded(f"more than {cap} geodesics in the graph; use four_point_delta instead")
            F[x, y] = F[y, x] = best[y]
    return F, total


def slim_triangle_delta(g: WeightedGraph, cap: int = GEODESIC_CAP) -> float:
    """Smallest delta making every geodesic triangle delta-slim (vertex version).

    Every choice of geodesic sides counts. For a side [x,y] of triangle xyz,
    the worst vertex v on any [x,y] is measured against the farthest
    choices of [y,z] and [x,z]; those choices are independent, so the maximum
    over all triangles factors through per-pair profiles.
    """
    _require_unweighted(g)
    m = graph_metric(g)
    D = m.dist
    n = len(m)
    if n < 3:
        return 0.0
    F, _ = _farthest_geodesic_profiles(g, D, cap)
    worst = 0.0
    for x in range(n):
        for y in range(x + 1, n):
            on = _interval_order(D, x, y)
            # rows: opposite vertex z, columns: v on some geodesic [x,y]
            near = np.minimum(F[y][:, on], F[x][:, on]).max(axis=1)
            near[[x, y]] = 0.0
            worst = max(worst, float(near.max()))
    return worst


class GapCheck(NamedTuple):
    product: float
    geodesic_distance: float
    gap: float


def gromov_vs_geodesic_distance_check(g: WeightedGraph, p, x, y, slim: float | None = None, cap: int = GEODESIC_CAP) -> GapCheck:
    """Compare (x|y)_p with the distance from p to the nearest geodesic [x,y].

    Raises CertificateFailure if the gap exceeds 4*slim + 1.
    """
    _require_unweighted(g)
    m = graph_metric(g)
    if geodesic_count(g, x, y, m.dist) > cap:
        raise CapExceeded(f"geodesic count from {x!r} to {y!r} exceeds the cap {cap}; use four_point_delta instead")
    xi, yi, pi = m.index(x), m.index(y), m.index(p)
    on = _interval_order(m.dist, xi, yi)
    prod = gromov_product(m, x, y, p)
    near = float(m.dist[pi, on].min())
    gap = abs(prod - near)
    if slim is None:
        slim = slim_triangle_delta(g, cap)
    if gap > 4 * slim + 1 + ATOL:
        raise CertificateFailure(f"gap {gap} exceeds 4*{slim}+1")
    return GapCheck(prod, near, gap)


# --- graph fixtures -------------------------------------------------------


def path_graph(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges([(i, i + 1) for i in range(n - 1)], vertices=range(n))


def cycle_graph(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges([(i, (i + 1) % n) for i in range(n)], vertices=range(n))


def grid_graph(rows: int, cols: int | None = None) -> WeightedGraph:
    cols = rows if cols is None else cols
    verts = [(i, j) for i in range(rows) for j in range(cols)]
    edges = [((i, j), (i + 1, j)) for i in range(rows - 1) for j in range(cols)]
    edges += [((i, j), (i, j + 1)) for i in range(rows) for j in range(cols - 1)]
    return WeightedGraph.from_edges(edges, vertices=verts)


def star_graph(leaves: int, length: float = 1) -> WeightedGraph:
    return WeightedGraph.from_edges([("c", i, length) for i in range(leaves)], vertices=["c", *range(leaves)])


def comb_graph(k: int) -> WeightedGraph:
    """Spine p - x1 - ... - xk with a unit tooth x_i - x_i' at every spine vertex.

    Here (x_i|x_j)_p = (x_i'|x_j')_p = min(i, j) and (x_i|x_i')_p = i.
    """
    spine = ["p"] + [f"x{i}" for i in range(1, k + 1)]
    edges = list(zip(spine, spine[1:]))
    edges += [(f"x{i}", f"x{i}'") for i in range(1, k + 1)]
    return WeightedGraph.from_edges(edges)


def random_tree(n: int, rng: np.random.Generator, max_length: int = 1) -> WeightedGraph:
    """Random recursive tree on n vertices with integer lengths in [1, max_length]."""
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v, int(rng.integers(1, max_length + 1))))
    return WeightedGraph.from_edges(edges, vertices=range(n))


# --- Poincare disk ---------------------------------------------------------


def disk_point(z) -> complex:
    """Coerce (u, v) or a complex number to a point strictly inside the unit disk."""
    if isinstance(z, complex):
        w = z
    elif isinstance(z, (int, float)):
        w = complex(z, 0.0)
    else:
        u, v = z
        w = complex(float(u), float(v))
    if not abs(w) < 1:
        raise InputError(f"point {z!r} is not strictly inside the unit disk")
    return w


def hyperbolic_distance(z, w) -> float:
    """Poincare-disk distance arccosh(1 + 2|z-w|^2 / ((1-|z|^2)(1-|w|^2)))."""
    z, w = disk_point(z), disk_point(w)
    s = abs(z - w) ** 2 / ((1 - abs(z) ** 2) * (1 - abs(w) ** 2))
    # arccosh(1 + 2s) = 2 asinh(sqrt(s)), accurate for small s
    return 2.0 * math.asinh(math.sqrt(s))


def mobius_to_origin(p, z) -> complex:
    """Disk isometry sending p to 0; its derivative at p is real and positive."""
    p, z = disk_point(p), disk_point(z)
    return (z - p) / (1 - p.conjugate() * z)


def mobius_from_origin(p, w) -> complex:
    p, w = disk_point(p), disk_point(w)
    return (w + p) / (1 + p.conjugate() * w)


def point_along_ray(p, direction, t: float) -> complex:
    """Point at hyperbolic distance t from p along the geodesic with the given direction."""
    u = _unit(direction)
    return mobius_from_origin(p, math.tanh(t / 2) * u)


def _unit(direction) -> complex:
    if isinstance(direction, (int, float)) and not isinstance(direction, bool):
        return complex(math.cos(direction), math.sin(direction))
    u = complex(direction) if isinstance(direction, complex) else complex(*map(float, direction))
    if abs(u) == 0:
        raise InputError("ray direction must be nonzero")
    return u / abs(u)


def bourdon_alpha(p, y, y2) -> float:
    """alpha_p(y, y') for points of the disk model, a value in [0, 1].

    alpha^2 = (cosh d(y,y') - cosh(d(p,y) - d(p,y'))) / (2 sinh d(p,y) sinh d(p,y')).
    The numerator is evaluated as a product of sinh factors, which avoids the
    cancellation near y = y'.
    """
    p, y, y2 = disk_point(p), disk_point(y), disk_point(y2)
    if y == p or y2 == p:
        raise InputError("alpha_p is undefined at the basepoint")
    a = hyperbolic_distance(p, y)
    b = hyperbolic_distance(p, y2)
    c = hyperbolic_distance(y, y2)
    num = 2 * math.sinh((c + a - b) / 2) * math.sinh((c - a + b) / 2)
    rad = num / (2 * math.sinh(a) * math.sinh(b))
    if rad < -1e-12:
        raise ArithmeticError(f"negative radicand {rad} in alpha_p")
    return min(1.0, math.sqrt(max(rad, 0.0)))


class AlphaLimit(NamedTuple):
    alpha: float
    visual: float
    gap: float


def alpha_limit_check(p, ray1, ray2, t: float) -> AlphaLimit:
    """alpha_p(y_t, y'_t) next to exp(-(y_t|y'_t)_p) for points at distance t on two rays."""
    if not t > 0:
        raise InputError("t must be positive")
    u1, u2 = _unit(ray1), _unit(ray2)
    if u1 == u2:
        return AlphaLimit(0.0, 0.0, 0.0)
    y1, y2 = point_along_ray(p, u1, t), point_along_ray(p, u2, t)
    prod = 0.5 * (hyperbolic_distance(p, y1) + hyperbolic_distance(p, y2) - hyperbolic_distance(y1, y2))
    alpha = bourdon_alpha(p, y1, y2)
    visual = math.exp(-prod)
    return AlphaLimit(alpha, visual, abs(alpha - visual))


__all__ = [
    "FiniteMetricSpace",
    "WeightedGraph",
    "GapCheck",
    "AlphaLimit",
    "graph_metric",
    "distances_from",
    "gromov_product",
    "equiradial_decomposition",
    "four_point_delta",
    "four_point_delta_estimate",
    "slim_triangle_delta",
    "geodesics",
    "geodesic_count",
    "gromov_vs_geodesic_distance_check",
    "hyperbolic_distance",
    "bourdon_alpha",
    "alpha_limit_check",
    "point_along_ray",
    "mobius_to_origin",
    "mobius_from_origin",
    "disk_point",
    "path_graph",
    "cycle_graph",
    "grid_graph",
    "star_graph",
    "comb_graph",
    "random_tree",
]
