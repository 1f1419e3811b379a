"""Boundaries of rooted trees as ultrametric Cantor sets.

A boundary point is represented by a depth-k word (its cylinder). Words are
tuples of child indices starting at the root.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

from .errors import InputError
from .metric_core import FiniteMetricSpace
from .quasimetric import QuasimetricSpace, validate_quasimetric

EXACT_DEPTH = 30


class PaddingWarning(UserWarning):
    """Words of unequal depth were padded with child index 0."""


@dataclass(frozen=True)
class RootedTree:
    """Rooted tree given by child counts.

    The constant rule gives the root ``root_degree`` children and every other
    vertex ``branching`` children. ``overrides`` maps an address (tuple) to a
    different child count for that vertex.
    """

    root_degree: int
    branching: int
    depth: int
    overrides: Mapping[tuple, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.root_degree < 1 or self.branching < 1:
            raise InputError("child counts must be at least 1")
        if self.depth < 0:
            raise InputError("depth must be nonnegative")
        for addr, c in self.overrides.items():
            if c < 1:
                raise InputError(f"vertex {addr!r} needs at least one child")
        object.__setattr__(self, "overrides", {tuple(k): int(v) for k, v in self.overrides.items()})

    @property
    def is_constant(self) -> bool:
        return not self.overrides

    def child_count(self, address: tuple) -> int:
        address = tuple(address)
        if address in self.overrides:
            return self.overrides[address]
        return self.root_degree if not address else self.branching

    def level_count(self, k: int) -> int:
        """Number of vertices at depth k."""
        if k == 0:
            return 1
        if self.is_constant:
            return self.root_degree * self.branching ** (k - 1)
        return sum(1 for _ in self.words(k))

    def words(self, k: int, prefix: tuple = ()) -> Iterator[tuple]:
        """Depth-k addresses below ``prefix`` in lexicographic order."""
        if len(prefix) == k:
            yield prefix
            return
        for c in range(self.child_count(prefix)):
            yield from self.words(k, prefix + (c,))

    def validate_word(self, w) -> tuple:
        w = tuple(int(c) for c in w)
        if len(w) > self.depth:
            raise InputError(f"word {w!r} is deeper than the working depth {self.depth}")
        for i, c in enumerate(w):
            if not 0 <= c < self.child_count(w[:i]):
                raise InputError(f"invalid child index {c} at position {i} of {w!r}")
        return w


T4 = RootedTree(4, 3, 12)


def binary_tree(depth: int = 12) -> RootedTree:
    return RootedTree(2, 2, depth)


def lcp(w, w2) -> int:
    n = 0
    for a, b in zip(w, w2):
        if a != b:
            break
        n += 1
    return n


def _aligned(w, w2, tree: RootedTree | None):
    if tree is not None:
        w, w2 = tree.validate_word(w), tree.validate_word(w2)
    w, w2 = tuple(w), tuple(w2)
    if len(w) != len(w2):
        warnings.warn(f"padding words of depth {len(w)} and {len(w2)} with child 0", PaddingWarning, stacklevel=3)
        k = max(len(w), len(w2))
        w = w + (0,) * (k - len(w))
        w2 = w2 + (0,) * (k - len(w2))
    return w, w2


def boundary_gromov_product(w, w2, tree: RootedTree | None = None) -> int:
    """Length of the common prefix: the root's distance to the geodesic between the rays."""
    w, w2 = _aligned(w, w2, tree)
    return lcp(w, w2)


def boundary_gromov_product_at(w, w2, v) -> int:
    """Gromov product of the rays through w and w2 seen from the vertex v.

    Evaluated on truncations deep enough that the value has stabilised.
    """
    w, w2, v = tuple(w), tuple(w2), tuple(v)
    if w == w2:
        raise InputError("the product of a ray with itself is infinite")
    deep = max(len(v), lcp(w, w2)) + 1
    if min(len(w), len(w2)) < deep:
        raise InputError("words are too short to resolve the product at this basepoint")
    x, y = w[:deep], w2[:deep]

    def dist(a, b):
        return len(a) + len(b) - 2 * lcp(a, b)

    return (dist(v, x) + dist(v, y) - dist(x, y)) // 2


def visual_distance(w, w2, a: float, tree: RootedTree | None = None) -> float:
    """a ** -lcp(w, w2), and 0 for identical words."""
    if not a > 1:
        raise InputError(f"visual parameter must exceed 1, got {a}")
    w, w2 = _aligned(w, w2, tree)
    if w == w2:
        return 0.0
    return float(a) ** -lcp(w, w2)


def lcp_matrix(words: list[tuple]) -> np.ndarray:
    W = np.array(words, dtype=np.int64)
    n, k = W.shape
    L = np.zeros((n, n), dtype=np.int64)
    alive = np.ones((n, n), dtype=bool)
    for i in range(k):
        alive &= W[:, i, None] == W[None, :, i]
        L += alive
    return L


def visual_metric_space(tree: RootedTree, k: int, a: float) -> FiniteMetricSpace:
    """Depth-k words with the visual ultrametric."""
    if not a > 1:
        raise InputError(f"visual parameter must exceed 1, got {a}")
    words = list(tree.words(k))
    L = lcp_matrix(words)
    D = np.power(float(a), -L.astype(float))
    np.fill_diagonal(D, 0.0)
    return FiniteMetricSpace(words, D, validate=False)


def visual_quasimetric(tree: RootedTree, k: int, a: float) -> QuasimetricSpace:
    m = visual_metric_space(tree, k, a)
    return validate_quasimetric(m.points, m.dist)


def is_ultrametric(m: FiniteMetricSpace, atol: float = 0.0) -> bool:
    """Exhaustive strong triangle inequality d(x,z) <= max(d(x,y), d(y,z))."""
    D = m.dist
    for y in range(len(m)):
        if np.any(D > np.maximum(D[:, y, None], D[None, y, :]) + atol):
            return False
    return True


@dataclass(frozen=True)
class CoverEntry:
    """The depth-k cylinders, each of diameter a**-k."""

    tree: RootedTree
    depth: int
    count: int

    @property
    def diameter_exponent(self) -> int:
        return -self.depth

    def cylinders(self) -> Iterator[tuple]:
        return self.tree.words(self.depth)

    def diameter(self, a: float) -> float:
        return float(a) ** -self.depth


def cover_at_scale(t: RootedTree, k: int) -> CoverEntry:
    if not 0 <= k <= t.depth:
        raise InputError(f"depth {k} outside 0..{t.depth}")
    return CoverEntry(t, k, t.level_count(k))


def cover_table(t: RootedTree, a: float, depths) -> list[tuple[float, int]]:
    """(scale, count) pairs for box counting: scale a**-k, count of depth-k cylinders."""
    return [(float(a) ** -k, cover_at_scale(t, k).count) for k in depths]


class CylinderMeasure:
    """Uniform splitting measure: every vertex shares its mass equally among its children."""

    def __init__(self, tree: RootedTree):
        self.tree = tree

    def mass(self, w):
        w = self.tree.validate_word(w) if len(w) <= self.tree.depth else tuple(w)
        exact = len(w) <= EXACT_DEPTH
        m = Fraction(1) if exact else 1.0
        for i in range(len(w)):
            c = self.tree.child_count(w[:i])
            if not 0 <= w[i] < c:
                raise InputError(f"invalid child index {w[i]} at position {i}")
            m = m / c
        return m

    __call__ = mass


def natural_measure(t: RootedTree) -> CylinderMeasure:
    return CylinderMeasure(t)


def half_scale_step(a: float) -> int:
    """Smallest m >= 1 with a**-m <= 1/2, i.e. depth offset of half-radius balls."""
    if not a > 1:
        raise InputError(f"visual parameter must exceed 1, got {a}")
    m = 1
    while float(a) ** m < 2 * (1 - 1e-12):
        m += 1
    return m


@dataclass(frozen=True)
class DoublingCertificate:
    C: int
    half_step: int
    depths: tuple
    worst_cylinder: tuple


def doubling_constant(t: RootedTree, a: float, k_max: int) -> DoublingCertificate:
    """Largest number of half-radius balls needed for a ball of radius a**-k, 1 <= k.

    A closed ball of radius a**-k is a depth-k cylinder; balls of radius
    a**-k / 2 are cylinders m levels deeper (m from :func:`half_scale_step`),
    so the cover count is the number of depth-(k+m) descendants.
    """
    if not t.is_constant:
        raise InputError("doubling_constant supports only constant branching rules")
    m = half_scale_step(a)
    if k_max < 1 + m:
        raise InputError(f"k_max must be at least {1 + m} for a={a}")
    best, worst = 0, ()
    depths = tuple(range(1, k_max - m + 1))
    for k in depths:
        for w in t.words(k):
            count = sum(1 for _ in t.words(k + m, w))
            if count > best:
                best, worst = count, w
    return DoublingCertificate(best, m, depths, worst)


def shadow_diameter(t: RootedTree, k: int, a: float) -> float:
    """Diameter a**-k of the depth-k cylinder (the shadow of a depth-k vertex)."""
    if not t.is_constant:
        raise InputError("shadow_diameter supports only constant branching rules")
    if not a > 1:
        raise InputError(f"visual parameter must exceed 1, got {a}")
    return float(a) ** -k


def cylinder_rows(t: RootedTree, depths) -> list[tuple[str, int, str, int]]:
    """Rows (address, depth, measure, diameter_exponent) for CSV export."""
    mu = natural_measure(t)
    rows = []
    for k in depths:
        for w in t.words(k):
            rows.append((".".join(map(str, w)), k, str(mu(w)), -k))
    return rows


__all__ = [
    "RootedTree",
    "T4",
    "binary_tree",
    "PaddingWarning",
    "lcp",
    "boundary_gromov_product",
    "boundary_gromov_product_at",
    "visual_distance",
    "visual_metric_space",
    "visual_quasimetric",
    "is_ultrametric",
    "CoverEntry",
    "cover_at_scale",
    "cover_table",
    "CylinderMeasure",
    "natural_measure",
    "half_scale_step",
    "DoublingCertificate",
    "doubling_constant",
    "shadow_diameter",
    "cylinder_rows",
]
