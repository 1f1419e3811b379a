"""Quasisymmetry envelopes and quasisymmetry-invariant properties of finite samples.

Every property here is a statement "at resolution": the radii tested are
those realised by the sample, and the reports carry the tested range.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .errors import CertificateFailure, InputError
from .metric_core import FiniteMetricSpace

REL = 1e-12
ALPHA_GRID = tuple(np.round(np.linspace(0.01, 1.0, 100), 10))


@dataclass(frozen=True)
class SampledMap:
    """A bijection between two finite metric spaces, given by an id pairing."""

    domain: FiniteMetricSpace
    codomain: FiniteMetricSpace
    pairing: Mapping[Hashable, Hashable]

    def __post_init__(self):
        pairing = dict(self.pairing)
        if len(self.domain) != len(self.codomain):
            raise InputError("domain and codomain must have the same size")
        if set(pairing) != set(self.domain.points):
            raise InputError("pairing must be defined on every domain point")
        images = list(pairing.values())
        if len(set(images)) != len(images) or set(images) != set(self.codomain.points):
            raise InputError("pairing is not a bijection onto the codomain")
        object.__setattr__(self, "pairing", pairing)

    def image_matrix(self) -> np.ndarray:
        """Codomain distances reordered to follow the domain point order."""
        idx = [self.codomain.index(self.pairing[x]) for x in self.domain.points]
        return self.codomain.dist[np.ix_(idx, idx)]

    def compose(self, other: "SampledMap") -> "SampledMap":
        """other after self."""
        return SampledMap(self.domain, other.codomain, {x: other.pairing[y] for x, y in self.pairing.items()})

    @classmethod
    def identity(cls, domain: FiniteMetricSpace, codomain: FiniteMetricSpace) -> "SampledMap":
        return cls(domain, codomain, {x: x for x in domain.points})


def envelope_shape(t, alpha: float):
    t = np.asarray(t, dtype=float)
    return np.maximum(t**alpha, t ** (1 / alpha))


@dataclass(frozen=True)
class ControlEnvelope:
    """phi(t) = lam * max(t**alpha, t**(1/alpha)) dominating every sampled ratio pair."""

    lam: float
    alpha: float
    samples: np.ndarray
    worst_triple: tuple

    def __call__(self, t):
        out = self.lam * envelope_shape(t, self.alpha)
        return float(out) if np.ndim(out) == 0 else out

    def dominates(self, t, t2) -> bool:
        return bool(np.all(np.asarray(t2) <= self(t) * (1 + 1e-9)))


def ratio_samples(m: SampledMap) -> tuple[np.ndarray, list[tuple]]:
    """(t, t') for all ordered triples x, y, z with y != x != z, y != z."""
    n = len(m.domain)
    if n < 3:
        raise InputError("control envelopes need at least three points")
    D = m.domain.dist
    E = m.image_matrix()
    if np.any(E + np.eye(n) <= 0):
        raise InputError("map sends distinct points to coincident images")
    ts, tps, triples = [], [], []
    for x in range(n):
        others = [j for j in range(n) if j != x]
        for y, z in itertools.permutations(others, 2):
            ts.append(D[x, y] / D[x, z])
            tps.append(E[x, y] / E[x, z])
            triples.append((x, y, z))
    return np.column_stack([ts, tps]), triples


def control_envelope(m: SampledMap, alphas: Sequence[float] = ALPHA_GRID) -> ControlEnvelope:
    """Fit the two-parameter envelope by exhaustive triple scan.

    For each alpha the smallest admissible lam is the largest t' / shape(t).
    Among those, the alpha with the least mean log-slack over the samples wins,
    which makes the isometry fit exactly (lam = alpha = 1).
    """
    S, triples = ratio_samples(m)
    t, tp = S[:, 0], S[:, 1]
    lt, ltp = np.log(t), np.log(tp)
    best = None
    for alpha in alphas:
        shape = np.maximum(alpha * lt, lt / alpha)
        gaps = ltp - shape
        loglam = float(gaps.max())
        slack = float((loglam - gaps).mean())
        key = (round(slack, 12), -alpha)
        if best is None or key < best[0]:
            best = (key, alpha, loglam, int(gaps.argmax()))
    _, alpha, loglam, worst = best
    pts = m.domain.points
    x, y, z = triples[worst]
    return ControlEnvelope(math.exp(loglam), float(alpha), S, (pts[x], pts[y], pts[z]))


@dataclass(frozen=True)
class AnnulusWitness:
    center: Hashable
    r1: float
    r2: float
    r1_image: float
    r2_image: float
    allowed: float


@dataclass(frozen=True)
class AnnulusReport:
    passed: bool
    checked: int
    failures: tuple


def annulus_distortion_check(m: SampledMap, phi: Callable[[float], float], limit: int = 50) -> AnnulusReport:
    """Concentric balls B1 = B(z, r1) in B2 = B(z, r2) against image balls.

    The image radii are the best possible on the sample: r2' is the largest
    image distance from f(z) inside f(B2), r1' the smallest image distance to
    a point outside B1 (so the open image ball lies inside f(B1)). The check is
    r2' / r1' <= phi(r2 / r1).
    """
    D = m.domain.dist
    E = m.image_matrix()
    pts = m.domain.points
    failures = []
    checked = 0
    for z in range(len(pts)):
        radii = np.unique(D[z][D[z] > 0])
        for i, r1 in enumerate(radii):
            outside = D[z] > r1
            r1p = float(E[z][outside].min()) if outside.any() else None
            for r2 in radii[i + 1 :]:
                r2p = float(E[z][D[z] <= r2].max())
                rp1 = r2p if r1p is None else r1p
                allowed = float(phi(r2 / r1))
                checked += 1
                if r2p / rp1 > allowed * (1 + 1e-9):
                    failures.append(AnnulusWitness(pts[z], float(r1), float(r2), rp1, r2p, allowed))
    return AnnulusReport(not failures, checked, tuple(failures[:limit]))


def bounded_image_bound(m: SampledMap, phi: Callable[[float], float], B: Sequence[Hashable]) -> float:
    """phi(2) * d'(f(b1), f(b1')) for a diametral pair of B; diam f(B) is at most twice this."""
    idx = [m.domain.index(b) for b in dict.fromkeys(B)]
    if len(idx) < 2:
        raise InputError("B must contain at least two points")
    D = m.domain.dist[np.ix_(idx, idx)]
    E = m.image_matrix()[np.ix_(idx, idx)]
    i, j = np.unravel_index(int(D.argmax()), D.shape)
    bound = float(phi(2.0)) * float(E[i, j])
    if float(E.max()) > 2 * bound * (1 + 1e-9):
        raise CertificateFailure(f"image diameter {E.max()} exceeds 2 * {bound}")
    return bound


def cross_ratio(m: FiniteMetricSpace, z1, z2, z3, z4) -> float:
    """[z1, z2, z3, z4] = d(z1,z3) d(z2,z4) / (d(z1,z4) d(z2,z3))."""
    if len({z1, z2, z3, z4}) < 4:
        raise InputError("cross-ratio needs four distinct points")
    return m.d(z1, z3) * m.d(z2, z4) / (m.d(z1, z4) * m.d(z2, z3))


@dataclass(frozen=True)
class PerfectnessReport:
    c: float
    witness_center: Hashable | None
    witness_radius: float | None
    radius_range: tuple
    degenerate: bool


def uniformly_perfect_constant(m: FiniteMetricSpace) -> PerfectnessReport:
    """Largest c with a point at distance in (c r, r] from z, for every z and r.

    Radii run from each center's nearest-neighbour distance up to (not
    including) the diameter. Below the nearest neighbour every finite sample
    fails, which says nothing about the underlying space.
    """
    if len(m) < 2:
        raise InputError("need at least two points")
    D = m.dist
    diam = m.diameter
    best, wz, wr = 1.0, None, None
    for z in range(len(m)):
        s = np.unique(D[z][D[z] > 0])
        # a radius just below s[i+1] only sees points out to s[i]
        for lo, hi in zip(s, s[1:]):
            if lo / hi < best:
                best, wz, wr = float(lo / hi), m.points[z], float(hi)
        if s[-1] < diam and s[-1] / diam < best:
            best, wz, wr = float(s[-1] / diam), m.points[z], diam
    lo_range = float(np.min(np.where(D > 0, D, np.inf)))
    return PerfectnessReport(best, wz, wr, (lo_range, diam), wz is None)


@dataclass(frozen=True)
class DisconnectionReport:
    delta: float
    pair: tuple


def bottleneck_matrix(D: np.ndarray) -> np.ndarray:
    """Minimax path lengths: the smallest possible largest step between two points."""
    B = D.copy()
    for k in range(len(B)):
        B = np.minimum(B, np.maximum(B[:, k, None], B[None, k, :]))
    return B


def uniform_disconnection_constant(m: FiniteMetricSpace) -> DisconnectionReport:
    """Supremum of delta admitting no nontrivial delta-chain.

    A nontrivial delta-chain from z0 to zn (z0 != zn) exists exactly when some
    path between them has every step at most delta * d(z0, zn), i.e. when the
    bottleneck distance is at most that. The direct step caps the answer at 1.
    """
    n = len(m)
    if n < 2:
        raise InputError("need at least two points")
    D = m.dist
    R = bottleneck_matrix(D) / np.where(D > 0, D, np.inf)
    np.fill_diagonal(R, np.inf)
    i, j = np.unravel_index(int(R.argmin()), R.shape)
    return DisconnectionReport(float(R[i, j]), (m.points[i], m.points[j]))


@dataclass(frozen=True)
class DoublingReport:
    C: int
    center: Hashable | None
    radius: float | None
    exact: bool


def _min_cover(target: int, sets: list[int]) -> int:
    """Exact minimum set cover over bitmasks (target has at most 12 bits)."""
    sets = sorted({s & target for s in sets if s & target}, reverse=True)
    frontier, seen, steps = {0}, {0}, 0
    while target not in frontier:
        steps += 1
        frontier = {f | s for f in frontier for s in sets} - seen
        seen |= frontier
    return steps


def doubling_constant_metric(m: FiniteMetricSpace, exact_limit: int = 12) -> DoublingReport:
    """Worst number of (r/2)-balls needed to cover an r-ball, r below the diameter.

    Balls larger than ``exact_limit`` points use a greedy cover (an upper
    bound); smaller ones are covered optimally.
    """
    D = m.dist
    n = len(m)
    diam = m.diameter
    tol = 1e-12 * max(diam, 1.0)
    worst, wz, wr, exact = 1, None, None, True
    seen = set()
    for z in range(n):
        for r in np.unique(D[z][(D[z] > 0) & (D[z] < diam)]):
            inside = np.flatnonzero(D[z] <= r + tol)
            key = (inside.tobytes(), float(r))
            if key in seen:
                continue
            seen.add(key)
            # only centers within 3r/2 of z can reach the ball with radius r/2
            near = np.flatnonzero(D[z] <= 1.5 * r + tol)
            half = D[np.ix_(near, inside)] <= r / 2 + tol
            if len(inside) <= exact_limit:
                masks = [int(sum(1 << k for k in np.flatnonzero(row))) for row in half]
                count = _min_cover((1 << len(inside)) - 1, masks)
            else:
                count, left = 0, np.ones(len(inside), dtype=bool)
                while left.any():
                    c = int((half & left).sum(axis=1).argmax())
                    left &= ~half[c]
                    count += 1
                exact = False
            if count > worst:
                worst, wz, wr = count, m.points[z], float(r)
    return DoublingReport(worst, wz, wr, exact)


__all__ = [
    "SampledMap",
    "ControlEnvelope",
    "control_envelope",
    "ratio_samples",
    "envelope_shape",
    "AnnulusWitness",
    "AnnulusReport",
    "annulus_distortion_check",
    "bounded_image_bound",
    "cross_ratio",
    "PerfectnessReport",
    "uniformly_perfect_constant",
    "DisconnectionReport",
    "bottleneck_matrix",
    "uniform_disconnection_constant",
    "DoublingReport",
    "doubling_constant_metric",
]
