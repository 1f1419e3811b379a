"""Dimension estimates with certificates.

Box-counting slopes, cover sums that bound Hausdorff dimension from above,
mass-distribution checks that bound it from below, Ahlfors regularity,
volume-entropy growth and the 5r covering lemma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import CertificateFailure, InputError
from .metric_core import FiniteMetricSpace, WeightedGraph, distances_from
from .tree_boundary import RootedTree, natural_measure

REL = 1e-12


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    r_squared: float
    points: tuple


def _fit(xs: Sequence[float], ys: Sequence[float]) -> LogLogFit:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float((resid**2).sum())
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    return LogLogFit(float(slope), float(intercept), r2, tuple(zip(x.tolist(), y.tolist())))


def _tail(n: int, use_all: bool) -> slice:
    return slice(0, n) if use_all else slice(n - max(2, math.ceil(n / 2)), n)


def box_dimension_fit(entries: Iterable[tuple[float, float]], use_all: bool = False) -> LogLogFit:
    """Least-squares slope of log N(eps) against log(1/eps).

    By default only the finer half of the scales is used.
    """
    entries = sorted(((float(e), float(n)) for e, n in entries), key=lambda t: -t[0])
    if len(entries) < 2:
        raise InputError("box counting needs at least two scales")
    for e, n in entries:
        if not (e > 0 and n > 0):
            raise InputError(f"scales and counts must be positive, got ({e}, {n})")
    if len({e for e, _ in entries}) != len(entries):
        raise InputError("scales must be distinct")
    used = entries[_tail(len(entries), use_all)]
    return _fit([-math.log(e) for e, _ in used], [math.log(n) for _, n in used])


@dataclass(frozen=True)
class CoverLevel:
    """Cover at one scale: explicit diameters, or ``count`` sets of ``common_diameter``."""

    scale: float
    count: int = 0
    common_diameter: float = 0.0
    diameters: tuple | None = None

    def power_sum(self, s: float) -> float:
        if self.diameters is not None:
            return float(sum(d**s for d in self.diameters))
        return self.count * self.common_diameter**s

    @property
    def size(self) -> int:
        return len(self.diameters) if self.diameters is not None else self.count

    @property
    def max_diameter(self) -> float:
        if self.diameters is not None:
            return max(self.diameters, default=0.0)
        return self.common_diameter


@dataclass(frozen=True)
class CoverFamily:
    levels: tuple

    def __post_init__(self):
        levels = tuple(self.levels)
        if not levels:
            raise InputError("cover family is empty")
        for a, b in zip(levels, levels[1:]):
            if not b.scale < a.scale:
                raise InputError("cover scales must be strictly decreasing")
        for lv in levels:
            if lv.scale <= 0:
                raise InputError("cover scales must be positive")
            if lv.max_diameter > lv.scale * (1 + REL):
                raise InputError(f"a set of diameter {lv.max_diameter} exceeds its scale {lv.scale}")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_table(cls, entries) -> "CoverFamily":
        """Each (eps, N) becomes N sets of diameter eps."""
        return cls(tuple(CoverLevel(float(e), int(n), float(e)) for e, n in entries))

    def table(self) -> list[tuple[float, int]]:
        return [(lv.scale, lv.size) for lv in self.levels]


def tree_cover_family(t: RootedTree, a: float, depths) -> CoverFamily:
    return CoverFamily(tuple(CoverLevel(float(a) ** -k, t.level_count(k), float(a) ** -k) for k in depths))


@dataclass(frozen=True)
class HausdorffVerdict:
    s: float
    sums: tuple
    ratios: tuple
    supports: bool


def hausdorff_upper_bound(c: CoverFamily, s: float) -> HausdorffVerdict:
    """Sums of diam**s per scale; they support Hdim <= s when they keep shrinking.

    Shrinking means every ratio of consecutive nonzero sums is below 1 and a
    zero sum is never followed by a positive one.
    """
    sums = tuple(lv.power_sum(s) for lv in c.levels)
    ratios = []
    ok = True
    for a, b in zip(sums, sums[1:]):
        if a == 0:
            ratios.append(0.0 if b == 0 else math.inf)
            ok &= b == 0
        else:
            ratios.append(b / a)
            ok &= b < a
    if len(sums) == 1:
        ok = sums[0] == 0
    return HausdorffVerdict(s, sums, tuple(ratios), bool(ok))


@dataclass(frozen=True)
class Ball:
    center: Hashable
    radius: float


@dataclass(frozen=True)
class BallCheck:
    center: Hashable
    radius: float
    measure: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class MDPCertificate:
    s: float
    C: float
    balls: tuple
    all_pass: bool

    @property
    def violations(self) -> list[BallCheck]:
        return [b for b in self.balls if not b.passed]


def mdp_lower_bound(measure: Callable[[Ball], float], balls: Iterable[Ball], s: float, C: float) -> MDPCertificate:
    """Check mu(B_r) <= C r**s on every enumerated ball."""
    if not (s > 0 and C > 0):
        raise InputError("s and C must be positive")
    checks = []
    for b in balls:
        mu = float(measure(b))
        bound = C * b.radius**s
        checks.append(BallCheck(b.center, b.radius, mu, bound, mu <= bound * (1 + REL)))
    if not checks:
        raise InputError("ball enumeration is empty")
    return MDPCertificate(s, C, tuple(checks), all(c.passed for c in checks))


def tree_balls(t: RootedTree, a: float, k_max: int) -> list[Ball]:
    """Balls at both sides of each cylinder scale: radii a**-k and just below a**-k.

    Centers are depth-k_max words (canonical boundary points of each cylinder).
    Radii at or above the diameter 1 are left out.
    """
    balls = []
    for k in range(0, k_max + 1):
        r = float(a) ** -k
        below = float(np.nextafter(r, 0.0))
        for w in t.words(k):
            center = w + (0,) * (k_max - k)
            if k >= 1:
                balls.append(Ball(center, r))
            if k < k_max:
                balls.append(Ball(center, below))
    return balls


def tree_ball_measure(t: RootedTree, a: float) -> Callable[[Ball], Fraction]:
    """Measure of a closed visual ball: the cylinder of the smallest depth j with a**-j <= r."""
    mu = natural_measure(t)

    def measure(ball: Ball):
        w = tuple(ball.center)
        j = 0
        while j < len(w) and float(a) ** -j > ball.radius:
            j += 1
        return mu(w[:j])

    return measure


def cantor_cdf(x: float, digits: int = 60) -> float:
    """Cantor function: distribution of the uniform measure on the middle-thirds set."""
    if x <= 0:
        return 0.0
    if x >= 1:
        return 1.0
    total, weight = 0.0, 0.5
    for _ in range(digits):
        x *= 3
        d = int(x)
        x -= d
        if d == 1:
            return total + weight
        if d == 2:
            total += weight
        weight /= 2
    return total


def cantor_points(k: int) -> list[float]:
    """Left endpoints of the 2**k depth-k intervals of the middle-thirds construction."""
    pts = [Fraction(0)]
    for j in range(1, k + 1):
        pts = [p + off for p in pts for off in (Fraction(0), Fraction(2, 3**j))]
    return [float(p) for p in pts]


def cantor_balls(k: int) -> list[Ball]:
    balls = []
    for z in cantor_points(k):
        for j in range(0, k + 1):
            for r in (3.0**-j / 2, 3.0**-j, float(np.nextafter(3.0**-j, 0.0))):
                balls.append(Ball(z, r))
    return balls


def cantor_ball_measure(ball: Ball) -> float:
    return cantor_cdf(ball.center + ball.radius) - cantor_cdf(ball.center - ball.radius)


@dataclass(frozen=True)
class AhlforsReport:
    s: float
    min_ratio: float
    max_ratio: float
    C_needed: float
    C: float | None
    passed: bool
    worst_low: Ball
    worst_high: Ball


def ahlfors_regularity_check(measure, balls: Iterable[Ball], s: float, C: float | None = None) -> AhlforsReport:
    """Two-sided check r**s / C <= mu(B_r) <= C r**s.

    Without C, reports the smallest C that works on the enumerated balls.
    """
    balls = list(balls)
    if not balls:
        raise InputError("ball enumeration is empty")
    ratios = np.array([float(measure(b)) / b.radius**s for b in balls])
    lo, hi = int(ratios.argmin()), int(ratios.argmax())
    mn, mx = float(ratios[lo]), float(ratios[hi])
    need = math.inf if mn <= 0 else max(mx, 1 / mn)
    passed = math.isfinite(need) if C is None else need <= C * (1 + REL)
    return AhlforsReport(s, mn, mx, need, C, bool(passed), balls[lo], balls[hi])


def snowflake_scaling_check(entries, alpha: float, use_all: bool = False, tol: float = 1e-6):
    """Refit after raising all scales to alpha; the slope must grow by exactly 1/alpha."""
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    entries = list(entries)
    before = box_dimension_fit(entries, use_all)
    after = box_dimension_fit([(e**alpha, n) for e, n in entries], use_all)
    ratio = after.slope / before.slope
    if abs(ratio - 1 / alpha) > tol:
        raise CertificateFailure(f"snowflake ratio {ratio} differs from 1/alpha = {1 / alpha}")
    return before.slope, after.slope, ratio


@dataclass(frozen=True)
class GrowthSeries:
    radii: tuple
    counts: tuple
    h: float
    note: str = "slope over the upper half of radii; a finite-range stand-in for the limsup"


def growth_rate(g: WeightedGraph | RootedTree, p=None, n_max: int = 20) -> GrowthSeries:
    """Ball cardinalities |B_n(p)| for n = 0..n_max and their exponential rate h.

    Trees are counted level by level from the root (p must be the root).
    """
    if n_max < 3:
        raise InputError("n_max must be at least 3")
    radii = tuple(range(n_max + 1))
    if isinstance(g, RootedTree):
        if p not in (None, ()):
            raise InputError("tree growth is measured from the root")
        levels = [g.level_count(k) for k in radii]
        counts = tuple(int(c) for c in np.cumsum(levels, dtype=object))
    else:
        row = distances_from(g, p if p is not None else g.vertices[0])
        counts = tuple(int((row <= n + 1e-9).sum()) for n in radii)
    used = slice(n_max // 2, n_max + 1)
    fit = _fit(radii[used], [math.log(c) for c in counts[used]])
    return GrowthSeries(radii, counts, max(0.0, fit.slope))


def coornaert_dimension(h: float, a: float) -> float:
    """Hausdorff dimension h / ln a of the visual boundary."""
    if not a > 1:
        raise InputError(f"visual parameter must exceed 1, got {a}")
    if h < 0:
        raise InputError("h must be nonnegative")
    return h / math.log(a)


def five_r_cover(m: FiniteMetricSpace, balls: Sequence[tuple]) -> list[Ball]:
    """Greedy disjoint subfamily, largest radii first; its 5x dilates cover every center.

    Balls are closed and disjointness is tested on the points of ``m``.
    """
    balls = [b if isinstance(b, Ball) else Ball(*b) for b in balls]
    if not balls:
        raise InputError("no balls given")
    for b in balls:
        if not (math.isfinite(b.radius) and b.radius >= 0):
            raise InputError(f"radius {b.radius} is not a finite nonnegative number")
    D = m.dist
    centers = np.array([m.index(b.center) for b in balls])
    radii = np.array([b.radius for b in balls])
    members = D[centers] <= radii[:, None]
    order = sorted(range(len(balls)), key=lambda i: -radii[i])
    taken = np.zeros(len(m), dtype=bool)
    chosen = []
    for i in order:
        if not (members[i] & taken).any():
            chosen.append(i)
            taken |= members[i]
    sel = np.array(chosen)
    for a_, i in enumerate(chosen):
        for j in chosen[a_ + 1 :]:
            if (members[i] & members[j]).any():
                raise CertificateFailure("selected balls intersect")
    reach = D[np.ix_(centers, centers[sel])] <= 5 * radii[sel][None, :]
    if not reach.any(axis=1).all():
        miss = int(np.flatnonzero(~reach.any(axis=1))[0])
        raise CertificateFailure(f"center {balls[miss].center!r} lies in no 5B")
    return [balls[i] for i in chosen]


def product_metric(mA: FiniteMetricSpace, mB: FiniteMetricSpace, mode: str = "max") -> FiniteMetricSpace:
    """Cartesian product with the max (default) or sum of the factor distances."""
    if mode not in ("max", "sum"):
        raise InputError(f"mode must be 'max' or 'sum', got {mode!r}")
    A = mA.dist[:, None, :, None]
    B = mB.dist[None, :, None, :]
    D = np.maximum(A, B) if mode == "max" else A + B
    n = len(mA) * len(mB)
    points = [(a, b) for a in mA.points for b in mB.points]
    return FiniteMetricSpace(points, D.reshape(n, n), validate=False)


def covering_number(m: FiniteMetricSpace, eps: float) -> int:
    """Greedy count of sets of diameter <= eps covering m, taking points in order.

    An upper bound for the minimal count. Each new set starts at the first
    uncovered point and absorbs, in order, every uncovered point within eps
    of all points already in the set.
    """
    D = m.dist
    free = np.ones(len(m), dtype=bool)
    count = 0
    tol = eps * (1 + REL)
    while free.any():
        start = int(np.flatnonzero(free)[0])
        ok = free & (D[start] <= tol)
        group = []
        for j in np.flatnonzero(ok):
            if all(D[j, g] <= tol for g in group):
                group.append(j)
        free[group] = False
        count += 1
    return count


def box_counts(m: FiniteMetricSpace, scales: Iterable[float]) -> list[tuple[float, int]]:
    return [(float(e), covering_number(m, e)) for e in scales]


def interval_metric(points: Sequence[float]) -> FiniteMetricSpace:
    x = np.asarray(points, dtype=float)
    return FiniteMetricSpace(list(range(len(x))), np.abs(x[:, None] - x[None, :]), validate=False)


__all__ = [
    "LogLogFit",
    "box_dimension_fit",
    "CoverLevel",
    "CoverFamily",
    "tree_cover_family",
    "HausdorffVerdict",
    "hausdorff_upper_bound",
    "Ball",
    "BallCheck",
    "MDPCertificate",
    "mdp_lower_bound",
    "tree_balls",
    "tree_ball_measure",
    "cantor_cdf",
    "cantor_points",
    "cantor_balls",
    "cantor_ball_measure",
    "AhlforsReport",
    "ahlfors_regularity_check",
    "snowflake_scaling_check",
    "GrowthSeries",
    "growth_rate",
    "coornaert_dimension",
    "five_r_cover",
    "product_metric",
    "covering_number",
    "box_counts",
    "interval_metric",
]
