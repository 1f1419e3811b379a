"""Round trees: the Cantor-times-interval boundary model, a cell-level validator
for combinatorial round trees, and closed-form conformal dimension bounds.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .dimension import LogLogFit, box_dimension_fit
from .errors import CapExceeded, InputError
from .metric_core import FiniteMetricSpace

MODEL_CAP = 5_000_000
DENSE_CAP = 4_000


def rt_lower_bound(V: int, H: int) -> float:
    """1 + ln V / ln H."""
    if V < 2 or H < 2:
        raise InputError("V and H must both be at least 2")
    return 1 + math.log(V) / math.log(H)


class RoundTreeModel:
    """Points (w, j) with w in {1..V}^k and 0 <= j <= H^k.

    d((w, j), (w', j')) = max(H^-lcp(w, w'), |j - j'| / H^k), with the word
    term 0 when w = w'. Words are stored as base-V integer codes.
    """

    def __init__(self, V: int, H: int, k: int, cap: int = MODEL_CAP):
        if V < 1 or H < 2 or k < 1:
            raise InputError("need V >= 1, H >= 2 and k >= 1")
        n = V**k * (H**k + 1)
        if n > cap:
            raise CapExceeded(f"model has {n} points, above the cap {cap}")
        self.V, self.H, self.k = V, H, k

    def __len__(self) -> int:
        return self.V**self.k * (self.H**self.k + 1)

    def word(self, code: int) -> tuple:
        digits = []
        for _ in range(self.k):
            code, r = divmod(code, self.V)
            digits.append(r + 1)
        return tuple(reversed(digits))

    def points(self) -> list[tuple]:
        return [(self.word(c), j) for c in range(self.V**self.k) for j in range(self.H**self.k + 1)]

    def distance(self, p, q) -> float:
        (w, j), (w2, j2) = p, q
        common = next((i for i, (a, b) in enumerate(zip(w, w2)) if a != b), len(w))
        vertical = 0.0 if tuple(w) == tuple(w2) else float(self.H) ** -common
        return max(vertical, abs(j - j2) / self.H**self.k)

    def metric_space(self, dense_cap: int = DENSE_CAP) -> FiniteMetricSpace:
        n = len(self)
        if n > dense_cap:
            raise CapExceeded(f"dense matrix for {n} points exceeds {dense_cap}")
        V, H, k = self.V, self.H, self.k
        codes = np.repeat(np.arange(V**k), H**k + 1)
        pos = np.tile(np.arange(H**k + 1), V**k)
        common = np.full((n, n), k)
        for i in range(k):
            a = codes // V ** (k - 1 - i)
            diff = (a[:, None] != a[None, :]) & (common == k)
            common[diff] = i
        vertical = np.where(common == k, 0.0, float(H) ** -common.astype(float))
        D = np.maximum(vertical, np.abs(pos[:, None] - pos[None, :]) / H**k)
        return FiniteMetricSpace(self.points(), D)

    def box_counts(self) -> list[tuple[float, int]]:
        """Mesh counts at scales H^-j, j = 1..k, by binning every point.

        A box is a depth-j word cylinder times a horizontal cell of width
        H^-j, so its diameter is at most H^-j.
        """
        V, H, k = self.V, self.H, self.k
        codes = np.repeat(np.arange(V**k, dtype=np.int64), H**k + 1)
        pos = np.tile(np.arange(H**k + 1, dtype=np.int64), V**k)
        out = []
        for j in range(1, k + 1):
            cyl = codes // V ** (k - j)
            cell = pos // H ** (k - j)
            out.append((float(H) ** -j, int(np.unique(cyl * (H**j + 1) + cell).size)))
        return out

    def box_fit(self, use_all: bool = False) -> LogLogFit:
        return box_dimension_fit(self.box_counts(), use_all)


def build_round_tree_model(V: int, H: int, k: int, cap: int = MODEL_CAP) -> RoundTreeModel:
    return RoundTreeModel(V, H, k, cap)


@dataclass(frozen=True)
class StabilizationRow:
    k: int
    slope: float
    target: float
    gap: float


@dataclass(frozen=True)
class StabilizationTable:
    rows: tuple
    decreasing: bool


def product_stabilization_check(V: int, H: int, depths: Sequence[int], cap: int = MODEL_CAP) -> StabilizationTable:
    """Box slope of the model at each depth and its gap to 1 + ln V / ln H."""
    depths = list(depths)
    if not depths:
        raise InputError("depths must be nonempty")
    target = rt_lower_bound(V, H)
    rows = []
    for k in depths:
        slope = build_round_tree_model(V, H, k, cap).box_fit().slope
        rows.append(StabilizationRow(k, slope, target, abs(slope - target)))
    dec = all(b.gap < a.gap for a, b in zip(rows, rows[1:]))
    return StabilizationTable(tuple(rows), dec)


# --- combinatorial complexes --------------------------------------------------


@dataclass(frozen=True)
class Cell:
    id: Hashable
    step: int
    page_address: tuple
    neighbors: tuple
    base: bool = False


@dataclass(frozen=True)
class RoundTreeComplex:
    """2-cells with their step, page address and adjacency."""

    cells: tuple

    def __post_init__(self):
        cells = tuple(self.cells)
        if not cells:
            raise InputError("complex has no cells")
        ids = {}
        for c in cells:
            if c.id in ids:
                raise InputError(f"duplicate cell id {c.id!r}")
            if c.step < 0:
                raise InputError(f"cell {c.id!r} has negative step")
            ids[c.id] = c
        for c in cells:
            for nb in c.neighbors:
                if nb == c.id:
                    raise InputError(f"cell {c.id!r} lists itself as a neighbor")
                if nb not in ids:
                    raise InputError(f"cell {c.id!r} has unknown neighbor {nb!r}")
                if c.id not in ids[nb].neighbors:
                    raise InputError(f"adjacency {c.id!r}-{nb!r} is not symmetric")
        object.__setattr__(self, "cells", cells)

    def by_id(self) -> dict:
        return {c.id: c for c in self.cells}


@dataclass
class RoundTreeReport:
    item1: bool
    item3: bool
    item4: bool
    item2: str = "not checked"
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.item1 and self.item3 and self.item4


def _is_prefix(u: tuple, w: tuple) -> bool:
    return len(u) <= len(w) and tuple(w[: len(u)]) == tuple(u)


def validate_round_tree(c: RoundTreeComplex, V: int, H: int) -> RoundTreeReport:
    """Check items (1), (3), (4) of the round-tree definition on cell sets.

    A_n is the set of cells with step <= n and A_a the cells whose page
    address is a prefix of the address a.
    """
    if V < 1 or H < 1:
        raise InputError("V and H must be positive")
    violations = []
    for cell in c.cells:
        if any(not 1 <= s <= V for s in cell.page_address):
            raise InputError(f"cell {cell.id!r} has an address symbol outside 1..{V}")

    bases = [x for x in c.cells if x.base]
    item1 = len(bases) == 1 and bases[0].step == 0
    if not item1:
        violations.append(("item1", f"{len(bases)} base cells; need exactly one at step 0"))

    depth = max(max(x.step for x in c.cells), max(len(x.page_address) for x in c.cells)) + 1
    item3 = True
    for a in itertools.product(range(1, V + 1), repeat=depth):
        in_a = [x for x in c.cells if _is_prefix(x.page_address, a)]
        for n in range(depth):
            for sym in range(1, V + 1):
                if sym == a[n]:
                    continue
                b = a[:n] + (sym,) + a[n + 1 :]
                s1 = {x.id for x in in_a if x.step <= n}
                s2 = {x.id for x in in_a if _is_prefix(x.page_address, b)}
                s3 = {x.id for x in in_a if x.step <= n + 1}
                if not (s1 <= s2 <= s3):
                    item3 = False
                    bad = sorted(map(str, (s1 - s2) | (s2 - s3)))
                    violations.append(("item3", f"address {a}, split at {n}: cells {bad[:5]}"))
                    break
            if not item3:
                break
        if not item3:
            break

    cells = c.by_id()
    item4 = True
    top = max(x.step for x in c.cells)
    for x in c.cells:
        for n in range(x.step, top):
            new = sum(1 for nb in x.neighbors if cells[nb].step == n + 1)
            if new > V * H:
                item4 = False
                violations.append(("item4", f"cell {x.id!r} meets {new} cells of step {n + 1} (limit {V * H})"))
    return RoundTreeReport(item1, item3, item4, violations=violations)


def model_complex(V: int, H: int, depth: int) -> RoundTreeComplex:
    """Strip complex matching the boundary model.

    Step n has, for each address w of length n, a strip of H^n cells; cell
    (w, j) sits on its parent (w[:-1], j // H) and next to (w, j +- 1).
    """
    adj: dict = {"base": set()}
    meta = {"base": (0, ())}
    for n in range(1, depth + 1):
        for w in itertools.product(range(1, V + 1), repeat=n):
            for j in range(H**n):
                cid = ("".join(map(str, w)), j)
                meta[cid] = (n, w)
                adj.setdefault(cid, set())
                parent = "base" if n == 1 else ("".join(map(str, w[:-1])), j // H)
                adj[cid].add(parent)
                adj[parent].add(cid)
                if j > 0:
                    left = (cid[0], j - 1)
                    adj[cid].add(left)
                    adj[left].add(cid)
    cells = []
    for cid, nbs in adj.items():
        step, w = meta[cid]
        cid_s = cid if cid == "base" else f"{cid[0]}:{cid[1]}"
        nb_s = tuple(sorted(x if x == "base" else f"{x[0]}:{x[1]}" for x in nbs))
        cells.append(Cell(cid_s, step, tuple(w), nb_s, cid == "base"))
    return RoundTreeComplex(tuple(cells))


# --- closed-form bounds -------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    value: float | None
    formula: str
    preconditions: tuple
    caveats: tuple = ()


def bourdon_cdim(p: int, q: int) -> float:
    """1 + ln(q - 1) / arccosh((p - 2) / 2) for the right-angled building I_{p,q}."""
    if p < 5:
        raise InputError("p must be at least 5")
    if q < 3:
        raise InputError("q must be at least 3")
    return 1 + math.log(q - 1) / math.acosh((p - 2) / 2)


def bourdon_report(p: int, q: int) -> BoundReport:
    return BoundReport(
        bourdon_cdim(p, q),
        "1 + log(q-1) / arccosh((p-2)/2)",
        ("p >= 5", "q >= 3"),
        ("conformal dimension of the boundary of the Fuchsian building with p-gon chambers and thickness q",),
    )


@dataclass(frozen=True)
class CoxeterBounds:
    lower: BoundReport
    upper: BoundReport


def coxeter_bounds(m: int, M: int) -> CoxeterBounds:
    """Lower bound for the Bowditch boundary and upper bound for the visual boundary.

    The two concern different boundaries, so no ordering between them is implied.
    """
    if m < 1 or M < 2:
        raise InputError("need m >= 1 vertices and a maximal label M >= 2")
    lower_pre = ("m >= 11", "M >= 3")
    if m >= 11 and M >= 3:
        lo = 1 + math.log((m - 5) // 3) / math.log(2 * M - 1)
        lower = BoundReport(lo, "1 + log(floor((m-5)/3)) / log(2M-1)", lower_pre, ("bounds the Bowditch boundary",))
    else:
        lower = BoundReport(None, "1 + log(floor((m-5)/3)) / log(2M-1)", lower_pre, ("not applicable: preconditions fail",))
    upper_pre = ("M >= 4",)
    if M >= 4 and m >= 2:
        hi = 1 + math.log(m - 1) / math.log(2 * M - 5)
        upper = BoundReport(hi, "1 + log(m-1) / log(2M-5)", upper_pre, ("bounds the visual boundary",))
    else:
        upper = BoundReport(None, "1 + log(m-1) / log(2M-5)", upper_pre, ("not applicable: preconditions fail",))
    return CoxeterBounds(lower, upper)


def random_group_lower_bound(m: int, d: float, length: int, C: float) -> BoundReport:
    """log(2m - 1) d l / (C |log d|); C is the unknown universal constant and must be given."""
    if not 0 < d < 1:
        raise InputError("density d must lie in (0, 1)")
    if m < 2:
        raise InputError("need at least 2 generators")
    if length < 1:
        raise InputError("relator length must be at least 1")
    if not C > 1:
        raise InputError("C must exceed 1")
    caveats = ["lower bound up to an unknown universal constant C"]
    if d >= 0.5:
        caveats.append("density >= 1/2 lies outside every regime where the bound is known")
    elif d >= 0.125:
        caveats.append("density in [1/8, 1/2): relies on the extension beyond d < 1/8")
    value = math.log(2 * m - 1) * d * length / (C * abs(math.log(d)))
    return BoundReport(value, "log(2m-1) * d * l / (C * |log d|)", ("m >= 2", "0 < d < 1/8", "l >= 1", "C > 1"), tuple(caveats))


__all__ = [
    "rt_lower_bound",
    "RoundTreeModel",
    "build_round_tree_model",
    "StabilizationRow",
    "StabilizationTable",
    "product_stabilization_check",
    "Cell",
    "RoundTreeComplex",
    "RoundTreeReport",
    "validate_round_tree",
    "model_complex",
    "BoundReport",
    "bourdon_cdim",
    "bourdon_report",
    "CoxeterBounds",
    "coxeter_bounds",
    "random_group_lower_bound",
]
