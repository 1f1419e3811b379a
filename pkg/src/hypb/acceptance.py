"""Acceptance criteria as plain functions, and the reproduce runner built on them.

Each criterion returns a :class:`Criterion`. Runtimes are measured by the
runner and kept out of the JSON summary, so repeated runs are byte-identical.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import io
from .dimension import (
    Ball,
    box_dimension_fit,
    five_r_cover,
    growth_rate,
    hausdorff_upper_bound,
    mdp_lower_bound,
    snowflake_scaling_check,
    tree_ball_measure,
    tree_balls,
    tree_cover_family,
)
from .errors import CertificateFailure
from .metric_core import (
    FiniteMetricSpace,
    WeightedGraph,
    alpha_limit_check,
    bourdon_alpha,
    comb_graph,
    cycle_graph,
    four_point_delta,
    graph_metric,
    grid_graph,
    path_graph,
    point_along_ray,
    random_tree,
    slim_triangle_delta,
    star_graph,
)
from .qs_props import SampledMap, annulus_distortion_check, control_envelope, doubling_constant_metric, ratio_samples
from .quasimetric import chain_metric, random_quasimetric, validate_quasimetric
from .round_tree import bourdon_cdim, product_stabilization_check, rt_lower_bound
from .tree_boundary import T4, cover_table, doubling_constant, lcp_matrix, visual_metric_space

DEFAULT_SEED = 20240601
BUDGET_SECONDS = 300.0


@dataclass
class Criterion:
    id: int
    name: str
    passed: bool
    value: object
    target: object
    tolerance: object
    detail: dict = field(default_factory=dict)


def _elapsed(start: float) -> float:
    return time.perf_counter() - start


# 1 ---------------------------------------------------------------------------


def tree_delta(seed: int = DEFAULT_SEED) -> Criterion:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst, sizes = 0.0, []
    for _ in range(50):
        n = int(rng.integers(2, 61))
        g = random_tree(n, rng, max_length=5)
        worst = max(worst, four_point_delta(graph_metric(g)))
        sizes.append(n)
    took = _elapsed(start)
    return Criterion(
        1, "tree four-point delta", worst == 0 and took < 5.0, worst, 0.0, "exact",
        {"trees": 50, "max_n": max(sizes), "under_5s": took < 5.0},
    )


# 2 ---------------------------------------------------------------------------


def _integer_graph_metric(n: int, rng) -> FiniteMetricSpace:
    g = random_tree(n, rng, max_length=5)
    extra = [(int(rng.integers(n)), int(rng.integers(n)), int(rng.integers(1, 6))) for _ in range(n // 2)]
    edges = list(g.edges) + [e for e in extra if e[0] != e[1]]
    return graph_metric(WeightedGraph.from_edges(edges, g.vertices))


def _random_ultrametric(n: int, rng) -> FiniteMetricSpace:
    words = sorted({tuple(int(x) for x in rng.integers(3, size=6)) for _ in range(n)})
    a = float(rng.uniform(1.5, 4.0))
    L = lcp_matrix(words)
    D = np.where(L >= len(words[0]), 0.0, a ** -L.astype(float))
    return FiniteMetricSpace(words, D)


def chain_sandwich(seed: int = DEFAULT_SEED) -> Criterion:
    rng = np.random.default_rng(seed)
    worst_lo = worst_hi = 0.0
    exact_fail = 0
    for i in range(1000):
        n = int(rng.integers(2, 21))
        s = random_quasimetric(n, rng)
        d = chain_metric(s).dist
        Q = np.asarray(s.q)
        off = ~np.eye(n, dtype=bool)
        # relative excess past each side of the sandwich; <= 1e-12 passes
        worst_hi = max(worst_hi, float(((d - Q)[off] / Q[off]).max()))
        lo = Q / (2 * s.K)
        worst_lo = max(worst_lo, float(((lo - d)[off] / Q[off]).max()))
        m = _integer_graph_metric(n, rng) if i % 2 == 0 else _random_ultrametric(n, rng)
        again = chain_metric(validate_quasimetric(m.points, m.dist)).dist
        exact_fail += int(not np.array_equal(again, m.dist))
    worst = max(worst_lo, worst_hi)
    return Criterion(
        2, "chain sandwich", worst <= 1e-12 and exact_fail == 0, worst, 0.0, 1e-12,
        {"instances": 1000, "lower_excess": worst_lo, "upper_excess": worst_hi, "metric_roundtrip_mismatches": exact_fail},
    )


# 3 ---------------------------------------------------------------------------


def triangle_failure() -> Criterion:
    e2 = math.exp(-2)
    pts = ("eta", "eta'", "eta''")
    rho = np.array([[0, 1, e2], [1, 0, e2], [e2, e2, 0]])
    s = validate_quasimetric(pts, rho)
    fails = rho[0, 1] > rho[0, 2] + rho[2, 1]
    d = chain_metric(s).dist
    err = abs(d[0, 1] - 2 * e2)
    kept = d[0, 2] == e2 and d[1, 2] == e2
    return Criterion(
        3, "triangle-failure fixture", bool(fails and err <= 1e-12 and kept), float(d[0, 1]), 2 * e2, 1e-12,
        {"triangle_fails": bool(fails), "K": s.K, "other_pairs_unchanged": bool(kept)},
    )


# 4 ---------------------------------------------------------------------------

VISUAL_PARAMETERS = (("2", 2.0), ("e", math.e), ("3", 3.0))
MDP_DEPTH = 8


def tree_dimension() -> Criterion:
    rows = {}
    ok = True
    for name, a in VISUAL_PARAMETERS:
        s_star = math.log(3) / math.log(a)
        fit = box_dimension_fit(cover_table(T4, a, range(1, 13)), use_all=True)
        fam = tree_cover_family(T4, a, range(1, 13))
        up_hi = hausdorff_upper_bound(fam, s_star + 0.05).supports
        up_lo = hausdorff_upper_bound(fam, s_star - 0.05).supports
        balls = tree_balls(T4, a, MDP_DEPTH)
        mu = tree_ball_measure(T4, a)
        at = mdp_lower_bound(mu, balls, s_star, 0.75).all_pass
        above = mdp_lower_bound(mu, balls, s_star + 0.1, 0.75).all_pass
        err = abs(fit.slope - s_star)
        row_ok = err <= 1e-9 and up_hi and not up_lo and at and not above
        ok &= row_ok
        rows[name] = {
            "slope": fit.slope, "target": s_star, "slope_error": err,
            "upper_supports_plus": up_hi, "upper_supports_minus": up_lo,
            "mdp_pass_at_target": at, "mdp_pass_plus_0.1": above, "balls": len(balls),
        }
    worst = max(r["slope_error"] for r in rows.values())
    return Criterion(4, "tree boundary dimension", bool(ok), worst, 0.0, 1e-9, rows)


# 5 ---------------------------------------------------------------------------


def coornaert() -> Criterion:
    g = growth_rate(T4, n_max=20)
    err = abs(g.h - math.log(3))
    gaps = {}
    for name, a in VISUAL_PARAMETERS:
        slope = box_dimension_fit(cover_table(T4, a, range(1, 13)), use_all=True).slope
        gaps[name] = abs(g.h / math.log(a) - slope)
    ok = err <= 1e-6 and max(gaps.values()) <= 0.01
    return Criterion(5, "volume entropy vs box slope", bool(ok), g.h, math.log(3), 1e-6, {"h_error": err, "dimension_gaps": gaps})


# 6 ---------------------------------------------------------------------------


def snowflake_law() -> Criterion:
    tables = {
        "cantor": [(3.0**-k, 2**k) for k in range(1, 11)],
        "tree": cover_table(T4, 2.0, range(1, 13)),
    }
    rows, worst = {}, 0.0
    for tname, table in tables.items():
        for alpha in (1 / 3, 1 / 2, 0.9):
            try:
                _, _, ratio = snowflake_scaling_check(table, alpha, use_all=True)
            except CertificateFailure:
                before = box_dimension_fit(table, use_all=True).slope
                ratio = box_dimension_fit([(e**alpha, n) for e, n in table], use_all=True).slope / before
            err = abs(ratio - 1 / alpha)
            worst = max(worst, err)
            rows[f"{tname}@{alpha:.6f}"] = {"ratio": ratio, "error": err}
    return Criterion(6, "snowflake scaling law", worst <= 1e-6, worst, 0.0, 1e-6, rows)


# 7 ---------------------------------------------------------------------------


def product_stabilization() -> Criterion:
    start = time.perf_counter()
    table = product_stabilization_check(2, 3, [5, 6, 7, 8])
    took = _elapsed(start)
    last = table.rows[-1]
    ok = last.gap <= 0.05 and table.decreasing and took < 60
    return Criterion(
        7, "round-tree product stabilization", bool(ok), last.slope, rt_lower_bound(2, 3), 0.05,
        {"gaps": {str(r.k): r.gap for r in table.rows}, "decreasing": table.decreasing, "under_60s": took < 60},
    )


# 8 ---------------------------------------------------------------------------


def bourdon_formula() -> Criterion:
    eq = abs(bourdon_cdim(5, 3) - bourdon_cdim(9, 5))
    worst_id = 0.0
    for p in range(5, 13):
        for q in range(3, 10):
            # doubling arccosh((p-2)/2) gives p' = (p-2)^2
            worst_id = max(worst_id, abs(bourdon_cdim(p, q) - bourdon_cdim((p - 2) ** 2, (q - 1) ** 2 + 1)))
    dec_p = all(bourdon_cdim(p + 1, q) < bourdon_cdim(p, q) for p in range(5, 12) for q in range(3, 10))
    inc_q = all(bourdon_cdim(p, q + 1) > bourdon_cdim(p, q) for p in range(5, 13) for q in range(3, 9))
    ok = eq <= 1e-12 and worst_id <= 1e-12 and dec_p and inc_q
    return Criterion(
        8, "building conformal dimension formula", bool(ok), eq, 0.0, 1e-12,
        {"identity_max_error": worst_id, "decreasing_in_p": dec_p, "increasing_in_q": inc_q, "value_5_3": bourdon_cdim(5, 3)},
    )


# 9 ---------------------------------------------------------------------------


def doubling() -> Criterion:
    cert = doubling_constant(T4, 2.0, 6)
    metric = doubling_constant_metric(visual_metric_space(T4, 6, 2.0)).C
    stars = {m: doubling_constant_metric(graph_metric(star_graph(m)), exact_limit=0).C for m in (4, 8, 16)}
    grows = stars[4] < stars[8] < stars[16]
    ok = cert.C == 3 and metric == 3 and grows
    return Criterion(9, "doubling constants", bool(ok), cert.C, 3, "exact", {"metric_scan": metric, "stars": stars})


# 10 --------------------------------------------------------------------------


def five_r(seed: int = DEFAULT_SEED) -> Criterion:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(200):
        dim = int(rng.integers(1, 4))
        X = rng.uniform(size=(200, dim))
        D = np.linalg.norm(X[:, None] - X[None], axis=-1)
        m = FiniteMetricSpace(range(200), D, validate=False)
        centers = rng.choice(200, size=50, replace=False)
        radii = rng.uniform(0.0, 0.3, size=50) ** 2
        balls = [Ball(int(c), float(r)) for c, r in zip(centers, radii)]
        try:
            chosen = five_r_cover(m, balls)
        except CertificateFailure:
            bad += 1
            continue
        # independent exhaustive check
        ins = [set(np.flatnonzero(D[b.center] <= b.radius)) for b in chosen]
        disjoint = all(not (ins[i] & ins[j]) for i in range(len(ins)) for j in range(i + 1, len(ins)))
        covered = all(any(D[b.center, c.center] <= 5 * c.radius for c in chosen) for b in balls)
        bad += int(not (disjoint and covered))
    return Criterion(10, "5r covering lemma", bad == 0, bad, 0, "exact", {"instances": 200, "balls_each": 50, "points": 200})


# 11 --------------------------------------------------------------------------


def alpha_suite(seed: int = DEFAULT_SEED) -> Criterion:
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(10_000):
        p = complex(*rng.uniform(-1, 1, 2))
        p *= 0.9 * math.sqrt(rng.uniform()) / max(abs(p), 1e-12)
        r = float(rng.uniform(0.1, 5.0))
        y1, y2, y3 = (point_along_ray(p, float(th), r) for th in rng.uniform(0, 2 * math.pi, 3))
        worst = max(worst, bourdon_alpha(p, y1, y3) - bourdon_alpha(p, y1, y2) - bourdon_alpha(p, y2, y3))
    gaps = [alpha_limit_check(0j, 0.0, math.pi / 2, t).gap for t in (2, 4, 6, 8, 10)]
    mono = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok = worst <= 1e-9 and gaps[-1] < 1e-3 and mono
    return Criterion(
        11, "alpha_p suite", bool(ok), gaps[-1], 0.0, 1e-3,
        {"triangle_worst_excess": worst, "triples": 10_000, "gaps": gaps, "monotone": mono},
    )


# 12 --------------------------------------------------------------------------


def _euclid(X, ids=None) -> FiniteMetricSpace:
    ids = list(range(len(X))) if ids is None else ids
    return FiniteMetricSpace(ids, np.linalg.norm(X[:, None] - X[None], axis=-1))


def _bilipschitz_fixtures(rng):
    out = []
    for _ in range(4):
        X = rng.uniform(-1, 1, size=(15, 2))
        U, _, Vt = np.linalg.svd(rng.normal(size=(2, 2)))
        A = U @ np.diag(rng.uniform(0.5, 2.0, 2)) @ Vt
        out.append((X, X @ A.T))
    X = rng.uniform(-1, 1, size=(15, 2))
    out.append((X, X + 0.3 * np.sin(2 * X)))
    return out


def _distortion(D, E) -> float:
    off = ~np.eye(len(D), dtype=bool)
    r = E[off] / D[off]
    return float(max(r.max(), 1 / r.min()))


def qs_envelopes(seed: int = DEFAULT_SEED) -> Criterion:
    rng = np.random.default_rng(seed)
    detail = {}
    ok = True
    bil = []
    worst_bil = 0.0
    for X, Y in _bilipschitz_fixtures(rng):
        f = SampledMap(_euclid(X), _euclid(Y), {i: i for i in range(len(X))})
        K = _distortion(f.domain.dist, f.codomain.dist)
        S, _ = ratio_samples(f)
        worst_bil = max(worst_bil, float((S[:, 1] / (K**2 * S[:, 0])).max()))
        ann = annulus_distortion_check(f, lambda t, K=K: K**2 * t)
        ok &= ann.passed
        bil.append((X, Y, f, K))
    detail["bilipschitz_worst_ratio"] = worst_bil
    ok &= worst_bil <= 1 + 1e-9

    worst_snow = 0.0
    for eps in (1 / 3, 1 / 2, 0.9):
        X = rng.uniform(size=(15, 2))
        m = _euclid(X)
        f = SampledMap(m, FiniteMetricSpace(m.points, m.dist**eps), {i: i for i in m.points})
        S, _ = ratio_samples(f)
        worst_snow = max(worst_snow, float((S[:, 1] / S[:, 0] ** eps).max()))
    detail["snowflake_worst_ratio"] = worst_snow
    ok &= worst_snow <= 1 + 1e-9

    worst_comp = 0.0
    for (X, Y, f1, _), eps in zip(bil, (1 / 3, 1 / 2, 0.9)):
        target = FiniteMetricSpace(f1.codomain.points, f1.codomain.dist**eps)
        f2 = SampledMap(f1.codomain, target, {i: i for i in target.points})
        phi, psi = control_envelope(f1), control_envelope(f2)
        S, _ = ratio_samples(f1.compose(f2))
        worst_comp = max(worst_comp, float((S[:, 1] / psi(phi(S[:, 0]))).max()))
    detail["composition_worst_ratio"] = worst_comp
    ok &= worst_comp <= 1 + 1e-9

    X, Y, _, K = bil[0]
    Yc = Y.copy()
    Yc[1] = Yc[0] + 1e-6
    bad = SampledMap(_euclid(X), _euclid(Yc), {i: i for i in range(len(X))})
    rep = annulus_distortion_check(bad, lambda t: K**2 * t)
    detail["adversarial_failures"] = len(rep.failures)
    if rep.failures:
        w = rep.failures[0]
        detail["adversarial_witness"] = {"center": w.center, "r1": w.r1, "r2": w.r2, "ratio": w.r2_image / w.r1_image, "allowed": w.allowed}
    ok &= not rep.passed and bool(rep.failures)
    return Criterion(12, "quasisymmetry envelopes", bool(ok), max(worst_bil, worst_snow, worst_comp), 1.0, 1e-9, detail)


# 13 --------------------------------------------------------------------------


def _complete_graph(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges([(str(i), str(j), 1) for i in range(n) for j in range(i + 1, n)])


def _petersen() -> WeightedGraph:
    outer = [(str(i), str((i + 1) % 5), 1) for i in range(5)]
    spokes = [(str(i), str(i + 5), 1) for i in range(5)]
    inner = [(str(5 + i), str(5 + (i + 2) % 5), 1) for i in range(5)]
    return WeightedGraph.from_edges(outer + spokes + inner)


def _random_connected(n: int, rng) -> WeightedGraph:
    g = random_tree(n, rng)
    extra = [(i, j, 1) for i in range(n) for j in range(i + 1, n) if rng.uniform() < 0.25]
    return WeightedGraph.from_edges(list(g.edges) + extra, g.vertices)


def relation_graphs(seed: int = DEFAULT_SEED) -> dict[str, WeightedGraph]:
    rng = np.random.default_rng(seed)
    graphs = {f"cycle{n}": cycle_graph(n) for n in range(4, 10)}
    graphs.update({f"grid{r}x{c}": grid_graph(r, c) for r, c in ((2, 2), (2, 3), (3, 3), (3, 4), (4, 4))})
    graphs.update({"comb2": comb_graph(2), "comb3": comb_graph(3), "path6": path_graph(6), "star5": star_graph(5)})
    graphs.update({"K5": _complete_graph(5), "petersen": _petersen()})
    graphs.update({f"random{i}": _random_connected(int(rng.integers(6, 11)), rng) for i in range(3)})
    return graphs


def relation_lemma(seed: int = DEFAULT_SEED) -> Criterion:
    rows, ok = {}, True
    for name, g in relation_graphs(seed).items():
        fp = four_point_delta(graph_metric(g))
        sl = slim_triangle_delta(g)
        good = fp <= 4 * sl + 1 and sl <= 6 * fp + 1
        ok &= good
        rows[name] = {"four_point": fp, "slim": sl, "holds": good}
    return Criterion(13, "four-point vs slim relation", bool(ok), len(rows), 20, "exact", rows)


# runner ----------------------------------------------------------------------

CRITERIA: dict[int, Callable[[], Criterion]] = {
    1: tree_delta,
    2: chain_sandwich,
    3: triangle_failure,
    4: tree_dimension,
    5: coornaert,
    6: snowflake_law,
    7: product_stabilization,
    8: bourdon_formula,
    9: doubling,
    10: five_r,
    11: alpha_suite,
    12: qs_envelopes,
    13: relation_lemma,
}


def _run(ids) -> tuple[list[Criterion], dict[int, float]]:
    results, times = [], {}
    for i in ids:
        start = time.perf_counter()
        try:
            results.append(CRITERIA[i]())
        except (AssertionError, ArithmeticError, ValueError) as exc:
            results.append(Criterion(i, CRITERIA[i].__name__, False, None, None, None, {"error": f"{type(exc).__name__}: {exc}"}))
        times[i] = _elapsed(start)
    return results, times


def reproduce_all(only: int | None = None) -> tuple[list[Criterion], dict[int, float]]:
    """Run the criteria (or one of them). Criterion 14 reruns the base set and compares JSON bytes."""
    if only is not None and only not in CRITERIA and only != 14:
        raise KeyError(f"no criterion {only}; choose 1..14")
    base = list(CRITERIA) if only in (None, 14) else [only]
    start = time.perf_counter()
    results, times = _run(base)
    total = _elapsed(start)
    if only in (None, 14):
        first = io.dumps([r for r in results])
        t14 = time.perf_counter()
        again, _ = _run(base)
        same = io.dumps(again) == first
        times[14] = _elapsed(t14)
        c14 = Criterion(
            14, "determinism and budget", same and total < BUDGET_SECONDS, same, True, "byte-identical",
            {"under_budget": total < BUDGET_SECONDS, "budget_seconds": BUDGET_SECONDS},
        )
        results = results + [c14] if only is None else [c14]
    return results, times


def summary_json(results: list[Criterion]) -> str:
    return io.dumps({"criteria": results, "all_passed": all(r.passed for r in results)})


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def format_table(results: list[Criterion], times: dict[int, float]) -> str:
    head = f"{'#':>2}  {'status':6}  {'value':>14}  {'target':>14}  {'tol':>14}  {'secs':>7}  name"
    lines = [head, "-" * len(head)]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(
            f"{r.id:>2}  {status:6}  {_fmt(r.value):>14}  {_fmt(r.target):>14}  {_fmt(r.tolerance):>14}  "
            f"{times.get(r.id, 0.0):7.2f}  {r.name}"
        )
    return "\n".join(lines)
