"""Command-line front end. Exit codes: 0 ok, 1 failed check or certificate, 2 bad input."""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import acceptance, io
from .dimension import (
    Ball,
    box_dimension_fit,
    cantor_ball_measure,
    cantor_balls,
    coornaert_dimension,
    growth_rate,
    hausdorff_upper_bound,
    mdp_lower_bound,
    product_metric,
    tree_ball_measure,
    tree_balls,
    tree_cover_family,
)
from .errors import CertificateFailure, InputError
from .metric_core import (
    FOUR_POINT_CAP,
    GEODESIC_CAP,
    alpha_limit_check,
    bourdon_alpha,
    disk_point,
    equiradial_decomposition,
    four_point_delta,
    four_point_delta_estimate,
    graph_metric,
    gromov_product,
    gromov_vs_geodesic_distance_check,
    slim_triangle_delta,
    thread_count,
)
from .plotting import loglog_svg
from .qs_props import (
    SampledMap,
    annulus_distortion_check,
    control_envelope,
    cross_ratio,
    doubling_constant_metric,
    envelope_shape,
    uniform_disconnection_constant,
    uniformly_perfect_constant,
)
from .quasimetric import chain_metric, metric_from_quasimetric, snowflake
from .round_tree import (
    bourdon_report,
    build_round_tree_model,
    coxeter_bounds,
    product_stabilization_check,
    random_group_lower_bound,
    rt_lower_bound,
    validate_round_tree,
)
from .tree_boundary import RootedTree, cover_table, cylinder_rows, doubling_constant

DEFAULT_SEED = acceptance.DEFAULT_SEED


def real(text: str) -> float:
    """Float parser that also accepts 'e'."""
    if text.strip().lower() == "e":
        return math.e
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def disk(text: str) -> complex:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None
    return complex(x, y)


def ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# --- shared input handling ----------------------------------------------------


def _metric(args):
    if getattr(args, "graph", None):
        return graph_metric(io.read_graph(args.graph))
    if getattr(args, "metric", None):
        return io.read_metric_csv(args.metric)
    raise InputError("give --graph or --metric")


def _tree(args) -> RootedTree:
    if getattr(args, "tree", None):
        return io.read_tree_spec(args.tree)
    if args.root_degree is None or args.branching is None:
        raise InputError("give --tree FILE or both --root-degree and --branching")
    return RootedTree(args.root_degree, args.branching, args.depth)


def _tree_spec(t: RootedTree) -> dict:
    spec = {"root_degree": t.root_degree, "branching": t.branching, "depth": t.depth}
    if t.overrides:
        spec["children"] = {".".join(map(str, k)): v for k, v in sorted(t.overrides.items())}
        spec["default"] = t.branching
    return spec


def _emit(args, payload) -> None:
    text = io.dumps(payload)
    if getattr(args, "out", None):
        io.write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _emit_matrix(args, key, ids, D, extra=None) -> None:
    if getattr(args, "format", "json") == "csv":
        text = io.metric_to_csv(ids, D)
        if args.out:
            io.write_atomic(args.out, text)
        else:
            sys.stdout.write(text)
        return
    _emit(args, {key: np.asarray(D), "points": list(map(str, ids)), **(extra or {})})


def _add_tree_args(p, depth_default=12):
    p.add_argument("--tree", help="tree spec JSON")
    p.add_argument("--root-degree", type=int)
    p.add_argument("--branching", type=int)
    p.add_argument("--depth", type=int, default=depth_default)


def _add_space_args(p, graph_only=False):
    p.add_argument("--graph", help="edge list or graph JSON", required=graph_only)
    if not graph_only:
        p.add_argument("--metric", help="square CSV distance matrix")


# --- subcommands -----------------------------------------------------------------


def cmd_delta(args):
    m = _metric(args)
    if len(m) > args.cap and args.estimate:
        value = four_point_delta_estimate(m, args.samples, args.seed)
        _emit(args, {"four_point_delta": value, "exact": False, "points": len(m), "samples": args.samples, "seed": args.seed})
    else:
        _emit(args, {"four_point_delta": four_point_delta(m, args.cap), "exact": True, "points": len(m)})
    return 0


def cmd_gromov(args):
    m = _metric(args)
    out = {"gromov_product": gromov_product(m, args.x, args.y, args.p)}
    if args.equiradial:
        out["equiradial_decomposition"] = list(equiradial_decomposition(m, args.p, args.x, args.y))
    _emit(args, out)
    return 0


def cmd_slim(args):
    g = io.read_graph(args.graph)
    slim = slim_triangle_delta(g, args.cap)
    out = {"slim_triangle_delta": slim}
    if args.check:
        p, x, y = args.check
        chk = gromov_vs_geodesic_distance_check(g, p, x, y, slim=slim, cap=args.cap)
        out["gromov_vs_geodesic_distance_check"] = chk._asdict()
    _emit(args, out)
    return 0


def cmd_alpha(args):
    if args.rays:
        lim = alpha_limit_check(args.p, args.rays[0], args.rays[1], args.t)
        _emit(args, {"alpha_limit_check": lim._asdict()})
    else:
        if args.y is None or args.y2 is None:
            raise InputError("give --y and --y2, or --rays with --t")
        _emit(args, {"bourdon_alpha": bourdon_alpha(disk_point(args.p), args.y, args.y2)})
    return 0


def cmd_quasimetric(args):
    s = io.read_quasimetric_csv(args.matrix)
    eps, m = metric_from_quasimetric(s)
    _emit_matrix(args, "matrix", s.points, m.dist, {"K": s.K, "K_additive": s.K_additive, "epsilon": eps})
    return 0


def cmd_chain(args):
    s = io.read_quasimetric_csv(args.matrix)
    m = chain_metric(s)
    _emit_matrix(args, "chain_metric", s.points, m.dist, {"K": s.K})
    return 0


def cmd_snowflake(args):
    s = snowflake(io.read_quasimetric_csv(args.matrix), args.eps)
    _emit_matrix(args, "snowflake", s.points, s.q, {"K": s.K, "K_additive": s.K_additive, "epsilon": args.eps})
    return 0


def _tree_mdp_certificate(t: RootedTree, a: float, s: float, C: float, k_max: int) -> dict:
    cert = mdp_lower_bound(tree_ball_measure(t, a), tree_balls(t, a, k_max), s, C)
    return {
        "kind": "mdp_tree",
        "tree": _tree_spec(t),
        "a": a,
        "k_max": k_max,
        "s": s,
        "C": C,
        "all_pass": cert.all_pass,
        "violations": len(cert.violations),
        "balls": [{"center": list(b.center), "radius": b.radius, "measure": b.measure, "bound": b.bound, "passed": b.passed} for b in cert.balls],
    }


def cmd_treedim(args):
    t = _tree(args)
    depths = range(1, t.depth + 1)
    table = cover_table(t, args.a, depths)
    fit = box_dimension_fit(table, use_all=True)
    s = fit.slope if args.s is None else args.s
    k_max = min(t.depth, args.mdp_depth)
    mdp = _tree_mdp_certificate(t, args.a, s, args.C, k_max)
    fam = tree_cover_family(t, args.a, depths)
    verdict = hausdorff_upper_bound(fam, s + args.margin)
    out_dir = Path(args.out_dir)
    fit_cert = {"kind": "box_fit", "table": table, "use_all": True, "slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared}
    io.write_atomic(out_dir / "fit.json", io.dumps(fit_cert))
    io.write_atomic(out_dir / "mdp.json", io.dumps(mdp))
    io.write_atomic(out_dir / "cylinders.csv", io.rows_to_csv(("address", "depth", "measure", "diameter_exponent"), cylinder_rows(t, range(1, k_max + 1))))
    io.write_atomic(out_dir / "fit.svg", loglog_svg(fit, title=f"box counting, a = {args.a:.6g}"))
    _emit(args, {
        "box_dimension_fit": {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared},
        "hausdorff_upper_bound": {"s": verdict.s, "supports": verdict.supports},
        "mdp_lower_bound": {"s": s, "C": args.C, "k_max": k_max, "all_pass": mdp["all_pass"], "violations": mdp["violations"]},
        "files": sorted(str(out_dir / f) for f in ("fit.json", "mdp.json", "cylinders.csv", "fit.svg")),
    })
    return 0 if mdp["all_pass"] and verdict.supports else 1


def cmd_mdp(args):
    if args.cantor:
        cert = mdp_lower_bound(cantor_ball_measure, cantor_balls(args.cantor), args.s, args.C)
        payload = {
            "kind": "mdp_cantor", "k": args.cantor, "s": args.s, "C": args.C,
            "all_pass": cert.all_pass, "violations": len(cert.violations),
            "balls": [{"center": b.center, "radius": b.radius, "measure": b.measure, "bound": b.bound, "passed": b.passed} for b in cert.balls],
        }
    else:
        t = _tree(args)
        payload = _tree_mdp_certificate(t, args.a, args.s, args.C, min(args.k_max, t.depth))
    _emit(args, payload)
    return 0 if payload["all_pass"] else 1


def cmd_doubling(args):
    if args.graph or args.metric:
        rep = doubling_constant_metric(_metric(args), exact_limit=args.exact_limit)
        _emit(args, {"doubling_constant_metric": rep})
    else:
        cert = doubling_constant(_tree(args), args.a, args.depth)
        _emit(args, {"doubling_constant": cert})
    return 0


def cmd_growth(args):
    if args.graph:
        series = growth_rate(io.read_graph(args.graph), args.p, args.n_max)
    else:
        series = growth_rate(_tree(args), None, args.n_max)
    _emit(args, {"growth_rate": series})
    return 0


def cmd_coornaert(args):
    h = args.h
    if h is None:
        h = growth_rate(_tree(args), None, args.n_max).h
    _emit(args, {"coornaert_dimension": coornaert_dimension(h, args.a), "h": h, "a": args.a})
    return 0


def cmd_qs(args):
    f = SampledMap(io.read_metric_csv(args.domain), io.read_metric_csv(args.codomain), io.read_pairing_csv(args.pairing))
    env = control_envelope(f)
    out = {"control_envelope": {"lam": env.lam, "alpha": env.alpha, "worst_triple": list(env.worst_triple), "samples": len(env.samples)}}
    code = 0
    if args.phi:
        lam, alpha = args.phi
        rep = annulus_distortion_check(f, lambda t: lam * float(envelope_shape(t, alpha)))
        out["annulus_distortion_check"] = rep
        code = 0 if rep.passed else 1
    _emit(args, out)
    return code


def cmd_crossratio(args):
    _emit(args, {"cross_ratio": cross_ratio(_metric(args), *args.z)})
    return 0


def cmd_perfect(args):
    _emit(args, {"uniformly_perfect_constant": uniformly_perfect_constant(_metric(args))})
    return 0


def cmd_disconnect(args):
    _emit(args, {"uniform_disconnection_constant": uniform_disconnection_constant(_metric(args))})
    return 0


def cmd_roundtree(args):
    out = {"rt_lower_bound": rt_lower_bound(args.V, args.H)}
    code = 0
    if args.depth:
        model = build_round_tree_model(args.V, args.H, args.depth)
        fit = model.box_fit()
        out["model"] = {"points": len(model), "box_counts": model.box_counts(), "slope": fit.slope}
    if args.depths:
        table = product_stabilization_check(args.V, args.H, args.depths)
        out["product_stabilization_check"] = table
    if args.complex:
        rep = validate_round_tree(io.read_complex_json(args.complex), args.V, args.H)
        out["validate_round_tree"] = {"passed": rep.passed, "item1": rep.item1, "item2": rep.item2, "item3": rep.item3, "item4": rep.item4, "violations": rep.violations}
        code = 0 if rep.passed else 1
    _emit(args, out)
    return code


def cmd_bounds(args):
    if args.kind == "bourdon":
        _emit(args, {"bourdon_cdim": bourdon_report(args.p, args.q)})
    elif args.kind == "coxeter":
        _emit(args, {"coxeter_bounds": coxeter_bounds(args.m, args.M)})
    else:
        _emit(args, {"random_group_lower_bound": random_group_lower_bound(args.m, args.d, args.length, args.C)})
    return 0


def cmd_product(args):
    mA, mB = io.read_metric_csv(args.metric_a), io.read_metric_csv(args.metric_b)
    m = product_metric(mA, mB, args.mode)
    ids = [f"{a}|{b}" for a, b in m.points]
    _emit_matrix(args, "product_metric", ids, m.dist, {"mode": args.mode})
    return 0


def cmd_reproduce(args):
    try:
        results, times = acceptance.reproduce_all(args.only)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    print(acceptance.format_table(results, times))
    print(f"total {sum(times.values()):.2f}s")
    if args.out:
        io.write_atomic(args.out, acceptance.summary_json(results))
    return 0 if all(r.passed for r in results) else 1


# --- verify --------------------------------------------------------------------


def _verify_box_fit(c: dict) -> list[str]:
    fit = box_dimension_fit([tuple(e) for e in c["table"]], use_all=c.get("use_all", False))
    errs = []
    for key in ("slope", "intercept"):
        if abs(getattr(fit, key) - c[key]) > 1e-9:
            errs.append(f"{key}: file says {c[key]}, refit gives {getattr(fit, key)}")
    return errs


def _verify_mdp(c: dict) -> list[str]:
    if c["kind"] == "mdp_tree":
        from .io import tree_from_spec

        measure = tree_ball_measure(tree_from_spec(c["tree"]), float(c["a"]))

        def mu(b):
            return measure(Ball(tuple(b["center"]), b["radius"]))
    else:

        def mu(b):
            return cantor_ball_measure(Ball(b["center"], b["radius"]))

    s, C = float(c["s"]), float(c["C"])
    errs = []
    passed_all = True
    for i, b in enumerate(c["balls"]):
        m = float(mu(b))
        bound = C * float(b["radius"]) ** s
        ok = m <= bound * (1 + 1e-12)
        passed_all &= ok
        if abs(m - b["measure"]) > 1e-12 * max(1.0, m):
            errs.append(f"ball {i}: measure {b['measure']} recomputes to {m}")
        if ok != b["passed"]:
            errs.append(f"ball {i}: pass flag disagrees")
    if passed_all != c["all_pass"]:
        errs.append("all_pass flag disagrees with the balls")
    if not passed_all:
        errs.append("certificate records a failing ball")
    return errs


VERIFIERS = {"box_fit": _verify_box_fit, "mdp_tree": _verify_mdp, "mdp_cantor": _verify_mdp}


def cmd_verify(args):
    c = io._load_json(args.certificate)
    kind = c.get("kind") if isinstance(c, dict) else None
    if kind not in VERIFIERS:
        raise InputError(f"{args.certificate}: unknown certificate kind {kind!r}")
    try:
        errs = VERIFIERS[kind](c)
    except (KeyError, TypeError) as exc:
        raise InputError(f"{args.certificate}: malformed certificate ({exc})") from None
    _emit(args, {"certificate": str(args.certificate), "kind": kind, "valid": not errs, "problems": errs})
    return 0 if not errs else 1


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypb", description="Hyperbolicity, boundaries and dimension at desk scale.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the result here (atomic) instead of stdout")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.set_defaults(func=fn)
        return p

    p = add("delta", cmd_delta, "four-point hyperbolicity constant")
    _add_space_args(p)
    p.add_argument("--cap", type=int, default=FOUR_POINT_CAP)
    p.add_argument("--estimate", action="store_true", help="sample quadruples when above the cap")
    p.add_argument("--samples", type=int, default=200_000)

    p = add("gromov", cmd_gromov, "Gromov product (x|y)_p")
    _add_space_args(p)
    for k in ("--p", "--x", "--y"):
        p.add_argument(k, required=True)
    p.add_argument("--equiradial", action="store_true")

    p = add("slim", cmd_slim, "slim-triangle constant of an unweighted graph")
    _add_space_args(p, graph_only=True)
    p.add_argument("--cap", type=int, default=GEODESIC_CAP)
    p.add_argument("--check", nargs=3, metavar=("P", "X", "Y"))

    p = add("alpha", cmd_alpha, "alpha_p in the disk model")
    p.add_argument("--p", type=disk, default=0j)
    p.add_argument("--y", type=disk)
    p.add_argument("--y2", type=disk)
    p.add_argument("--rays", type=real, nargs=2, metavar=("ANGLE1", "ANGLE2"))
    p.add_argument("--t", type=real, default=10.0)

    for name, fn, help_ in (
        ("quasimetric", cmd_quasimetric, "validate a quasimetric and build a comparable metric"),
        ("chain", cmd_chain, "chain metric of a quasimetric"),
        ("snowflake", cmd_snowflake, "raise a quasimetric to a power"),
    ):
        p = add(name, fn, help_)
        p.add_argument("--matrix", required=True)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if name == "snowflake":
            p.add_argument("--eps", type=real, required=True)

    p = add("treedim", cmd_treedim, "box fit, cover verdict and MDP certificate for a tree boundary")
    _add_tree_args(p)
    p.add_argument("--a", type=real, required=True)
    p.add_argument("--s", type=real, help="exponent for the MDP check (default: fitted slope)")
    p.add_argument("--C", type=real, default=0.75)
    p.add_argument("--margin", type=real, default=0.05, help="upper-bound verdict is tested at s + margin")
    p.add_argument("--mdp-depth", type=int, default=8)
    p.add_argument("--out-dir", default="treedim_out")

    p = add("mdp", cmd_mdp, "mass distribution certificate")
    _add_tree_args(p)
    p.add_argument("--a", type=real, default=2.0)
    p.add_argument("--s", type=real, required=True)
    p.add_argument("--C", type=real, required=True)
    p.add_argument("--k-max", type=int, default=8)
    p.add_argument("--cantor", type=int, help="use the Cantor set at this depth instead of a tree")

    p = add("doubling", cmd_doubling, "doubling constant")
    _add_tree_args(p, depth_default=6)
    _add_space_args(p)
    p.add_argument("--a", type=real, default=2.0)
    p.add_argument("--exact-limit", type=int, default=12)

    p = add("growth", cmd_growth, "ball growth and volume entropy")
    _add_tree_args(p)
    p.add_argument("--graph")
    p.add_argument("--p", help="basepoint vertex")
    p.add_argument("--n-max", type=int, default=20)

    p = add("coornaert", cmd_coornaert, "boundary dimension h / ln a")
    _add_tree_args(p)
    p.add_argument("--h", type=real)
    p.add_argument("--a", type=real, required=True)
    p.add_argument("--n-max", type=int, default=20)

    p = add("qs", cmd_qs, "control envelope and annulus check of a sampled map")
    p.add_argument("--domain", required=True)
    p.add_argument("--codomain", required=True)
    p.add_argument("--pairing", required=True)
    p.add_argument("--phi", type=real, nargs=2, metavar=("LAMBDA", "ALPHA"))

    p = add("crossratio", cmd_crossratio, "metric cross-ratio")
    _add_space_args(p)
    p.add_argument("--z", nargs=4, required=True)

    p = add("perfect", cmd_perfect, "uniform perfectness constant")
    _add_space_args(p)
    p = add("disconnect", cmd_disconnect, "uniform disconnection constant")
    _add_space_args(p)

    p = add("roundtree", cmd_roundtree, "round-tree model, stabilization and complex validation")
    p.add_argument("--V", type=int, required=True)
    p.add_argument("--H", type=int, required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--depths", type=ints)
    p.add_argument("--complex")

    p = add("bounds", cmd_bounds, "closed-form conformal dimension bounds")
    bsub = p.add_subparsers(dest="kind", required=True)
    b = bsub.add_parser("bourdon", parents=[common])
    b.add_argument("--p", type=int, required=True)
    b.add_argument("--q", type=int, required=True)
    b = bsub.add_parser("coxeter", parents=[common])
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--M", type=int, required=True)
    b = bsub.add_parser("random", parents=[common])
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--d", type=real, required=True)
    b.add_argument("--length", "--l", type=int, required=True)
    b.add_argument("--C", type=real, required=True)

    p = add("product", cmd_product, "product of two metrics")
    p.add_argument("--metric-a", required=True)
    p.add_argument("--metric-b", required=True)
    p.add_argument("--mode", choices=("max", "sum"), default="max")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = add("reproduce", cmd_reproduce, "run the acceptance criteria")
    p.add_argument("--only", type=int)

    p = add("verify", cmd_verify, "re-check a certificate file")
    p.add_argument("certificate")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        thread_count()
        return args.func(args)
    except CertificateFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except (InputError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (AssertionError, ArithmeticError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
