"""Quasimetrics, snowflakes and the chain construction.

A quasimetric q satisfies q(x,y) <= K max(q(x,z), q(z,y)). When K <= 2 the
chain infimum of q is a metric comparable to q within a factor 2K; for
larger K one snowflakes first with exponent ln2/lnK.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import CertificateFailure, DegenerateChainError, InputError
from .metric_core import FiniteMetricSpace

SLACK = 1e-12


def _max_ratio(Q: np.ndarray, additive: bool) -> float:
    n = len(Q)
    worst = 1.0
    off = ~np.eye(n, dtype=bool)
    for z in range(n):
        a, b = Q[:, z][:, None], Q[z, :][None, :]
        denom = a + b if additive else np.maximum(a, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(off, Q / denom, 0.0)
        worst = max(worst, float(r.max()))
    return worst


@dataclass(frozen=True)
class QuasimetricSpace:
    """Symmetric positive kernel with its minimal max-form constant K.

    ``K_additive`` is the minimal K' with q(x,y) <= K'(q(x,z) + q(z,y)).
    Build instances through :func:`validate_quasimetric`.
    """

    points: tuple
    q: np.ndarray
    K: float
    K_additive: float

    def __len__(self):
        return len(self.points)

    def index(self, x) -> int:
        try:
            return self.points.index(x)
        except ValueError:
            raise InputError(f"unknown point id {x!r}") from None


def validate_quasimetric(points: Sequence[Hashable], q) -> QuasimetricSpace:
    points = tuple(points)
    Q = np.array(q, dtype=float)
    n = len(points)
    if Q.shape != (n, n):
        raise InputError(f"kernel shape {Q.shape} does not match {n} points")
    if len(set(points)) != n:
        raise InputError("duplicate point ids")
    if not np.all(np.isfinite(Q)):
        raise InputError("kernel has non-finite entries")
    if np.any(Q < 0):
        i, j = np.argwhere(Q < 0)[0]
        raise InputError(f"negative entry q({points[i]!r},{points[j]!r})")
    if np.any(np.diag(Q) != 0):
        raise InputError("q(x,x) must be 0")
    if np.any(Q + np.eye(n) == 0):
        i, j = np.argwhere(Q + np.eye(n) == 0)[0]
        raise InputError(f"q({points[i]!r},{points[j]!r}) = 0 for distinct points")
    if np.any(Q != Q.T):
        i, j = np.argwhere(Q != Q.T)[0]
        raise InputError(f"asymmetric entries at ({points[i]!r},{points[j]!r})")
    K = _max_ratio(Q, additive=False)
    K_add = _max_ratio(Q, additive=True)
    if not (K_add <= K * (1 + SLACK) and K <= 2 * K_add * (1 + SLACK)):
        raise CertificateFailure(f"K={K} and K'={K_add} violate K' <= K <= 2K'")
    Q.setflags(write=False)
    return QuasimetricSpace(points, Q, K, K_add)


def snowflake(s: QuasimetricSpace, eps: float) -> QuasimetricSpace:
    """Pointwise power q**eps, with K recomputed from scratch (it equals K**eps)."""
    if not 0 < eps <= 1:
        raise InputError(f"snowflake exponent must lie in (0, 1], got {eps}")
    if eps == 1:
        return s
    out = validate_quasimetric(s.points, s.q**eps)
    if abs(out.K - s.K**eps) > SLACK * s.K**eps:
        raise CertificateFailure(f"snowflaked K={out.K} differs from K**eps={s.K ** eps}")
    return out


def _closure(Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Floyd-Warshall on the complete graph; returns distances and next-hop table."""
    n = len(Q)
    D = Q.copy()
    nxt = np.tile(np.arange(n), (n, 1))
    for k in range(n):
        via = D[:, k, None] + D[None, k, :]
        better = via < D
        D = np.where(better, via, D)
        nxt = np.where(better, nxt[:, k, None], nxt)
    return D, nxt


def _chain(nxt: np.ndarray, i: int, j: int) -> list[int]:
    path = [i]
    while path[-1] != j and len(path) <= len(nxt):
        path.append(int(nxt[path[-1], j]))
    return path


def chain_metric(s: QuasimetricSpace) -> FiniteMetricSpace:
    """Infimum of chain sums, i.e. shortest paths in the complete q-weighted graph."""
    D, nxt = _closure(np.asarray(s.q))
    n = len(s)
    zero = np.argwhere((D <= 0) & ~np.eye(n, dtype=bool))
    if len(zero):
        i, j = zero[0]
        chain = [s.points[k] for k in _chain(nxt, int(i), int(j))]
        raise DegenerateChainError(f"chain distance between {s.points[i]!r} and {s.points[j]!r} collapses to 0", chain)
    Q = np.asarray(s.q)
    if np.any(D > Q):
        raise CertificateFailure("chain distance exceeds q")
    if s.K <= 2 and np.any(Q > 2 * s.K * D * (1 + SLACK)):
        i, j = np.argwhere(Q > 2 * s.K * D * (1 + SLACK))[0]
        raise CertificateFailure(f"q > 2K d at ({s.points[i]!r},{s.points[j]!r})")
    return FiniteMetricSpace(s.points, D)


def metric_exponent(K: float) -> float:
    return 1.0 if K <= 2 else math.log(2) / math.log(K)


def metric_from_quasimetric(s: QuasimetricSpace) -> tuple[float, FiniteMetricSpace]:
    """Snowflake to K**eps <= 2, then take chains.

    Returns the exponent used and a metric d with
    q**eps / (2 K**eps) <= d <= q**eps.
    """
    eps = metric_exponent(s.K)
    flake = snowflake(s, eps)
    m = chain_metric(flake)
    Qe = np.asarray(flake.q)
    lower = Qe / (2 * s.K**eps)
    if np.any(m.dist < lower * (1 - SLACK)) or np.any(m.dist > Qe * (1 + SLACK)):
        raise CertificateFailure("chain metric leaves the q**eps sandwich")
    return eps, m


@dataclass(frozen=True)
class VisualParameterBound:
    """Largest visual parameter a for a given hyperbolicity constant.

    ``printed`` is e**(2/delta); ``derived`` is 2**(1/delta), which is what
    the requirement K = a**delta <= 2 gives.
    """

    delta: float
    printed: float
    derived: float


def visual_metric_existence_bound(delta: float) -> VisualParameterBound:
    if delta < 0:
        raise InputError("delta must be nonnegative")
    if delta == 0:
        return VisualParameterBound(0.0, math.inf, math.inf)
    return VisualParameterBound(delta, math.exp(2 / delta), 2 ** (1 / delta))


def random_quasimetric(n: int, rng: np.random.Generator, max_K: float = 2.0) -> QuasimetricSpace:
    """Random symmetric kernel, snowflaked if needed so that K <= max_K."""
    kind = rng.integers(3)
    if kind == 0:
        # entries in [1, 2]: any ratio is at most 2
        upper = rng.uniform(1.0, 2.0, size=(n, n))
    elif kind == 1:
        upper = rng.lognormal(0.0, 1.5, size=(n, n))
    else:
        pts = rng.normal(size=(n, 2))
        upper = np.linalg.norm(pts[:, None] - pts[None], axis=-1) ** rng.uniform(1.0, 3.0) + 1e-3
    Q = np.triu(upper, 1)
    Q = Q + Q.T
    s = validate_quasimetric(range(n), Q)
    if s.K > max_K:
        eps = math.log(max_K) / math.log(s.K)
        s = validate_quasimetric(range(n), Q**eps)
        if s.K > max_K:
            s = validate_quasimetric(range(n), Q ** (eps * (1 - 1e-9)))
    return s


__all__ = [
    "QuasimetricSpace",
    "VisualParameterBound",
    "validate_quasimetric",
    "snowflake",
    "chain_metric",
    "metric_exponent",
    "metric_from_quasimetric",
    "visual_metric_existence_bound",
    "random_quasimetric",
]
