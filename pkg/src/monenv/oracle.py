"""Brute-force verifiers, independent of the closed-form derivations.

Random numbers come from counter-based Philox streams: chunk ``k`` of a run
with seed ``s`` always uses ``Philox(s).jumped(k)``, so results depend only on
``(instance, seed, samples)`` and never on how many threads evaluate chunks.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .core import DEFAULT_TOLERANCES, MonomialInstance, Tolerances, eval_f, require_n2
from .envelopes import hull_2d_slacks, lower_env_value, min_margin, sample_feasible, upper_env_value, y_slacks
from .geometry2d import bounding_box

CHUNK = 1 << 16


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for chunk ``index`` of the run seeded by ``seed``."""
    return np.random.Generator(np.random.Philox(seed).jumped(index))


def default_threads() -> int:
    cap = os.environ.get("MONENV_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def _map_chunks(fn, n_chunks, threads):
    threads = threads or default_threads()
    if threads == 1 or n_chunks == 1:
        return [fn(k) for k in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_chunks)))


def _chunk_sizes(total):
    full, rest = divmod(total, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    samples: int
    seed: int
    hits: int = 0


def _mc_from_hits(hits, samples, box_volume, seed):
    frac = hits / samples
    var = frac * (1.0 - frac) * samples / (samples - 1)
    return McEstimate(box_volume * frac, box_volume * math.sqrt(var / samples), samples, seed, hits)


def mc_box_volume(indicator, lows, highs, seed: int, samples: int, threads=None) -> McEstimate:
    """Hit-or-miss volume of ``{indicator(points)}`` inside an axis-aligned box."""
    lows, highs = np.asarray(lows, float), np.asarray(highs, float)
    sizes = _chunk_sizes(samples)

    def count(k):
        pts = stream(seed, k).uniform(lows, highs, (sizes[k], len(lows)))
        return int(np.count_nonzero(indicator(pts)))

    hits = sum(_map_chunks(count, len(sizes), threads))
    return _mc_from_hits(hits, samples, float(np.prod(highs - lows)), seed)


def mc_volume(instance: MonomialInstance, seed: int, samples: int = 1_000_000, threads=None,
              tol: Tolerances = DEFAULT_TOLERANCES) -> McEstimate:
    """Monte-Carlo volume of the two-variable hull over its bounding box."""
    require_n2(instance)
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    w1, w2 = bounding_box(instance)

    def inside(pts):
        X = np.empty((len(pts), 2))
        X[:, instance.i], X[:, instance.j] = pts[:, 0], pts[:, 1]
        return min_margin(hull_2d_slacks(instance, X, pts[:, 2], tol)) >= 0.0

    return mc_box_volume(inside, (0.0, 0.0, instance.lower), (w1, w2, instance.upper), seed, samples, threads)


def graph_combination_sampler(instance: MonomialInstance, seed: int, trials: int, slack: float = 1e-9,
                              max_points: int = 4, tol: Tolerances = DEFAULT_TOLERANCES,
                              corner_prob: float = 0.25) -> int:
    """Count convex combinations of graph points that fall outside the hull.

    Each trial takes between 1 and ``max_points`` points ``(x, f(x))`` with
    ``x`` in ``X ∩ W_12`` and a random convex combination of them.
    """
    require_n2(instance)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sizes = [min(CHUNK, trials - k) for k in range(0, trials, CHUNK)]

    def violations(k):
        rng = stream(seed, k)
        m = sizes[k]
        X = sample_feasible(instance, rng, m * max_points, corner_prob=corner_prob).reshape(m, max_points, 2)
        f = eval_f(instance, X.reshape(-1, 2)).reshape(m, max_points)
        used = rng.integers(1, max_points + 1, m)
        weights = rng.dirichlet(np.ones(max_points), m) * (np.arange(max_points) < used[:, None])
        weights /= weights.sum(axis=1, keepdims=True)
        xc = np.einsum("tk,tkd->td", weights, X)
        zc = np.einsum("tk,tk->t", weights, f)
        return int(np.count_nonzero(min_margin(hull_2d_slacks(instance, xc, zc, tol)) < -slack))

    return sum(_map_chunks(violations, len(sizes), None))


def planar_section_area(instance: MonomialInstance, z: float, tol: Tolerances = DEFAULT_TOLERANCES,
                        rtol: float = 1e-10, shift: float = 1e-13) -> float:
    """Slice area at height ``z`` found by root-finding along rays.

    On the ray ``x = t (1, r)`` (coordinates ``(x_i, x_j)``) the slice is an
    interval ``[t_lo, t_hi]`` containing the graph point ``f(x) = z``; its ends
    are the sign changes of the hull membership margin. The area is
    ``∫_p^q (t_hi**2 - t_lo**2)/2 dr``. Nothing here uses the corner formulas.

    The graph point may lie exactly on the boundary (the upper envelope is
    ``f`` itself when ``beta <= 1``), so the margin is raised by ``shift`` to
    keep rounding from pushing it outside; this moves each end by roughly
    ``shift`` relative.
    """
    require_n2(instance)
    a_j, beta = instance.a_j, instance.beta
    xtol, root_rtol = 1e-300, 4 * np.finfo(float).eps

    def margin(t, r):
        x = np.empty((1, 2))
        x[0, instance.i], x[0, instance.j] = t, r * t
        return float(min_margin(hull_2d_slacks(instance, x, z, tol))[0]) + shift

    def half_span(r):
        t_graph = (z / r**a_j) ** (1.0 / beta)
        if margin(t_graph, r) < 0:
            return 0.0
        t_lo = optimize.brentq(margin, 0.0, t_graph, args=(r,), xtol=xtol, rtol=root_rtol)
        big = 2.0 * t_graph
        while margin(big, r) >= 0:
            big *= 2.0
        t_hi = optimize.brentq(margin, t_graph, big, args=(r,), xtol=xtol, rtol=root_rtol)
        return 0.5 * (t_hi - t_lo) * (t_hi + t_lo)

    value, _ = integrate.quad(half_span, instance.p, instance.q, epsabs=0.0, epsrel=rtol, limit=200)
    return value


def cone_params_rootfind(instance: MonomialInstance) -> tuple[float, float]:
    """Solve ``l = (l - z0)**beta / gamma``, ``u = (u - z0)**beta / gamma`` numerically.

    Eliminating ``gamma`` leaves one equation in ``s = log(l - z0)``:
    ``beta * (s - log(exp(s) + u - l)) + log(u / l) = 0``, increasing in ``s``.
    Working with the gap ``l - z0`` keeps the solve well conditioned when
    ``z0`` is close to ``l``.
    """
    beta, lo, up = instance.beta, instance.lower, instance.upper
    width, target = up - lo, math.log(up / lo)

    def h(s):
        return beta * (s - np.logaddexp(s, math.log(width))) + target

    s_lo, s_hi = math.log(width) - 1.0, math.log(width) + 1.0
    while h(s_lo) > 0:
        s_lo -= 2.0 * (s_hi - s_lo)
    while h(s_hi) < 0:
        s_hi += 2.0 * (s_hi - s_lo)
    s = optimize.brentq(h, s_lo, s_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    gap = math.exp(s)
    return lo - gap, math.exp(beta * s - math.log(lo))


@dataclass(frozen=True)
class McCormickBox:
    x1_bounds: tuple[float, float]
    x2_bounds: tuple[float, float]

    def __post_init__(self):
        for lo, hi in (self.x1_bounds, self.x2_bounds):
            if not (0.0 <= lo <= hi):
                raise ValueError("box intervals must be non-empty and non-negative")


def mccormick_bounds(box: McCormickBox, x, check: bool = True):
    """Lower and upper McCormick bounds on ``x1*x2`` at ``x`` (vectorised over rows)."""
    X = np.asarray(x, dtype=float)
    x1, x2 = X[..., 0], X[..., 1]
    (l1, u1), (l2, u2) = box.x1_bounds, box.x2_bounds
    if check:
        eps = 1e-12 * max(u1, u2, 1.0)
        if np.any((x1 < l1 - eps) | (x1 > u1 + eps) | (x2 < l2 - eps) | (x2 > u2 + eps)):
            raise ValueError("point outside the McCormick box")
    lower = np.maximum(l2 * x1 + l1 * x2 - l2 * l1, u2 * x1 + u1 * x2 - u2 * u1)
    upper = np.minimum(l2 * x1 + u1 * x2 - l2 * u1, u2 * x1 + l1 * x2 - u2 * l1)
    if X.ndim == 1:
        return float(lower), float(upper)
    return lower, upper


@dataclass(frozen=True)
class TightnessReport:
    grid: int
    points: int
    wedge_mean_gap: float
    mccormick_mean_gap: float
    dominance_violations: int
    strictly_tighter: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def tightness_comparison(instance: MonomialInstance, grid: int = 100, box: McCormickBox | None = None,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> TightnessReport:
    """Mean z-gap of the wedge hull vs. the z-clipped McCormick relaxation.

    Compared on the ``grid x grid`` points of ``box`` (default: the bounding
    box of ``X ∩ W_12``) that lie in ``Y``, where both relaxations apply.
    """
    require_n2(instance)
    if instance.exponents != (1.0, 1.0):
        raise ValueError("the McCormick comparison needs a bilinear instance, a = (1, 1)")
    if box is None:
        w1, w2 = bounding_box(instance)
        box = McCormickBox((0.0, w1), (0.0, w2))
    g1 = np.linspace(*box.x1_bounds, grid)
    g2 = np.linspace(*box.x2_bounds, grid)
    P = np.array(np.meshgrid(g1, g2, indexing="ij")).reshape(2, -1).T
    X = np.empty_like(P)
    X[:, instance.i], X[:, instance.j] = P[:, 0], P[:, 1]
    inY = min_margin(y_slacks(instance, X, tol)) >= 0.0
    X, P = X[inY], P[inY]
    lo, up = instance.lower, instance.upper
    wedge_gap = np.minimum(up, upper_env_value(instance, X, tol)) - np.maximum(lo, lower_env_value(instance, X, tol))
    zl, zu = mccormick_bounds(box, P, check=False)
    mc_gap = np.maximum(0.0, np.minimum(up, zu) - np.maximum(lo, zl))
    slack = 1e-12 * up
    return TightnessReport(
        grid=grid,
        points=int(len(X)),
        wedge_mean_gap=float(wedge_gap.mean()) if len(X) else 0.0,
        mccormick_mean_gap=float(mc_gap.mean()) if len(X) else 0.0,
        dominance_violations=int(np.count_nonzero(wedge_gap > mc_gap + slack)),
        strictly_tighter=bool(len(X)) and float(wedge_gap.mean()) < float(mc_gap.mean()),
    )
