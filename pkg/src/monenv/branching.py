"""Branching-point selection on the ratio ``x_j/x_i`` or on the value ``z``.

Branching at ratio ``r`` yields the children with wedges ``(p, r)`` and
``(r, q)``; branching at value ``nu`` yields the children with bounds
``(l, nu)`` and ``(nu, u)``. Children are scored by the closed-form volume of
their own convex hulls.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DEFAULT_TOLERANCES, MonomialInstance, Tolerances, require_n2
from .geometry2d import volume_closed_form

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class BranchKind(enum.Enum):
    RATIO = "ratio"
    VALUE = "value"


class ConvergenceError(RuntimeError):
    """A branching search failed to converge (points at a volume-function bug)."""


@dataclass(frozen=True)
class BranchResult:
    kind: BranchKind
    point: float
    left_volume: float
    right_volume: float

    @property
    def total(self) -> float:
        return self.left_volume + self.right_volume

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "point": self.point,
            "left_volume": self.left_volume,
            "right_volume": self.right_volume,
            "total": self.total,
        }


def _interval(instance, kind):
    if kind is BranchKind.RATIO:
        return instance.p, instance.q
    return instance.lower, instance.upper


def children(instance: MonomialInstance, kind: BranchKind, t: float):
    lo, hi = _interval(instance, kind)
    if not (lo < t < hi):
        raise ValueError(f"branch point {t} outside ({lo}, {hi})")
    if kind is BranchKind.RATIO:
        return instance.with_wedge(lo, t), instance.with_wedge(t, hi)
    return instance.with_bounds(lo, t), instance.with_bounds(t, hi)


def children_volumes(instance, kind, t, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, float]:
    require_n2(instance)
    left, right = children(instance, kind, t)
    return volume_closed_form(left, tol), volume_closed_form(right, tol)


def children_volumes_ratio(instance, r, tol: Tolerances = DEFAULT_TOLERANCES):
    return children_volumes(instance, BranchKind.RATIO, r, tol)


def children_volumes_value(instance, nu, tol: Tolerances = DEFAULT_TOLERANCES):
    return children_volumes(instance, BranchKind.VALUE, nu, tol)


def balanced_point(instance: MonomialInstance, kind: BranchKind, tol: float = 1e-8,
                   bracket: Optional[tuple[float, float]] = None, max_iter: int = 300,
                   tolerances: Tolerances = DEFAULT_TOLERANCES) -> BranchResult:
    """Branch point whose two children have equal hull volume.

    Bisection on ``g(t) = V_left(t) - V_right(t)``, which increases strictly
    from ``-V`` to ``+V`` across the interval. Stops once
    ``|g| <= tol * (V_left + V_right)``.
    """
    require_n2(instance)
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = bracket if bracket is not None else _interval(instance, kind)
    if bracket is not None:
        g_lo = np.subtract(*children_volumes(instance, kind, lo, tolerances))
        g_hi = np.subtract(*children_volumes(instance, kind, hi, tolerances))
        if g_lo > 0 or g_hi < 0:
            raise ValueError("bracket does not enclose the balanced point")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        left, right = children_volumes(instance, kind, mid, tolerances)
        g = left - right
        if abs(g) <= tol * (left + right):
            return BranchResult(kind, mid, left, right)
        if g < 0:
            lo = mid
        else:
            hi = mid
        if not (lo < 0.5 * (lo + hi) < hi):
            break
    raise ConvergenceError(f"balanced {kind.value} branching did not reach tol={tol}")


def _golden_min(fn, a, b, width):
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    return (c, fc) if fc <= fd else (d, fd)


def search_interval(instance, kind, eps: Optional[float] = None) -> tuple[float, float]:
    lo, hi = _interval(instance, kind)
    if eps is None:
        eps = 1e-3 * (hi - lo)
    if not (lo + eps < hi - eps):
        raise ValueError(f"empty {kind.value} search interval for eps={eps}")
    return lo + eps, hi - eps


def min_volume_family(instance: MonomialInstance, kind: BranchKind, eps: Optional[float] = None,
                      tol: float = 1e-8, grid: int = 64,
                      tolerances: Tolerances = DEFAULT_TOLERANCES) -> BranchResult:
    """Minimise the total child volume over one branch family.

    A uniform ``grid`` seeds the search; golden-section refinement runs on the
    two cells around the best grid point until the bracket is narrower than
    ``tol`` times the interval width. Only a local refinement: unimodality of
    the total volume is not guaranteed.
    """
    require_n2(instance)
    a, b = search_interval(instance, kind, eps)
    ts = np.linspace(a, b, grid)
    totals = np.array([sum(children_volumes(instance, kind, t, tolerances)) for t in ts])
    k = int(np.argmin(totals))  # first minimum: ties go to the smaller point
    best_t, best = float(ts[k]), float(totals[k])
    lo, hi = float(ts[max(k - 1, 0)]), float(ts[min(k + 1, grid - 1)])
    t, val = _golden_min(lambda s: sum(children_volumes(instance, kind, s, tolerances)), lo, hi, tol * (b - a))
    if val < best:
        best_t = t
    left, right = children_volumes(instance, kind, best_t, tolerances)
    return BranchResult(kind, best_t, left, right)


def min_volume_branch(instance: MonomialInstance, eps: Optional[float] = None, tol: float = 1e-8,
                      grid: int = 64, tolerances: Tolerances = DEFAULT_TOLERANCES) -> BranchResult:
    """Better of the ratio and value minimisers (ratio wins exact ties).

    ``eps`` is an absolute margin applied to both intervals; by default each
    family uses ``1e-3`` of its own interval width.
    """
    ratio = min_volume_family(instance, BranchKind.RATIO, eps, tol, grid, tolerances)
    value = min_volume_family(instance, BranchKind.VALUE, eps, tol, grid, tolerances)
    return ratio if ratio.total <= value.total else value
