"""Envelope functions and membership tests for the convex sets of the problem.

Every membership test is built from named constraints ``lhs <= rhs``. Each
constraint contributes a relative slack ``(rhs - lhs) / max(|lhs|, |rhs|)``;
the verdict reports the smallest one. The slack computations are vectorised
so the Monte-Carlo and sampling oracles can call them on large batches.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOLERANCES,
    MonomialInstance,
    Tolerances,
    as_points,
    cone_params,
    require_n2,
    wedge_params,
)


class EnvelopeKind(enum.Enum):
    UPPER_ORTHANT = "orthant"
    UPPER_WEDGE = "upper"
    LOWER_WEDGE_2D = "lower"
    HULL_2D = "hull"
    Y_PROJECTION = "Y"

    @property
    def needs_n2(self) -> bool:
        return self in (EnvelopeKind.LOWER_WEDGE_2D, EnvelopeKind.HULL_2D, EnvelopeKind.Y_PROJECTION)


@dataclass(frozen=True)
class MembershipVerdict:
    inside: bool
    margin: float
    binding: str

    def to_dict(self) -> dict:
        return {"inside": self.inside, "margin": self.margin, "binding": self.binding}


# Tie-break order for the binding constraint: among slacks within tolerance of
# the minimum, the earliest name here wins.
_PRIORITY = (
    "z ≤ u",
    "z ≥ ℓ",
    "lower envelope",
    "upper envelope",
    "Y cut",
    "f ≥ ℓ",
    "wedge",
    "x ≥ 0",
)


def _log_monomial(instance, X, idx=None):
    a = np.asarray(instance.exponents)
    if idx is not None:
        X, a = X[:, idx], a[list(idx)]
    with np.errstate(divide="ignore"):
        return np.log(X) @ a


def _regime_high(instance, tol, regime):
    if regime is None or regime == "auto":
        return cone_params(instance, tol).high
    if regime not in ("high", "low"):
        raise ValueError(f"unknown regime {regime!r}")
    return regime == "high"


def _upper_values(instance, X, tol, regime=None):
    cone = cone_params(instance, tol)
    logf = _log_monomial(instance, X)
    if _regime_high(instance, tol, regime):
        return cone.z0 + np.exp((cone.log_gamma + logf) / cone.beta)
    return np.exp(logf)


def _transport_coordinate(instance, X, tol):
    w = wedge_params(instance, tol)
    t = w.d_j * X[:, instance.i] - w.d_i * X[:, instance.j]
    if np.any(t < 0):
        raise ValueError("d_j*x_i - d_i*x_j < 0: point outside the non-negative orthant")
    return t


def _lower_values(instance, X, tol, regime=None):
    cone = cone_params(instance, tol)
    w = wedge_params(instance, tol)
    s = instance.a_i + instance.a_j
    with np.errstate(divide="ignore"):
        log_t = np.log(_transport_coordinate(instance, X, tol))
    log_rest = _log_monomial(instance, X, instance.others) if instance.others else 0.0
    if _regime_high(instance, tol, regime):
        return np.exp(math.log(w.lam) + s * log_t + log_rest)
    return np.exp(math.log(w.zeta) + (s * log_t + log_rest) / cone.beta) + cone.z0


def _scalar_or_array(values, x):
    return float(values[0]) if np.ndim(x) == 1 else values


def upper_env_value(instance: MonomialInstance, x, tol: Tolerances = DEFAULT_TOLERANCES, regime=None):
    """Upper envelope cap: ``z0 + (gamma f(x))**(1/beta)`` if ``beta >= 1`` else ``f(x)``.

    ``regime`` ("high" or "low") forces one of the two formulas regardless of
    ``beta``; the default picks by regime.
    """
    X = as_points(x, instance.n)
    if np.any(X < 0):
        raise ValueError("points must be non-negative")
    return _scalar_or_array(_upper_values(instance, X, tol, regime), x)


def lower_env_value(instance: MonomialInstance, x, tol: Tolerances = DEFAULT_TOLERANCES, regime=None):
    """Lower minorant in the wedge.

    ``beta >= 1``: ``lam (d_j x_i - d_i x_j)**(a_i+a_j) prod_{k != i,j} x_k**a_k``.
    ``beta <= 1``: ``zeta (d_j x_i - d_i x_j)**((a_i+a_j)/beta) (prod ...)**(1/beta) + z0``.
    For ``n = 2`` this is the lower envelope over the wedge (before the ``z >= l`` cut).
    """
    X = as_points(x, instance.n)
    if np.any(X < 0):
        raise ValueError("points must be non-negative")
    return _scalar_or_array(_lower_values(instance, X, tol, regime), x)


def _slack(lhs, rhs):
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (rhs - lhs) / scale
    return np.where(scale > 0, out, 0.0)


def _wedge_slacks(instance, X):
    xi, xj = X[:, instance.i], X[:, instance.j]
    return [("wedge", _slack(instance.p * xi, xj)), ("wedge", _slack(xj, instance.q * xi))]


def _nonneg_slacks(instance, X):
    if not instance.others:
        return []
    rest = X[:, list(instance.others)]
    return [("x ≥ 0", np.where(rest.min(axis=1) >= 0, 1.0, -1.0))]


def y_cut_rhs(instance: MonomialInstance, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Right-hand side ``(u/lam)**(1/beta)`` of the extra cut bounding ``Y``."""
    w = wedge_params(instance, tol)
    return (instance.upper / w.lam) ** (1.0 / instance.beta)


def _clip(X):
    return np.maximum(X, 0.0)


def _y_slacks(instance, X, tol):
    Xc = _clip(X)
    f = np.exp(_log_monomial(instance, Xc))
    t = _transport_coordinate(instance, Xc, tol)
    return _wedge_slacks(instance, X) + [
        ("f ≥ ℓ", _slack(instance.lower, f)),
        ("Y cut", _slack(t, y_cut_rhs(instance, tol))),
    ]


def _z_slacks(instance, z, lower_bound=True):
    out = [("z ≤ u", _slack(z, instance.upper))]
    if lower_bound:
        out.append(("z ≥ ℓ", _slack(instance.lower, z)))
    return out


def _as_z(z, m):
    zz = np.broadcast_to(np.asarray(z, dtype=float), (m,))
    return zz


def orthant_slacks(instance, X, z, tol=DEFAULT_TOLERANCES):
    X = as_points(X, instance.n)
    z = _as_z(z, len(X))
    Xc = _clip(X)
    neg = [("x ≥ 0", np.where(X.min(axis=1) >= 0, 1.0, -1.0))]
    return neg + [("upper envelope", _slack(z, _upper_values(instance, Xc, tol)))] + _z_slacks(instance, z)


def upper_wedge_slacks(instance, X, z, tol=DEFAULT_TOLERANCES):
    X = as_points(X, instance.n)
    z = _as_z(z, len(X))
    Xc = _clip(X)
    out = [("upper envelope", _slack(z, _upper_values(instance, Xc, tol)))]
    out += [("z ≤ u", _slack(z, instance.upper))]
    if instance.n == 2:
        out += _y_slacks(instance, X, tol)
    else:
        f = np.exp(_log_monomial(instance, Xc))
        out += _wedge_slacks(instance, X) + [("f ≥ ℓ", _slack(instance.lower, f))]
        out += _nonneg_slacks(instance, X)
    return out


def y_slacks(instance, X, tol=DEFAULT_TOLERANCES):
    require_n2(instance)
    return _y_slacks(instance, as_points(X, 2), tol)


def lower_wedge_slacks(instance, X, z, tol=DEFAULT_TOLERANCES):
    require_n2(instance)
    X = as_points(X, 2)
    z = _as_z(z, len(X))
    fl = _lower_values(instance, _clip(X), tol)
    return [("lower envelope", _slack(fl, z)), ("z ≥ ℓ", _slack(instance.lower, z))] + _y_slacks(
        instance, X, tol
    )


def hull_2d_slacks(instance, X, z, tol=DEFAULT_TOLERANCES):
    """Named slacks of every constraint of the two-variable convex hull."""
    require_n2(instance)
    X = as_points(X, 2)
    z = _as_z(z, len(X))
    Xc = _clip(X)
    return [
        ("lower envelope", _slack(_lower_values(instance, Xc, tol), z)),
        ("upper envelope", _slack(z, _upper_values(instance, Xc, tol))),
    ] + _z_slacks(instance, z) + _y_slacks(instance, X, tol)


def min_margin(slacks) -> np.ndarray:
    """Elementwise minimum slack over a list of ``(name, array)`` pairs."""
    return np.min(np.vstack([s for _, s in slacks]), axis=0)


def _verdict(slacks, tol: float) -> MembershipVerdict:
    names = [name for name, _ in slacks]
    values = [float(np.asarray(s).reshape(-1)[0]) for _, s in slacks]
    margin = min(values)
    close = {n for n, v in zip(names, values) if v <= margin + tol}
    binding = next(n for n in _PRIORITY if n in close)
    return MembershipVerdict(margin >= -tol, margin, binding)


def _single(instance, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (instance.n,):
        raise ValueError(f"expected a single point with {instance.n} coordinates")
    return x[None, :]


def in_conv_orthant(instance, x, z, tol: Tolerances = DEFAULT_TOLERANCES) -> MembershipVerdict:
    """Membership in the convex hull of the graph of ``f`` over the whole orthant."""
    return _verdict(orthant_slacks(instance, _single(instance, x), z, tol), tol.membership)


def in_upper_env_wedge(instance, x, z, tol: Tolerances = DEFAULT_TOLERANCES) -> MembershipVerdict:
    """Membership in the upper envelope over ``X ∩ W_ij`` (any ``n``; ``n=2`` adds the Y cut)."""
    return _verdict(upper_wedge_slacks(instance, _single(instance, x), z, tol), tol.membership)


def in_lower_env_2d(instance, x, z, tol: Tolerances = DEFAULT_TOLERANCES) -> MembershipVerdict:
    return _verdict(lower_wedge_slacks(instance, _single(instance, x), z, tol), tol.membership)


def in_Y(instance, x, tol: Tolerances = DEFAULT_TOLERANCES) -> MembershipVerdict:
    """Membership in ``Y``, the convex hull of ``X ∩ W_12`` (n=2 only)."""
    require_n2(instance)
    return _verdict(y_slacks(instance, _single(instance, x), tol), tol.membership)


def in_hull_2d(instance, x, z, tol: Tolerances = DEFAULT_TOLERANCES) -> MembershipVerdict:
    """Membership in the convex hull of ``F(W_12)`` (n=2 only)."""
    require_n2(instance)
    return _verdict(hull_2d_slacks(instance, _single(instance, x), z, tol), tol.membership)


def membership(instance, kind: EnvelopeKind, x, z=None, tol: Tolerances = DEFAULT_TOLERANCES):
    if kind.needs_n2:
        require_n2(instance)
    if kind is EnvelopeKind.Y_PROJECTION:
        return in_Y(instance, x, tol)
    if z is None:
        raise ValueError(f"{kind.value} membership needs a z coordinate")
    dispatch = {
        EnvelopeKind.UPPER_ORTHANT: in_conv_orthant,
        EnvelopeKind.UPPER_WEDGE: in_upper_env_wedge,
        EnvelopeKind.LOWER_WEDGE_2D: in_lower_env_2d,
        EnvelopeKind.HULL_2D: in_hull_2d,
    }
    return dispatch[kind](instance, x, z, tol)


def sample_feasible(instance: MonomialInstance, rng: np.random.Generator, size: int, method="ratio",
                    corner_prob=0.0):
    """Random points of ``X ∩ W_ij``.

    ``method="ratio"`` draws a ratio ``r`` in ``[p, q]`` and a value ``v`` in
    ``[l, u]`` and returns the point on the ray ``x_j = r x_i`` with ``f = v``
    (coordinates outside the wedge pair are drawn from ``[0.5, 2]``). With
    ``corner_prob > 0`` a fraction of ratios and values are snapped to the
    interval ends so that faces and corners are hit.

    ``method="rejection"`` (n=2 only) draws uniformly from the bounding box
    and keeps feasible points; it can be slow for thin wedges.
    """
    if method == "rejection":
        return _sample_rejection(instance, rng, size)
    if method != "ratio":
        raise ValueError(f"unknown sampling method {method!r}")
    p, q, lo, up = instance.p, instance.q, instance.lower, instance.upper
    r = rng.uniform(p, q, size)
    v = rng.uniform(lo, up, size)
    if corner_prob > 0:
        snap = rng.random(size) < corner_prob
        r = np.where(snap, np.where(rng.random(size) < 0.5, p, q), r)
        snap = rng.random(size) < corner_prob
        v = np.where(snap, np.where(rng.random(size) < 0.5, lo, up), v)
    X = np.empty((size, instance.n))
    log_rest = np.zeros(size)
    for k in instance.others:
        X[:, k] = rng.uniform(0.5, 2.0, size)
        log_rest += instance.exponents[k] * np.log(X[:, k])
    s = instance.a_i + instance.a_j
    xi = np.exp((np.log(v) - instance.a_j * np.log(r) - log_rest) / s)
    X[:, instance.i] = xi
    X[:, instance.j] = r * xi
    return X


def _sample_rejection(instance, rng, size):
    from .geometry2d import bounding_box

    w1, w2 = bounding_box(instance)
    out, have = [], 0
    while have < size:
        batch = rng.uniform(0.0, 1.0, (4 * size, 2)) * (w1, w2)
        X = np.empty_like(batch)
        X[:, instance.i], X[:, instance.j] = batch[:, 0], batch[:, 1]
        f = np.exp(_log_monomial(instance, X))
        xi, xj = X[:, instance.i], X[:, instance.j]
        keep = (instance.p * xi <= xj) & (xj <= instance.q * xi) & (f >= instance.lower) & (f <= instance.upper)
        out.append(X[keep])
        have += int(keep.sum())
    return np.concatenate(out)[:size]
