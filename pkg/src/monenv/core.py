"""Problem description and the closed-form constants behind every envelope.

A problem is the monomial ``f(x) = prod_k x_k**a_k`` restricted to the value
band ``l <= f(x) <= u`` and to the wedge ``p*x_i <= x_j <= q*x_i``.

Two parameter bundles are derived from it:

* :class:`ConeParams` -- vertex offset ``z0`` and scaling ``gamma`` of the cone
  ``(z - z0)**beta <= gamma * f(x)`` whose level sets at ``z = l`` and
  ``z = u`` coincide with those of ``f``.
* :class:`WedgeParams` -- the transport direction ``(d_i, d_j)`` mapping the
  face ``x_j = p*x_i`` onto the face ``x_j = q*x_i`` along level sets of ``f``,
  the corresponding scale factors ``eta_i, eta_j`` and the coefficients of the
  lower envelope.

Indices are 0-based throughout the code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np


class InvalidInstanceError(ValueError):
    """Raised when a :class:`MonomialInstance` violates one of its invariants."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used by the library (all relative)."""

    identity: float = 1e-12
    on_face: float = 1e-10
    beta_one: float = 1e-12
    log_branch: float = 1e-9
    membership: float = 1e-9


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class MonomialInstance:
    """Exponents, wedge ``p*x_i <= x_j <= q*x_i`` and value bounds ``[l, u]``.

    The instance validates itself on construction, so an existing object always
    satisfies the invariants checked by :func:`validate`.
    """

    exponents: tuple[float, ...]
    i: int
    j: int
    p: float
    q: float
    lower: float
    upper: float

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(float(a) for a in self.exponents))
        for name in ("p", "q", "lower", "upper"):
            object.__setattr__(self, name, float(getattr(self, name)))
        validate(self)

    @property
    def n(self) -> int:
        return len(self.exponents)

    @property
    def beta(self) -> float:
        return math.fsum(self.exponents)

    @property
    def a_i(self) -> float:
        return self.exponents[self.i]

    @property
    def a_j(self) -> float:
        return self.exponents[self.j]

    @property
    def others(self) -> tuple[int, ...]:
        """Indices outside the wedge pair."""
        return tuple(k for k in range(self.n) if k not in (self.i, self.j))

    def with_wedge(self, p: float, q: float) -> "MonomialInstance":
        return MonomialInstance(self.exponents, self.i, self.j, p, q, self.lower, self.upper)

    def with_bounds(self, lower: float, upper: float) -> "MonomialInstance":
        return MonomialInstance(self.exponents, self.i, self.j, self.p, self.q, lower, upper)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_TAG,
            "exponents": list(self.exponents),
            "wedge": {"i": self.i, "j": self.j, "p": self.p, "q": self.q},
            "bounds": {"l": self.lower, "u": self.upper},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MonomialInstance":
        try:
            wedge, bounds = data["wedge"], data["bounds"]
            return cls(
                tuple(data["exponents"]),
                int(wedge.get("i", 0)),
                int(wedge.get("j", 1)),
                wedge["p"],
                wedge["q"],
                bounds["l"],
                bounds["u"],
            )
        except (KeyError, TypeError) as exc:
            raise InvalidInstanceError(f"malformed instance: missing or bad field {exc}") from exc


SCHEMA_TAG = "monomial-envelope/1"


def _finite_positive(value) -> bool:
    return math.isfinite(value) and value > 0


def validate(instance: MonomialInstance) -> MonomialInstance:
    """Return ``instance`` unchanged if all invariants hold, else raise.

    The error message names the first violated invariant.
    """
    a = instance.exponents
    if len(a) < 2:
        raise InvalidInstanceError("need at least two exponents (n >= 2)")
    for k, ak in enumerate(a):
        if not _finite_positive(ak):
            raise InvalidInstanceError(f"exponent a[{k}] = {ak!r} must be a positive finite number")
    n = len(a)
    for name in ("i", "j"):
        idx = getattr(instance, name)
        if not (0 <= idx < n):
            raise InvalidInstanceError(f"wedge index {name}={idx} out of range for n={n}")
    if instance.i == instance.j:
        raise InvalidInstanceError("wedge indices must differ (i != j)")
    if not _finite_positive(instance.p):
        raise InvalidInstanceError("p must be a positive finite number")
    if not math.isfinite(instance.q) or not instance.p < instance.q:
        raise InvalidInstanceError("p must be < q")
    if not _finite_positive(instance.lower):
        raise InvalidInstanceError("l must be > 0")
    if not math.isfinite(instance.upper) or not instance.lower < instance.upper:
        raise InvalidInstanceError("l must be < u < inf")
    return instance


def eval_f(instance: MonomialInstance, x):
    """Monomial value ``prod_k x_k**a_k``.

    ``x`` may be a single point of length ``n`` or an array of shape ``(m, n)``.
    Powers are taken in the log domain; a zero coordinate gives exactly 0.
    """
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != instance.n:
        raise ValueError(f"point has {arr.shape[-1]} coordinates, instance has n={instance.n}")
    if np.any(arr < 0):
        raise ValueError("monomial is only defined on the non-negative orthant")
    with np.errstate(divide="ignore"):
        logs = np.log(arr) @ np.asarray(instance.exponents)
    out = np.exp(logs)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ConeParams:
    """Vertex offset and scaling of the cone ``(z - z0)**beta <= gamma f(x)``."""

    z0: float
    gamma: float
    log_gamma: float = field(repr=False)
    beta: float
    high: bool = True
    """True when the instance is in the ``beta >= 1`` regime."""


def _beta_is_one(beta: float, tol: Tolerances) -> bool:
    return abs(beta - 1.0) <= tol.beta_one


@lru_cache(maxsize=4096)
def cone_params(instance: MonomialInstance, tol: Tolerances = DEFAULT_TOLERANCES) -> ConeParams:
    beta = instance.beta
    if _beta_is_one(beta, tol):
        return ConeParams(0.0, 1.0, 0.0, 1.0, True)
    lo, up = instance.lower, instance.upper
    span = math.log(up / lo)
    # z0 = u*expm1((1/beta - 1)*L)/expm1(L/beta), L = ln(u/l): cancellation-free form of
    # (u^(1/b) l - l^(1/b) u)/(u^(1/b) - l^(1/b)).
    denom = math.expm1(span / beta)
    gap = lo * math.expm1(span) / denom  # l - z0, accurate to a few ulps
    if gap < 0.5 * lo:
        # z0 is close to l (small beta, wide bounds): build it from the gap
        z0 = lo - gap
    else:
        z0 = up * math.expm1((1.0 - beta) / beta * span) / denom
    log_gamma = (beta - 1.0) * math.log(lo) + beta * (math.log(math.expm1(span)) - math.log(denom))
    return ConeParams(z0, math.exp(log_gamma), log_gamma, beta, beta >= 1.0)


@dataclass(frozen=True)
class WedgeParams:
    """Constants of the wedge transport and of the lower envelope.

    ``sigma`` and ``tau`` describe the chord geometry in the ``(x_i, x_j)``
    plane; they are the quantities used by the two-variable volume formulas.
    """

    d_i: float
    d_j: float
    eta_i: float
    eta_j: float
    lam: float
    zeta: float
    sigma: float
    tau: float
    phi_i: float
    phi_j: float


@lru_cache(maxsize=4096)
def wedge_params(instance: MonomialInstance, tol: Tolerances = DEFAULT_TOLERANCES) -> WedgeParams:
    a_i, a_j = instance.a_i, instance.a_j
    p, q = instance.p, instance.q
    s = a_i + a_j
    phi_i, phi_j = a_i / s, a_j / s
    log_ratio = math.log(q / p)
    # q^e - p^e == p^e * expm1(e*ln(q/p)); exact in the limit q -> p.
    d_i = p ** (-phi_j) * math.expm1(-phi_j * log_ratio)
    d_j = p**phi_i * math.expm1(phi_i * log_ratio)
    eta_i = math.exp(-phi_j * log_ratio)
    eta_j = math.exp(phi_i * log_ratio)
    lam = math.exp(a_j * math.log(p) - s * math.log(d_j - d_i * p))
    cone = cone_params(instance, tol)
    zeta = math.exp((cone.log_gamma + math.log(lam)) / cone.beta)
    sigma = d_j / d_i
    tau = math.hypot(1.0 - eta_i, p * (1.0 - eta_j))
    return WedgeParams(d_i, d_j, eta_i, eta_j, lam, zeta, sigma, tau, phi_i, phi_j)


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def identity_residuals(instance: MonomialInstance, tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Relative residuals of the defining identities of both parameter bundles.

    Sign conditions are reported as 0 (holds) or 1 (fails).
    """
    cone = cone_params(instance, tol)
    w = wedge_params(instance, tol)
    beta, lo, up = cone.beta, instance.lower, instance.upper
    s = instance.a_i + instance.a_j
    lam_q = instance.q**instance.a_j / (w.d_j - instance.q * w.d_i) ** s
    return {
        # z0 may round onto l itself when l - z0 is below one ulp of l
        "cone_lower": _rel(lo, math.exp(beta * math.log(lo - cone.z0) - cone.log_gamma))
        if lo > cone.z0 else math.inf,
        "cone_upper": _rel(up, math.exp(beta * math.log(up - cone.z0) - cone.log_gamma)),
        # only the sign of z0 tracks the regime; gamma >= 1 also depends on the scale of (l, u)
        "cone_regime": float((beta >= 1.0) != (cone.z0 <= 0.0)),
        "d_sign": float(not (w.d_i < 0.0 < w.d_j)),
        "eta_product": abs(instance.a_i * math.log(w.eta_i) + instance.a_j * math.log(w.eta_j)),
        "eta_ratio": _rel(w.eta_j / w.eta_i, instance.q / instance.p),
        "lambda_two_sided": _rel(w.lam, lam_q),
        "transport_shift": _rel(w.d_j - instance.p * w.d_i, (w.d_j - instance.q * w.d_i) * w.eta_i),
    }


def identities_ok(instance: MonomialInstance, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return all(v <= tol.identity for v in identity_residuals(instance, tol).values())


def on_face(instance: MonomialInstance, x, ratio: float, rtol: float) -> bool:
    """Whether ``x_j == ratio * x_i`` to relative tolerance ``rtol``."""
    xi, xj = float(x[instance.i]), float(x[instance.j])
    return abs(xj - ratio * xi) <= rtol * max(abs(xj), abs(ratio * xi))


def wedge_transport(instance: MonomialInstance, x, tol: Tolerances = DEFAULT_TOLERANCES):
    """Move a point of the face ``x_j = p x_i`` to the face ``x_j = q x_i``.

    The move follows the fixed direction ``(d_i, d_j)`` in the ``(x_i, x_j)``
    plane and keeps ``f`` unchanged. Returns ``(s_bar, x_bar)`` where
    ``x_bar = x + s_bar * d``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (instance.n,):
        raise ValueError(f"expected a point with {instance.n} coordinates")
    if np.any(x < 0):
        raise ValueError("point must be non-negative")
    if not on_face(instance, x, instance.p, tol.on_face):
        raise ValueError("point is not on the face x_j = p * x_i")
    w = wedge_params(instance, tol)
    out = x.copy()
    out[instance.i] = w.eta_i * x[instance.i]
    out[instance.j] = w.eta_j * x[instance.j]
    s_bar = x[instance.i] * (w.eta_i - 1.0) / w.d_i
    return float(s_bar), out


def to_w12(instance: MonomialInstance) -> MonomialInstance:
    """Two-variable instance relabelled so the wedge constrains ``x_1 -> x_2``.

    Coordinates of the result are ``(x_i, x_j)`` of the original instance.
    """
    if instance.n != 2:
        raise ValueError(f"two-variable result requested for n={instance.n}")
    if (instance.i, instance.j) == (0, 1):
        return instance
    return MonomialInstance(
        (instance.a_i, instance.a_j), 0, 1, instance.p, instance.q, instance.lower, instance.upper
    )


def require_n2(instance: MonomialInstance) -> None:
    if instance.n != 2:
        raise ValueError(f"this operation is only defined for n=2 (got n={instance.n})")


def as_points(x, n: int) -> np.ndarray:
    """View ``x`` as an ``(m, n)`` float array."""
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != n:
        raise ValueError(f"points must have {n} coordinates")
    return arr.reshape(-1, n)


def make_instance(
    exponents: Sequence[float],
    p: float,
    q: float,
    lower: float,
    upper: float,
    i: int = 0,
    j: int = 1,
) -> MonomialInstance:
    """Keyword-friendly constructor; the wedge defaults to ``(i, j) = (0, 1)``."""
    return MonomialInstance(tuple(exponents), i, j, p, q, lower, upper)
