"""Cross-sections, area and volume of the two-variable convex hull.

At height ``z`` the hull slice is bounded by the two wedge faces, by the
segment ``Lp-Lq`` (level line of the lower envelope) and by the arc ``Up-Uq``
(level curve of the upper envelope). The chord ``Up-Uq`` is parallel to
``Lp-Lq``, so the slice splits into a trapezoid (``A1``) and the region
between the chord and the arc (``A2``).

All coordinates are in the ``(x_i, x_j)`` frame of the instance, written
``(x1, x2)`` below; ``a1, a2`` are ``a_i, a_j``.

The arc area uses the primitive of ``chord - curve``. The middle term of the
evaluated primitive is ``(p - sigma) * x1Up * (x1Up - x1Uq)``, and for
``beta <= 1`` the lower corner is ``x1Lp = (z - z0) / (zeta (d2 - d1 p))``.
:func:`printed_formula_area` keeps the alternative typeset forms of those two
expressions so the test-suite can show they disagree with quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy import integrate

from .core import (
    DEFAULT_TOLERANCES,
    MonomialInstance,
    Tolerances,
    cone_params,
    require_n2,
    wedge_params,
)


def bounding_box(instance: MonomialInstance) -> tuple[float, float]:
    """Upper corners ``(w1, w2)`` of the box ``[0, w1] x [0, w2]`` containing ``X ∩ W``."""
    require_n2(instance)
    a1, a2, beta = instance.a_i, instance.a_j, instance.beta
    w1 = (instance.upper * instance.p ** (-a2)) ** (1.0 / beta)
    w2 = (instance.upper * instance.q**a1) ** (1.0 / beta)
    return w1, w2


@dataclass(frozen=True)
class CrossSection:
    z: float
    Lp: tuple[float, float]
    Lq: tuple[float, float]
    Up: tuple[float, float]
    Uq: tuple[float, float]
    delta_L: float
    delta_U: float
    delta: float
    A1: float
    A2: float

    @property
    def A(self) -> float:
        return self.A1 + self.A2


def _check_z(instance, z):
    if not (instance.lower <= z <= instance.upper):
        raise ValueError(f"z={z} outside [{instance.lower}, {instance.upper}]")


def _use_log_branch(a1, a2, tol):
    return abs(a1 - a2) < tol.log_branch * (a1 + a2)


def _power_difference(hi, lo, e, log_branch):
    """``(hi**e - lo**e) / e``, or ``log(hi/lo)`` on the equal-exponent branch."""
    ratio = math.log(hi / lo)
    if log_branch:
        return ratio
    return lo**e * math.expm1(e * ratio) / e


def _corner_abscissae(instance, z, tol, printed=False):
    """``x1`` of ``Lp, Up, Uq`` and the level of ``f`` traced by the arc."""
    cone = cone_params(instance, tol)
    w = wedge_params(instance, tol)
    a2, beta, p, q = instance.a_j, cone.beta, instance.p, instance.q
    if cone.high:
        x_lp = (z * p ** (-a2)) ** (1.0 / beta)
        scale = (z - cone.z0) * math.exp(-cone.log_gamma / beta)
        x_up = scale * p ** (-a2 / beta)
        x_uq = scale * q ** (-a2 / beta)
        arc_level = (z - cone.z0) ** beta / cone.gamma
    else:
        if printed:
            lo, up = instance.lower, instance.upper
            x_lp = (z - cone.z0) * (up ** (1 / beta) - lo ** (1 / beta)) / ((up - lo) * q ** (a2 / beta))
        else:
            x_lp = (z - cone.z0) / (w.zeta * (w.d_j - w.d_i * p))
        x_up = (z * p ** (-a2)) ** (1.0 / beta)
        x_uq = (z * q ** (-a2)) ** (1.0 / beta)
        arc_level = z
    return x_lp, x_up, x_uq, arc_level


def _arc_area(instance, x_up, x_uq, arc_level, tol, printed=False):
    a1, a2, p = instance.a_i, instance.a_j, instance.p
    sigma = wedge_params(instance, tol).sigma
    e = (a2 - a1) / a2
    coef = arc_level ** (1.0 / a2)
    curve = coef * _power_difference(x_up, x_uq, e, _use_log_branch(a1, a2, tol))
    middle = (p - sigma) * (x_up - x_uq)
    if not printed:
        middle *= x_up
    return 0.5 * sigma * (x_up**2 - x_uq**2) + middle - curve


def cross_section(instance: MonomialInstance, z: float, tol: Tolerances = DEFAULT_TOLERANCES) -> CrossSection:
    """Corners, chord lengths and areas of the hull slice at height ``z``."""
    require_n2(instance)
    _check_z(instance, z)
    w = wedge_params(instance, tol)
    p, q = instance.p, instance.q
    x_lp, x_up, x_uq, arc_level = _corner_abscissae(instance, z, tol)
    x_lq = w.eta_i * x_lp
    # both squares coincide at z = l and z = u; clamp the rounding residue
    A1 = max(0.0, 0.5 * p * (w.eta_j - w.eta_i) * (x_lp**2 - x_up**2))
    A2 = max(0.0, _arc_area(instance, x_up, x_uq, arc_level, tol))
    delta = (p - w.sigma) / math.sqrt(1.0 + w.sigma**2) * max(0.0, x_lp - x_up)
    return CrossSection(
        z=z,
        Lp=(x_lp, p * x_lp),
        Lq=(x_lq, q * x_lq),
        Up=(x_up, p * x_up),
        Uq=(x_uq, q * x_uq),
        delta_L=w.tau * x_lp,
        delta_U=w.tau * x_up,
        delta=delta,
        A1=A1,
        A2=A2,
    )


def area(instance: MonomialInstance, z: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    return cross_section(instance, z, tol).A


def printed_formula_area(instance: MonomialInstance, z: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Slice area using the alternative typeset expressions.

    ``beta >= 1``: the middle term of the arc area without the ``x1Up`` factor.
    ``beta < 1``: ``x1Lp`` with ``q**(a2/beta)`` in the denominator.
    Kept only to demonstrate that these forms disagree with quadrature.
    """
    require_n2(instance)
    _check_z(instance, z)
    w = wedge_params(instance, tol)
    high = cone_params(instance, tol).high
    x_lp, x_up, x_uq, arc_level = _corner_abscissae(instance, z, tol, printed=not high)
    A1 = 0.5 * instance.p * (w.eta_j - w.eta_i) * (x_lp**2 - x_up**2)
    return A1 + _arc_area(instance, x_up, x_uq, arc_level, tol, printed=high)


def area_terms(instance: MonomialInstance, tol: Tolerances = DEFAULT_TOLERANCES):
    """``A(z)`` as a list of ``(coef, shift, power)`` meaning ``coef * (z - shift)**power``.

    Obtained by substituting the corner abscissae, which are either
    proportional to ``z**(1/beta)`` or to ``(z - z0)``, into ``A1`` and ``A2``.
    """
    require_n2(instance)
    cone = cone_params(instance, tol)
    w = wedge_params(instance, tol)
    a1, a2, p, q = instance.a_i, instance.a_j, instance.p, instance.q
    beta, z0, sigma = cone.beta, cone.z0, w.sigma
    trap = 0.5 * p * (w.eta_j - w.eta_i)
    e = (a2 - a1) / a2
    log_branch = _use_log_branch(a1, a2, tol)
    if cone.high:
        c_lp = p ** (-a2 / beta)
        g = math.exp(-cone.log_gamma / beta)
        c_up, c_uq = g * p ** (-a2 / beta), g * q ** (-a2 / beta)
        chord = 0.5 * sigma * (c_up**2 - c_uq**2) + (p - sigma) * c_up * (c_up - c_uq)
        # curve coefficient: ((z - z0)**beta / gamma)**(1/a2) * (x1**e difference)
        curve = math.exp(-cone.log_gamma / a2) * _power_difference(c_up, c_uq, e, log_branch)
        curve_power = beta / a2 + (0.0 if log_branch else e)
        return [
            (trap * c_lp**2, 0.0, 2.0 / beta),
            (chord - trap * c_up**2, z0, 2.0),
            (-curve, z0, curve_power),
        ]
    c_lp = 1.0 / (w.zeta * (w.d_j - w.d_i * p))
    c_up, c_uq = p ** (-a2 / beta), q ** (-a2 / beta)
    chord = 0.5 * sigma * (c_up**2 - c_uq**2) + (p - sigma) * c_up * (c_up - c_uq)
    curve = _power_difference(c_up, c_uq, e, log_branch)
    curve_power = 1.0 / a2 + (0.0 if log_branch else e / beta)
    return [
        (trap * c_lp**2, z0, 2.0),
        (chord - trap * c_up**2, 0.0, 2.0 / beta),
        (-curve, 0.0, curve_power),
    ]


def area_integral(instance: MonomialInstance, z_lo: float, z_hi: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Exact ``∫ A(z) dz`` over ``[z_lo, z_hi] ⊆ [l, u]`` from :func:`area_terms`."""
    _check_z(instance, z_lo)
    _check_z(instance, z_hi)
    total = 0.0
    for coef, shift, power in area_terms(instance, tol):
        k = power + 1.0
        total += coef * ((z_hi - shift) ** k - (z_lo - shift) ** k) / k
    return total


def volume_closed_form(instance: MonomialInstance, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    return area_integral(instance, instance.lower, instance.upper, tol)


def volume_quadrature(instance: MonomialInstance, tol: Tolerances = DEFAULT_TOLERANCES,
                      rtol: float = 1e-10, limit: int = 10_000) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod integral of :func:`area`; returns ``(value, error_estimate)``."""
    require_n2(instance)
    value, err = integrate.quad(
        lambda z: area(instance, z, tol), instance.lower, instance.upper,
        epsabs=0.0, epsrel=rtol, limit=limit,
    )
    return value, err


@dataclass(frozen=True)
class VolumeReport:
    closed_form: float
    quadrature: Optional[float] = None
    quadrature_error: Optional[float] = None
    monte_carlo: Optional[float] = None
    monte_carlo_stderr: Optional[float] = None
    quad_agrees: Optional[bool] = None
    mc_agrees: Optional[bool] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def volume(instance: MonomialInstance, quadrature: bool = True, mc_seed: Optional[int] = None,
           mc_samples: int = 1_000_000, tol: Tolerances = DEFAULT_TOLERANCES,
           quad_rtol: float = 1e-8, mc_sigmas: float = 3.0) -> VolumeReport:
    """Closed-form volume of the hull, optionally cross-checked.

    ``quadrature`` integrates :func:`area` numerically; ``mc_seed`` runs the
    Monte-Carlo oracle with that seed.
    """
    require_n2(instance)
    closed = volume_closed_form(instance, tol)
    fields: dict = {"closed_form": closed}
    if quadrature:
        value, err = volume_quadrature(instance, tol)
        fields.update(quadrature=value, quadrature_error=err,
                      quad_agrees=abs(closed - value) <= quad_rtol * abs(closed))
    if mc_seed is not None:
        from .oracle import mc_volume

        est = mc_volume(instance, mc_seed, mc_samples, tol=tol)
        fields.update(monte_carlo=est.value, monte_carlo_stderr=est.stderr,
                      mc_agrees=abs(closed - est.value) <= mc_sigmas * est.stderr)
    return VolumeReport(**fields)
