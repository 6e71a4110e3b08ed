import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from helpers import FIG2, FIG3, fig2, random_instance, random_instances
from monenv import (
    InvalidInstanceError,
    MonomialInstance,
    Tolerances,
    cone_params,
    eval_f,
    identities_ok,
    identity_residuals,
    make_instance,
    wedge_params,
    wedge_transport,
)
from monenv.oracle import cone_params_rootfind

# --- validation -----------------------------------------------------------


@pytest.mark.parametrize("kwargs", [FIG2, FIG3])
def test_figure_instances_are_valid(kwargs):
    inst = make_instance(**kwargs)
    assert inst.n == 2
    assert inst.exponents == tuple(float(a) for a in kwargs["exponents"])


@pytest.mark.parametrize(
    "kwargs, message",
    [
        (dict(exponents=(1, 1), p=2, q=2, lower=1, upper=2), "p must be < q"),
        (dict(exponents=(1, -1), p=1, q=2, lower=1, upper=2), "exponent a[1]"),
        (dict(exponents=(1, 0), p=1, q=2, lower=1, upper=2), "exponent a[1]"),
        (dict(exponents=(1, 1), p=1, q=2, lower=3, upper=2), "l must be < u"),
        (dict(exponents=(1, 1), p=1, q=2, lower=0, upper=2), "l must be > 0"),
        (dict(exponents=(1, 1), p=1, q=2, lower=1, upper=math.inf), "l must be < u"),
        (dict(exponents=(1, 1), p=0, q=2, lower=1, upper=2), "p must be a positive"),
        (dict(exponents=(1, 1), p=1, q=2, lower=1, upper=2, i=1, j=1), "i != j"),
        (dict(exponents=(1,), p=1, q=2, lower=1, upper=2), "n >= 2"),
    ],
)
def test_validate_reports_first_violation(kwargs, message):
    with pytest.raises(InvalidInstanceError, match=message.replace("[", r"\[").replace("]", r"\]")):
        make_instance(**kwargs)


def test_dict_round_trip():
    inst = make_instance((0.5, 2.0, 1.5), 0.3, 4.0, 0.2, 9.0, i=2, j=0)
    data = inst.to_dict()
    assert data["schema"] == "monomial-envelope/1"
    assert data["wedge"] == {"i": 2, "j": 0, "p": 0.3, "q": 4.0}
    assert MonomialInstance.from_dict(data) == inst


def test_from_dict_missing_field():
    with pytest.raises(InvalidInstanceError, match="malformed"):
        MonomialInstance.from_dict({"exponents": [1, 1], "wedge": {"p": 1, "q": 2}})


# --- eval_f ---------------------------------------------------------------


def test_eval_f_simple_values():
    assert eval_f(make_instance((1, 1), 0.5, 2, 1, 4), [2.0, 3.0]) == pytest.approx(6.0, rel=1e-15)
    assert eval_f(fig2(), [1.0, 1.0]) == 1.0
    x = np.array([2.0, 0.5])
    assert_allclose(eval_f(fig2(), x), 2.0**1.7 * 0.5**1.5, rtol=1e-14)


def test_eval_f_zero_and_negative():
    inst = fig2()
    assert eval_f(inst, [0.0, 3.0]) == 0.0
    with pytest.raises(ValueError):
        eval_f(inst, [-1.0, 3.0])


def test_eval_f_vectorised():
    inst = make_instance((0.5, 1.5, 2.0), 0.5, 2, 1, 4)
    X = np.random.default_rng(0).uniform(0.1, 3, (50, 3))
    expected = np.prod(X ** np.array(inst.exponents), axis=1)
    assert_allclose(eval_f(inst, X), expected, rtol=1e-13)


# --- cone parameters ------------------------------------------------------


def test_cone_params_beta_one():
    cone = cone_params(make_instance((0.25, 0.75), 0.5, 2, 0.3, 7))
    assert (cone.z0, cone.gamma) == (0.0, 1.0)


def test_cone_params_beta_two_rootfind():
    inst = make_instance((1, 1), 0.5, 2, 1, 4)
    cone = cone_params(inst)
    assert_allclose((cone.z0, cone.gamma), (-2.0, 9.0), rtol=1e-14)
    assert_allclose(cone_params_rootfind(inst), (-2.0, 9.0), rtol=1e-12)


def test_cone_params_match_printed_closed_form():
    inst = fig2()
    beta, lo, up = inst.beta, inst.lower, inst.upper
    ub, lb = up ** (1 / beta), lo ** (1 / beta)
    z0 = (ub * lo - lb * up) / (ub - lb)
    gamma = ((up - lo) / (ub - lb)) ** beta
    cone = cone_params(inst)
    assert_allclose((cone.z0, cone.gamma), (z0, gamma), rtol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_cone_params_against_rootfind(seed):
    for inst in random_instances(seed, 20):
        if abs(inst.beta - 1) < 1e-3:
            continue
        cone = cone_params(inst)
        z0, gamma = cone_params_rootfind(inst)
        assert_allclose(cone.z0, z0, rtol=1e-9, atol=1e-12 * inst.upper)
        assert_allclose(cone.gamma, gamma, rtol=1e-9)


def test_cone_regime_signs():
    for inst in random_instances(7, 100):
        cone = cone_params(inst)
        if inst.beta > 1:
            assert cone.z0 < 0 and cone.high
        elif inst.beta < 1:
            assert cone.z0 > 0 and not cone.high


def test_gamma_side_of_regime_depends_on_scale():
    # beta = 2 gives gamma = (sqrt(u) + sqrt(l))**2, which drops below 1 for small bounds
    small = cone_params(make_instance((1, 1), 0.5, 2, 0.125, 0.25))
    assert_allclose(small.gamma, (0.5 + math.sqrt(0.125)) ** 2, rtol=1e-14)
    assert small.z0 < 0 and small.gamma < 1
    large = cone_params(make_instance((0.25, 0.25), 0.5, 2, 0.1, 0.4))
    assert large.z0 > 0 and large.gamma > 1


def test_cone_params_continuous_through_beta_one():
    base = make_instance((0.4, 0.6), 0.5, 2, 0.3, 7)
    for eps in (1e-6, 1e-9, 1e-11):
        lo = cone_params(make_instance((0.4, 0.6 - eps), 0.5, 2, 0.3, 7))
        hi = cone_params(make_instance((0.4, 0.6 + eps), 0.5, 2, 0.3, 7))
        assert abs(lo.z0) < 100 * eps * base.upper and abs(hi.z0) < 100 * eps * base.upper
        assert abs(lo.gamma - 1) < 100 * eps and abs(hi.gamma - 1) < 100 * eps


# --- wedge parameters -----------------------------------------------------


def test_wedge_params_hand_values():
    w = wedge_params(make_instance((1, 1), 1, 4, 1, 16))
    assert_allclose([w.d_i, w.d_j, w.eta_i, w.eta_j, w.lam], [-0.5, 1.0, 0.5, 2.0, 4 / 9], rtol=1e-14)
    assert_allclose(w.phi_i + w.phi_j, 1.0, rtol=1e-15)
    assert_allclose(w.sigma, -2.0, rtol=1e-14)


def test_wedge_params_match_printed_definitions():
    inst = fig2()
    a1, a2, p, q = inst.a_i, inst.a_j, inst.p, inst.q
    phi1, phi2 = a1 / (a1 + a2), a2 / (a1 + a2)
    w = wedge_params(inst)
    assert_allclose(w.d_i, q**-phi2 - p**-phi2, rtol=1e-13)
    assert_allclose(w.d_j, q**phi1 - p**phi1, rtol=1e-13)
    assert_allclose(w.lam, p**a2 / (w.d_j - w.d_i * p) ** (a1 + a2), rtol=1e-13)
    assert_allclose(w.zeta, (cone_params(inst).gamma * w.lam) ** (1 / inst.beta), rtol=1e-13)


def test_identities_hold_on_figure_instances():
    for kwargs in (FIG2, FIG3):
        inst = make_instance(**kwargs)
        assert identities_ok(inst), identity_residuals(inst)


@settings(max_examples=200, deadline=None)
@given(
    a=st.lists(st.floats(0.05, 8.0), min_size=2, max_size=5),
    p=st.floats(0.01, 10.0),
    spread=st.floats(1.001, 100.0),
    lower=st.floats(0.01, 100.0),
    ratio=st.floats(1.001, 1000.0),
)
def test_identities_property(a, p, spread, lower, ratio):
    inst = make_instance(a, p, p * spread, lower, lower * ratio)
    res = identity_residuals(inst)
    cone = cone_params(inst)
    # a double z0 carries an error of a few ulps, amplified by beta*|z0|/(l - z0)
    gap = inst.lower - cone.z0
    floor = 8 * inst.beta * np.finfo(float).eps * abs(cone.z0) / gap if gap > 0 else math.inf
    assert res.pop("cone_lower") <= 1e-12 + floor
    assert all(v <= 1e-12 for v in res.values()), res


def test_cone_residual_floor_for_tiny_gap():
    # beta ~ 0.1 over u/l = 64: l - z0 is about 1e-16 * l, so z0 rounds onto l
    inst = make_instance((0.05078125, 0.05078125), 1.0, 2.0, 1.0625, 68.0)
    res = identity_residuals(inst)
    assert res["cone_lower"] == math.inf
    assert res["cone_upper"] <= 1e-12


def test_identities_with_general_indices():
    inst = make_instance((0.7, 2.0, 1.1, 0.4), 0.3, 2.5, 0.5, 4.0, i=3, j=1)
    assert identities_ok(inst)
    w = wedge_params(inst)
    assert w.d_i < 0 < w.d_j
    assert_allclose(w.eta_i * inst.q / inst.p, w.eta_j, rtol=1e-14)


def test_custom_tolerances_respected():
    inst = make_instance((0.5, 0.5 + 1e-10), 0.5, 2, 1, 3)
    assert cone_params(inst).gamma != 1.0
    loose = Tolerances(beta_one=1e-8)
    assert cone_params(inst, loose).gamma == 1.0


# --- wedge transport ------------------------------------------------------


def test_wedge_transport_hand_example():
    inst = make_instance((1, 1), 1, 4, 1, 16)
    s_bar, x_bar = wedge_transport(inst, [2.0, 2.0])
    assert_allclose(x_bar, [1.0, 4.0], rtol=1e-15)
    assert s_bar >= 0
    assert_allclose(eval_f(inst, x_bar), 4.0, rtol=1e-15)
    w = wedge_params(inst)
    assert_allclose(np.array([2.0, 2.0]) + s_bar * np.array([w.d_i, w.d_j]), x_bar, rtol=1e-14)


def test_wedge_transport_origin_fixed():
    s_bar, x_bar = wedge_transport(fig2(), [0.0, 0.0])
    assert s_bar == 0.0 and np.all(x_bar == 0.0)


def test_wedge_transport_rejects_off_face_points():
    with pytest.raises(ValueError, match="not on the face"):
        wedge_transport(fig2(), [1.0, 1.0])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_wedge_transport_preserves_f(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(50):
        inst = random_instance(rng, n=n)
        i, j = rng.choice(n, 2, replace=False)
        inst = MonomialInstance(inst.exponents, int(i), int(j), inst.p, inst.q, inst.lower, inst.upper)
        x = rng.uniform(0.2, 3.0, n)
        x[inst.j] = inst.p * x[inst.i]
        s_bar, x_bar = wedge_transport(inst, x)
        assert s_bar >= 0
        assert_allclose(eval_f(inst, x_bar), eval_f(inst, x), rtol=1e-10)
        assert_allclose(x_bar[inst.j], inst.q * x_bar[inst.i], rtol=1e-12)
        others = [k for k in range(n) if k not in (inst.i, inst.j)]
        assert np.array_equal(x_bar[others], x[others])


def test_transport_chords_parallel_across_levels():
    for inst in random_instances(11, 30):
        w = wedge_params(inst)
        slopes = []
        for xi in (inst.lower, math.sqrt(inst.lower * inst.upper), inst.upper):
            x1 = (xi * inst.p ** (-inst.a_j)) ** (1 / inst.beta)
            x = np.array([x1, inst.p * x1])
            _, x_bar = wedge_transport(inst, x)
            slopes.append((x_bar[1] - x[1]) / (x_bar[0] - x[0]))
        assert_allclose(slopes, w.sigma, rtol=1e-10)
