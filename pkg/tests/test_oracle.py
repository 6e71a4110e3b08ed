import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from helpers import fig2, fig3, random_instances
from monenv import McCormickBox, make_instance, mccormick_bounds, volume_closed_form
from monenv.oracle import (
    default_threads,
    graph_combination_sampler,
    mc_box_volume,
    mc_volume,
    stream,
    tightness_comparison,
)


def test_streams_are_reproducible_and_distinct():
    a = stream(5, 0).random(8)
    assert np.array_equal(a, stream(5, 0).random(8))
    assert not np.array_equal(a, stream(5, 1).random(8))
    assert not np.array_equal(a, stream(6, 0).random(8))


def test_mc_independent_of_thread_count():
    inst = fig3()
    one = mc_volume(inst, 42, 300_000, threads=1)
    many = mc_volume(inst, 42, 300_000, threads=4)
    assert one == many


def test_thread_cap_from_environment(monkeypatch):
    monkeypatch.setenv("MONENV_THREADS", "1")
    assert default_threads() == 1
    monkeypatch.delenv("MONENV_THREADS")
    assert default_threads() >= 1


def test_mc_recovers_known_box():
    # a sub-box of the sampling box: exact volume 0.3 * 0.5 * 2
    def inside(pts):
        return (pts[:, 0] < 0.3) & (pts[:, 1] < 0.5)

    est = mc_box_volume(inside, (0, 0, 0), (1, 1, 2), seed=3, samples=200_000)
    assert abs(est.value - 0.3) <= 3 * est.stderr
    frac = est.hits / est.samples
    expected = 2.0 * math.sqrt(frac * (1 - frac) / (est.samples - 1))
    assert_allclose(est.stderr, expected, rtol=1e-12)


@pytest.mark.parametrize("make", [fig2, fig3])
def test_mc_agrees_with_closed_form(make):
    inst = make()
    est = mc_volume(inst, 2024, 1_000_000)
    assert abs(est.value - volume_closed_form(inst)) <= 3 * est.stderr


def test_mc_two_seeds_consistent():
    inst = fig2()
    a, b = mc_volume(inst, 1, 200_000), mc_volume(inst, 2, 200_000)
    assert abs(a.value - b.value) <= 6 * max(a.stderr, b.stderr)


def test_mc_minimum_samples():
    with pytest.raises(ValueError):
        mc_volume(fig2(), 1, 999)


@pytest.mark.parametrize("make", [fig2, fig3])
def test_graph_combinations_inside_hull(make):
    assert graph_combination_sampler(make(), seed=9, trials=20_000) == 0


def test_graph_combinations_random_instances():
    for k, inst in enumerate(random_instances(80, 10)):
        assert graph_combination_sampler(inst, seed=k, trials=2_000) == 0


def test_graph_combination_sampler_detects_violations():
    # demanding a strictly positive margin flags the boundary points themselves
    assert graph_combination_sampler(fig2(), seed=9, trials=2_000, slack=-1e-3) > 0


def test_mccormick_exact_at_corners():
    box = McCormickBox((0.5, 2.0), (1.0, 3.0))
    for x1 in box.x1_bounds:
        for x2 in box.x2_bounds:
            lo, up = mccormick_bounds(box, [x1, x2])
            assert_allclose([lo, up], [x1 * x2, x1 * x2], rtol=1e-15)


def test_mccormick_sandwich():
    box = McCormickBox((0.0, 2.0), (0.5, 4.0))
    X = np.random.default_rng(0).uniform((0, 0.5), (2, 4), (10_000, 2))
    lo, up = mccormick_bounds(box, X)
    prod = X[:, 0] * X[:, 1]
    assert np.all(lo <= prod + 1e-12) and np.all(prod <= up + 1e-12)


def test_mccormick_outside_box():
    with pytest.raises(ValueError):
        mccormick_bounds(McCormickBox((0, 1), (0, 1)), [2.0, 0.5])
    with pytest.raises(ValueError):
        McCormickBox((1.0, 0.0), (0, 1))


def test_wedge_hull_tighter_than_mccormick():
    for inst in (make_instance((1, 1), 0.5, 2, 1, 4), make_instance((1, 1), 0.2, 3, 0.5, 6)):
        report = tightness_comparison(inst, grid=100)
        assert report.points > 100
        assert report.dominance_violations == 0
        assert report.strictly_tighter


def test_tightness_needs_bilinear():
    with pytest.raises(ValueError, match="bilinear"):
        tightness_comparison(fig2())
