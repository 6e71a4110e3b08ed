"""Shared instance generators for the test-suite."""
import math

import numpy as np

from monenv import make_instance

FIG2 = dict(exponents=(1.7, 1.5), p=0.35, q=3.0, lower=0.4, upper=10.0)
FIG3 = dict(exponents=(0.1, 0.2), p=0.4, q=3.3, lower=0.65, upper=1.21)
FIG1 = {
    "a": ((1.0, 1.0), 0.55, 2.4, (2, 4, 8, 16, 32)),
    "b": ((0.3, 0.6), 0.19, 3.6, (1, 2, 3)),
    "c": ((3.9, 7.6), 1.5, 4.9, (8, 2**9, 2**15, 2**21)),
    "d": ((0.6, 0.4), 0.2, 9.0, (0.5, 1, 2)),
}


def fig2():
    return make_instance(**FIG2)


def fig3():
    return make_instance(**FIG3)


def _log_uniform(rng, lo, hi):
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_instance(rng, n=2, regime=None, equal=False, a_range=(0.05, 8.0)):
    """Random valid instance.

    ``regime`` is ``"low"`` (beta < 1), ``"one"`` (beta == 1), ``"high"``
    (beta > 1) or ``None``; ``equal=True`` forces ``a_i == a_j``.
    """
    while True:
        a = [_log_uniform(rng, *a_range) for _ in range(n)]
        if equal:
            a[1] = a[0]
        beta = math.fsum(a)
        if regime == "one":
            a = [v / beta for v in a]
            a[-1] = 1.0 - math.fsum(a[:-1]) if not equal or n > 2 else a[0]
            break
        if regime == "low":
            scale = rng.uniform(0.2, 0.9) / beta
            a = [v * scale for v in a]
            break
        if regime is None or (regime == "high" and beta > 1.05):
            break
    a = tuple(a)
    p = _log_uniform(rng, 0.05, 5.0)
    q = p * _log_uniform(rng, 1.2, 30.0)
    lower = _log_uniform(rng, 0.05, 20.0)
    upper = lower * _log_uniform(rng, 1.2, 50.0)
    return make_instance(a, p, q, lower, upper)


def random_instances(seed, count, **kwargs):
    rng = np.random.default_rng(seed)
    return [random_instance(rng, **kwargs) for _ in range(count)]
