import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from pointscatter._numerics import compensated_sum, extrapolate_to_zero


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e12, 1e12), min_size=0, max_size=300))
def test_compensated_sum_tracks_fsum(xs):
    exact = math.fsum(xs)
    scale = math.fsum(abs(x) for x in xs)
    eps = np.finfo(float).eps
    # Twice-working-precision bound: one rounding of the result plus n eps^2.
    bound = eps * abs(exact) + len(xs) * eps**2 * scale
    assert abs(compensated_sum(np.array(xs)) - exact) <= bound


def test_compensated_sum_recovers_cancellation():
    x = np.array([1e16, 1.0, -1e16, 1.0] * 50)
    assert compensated_sum(x) == 100.0


def test_compensated_sum_rows():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(7, 1001)) * 10.0 ** rng.integers(-8, 8, size=(7, 1001))
    got = compensated_sum(a, axis=1)
    assert np.array_equal(got, [math.fsum(row) for row in a])


def test_extrapolation_of_polynomial():
    h = 0.5 ** np.arange(5)
    value, err = extrapolate_to_zero(h, 3.0 + 2 * h - 7 * h**2 + h**3)
    assert abs(value - 3.0) < 1e-12
    assert err < 1e-10
