import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epilim.extreal import (
    INF,
    ExtRealError,
    Grid,
    GridFunction,
    InputError,
    ext_equal,
    ext_scale,
    indicator,
    strict_sum,
    sublevel,
    upper_sum,
    upper_sum_array,
)

ext = st.one_of(st.floats(-1e6, 1e6, allow_nan=False), st.sampled_from([INF, -INF]))


def test_strict_sum_rejects_opposite_infinities():
    with pytest.raises(ExtRealError):
        strict_sum(INF, -INF)
    assert strict_sum(INF, 3.0) == INF


def test_upper_sum_convention():
    assert upper_sum(INF, -INF) == INF
    assert upper_sum(-INF, 2.0) == -INF
    out = upper_sum_array(np.array([INF, -INF, 1.0]), np.array([-INF, 1.0, 2.0]))
    assert out.tolist() == [INF, -INF, 3.0]


@given(ext, ext)
def test_upper_sum_commutes_and_dominates(a, b):
    assert upper_sum(a, b) == upper_sum(b, a)
    if not (math.isinf(a) and math.isinf(b) and a != b):
        assert upper_sum(a, b) == strict_sum(a, b)


def test_nan_is_rejected():
    with pytest.raises((InputError, ExtRealError)):
        strict_sum(float("nan"), 1.0)


def test_scale_of_infinity():
    assert ext_scale(2.0, -INF) == -INF
    assert ext_scale(-1.0, INF) == -INF
    assert ext_scale(0.0, INF, zero_times_inf=True) == 0.0


def test_grid_needs_origin():
    with pytest.raises(InputError):
        Grid((-1.0,), (2.0,), (3,))
    Grid((1.0,), (2.0,), (3,))  # windows away from 0 are fine
    g = Grid.integer(-2, 3)
    assert g.size == 6 and g.origin_index() == (2,)


def test_grid_function_json_round_trip():
    g = Grid((-1.0, -1.0), (1.0, 1.0), (3, 3))
    f = GridFunction(g, [0, 1, INF, -INF, 2, 3, 4, 5, 6])
    back = GridFunction.from_json(f.to_json())
    assert back.grid == g
    assert ext_equal(back.values, f.values, 0.0)
    assert '"inf"' in f.to_json()


@given(st.lists(ext, min_size=5, max_size=5))
def test_json_round_trip_is_lossless(vals):
    f = GridFunction(Grid.integer(-2, 2), vals)
    assert np.array_equal(GridFunction.from_json(f.to_json()).values, f.values)


def test_indicator_and_sublevel():
    g = Grid.integer(-3, 3)
    ind = indicator([0.0, 2.0], g)
    assert ind.values.tolist() == [INF, INF, INF, 0, INF, 0, INF]
    f = GridFunction(g, np.abs(g.axis(0)))
    assert sublevel(f, 1.0).tolist() == [2, 3, 4]


def test_ext_equal_tolerance():
    assert ext_equal([1.0, INF], [1.0 + 1e-13, INF])
    assert not ext_equal([1.0, INF], [1.0, -INF])
