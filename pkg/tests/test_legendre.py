import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import conjugate as oracle_conjugate
from oracles import envelope_1d

from epilim.extreal import INF, Grid, GridFunction, InputError, indicator
from epilim.legendre import (
    auto_dual_grid,
    biconjugate,
    conjugate_at,
    conjugate_bruteforce,
    conjugate_fast_1d,
    infconv,
)

vals = st.one_of(st.integers(-30, 30).map(float), st.just(INF))


@st.composite
def int_functions(draw, allow_neg=False):
    lo = -draw(st.integers(0, 12))
    hi = draw(st.integers(1, 12))
    choices = st.one_of(vals, st.just(-INF)) if allow_neg else vals
    v = draw(st.lists(choices, min_size=hi - lo + 1, max_size=hi - lo + 1))
    return GridFunction(Grid.integer(lo, hi), v)


@given(int_functions(allow_neg=True), st.integers(1, 20))
def test_fast_equals_bruteforce(f, s):
    dual = Grid.integer(-s, s)
    a, b = conjugate_fast_1d(f, dual), conjugate_bruteforce(f, dual)
    assert np.array_equal(a.function.values, b.function.values)


@given(int_functions(), st.integers(1, 10))
def test_conjugate_matches_rational_oracle(f, s):
    dual = Grid.integer(-s, s)
    ref = oracle_conjugate(f.grid.axis(0).tolist(), f.values.tolist(), dual.axis(0).tolist())
    got = conjugate_bruteforce(f, dual).function.values
    assert [float(r) for r in ref] == got.tolist()


@settings(max_examples=60)
@given(int_functions())
def test_biconjugate_is_lower_hull(f):
    ref = envelope_1d(f.grid.axis(0).tolist(), f.values.tolist())
    got = biconjugate(f).values
    for r, v in zip(ref, got):
        assert v == r if r in (INF, -INF) else abs(float(r) - v) <= 1e-12


@given(int_functions(), st.integers(1, 16))
def test_fenchel_young(f, s):
    dual = Grid.integer(-s, s)
    fs = conjugate_bruteforce(f, dual).function.values
    fin = f.values < INF
    score = np.multiply.outer(dual.axis(0), f.grid.axis(0)[fin]) - f.values[fin]
    assert np.all(score <= fs[:, None])


def test_minus_infinity_makes_everything_extreme():
    g = Grid.integer(-2, 2)
    f = GridFunction(g, [0, -INF, 0, 0, 0])
    assert np.all(conjugate_bruteforce(f, g).function.values == INF)
    assert np.all(biconjugate(f).values == -INF)


def test_identically_infinite():
    g = Grid.integer(-2, 2)
    f = GridFunction.constant(g, INF)
    assert np.all(conjugate_fast_1d(f, g).function.values == -INF)
    assert not biconjugate(f).proper


def test_boundary_flag_marks_window_truncation():
    g = Grid.integer(-3, 3)
    f = GridFunction(g, 0.25 * g.axis(0) ** 2)
    res = conjugate_bruteforce(f, Grid.integer(-3, 3))
    # slopes beyond 1.5 push the maximizer to the window edge
    assert res.boundary_flag.tolist() == [True, True, False, False, False, True, True]


def test_conjugate_at_arbitrary_points():
    g = Grid.integer(-2, 2)
    f = GridFunction(g, g.axis(0) ** 2)
    v, arg = conjugate_at(f, [0.5, 4.0])
    assert v.tolist() == [0.0, 4.0] and arg.tolist() == [2, 4]


def test_two_dimensional_envelope_below_function():
    g = Grid((-2.0, -2.0), (2.0, 2.0), (9, 9))
    p = g.points()
    f = GridFunction(g, np.minimum((p[:, 0] - 1) ** 2 + p[:, 1] ** 2, (p[:, 0] + 1) ** 2 + p[:, 1] ** 2))
    fb = biconjugate(f)
    assert np.all(fb.values <= f.values + 1e-12)
    assert fb(np.array([0.0, 0.0])) < f(np.array([0.0, 0.0]))


def test_infconv_with_indicator_of_origin_is_identity():
    g = Grid.integer(-5, 5)
    f = GridFunction(g, [INF, 3, 1, 0, 2, 5, 1, 1, INF, 4, 2])
    assert np.array_equal(infconv(f, indicator([0.0], g)).values, f.values)


def test_infconv_needs_matching_grids():
    with pytest.raises(InputError):
        infconv(GridFunction.constant(Grid.integer(-1, 1), 0.0), GridFunction.constant(Grid.integer(-2, 2), 0.0))


def test_auto_dual_grid_covers_slopes():
    g = Grid.symmetric(1.0, 9)
    f = GridFunction(g, 3 * np.abs(g.axis(0)))
    d = auto_dual_grid(f)
    assert d.max[0] >= 3.0
