import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epilim.epilimit import (
    BUILTIN_FAMILIES,
    FunctionSequence,
    ball_inf,
    builtin_family,
    epi_converges,
    lower_epilimit,
    seq_lower_epilimit,
    upper_epilimit,
    verify_conjugate_identity,
)
from epilim.extreal import INF, Grid, GridFunction, InputError
from epilim.tails import Tail


def test_constant_sequence_epi_converges():
    g = Grid.symmetric(1.0, 21)
    seq = FunctionSequence(g, lambda n: g.axis(0) ** 2, Tail.constant())
    lo, up = lower_epilimit(seq), upper_epilimit(seq)
    assert lo.exact and np.array_equal(lo.function.values, up.function.values)
    assert epi_converges(seq)


def test_alternating_sequence_splits_limits():
    g = Grid.integer(-4, 4)
    a, b = np.abs(g.axis(0)), np.abs(g.axis(0) - 2)
    seq = FunctionSequence(g, lambda n: a if n % 2 else b, Tail.periodic(2))
    lo, up = lower_epilimit(seq, radii=[0.0]), upper_epilimit(seq, radii=[0.0])
    assert np.array_equal(lo.function.values, np.minimum(a, b))
    assert np.array_equal(up.function.values, np.maximum(a, b))
    assert not epi_converges(seq, radii=[0.0])


@settings(max_examples=30)
@given(st.lists(st.lists(st.integers(-5, 5), min_size=7, max_size=7), min_size=1, max_size=4))
def test_lower_below_upper_below_sequential(cycle):
    g = Grid.integer(-3, 3)
    arr = [np.array(c, dtype=float) for c in cycle]
    seq = FunctionSequence(g, lambda n: arr[(n - 1) % len(arr)], Tail.periodic(len(arr)))
    lo = lower_epilimit(seq).function.values
    assert np.all(lo <= upper_epilimit(seq).function.values)
    assert np.all(lo <= seq_lower_epilimit(seq).function.values)


def test_steepening_parabola_flags_divergence_below_ceiling():
    g = Grid.symmetric(1.0, 21)
    seq = FunctionSequence(g, lambda n: n * g.axis(0) ** 2, Tail.truncated(1 << 12))
    rep = lower_epilimit(seq, ceiling=1e3)
    far = np.abs(g.axis(0)) > 0.15
    assert np.all(rep.diverging[far]) and np.all(rep.function.values[far] == INF)
    assert rep.function(np.array([0.0])) == 0.0


def test_ball_inf_radius_zero_is_identity():
    g = Grid.integer(-3, 3)
    v = np.array([3.0, 1, 4, 1, 5, 9, 2])
    assert np.array_equal(ball_inf(v, g, 0.0), v)
    assert ball_inf(v, g, 1.0).tolist() == [1, 1, 1, 1, 1, 2, 2]


def test_radius_below_spacing_refused():
    g = Grid.symmetric(1.0, 11)
    seq = FunctionSequence(g, lambda n: np.zeros(11), Tail.constant())
    with pytest.raises(InputError):
        lower_epilimit(seq, radii=[0.05])


@pytest.mark.parametrize("name", BUILTIN_FAMILIES)
def test_conjugate_identity_on_builtins(name):
    h = 1e-2
    seq, lb = builtin_family(name, h=h)
    dual = Grid((-1.5,), (1.5,), (301,))
    rep = verify_conjugate_identity(seq, lb, dual)
    assert rep.precondition_ok and rep.passed and rep.deviation <= 3 * h


def test_identity_refuses_without_coercive_minorant():
    g = Grid.symmetric(1.0, 21)
    seq = FunctionSequence(g, lambda n: -np.abs(g.axis(0)) * 5, Tail.constant())
    rep = verify_conjugate_identity(seq, GridFunction(g, -np.abs(g.axis(0)) * 5), Grid.symmetric(1.0, 21))
    assert not rep.precondition_ok and not rep.passed
