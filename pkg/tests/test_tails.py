import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epilim.extreal import InputError
from epilim.tails import Tail, tail_limit


def materialize(tail, fn):
    return {n: np.array(fn(n), dtype=float) for n in tail.indices()}


def test_constant_tail_is_exact():
    t = Tail.constant(start=5)
    lim = tail_limit(materialize(t, lambda n: 3.0), t, "inf")
    assert lim.exact and float(lim.value) == 3.0


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=6), st.integers(1, 5))
def test_periodic_limits_are_period_extrema(cycle, start):
    t = Tail.periodic(len(cycle), start)
    vals = materialize(t, lambda n: cycle[(n - start) % len(cycle)])
    assert float(tail_limit(vals, t, "inf").value) == min(cycle)
    assert float(tail_limit(vals, t, "sup").value) == max(cycle)


def test_truncated_bracket_contains_limit():
    t = Tail.truncated(1 << 14)
    lim = tail_limit(materialize(t, lambda n: 2.0 + 1.0 / n), t, "inf")
    assert not lim.exact
    assert float(lim.lower) <= 2.0 + 1e-12 <= float(lim.upper) + 1e-3


def test_divergence_is_flagged():
    t = Tail.truncated(1 << 12)
    lim = tail_limit(materialize(t, lambda n: float(n)), t, "sup")
    assert bool(lim.diverging) and float(lim.value) == np.inf
    lim = tail_limit(materialize(t, lambda n: -float(n)), t, "inf")
    assert bool(lim.diverging) and float(lim.value) == -np.inf


def test_pointwise_over_trailing_axes():
    t = Tail.truncated(1 << 10)
    lim = tail_limit(materialize(t, lambda n: [1.0, n, (-1) ** n]), t, "inf")
    assert lim.diverging.tolist() == [False, True, False]
    assert float(lim.value[2]) == -1.0


def test_bad_tails_refused():
    with pytest.raises(InputError):
        Tail("eventually")
    with pytest.raises(InputError):
        Tail.truncated(8, block=4)


def test_subsequence_of_periodic_tail():
    t = Tail.periodic(6, start=3).subsequence(4)
    assert t.kind == "periodic" and t.period == 3
