"""Seeded instance generators shared by the scenario runner and the test suite."""

from __future__ import annotations

import numpy as np

from .extreal import INF, Grid, GridFunction
from .measure import AtomSequence, Integrand, MeasureSpace, SimpleFunction, spike_sequence
from .rng import XorShift64Star
from .tails import Tail


def integer_grid_function(rng: XorShift64Star, n_max: int = 2049, vmax: int = 50,
                          allow_neg_inf: bool = False) -> GridFunction:
    """Integer-valued function on a random integer window containing 0.

    About one point in eight is ``+inf``; with ``allow_neg_inf`` an
    occasional instance also carries a ``-inf``.
    """
    n = rng.integer(2, n_max)
    lo = -rng.integer(0, n - 1)
    grid = Grid.integer(lo, lo + n - 1)
    vals = np.array([float(rng.integer(-vmax, vmax)) for _ in range(n)])
    for i in range(n):
        if rng.integer(0, 7) == 0:
            vals[i] = INF
    if np.all(vals == INF):
        vals[rng.integer(0, n - 1)] = 0.0
    if allow_neg_inf and rng.integer(0, 19) == 0:
        vals[rng.integer(0, n - 1)] = -INF
    return GridFunction(grid, vals)


def integer_dual_grid(rng: XorShift64Star, smax: int = 64) -> Grid:
    s = rng.integer(1, smax)
    return Grid.integer(-s, s)


def real_grid_function(rng: XorShift64Star, n_max: int = 257) -> GridFunction:
    """Real-valued function on a dyadic window, with some ``+inf`` entries."""
    n = 2 * rng.integer(2, n_max // 2) + 1
    half = (n - 1) // 2
    h = 2.0 ** -rng.integer(0, 4)
    grid = Grid((-half * h,), (half * h,), (n,))
    vals = np.array([rng.uniform(-4.0, 4.0) for _ in range(n)])
    kind = rng.integer(0, 2)
    x = grid.axis(0)
    if kind == 1:
        vals = vals * 0.25 + 0.5 * x * x
    elif kind == 2:
        vals = np.where(np.abs(x) > half * h * 0.6, INF, vals)
    return GridFunction(grid, vals)


def convex_separable(rng: XorShift64Star, atoms: int = 6):
    """Convex per-atom integrand on ``[-4, 4]`` with non-uniform weights and an ``x*``.

    The slopes of ``x*`` stay inside the range where the maximizer of
    ``x* e - f(e)`` is interior to the window.
    """
    w = np.array([rng.uniform(0.1, 1.0) for _ in range(atoms)])
    space = MeasureSpace.atoms(w)
    a = np.array([rng.uniform(0.25, 2.0) for _ in range(atoms)])
    b = np.array([rng.uniform(0.0, 1.0) for _ in range(atoms)])
    c = np.array([rng.uniform(-1.0, 1.0) for _ in range(atoms)])
    grid = Grid((-4.0,), (4.0,), (257,))

    def fn(at, e):
        t = e[:, 0]
        return a[at] * (t - c[at]) ** 2 + b[at] * np.abs(t)

    f = Integrand(fn, 1, convex_in_e=True, grid=grid)
    xs = SimpleFunction(space, np.array([rng.uniform(-1.5, 1.5) for _ in range(atoms)]))
    return f, xs


def delta_instance(rng: XorShift64Star, dyadic: bool = True) -> AtomSequence:
    """Small exact-tail sequence for comparison against enumeration.

    At most 12 atoms and a tail fully materialized by index 8.  With
    ``dyadic`` the weights are dyadic rationals and the values half-integer
    multiples, so every set sum is exact in floating point; otherwise
    weights like ``1/m`` or ``0.1`` bring rounding into the sums.
    """
    m = rng.integer(1, 12)
    if dyadic:
        menu = [0.25, 0.5, 1.0, 0.125, 0.375]
        uniform = 2.0 ** -rng.integer(0, 4)
    else:
        menu = [0.1, 0.3, 1.0 / 3.0, 0.7, 0.2]
        uniform = 1.0 / m
    w = np.array([rng.choice(menu) for _ in range(m)]) if rng.integer(0, 1) else np.full(m, uniform)
    space = MeasureSpace.atoms(w)
    if rng.integer(0, 1):
        tail = Tail.constant(rng.integer(1, 8))
    else:
        per = rng.integer(1, 4)
        tail = Tail.periodic(per, rng.integer(1, 9 - per))
    table = {n: np.array([float(rng.integer(-2, 6)) * rng.choice([0.5, 1.0, 2.0]) for _ in range(m)])
             for n in range(1, 9)}

    def prov(n):
        if n < tail.start:
            return table[n]
        k = tail.start + (n - tail.start) % tail.period
        return table[k]

    return AtomSequence(space, prov, tail, "small")


def ui_library(depth: int = 10) -> list:
    """Named sequences on a dyadic space with their expected verdict.

    Returns ``(name, sequence, expected_ui)`` triples; the expectation is
    the known behaviour of the continuous family.
    """
    sp = MeasureSpace.dyadic(depth)
    mid = sp.midpoints()
    lib = [
        ("constant-one", AtomSequence(sp, lambda n: np.ones(sp.size), Tail.constant()), True),
        ("bounded-wave", AtomSequence(sp, lambda n: 1.0 + np.cos(2 * np.pi * mid * (n % 4)),
                                      Tail.periodic(4)), True),
        ("spike-linear", spike_sequence(sp), False),
        ("spike-half", spike_sequence(sp, scale=2.0, power=1.0), False),
        ("spike-sqrt", spike_sequence(sp, power=0.5), True),
        ("spike-quarter", spike_sequence(sp, scale=3.0, power=0.25), True),
        ("spike-square", spike_sequence(sp, power=2.0), False),
        ("log-singularity", AtomSequence(sp, lambda n: -np.log(mid), Tail.constant()), True),
        ("inverse-sqrt", AtomSequence(sp, lambda n: mid ** -0.5 * 0.5, Tail.constant()), True),
        ("growing-constant", AtomSequence(sp, lambda n: float(n) * np.ones(sp.size), Tail.truncated(1 << 12)),
         False),
        ("alternating-spike", AtomSequence(sp, lambda n: spike_sequence(sp)(n) if n % 2 else np.ones(sp.size),
                                           Tail.truncated(1 << 12)), False),
        ("decaying", AtomSequence(sp, lambda n: np.ones(sp.size) / n, Tail.truncated(1 << 12)), True),
        ("zero", AtomSequence(sp, lambda n: np.zeros(sp.size), Tail.constant()), True),
        ("moving-bump", AtomSequence(sp, lambda n: 2.0 * sp.overlap(0.5, 0.75) / sp.weights,
                                     Tail.constant()), True),
    ]
    return lib


def ui_random(rng: XorShift64Star, depth: int = 10):
    """Bounded background plus a scaled spike ``c n**p 1_(0, 1/n]``.

    Returns ``(sequence, expected_ui)``: the continuous family is
    uniformly integrable exactly when ``c == 0`` or ``p < 1``.
    """
    sp = MeasureSpace.dyadic(depth)
    mid = sp.midpoints()
    c = rng.choice([0.0, 0.5, 1.0, 3.0])
    p = rng.choice([0.25, 0.5, 1.0, 1.5])
    amp = rng.uniform(0.0, 2.0)
    freq = rng.integer(1, 5)
    spike = spike_sequence(sp, scale=c, power=p) if c > 0 else None

    def prov(n):
        base = amp * (1.0 + np.sin(2 * np.pi * freq * mid)) / 2
        return base + (spike(n) if spike is not None else 0.0)

    seq = AtomSequence(sp, prov, Tail.truncated(1 << 16), f"c={c},p={p}")
    return seq, bool(c == 0 or p < 1)
