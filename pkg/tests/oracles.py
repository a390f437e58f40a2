"""Independent reference computations in exact rational arithmetic.

Nothing here imports the package's numerical routines, so agreement with
them is evidence rather than tautology.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def lower_hull(xs, fs):
    """Lower convex hull of finite points ``(x, f)`` by the monotone chain.

    Inputs are converted to :class:`Fraction` so collinearity tests are exact.
    Returns the hull vertices sorted by ``x``.
    """
    pts = sorted((Fraction(x), Fraction(f)) for x, f in zip(xs, fs) if math.isfinite(f))
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly below the chord
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        if hull and hull[-1][0] == p[0]:
            continue
        hull.append(p)
    return hull


def envelope_1d(xs, fs):
    """Closed convex envelope of a sampled function, evaluated at the samples.

    ``+inf`` outside the hull's x-range, ``-inf`` everywhere when any value
    is ``-inf``.  Returned values are exact fractions or infinities.
    """
    if any(f == -math.inf for f in fs):
        return [-math.inf] * len(xs)
    hull = lower_hull(xs, fs)
    if not hull:
        return [math.inf] * len(xs)
    out = []
    for x in xs:
        x = Fraction(x)
        if x < hull[0][0] or x > hull[-1][0]:
            out.append(math.inf)
            continue
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 <= x <= x2:
                out.append(y1 + (y2 - y1) * (x - x1) / (x2 - x1))
                break
        else:
            out.append(hull[0][1])
    return out


def conjugate(xs, fs, ss):
    """``max_x s x - f(x)`` over the samples, exactly."""
    out = []
    for s in ss:
        best = -math.inf
        for x, f in zip(xs, fs):
            if f == math.inf:
                continue
            if f == -math.inf:
                best = math.inf
                break
            v = Fraction(s) * Fraction(x) - Fraction(f)
            if best == -math.inf or v > best:
                best = v
        out.append(best)
    return out


def index_by_enumeration(weights, terms, budgets):
    """Largest ``max_n sum_{i in S} w_i u_n(i)`` over sets of mass at most each budget.

    ``terms`` lists the per-atom vectors of the tail window.  Weights and
    budgets are read as the nearest simple fractions (``0.1`` as ``1/10``),
    so mass comparisons are made on the intended values.  All sums are
    carried out in integers over a common denominator, one pass over every
    subset; only small atom counts are feasible.  Returns one
    :class:`Fraction` per budget.
    """
    w = [Fraction(x).limit_denominator(1 << 20) for x in weights]
    caps = [Fraction(b).limit_denominator(1 << 20) for b in budgets]
    vals = [[w[i] * Fraction(float(u[i])) for i in range(len(w))] for u in terms]
    den = math.lcm(*(q.denominator for q in w + caps + [v for row in vals for v in row]))
    wi = [int(q * den) for q in w]
    vi = [[int(v * den) for v in row] for row in vals]
    m = len(w)
    mass = [0] * (1 << m)
    best_of = [0] * (1 << m)
    sums = [[0] * (1 << m) for _ in vi]
    for mask in range(1, 1 << m):
        low = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        mass[mask] = mass[rest] + wi[low]
        for row, acc in zip(vi, sums):
            acc[mask] = acc[rest] + row[low]
        best_of[mask] = max(acc[mask] for acc in sums)
    out = []
    for cap in caps:
        c = int(cap * den)
        top = max((best_of[k] for k in range(1 << m) if mass[k] <= c), default=0)
        out.append(Fraction(max(top, 0), den))
    return out
