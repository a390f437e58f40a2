"""Discrete Legendre-Fenchel transforms, convex envelopes and infimal convolution.

All transforms are window-truncated: the supremum ranges over the primal grid
only.  Ties are broken towards the smallest (row-major) primal index so that
every routine is deterministic and the fast and brute-force paths agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .extreal import INF, Grid, GridFunction, InputError, upper_sum_array

__all__ = [
    "DualGrid",
    "ConjugateResult",
    "conjugate_bruteforce",
    "conjugate_fast_1d",
    "conjugate_at",
    "auto_dual_grid",
    "biconjugate",
    "infconv",
]

DualGrid = Grid
_CHUNK = 1 << 22


@dataclass(frozen=True)
class ConjugateResult:
    """Conjugate values on a dual grid with the primal maximizers.

    Attributes
    ----------
    function : GridFunction
        The conjugate sampled on the dual grid.
    argmax_index : np.ndarray
        Flat primal index of the (first) maximizer, ``-1`` when the primal
        function is identically ``+inf``.
    boundary_flag : np.ndarray
        True where the maximizer sits on the primal window boundary, i.e.
        where the window truncation may be biting.
    """

    function: GridFunction
    argmax_index: np.ndarray
    boundary_flag: np.ndarray


def _scores(pts: np.ndarray, fv: np.ndarray, s: np.ndarray) -> np.ndarray:
    # <s, x> - f(x) with f = +inf points excluded
    if pts.shape[1] == 1:
        val = np.multiply.outer(s[:, 0], pts[:, 0]) - fv
    else:
        val = np.multiply.outer(s[:, 0], pts[:, 0]) + np.multiply.outer(s[:, 1], pts[:, 1])
        val = val - fv
    val[:, fv == INF] = -INF
    return val


def conjugate_at(f: GridFunction, s_points) -> tuple:
    """Brute-force conjugate at arbitrary dual points.

    Parameters
    ----------
    f : GridFunction
    s_points : array_like, shape (M,) or (M, dim)

    Returns
    -------
    values, argmax : np.ndarray
    """
    s = np.asarray(s_points, dtype=float)
    if s.ndim == 1:
        s = s[:, None] if f.grid.dim == 1 else s[None, :]
    if s.shape[1] != f.grid.dim:
        raise InputError("dual point dimension does not match the grid")
    pts = f.grid.points()
    fv = f.values
    m = s.shape[0]
    vals = np.full(m, -INF)
    arg = np.full(m, -1, dtype=np.int64)
    if not np.any(fv < INF):
        return vals, arg
    step = max(1, _CHUNK // max(1, pts.shape[0]))
    for a in range(0, m, step):
        sc = _scores(pts, fv, s[a:a + step])
        k = np.argmax(sc, axis=1)
        arg[a:a + step] = k
        vals[a:a + step] = sc[np.arange(sc.shape[0]), k]
    return vals, arg


def _result(f: GridFunction, dual: Grid, vals, arg) -> ConjugateResult:
    bmask = f.grid.boundary_mask()
    flag = np.where(arg >= 0, bmask[np.maximum(arg, 0)], False)
    return ConjugateResult(GridFunction(dual, vals), np.asarray(arg), np.asarray(flag, dtype=bool))


def conjugate_bruteforce(f: GridFunction, dual: Grid) -> ConjugateResult:
    """Conjugate by exhaustive maximization over all primal grid points.

    Examples
    --------
    >>> g = Grid.integer(-1, 1)
    >>> from epilim.extreal import indicator
    >>> conjugate_bruteforce(indicator([0.0], g), g).function.values.tolist() == [0.0, 0.0, 0.0]
    True
    """
    if dual.dim != f.grid.dim:
        raise InputError("primal and dual dimensions differ")
    vals, arg = conjugate_at(f, dual.points())
    return _result(f, dual, vals, arg)


def _lower_hull(x: list, y: list) -> list:
    # Andrew monotone chain, lower part, collinear points dropped
    hull: list = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def conjugate_fast_1d(f: GridFunction, dual: Grid) -> ConjugateResult:
    """Linear-time conjugate of a one-dimensional grid function.

    The maximizer for each dual point is found by sweeping the lower convex
    hull of the finite samples with a monotone pointer, comparing the exact
    expression ``s * x - f(x)`` used by :func:`conjugate_bruteforce`.  The
    output is therefore identical to the brute-force one whenever that
    expression is evaluated without rounding (integer or dyadic data).
    """
    if f.grid.dim != 1 or dual.dim != 1:
        raise InputError("conjugate_fast_1d needs one-dimensional grids")
    xs = f.grid.axis(0)
    fv = f.values
    s = dual.axis(0)
    m = s.size
    neg = np.flatnonzero(fv == -INF)
    if neg.size:
        return _result(f, dual, np.full(m, INF), np.full(m, int(neg[0]), dtype=np.int64))
    fin = np.flatnonzero(fv < INF)
    if fin.size == 0:
        return _result(f, dual, np.full(m, -INF), np.full(m, -1, dtype=np.int64))

    px = xs[fin].tolist()
    py = fv[fin].tolist()
    hull = _lower_hull(px, py)
    hx = [px[i] for i in hull]
    hy = [py[i] for i in hull]
    hidx = [int(fin[i]) for i in hull]
    last = len(hull) - 1

    vals = np.empty(m)
    arg = np.empty(m, dtype=np.int64)
    j = 0
    for k, sk in enumerate(s.tolist()):
        cur = sk * hx[j] - hy[j]
        while j < last:
            nxt = sk * hx[j + 1] - hy[j + 1]
            if nxt > cur:
                j += 1
                cur = nxt
            else:
                break
        vals[k] = cur
        arg[k] = hidx[j]
    return _result(f, dual, vals, arg)


def _max_adjacent_slopes(f: GridFunction) -> list:
    """Per-axis maximum slope magnitude between consecutive finite samples."""
    vals = f.reshape()
    out = []
    for k in range(f.grid.dim):
        axis = f.grid.axis(k)
        best = 0.0
        lines = np.moveaxis(vals, k, -1).reshape(-1, f.grid.n[k])
        for line in lines:
            idx = np.flatnonzero(np.isfinite(line))
            if idx.size >= 2:
                sl = np.abs(np.diff(line[idx]) / np.diff(axis[idx]))
                best = max(best, float(np.max(sl)))
        out.append(best)
    return out


def auto_dual_grid(f: GridFunction) -> Grid:
    """Dual window covering every finite slope of ``f``.

    The half-width on each axis is the largest slope between consecutive
    finite samples, rounded up to a multiple of the primal spacing.
    """
    slopes = _max_adjacent_slopes(f)
    lo, hi, ns = [], [], []
    for k in range(f.grid.dim):
        h = f.grid.h[k]
        mult = max(1, math.ceil(slopes[k] / h - 1e-9))
        half = mult * h
        steps = min(mult, (f.grid.n[k] - 1) // 2 + 1)
        lo.append(-half)
        hi.append(half)
        ns.append(2 * steps + 1)
    return Grid(tuple(lo), tuple(hi), tuple(ns))


def _breakpoints_1d(xs, fv, conj: ConjugateResult) -> list:
    """Exact slopes where the maximizer of the conjugate switches.

    Between consecutive dual samples with different maximizers ``a < b`` the
    crossing slope of the two affine pieces is tested; if a third primal
    point beats both there the interval is split and searched recursively.
    """
    arg = conj.argmax_index
    pairs = []
    for k in range(arg.size - 1):
        a, b = int(arg[k]), int(arg[k + 1])
        if a != b:
            pairs.append((a, b))
    found = []
    seen = set()
    while pairs:
        a, b = pairs.pop()
        if (a, b) in seen:
            continue
        seen.add((a, b))
        sab = (fv[b] - fv[a]) / (xs[b] - xs[a])
        seg = np.arange(a, b + 1)
        ok = fv[seg] < INF
        seg = seg[ok]
        sc = sab * xs[seg] - fv[seg]
        c = int(seg[int(np.argmax(sc))])
        if c in (a, b):
            found.append((sab, a))
            found.append((sab, b))
        else:
            pairs.append((a, c))
            pairs.append((c, b))
    return found


def _biconjugate_1d(f: GridFunction) -> GridFunction:
    xs = f.grid.axis(0)
    fv = f.values
    fin = np.flatnonzero(fv < INF)
    out = np.full(fv.size, INF)
    if fin.size == 1:
        out[fin] = fv[fin]
        return GridFunction(f.grid, out)
    dual = auto_dual_grid(f)
    conj = conjugate_fast_1d(f, dual)
    cand = [(s, int(a)) for s, a in zip(dual.axis(0).tolist(), conj.argmax_index.tolist())]
    cand += _breakpoints_1d(xs, fv, conj)
    cs = np.array([c[0] for c in cand])
    ca = np.array([c[1] for c in cand], dtype=np.int64)
    # second transform, written as f(a) + s (x - x_a) = s x - f*(s)
    base_x = xs[ca]
    base_f = fv[ca]
    lo, hi = int(fin[0]), int(fin[-1])
    xi = xs[lo:hi + 1]
    res = np.empty(xi.size)
    step = max(1, _CHUNK // max(1, cs.size))
    for a in range(0, xi.size, step):
        block = base_f + cs * (xi[a:a + step, None] - base_x)
        res[a:a + step] = np.max(block, axis=1)
    # samples within rounding of the hull keep their own value, which makes
    # the envelope idempotent in floating point
    seg = fv[lo:hi + 1]
    span = float(xs[hi] - xs[lo])
    mag = np.max(np.abs(base_f)) + np.max(np.abs(cs)) * span
    fin_seg = seg < INF
    err = 16 * np.finfo(float).eps * (np.abs(res) + np.where(fin_seg, np.abs(seg), 0.0) + mag)
    out[lo:hi + 1] = np.where(fin_seg & (seg <= res + err), seg, res)
    return GridFunction(f.grid, out)


def _biconjugate_2d(f: GridFunction) -> GridFunction:
    dual = auto_dual_grid(f)
    c1 = conjugate_bruteforce(f, dual).function
    c2 = conjugate_bruteforce(c1, f.grid).function
    return GridFunction(f.grid, np.minimum(c2.values, f.values))


def biconjugate(f: GridFunction) -> GridFunction:
    """Closed convex envelope ``f**`` restricted to the grid.

    In one dimension the second transform is taken over the whole dual
    interval: the breakpoints of the discrete conjugate are located exactly,
    so the result equals the lower convex hull of the finite samples on
    their span and ``+inf`` outside it.  In two dimensions the plain double
    transform on an automatic dual grid is returned, which is exact only up
    to the dual resolution.

    A function identically ``+inf`` maps to itself (its ``proper`` flag is
    false); any ``-inf`` value makes the envelope identically ``-inf``.
    """
    fv = f.values
    if not np.any(fv < INF):
        return GridFunction(f.grid, np.full(fv.size, INF))
    if np.any(fv == -INF):
        return GridFunction(f.grid, np.full(fv.size, -INF))
    if f.grid.dim == 1:
        return _biconjugate_1d(f)
    return _biconjugate_2d(f)


def infconv(f: GridFunction, g: GridFunction) -> GridFunction:
    """Infimal convolution ``(f □ g)(x) = min_y f(x - y) + g(y)`` on a shared grid.

    Values of ``f`` outside the window count as ``+inf``; pairs involving
    ``+inf`` are skipped (so ``(-inf) + (+inf)`` never enters the minimum).
    """
    if f.grid != g.grid:
        raise InputError("infimal convolution needs identical grids")
    grid = f.grid
    for k in range(grid.dim):
        if not grid.min[k] < 0.0 < grid.max[k]:
            raise InputError("window must contain the origin in its interior")
    o = np.array(grid.origin_index())
    shape = np.array(grid.shape)
    idx = np.array(np.unravel_index(np.arange(grid.size), grid.shape)).T
    fpad = np.append(f.values, INF)
    gv = g.values
    out = np.empty(grid.size)
    step = max(1, _CHUNK // grid.size)
    for a in range(0, grid.size, step):
        xi = idx[a:a + step]
        diff = xi[:, None, :] - idx[None, :, :] + o
        valid = np.all((diff >= 0) & (diff < shape), axis=2)
        flat = np.ravel_multi_index(tuple(np.moveaxis(np.where(valid[..., None], diff, 0), 2, 0)), grid.shape)
        flat = np.where(valid, flat, grid.size)
        tot = upper_sum_array(fpad[flat], gv[None, :])
        out[a:a + step] = np.min(tot, axis=1)
    return GridFunction(grid, out)
