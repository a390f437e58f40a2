"""Lower and upper epi-limits of grid-function sequences.

For a sequence ``(f_n)`` on a common grid the lower epi-limit at ``x`` is

    sup_delta  liminf_n  min { f_n(x') : |x' - x|_inf <= delta },

and the upper one uses lim sup.  ``delta`` runs over a ladder of radii
commensurate with the grid; the supremum over a nonincreasing family is the
value at the smallest radius.  A radius of 0 (the ball reduced to ``x``
itself) is accepted as an explicit opt-in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .extreal import INF, Grid, GridFunction, InputError
from .legendre import conjugate_fast_1d, conjugate_bruteforce
from .tails import DEFAULT_CEILING, Tail, tail_limit

__all__ = [
    "FunctionSequence",
    "EpiLimitReport",
    "IdentityReport",
    "ball_inf",
    "lower_epilimit",
    "upper_epilimit",
    "seq_lower_epilimit",
    "epi_converges",
    "verify_conjugate_identity",
    "builtin_family",
    "BUILTIN_FAMILIES",
    "default_radii",
]


@dataclass(frozen=True)
class FunctionSequence:
    """Rule ``n -> f_n`` on one shared grid with a declared tail.

    Parameters
    ----------
    grid : Grid
    provider : callable
        Pure function ``n -> GridFunction`` (or array of values).
    tail : Tail
    label : str
    """

    grid: Grid
    provider: Callable
    tail: Tail
    label: str = ""

    def __call__(self, n: int) -> GridFunction:
        out = self.provider(n)
        if not isinstance(out, GridFunction):
            out = GridFunction(self.grid, out)
        if out.grid != self.grid:
            raise InputError(f"f_{n} lives on a different grid")
        return out

    def materialize(self) -> dict:
        return {n: self(n).values for n in self.tail.indices()}

    def validate_tail(self, samples: int = 2) -> bool:
        """Check the declared constant/periodic pattern on a few later indices."""
        t = self.tail
        if not t.exact:
            return True
        for k in range(samples):
            for n in range(t.start, t.start + t.period):
                later = n + (k + 1) * t.period
                if not np.array_equal(self(n).values, self(later).values):
                    return False
        return True


@dataclass(frozen=True)
class EpiLimitReport:
    """Epi-limit values with an enclosing bracket.

    ``exact`` is true only for eventually constant or periodic tails; for
    truncated tails ``function`` is the horizon estimate and ``bracket``
    the interval it was extracted from.
    """

    function: GridFunction
    lower: np.ndarray
    upper: np.ndarray
    exact: bool
    diverging: np.ndarray
    kind: str
    radii: tuple
    trace: dict = field(default_factory=dict)

    @property
    def bracket(self) -> np.ndarray:
        return np.stack([self.lower, self.upper], axis=1)


def default_radii(grid: Grid) -> list:
    h = grid.spacing
    return [8 * h, 4 * h, 2 * h, h]


def ball_inf(values: np.ndarray, grid: Grid, radius: float) -> np.ndarray:
    """Minimum over the closed max-norm ball of the given radius (grid points only)."""
    v = np.asarray(values, dtype=float).reshape(grid.shape)
    out = v.copy()
    for k in range(grid.dim):
        r = int(round(radius / grid.h[k]))
        if r <= 0:
            continue
        cur = out
        res = cur.copy()
        n = grid.n[k]
        for d in range(1, min(r, n - 1) + 1):
            lo = [slice(None)] * grid.dim
            hi = [slice(None)] * grid.dim
            lo[k], hi[k] = slice(0, n - d), slice(d, n)
            res[tuple(lo)] = np.minimum(res[tuple(lo)], cur[tuple(hi)])
            res[tuple(hi)] = np.minimum(res[tuple(hi)], cur[tuple(lo)])
        out = res
    return out.ravel()


def _check_radii(radii, grid: Grid) -> list:
    if radii is None:
        radii = default_radii(grid)
    radii = [float(r) for r in radii]
    if not radii:
        raise InputError("empty radii ladder")
    for r in radii:
        if r < 0:
            raise InputError("radii must be nonnegative")
        for h in grid.h:
            q = r / h
            if abs(q - round(q)) > 1e-9 * max(1.0, q):
                raise InputError(f"radius {r} is not a multiple of the grid spacing")
        if 0 < r < min(grid.h) * (1 - 1e-12):
            raise InputError("positive radii must be at least the grid spacing")
    return sorted(radii, reverse=True)


def _epilimit(seq: FunctionSequence, radii, mode: str, kind: str, ceiling: float) -> EpiLimitReport:
    radii = _check_radii(radii, seq.grid)
    raw = seq.materialize()
    best = None
    trace = {}
    for r in radii:
        vals = {n: ball_inf(v, seq.grid, r) for n, v in raw.items()}
        lim = tail_limit(vals, seq.tail, mode, ceiling)
        trace[r] = lim.value
        if best is None:
            best = [lim.value, lim.lower, lim.upper, lim.diverging]
        else:
            # sup over the ladder
            best[0] = np.maximum(best[0], lim.value)
            best[1] = np.maximum(best[1], lim.lower)
            best[2] = np.maximum(best[2], lim.upper)
            best[3] = best[3] | lim.diverging
    value, lower, upper, div = best
    div = div | (lower > ceiling)
    value = np.where(lower > ceiling, INF, value)
    return EpiLimitReport(
        GridFunction(seq.grid, value), lower, upper, seq.tail.exact, div, kind, tuple(radii), trace
    )


def lower_epilimit(seq: FunctionSequence, radii=None, ceiling: float = DEFAULT_CEILING) -> EpiLimitReport:
    """Lower epi-limit on the grid.

    Examples
    --------
    >>> from epilim.tails import Tail
    >>> g = Grid.integer(-2, 2)
    >>> seq = FunctionSequence(g, lambda n: np.abs(g.axis(0)), Tail.constant())
    >>> lower_epilimit(seq, radii=[0.0]).function.values
    array([2., 1., 0., 1., 2.])
    """
    return _epilimit(seq, radii, "inf", "lower", ceiling)


def upper_epilimit(seq: FunctionSequence, radii=None, ceiling: float = DEFAULT_CEILING) -> EpiLimitReport:
    """Upper epi-limit on the grid (lim sup in place of lim inf)."""
    return _epilimit(seq, radii, "sup", "upper", ceiling)


def seq_lower_epilimit(seq: FunctionSequence, radii=None, ceiling: float = DEFAULT_CEILING) -> EpiLimitReport:
    """Sequential lower epi-limit.

    On a metric grid every point has a countable neighbourhood base, so the
    sequential and topological lower limits coincide; this is the same
    computation under a different label.
    """
    rep = _epilimit(seq, radii, "inf", "sequential-lower", ceiling)
    return rep


def epi_converges(seq: FunctionSequence, radii=None, atol: float = 0.0) -> bool:
    """True when lower and upper epi-limits coincide on the grid."""
    lo = lower_epilimit(seq, radii).function.values
    up = upper_epilimit(seq, radii).function.values
    same_inf = np.array_equal(np.isinf(lo), np.isinf(up)) and np.array_equal(lo[np.isinf(lo)], up[np.isinf(up)])
    fin = np.isfinite(lo)
    return bool(same_inf and np.all(np.abs(lo[fin] - up[fin]) <= atol))


@dataclass(frozen=True)
class IdentityReport:
    """Comparison of the conjugate of the lower epi-limit with lim sup of conjugates."""

    passed: bool
    deviation: float
    tolerance: float
    precondition_ok: bool
    message: str
    lhs: Optional[np.ndarray] = None
    rhs: Optional[np.ndarray] = None
    boundary_hits: int = 0


def _conj(f: GridFunction, dual: Grid):
    if f.grid.dim == 1:
        return conjugate_fast_1d(f, dual)
    return conjugate_bruteforce(f, dual)


def _coercive(lb: GridFunction, margin: float) -> bool:
    v = lb.values
    bmask = lb.grid.boundary_mask()
    inner = v[~bmask]
    if inner.size == 0 or not np.any(np.isfinite(inner)):
        return False
    return bool(np.min(v[bmask]) >= np.min(inner) + margin)


def verify_conjugate_identity(
    seq: FunctionSequence,
    lower_bound: GridFunction,
    dual: Grid,
    radii=None,
    tolerance: Optional[float] = None,
    margin: float = 1e-3,
) -> IdentityReport:
    """Check that the conjugate of the lower epi-limit is lim sup of conjugates.

    Parameters
    ----------
    seq : FunctionSequence
    lower_bound : GridFunction
        Common minorant of every ``f_n``; must be coercive on the window
        (boundary minimum above the interior minimum by ``margin``).
    dual : Grid
        Dual window on which both sides are compared.
    tolerance : float, optional
        Defaults to ``3 h``.
    """
    h = seq.grid.spacing
    tol = 3 * h if tolerance is None else float(tolerance)
    if lower_bound.grid != seq.grid:
        return IdentityReport(False, INF, tol, False, "lower bound lives on another grid")
    if not _coercive(lower_bound, margin):
        return IdentityReport(False, INF, tol, False, "lower bound is not coercive on the window")
    raw = seq.materialize()
    for n, v in raw.items():
        if np.any(v < lower_bound.values):
            return IdentityReport(False, INF, tol, False, f"f_{n} violates the lower bound")

    li = lower_epilimit(seq, radii).function
    lhs_res = _conj(li, dual)
    lhs = lhs_res.function.values
    conj = {n: _conj(GridFunction(seq.grid, v), dual).function.values for n, v in raw.items()}
    rhs = tail_limit(conj, seq.tail, "sup").value

    both_inf = (lhs == rhs) & np.isinf(lhs)
    with np.errstate(invalid="ignore"):
        diff = np.where(both_inf, 0.0, np.abs(lhs - rhs))
    dev = float(np.max(diff)) if diff.size else 0.0
    hits = int(np.sum(lhs_res.boundary_flag))
    ok = dev <= tol
    msg = "identity holds within tolerance" if ok else "deviation exceeds tolerance"
    return IdentityReport(ok, dev, tol, True, msg, lhs, rhs, hits)


# builtin families --------------------------------------------------------

def _family(name: str, grid: Grid, horizon: int):
    x = grid.axis(0)
    quad = 0.5 * x * x
    if name == "constant":
        vals = np.abs(x) + quad
        return FunctionSequence(grid, lambda n: vals, Tail.constant(), name)
    if name == "alternating-shift":
        def prov(n):
            return np.abs(x - (-1.0) ** n) + quad
        return FunctionSequence(grid, prov, Tail.periodic(2), name)
    if name == "steep-quadratic":
        return FunctionSequence(grid, lambda n: n * x * x, Tail.truncated(horizon), name)
    if name == "shifted-vee":
        return FunctionSequence(grid, lambda n: np.abs(x - 1.0 / n) + quad, Tail.truncated(horizon), name)
    raise InputError(f"unknown family {name!r}")


BUILTIN_FAMILIES = ("constant", "alternating-shift", "steep-quadratic", "shifted-vee")


def builtin_family(name: str, h: float = 1e-2, half_width: float = 2.0, horizon: int = 10**6):
    """Builtin sequence on ``[-half_width, half_width]`` with spacing ``h``.

    Returns
    -------
    seq : FunctionSequence
    lower_bound : GridFunction
        A coercive common minorant.
    """
    steps = int(round(half_width / h))
    grid = Grid((-steps * h,), (steps * h,), (2 * steps + 1,))
    seq = _family(name, grid, horizon)
    x = grid.axis(0)
    lb = GridFunction(grid, 0.5 * x * x)
    return seq, lb
