"""Extended-real arithmetic, uniform grids and grid-sampled functions.

Extended reals are stored as ``float64`` with ``+inf`` and ``-inf`` as the
two infinite elements.  NaN never represents a value; any operation that
would produce one either raises :class:`ExtRealError` (strict mode) or
resolves it by a documented convention (upper mode).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

INF = math.inf

__all__ = [
    "INF",
    "ExtRealError",
    "InputError",
    "strict_sum",
    "upper_sum",
    "strict_sum_array",
    "upper_sum_array",
    "ext_scale",
    "ext_equal",
    "Grid",
    "GridFunction",
    "indicator",
    "sublevel",
]


class ExtRealError(ArithmeticError):
    """Raised when strict arithmetic meets ``(+inf) + (-inf)``."""


class InputError(ValueError):
    """Raised for malformed inputs (off-grid points, bad windows, ...)."""


def _check_not_nan(x: float) -> float:
    x = float(x)
    if math.isnan(x):
        raise InputError("NaN is not an extended real")
    return x


def strict_sum(a: float, b: float) -> float:
    """Sum of two extended reals; ``(+inf) + (-inf)`` is an error."""
    a, b = _check_not_nan(a), _check_not_nan(b)
    if (a == INF and b == -INF) or (a == -INF and b == INF):
        raise ExtRealError("(+inf) + (-inf) is undefined in strict mode")
    return a + b


def upper_sum(a: float, b: float) -> float:
    """Sum with the upper convention ``(+inf) + (-inf) = +inf``.

    Examples
    --------
    >>> upper_sum(INF, -INF)
    inf
    >>> upper_sum(3.0, -INF)
    -inf
    """
    a, b = _check_not_nan(a), _check_not_nan(b)
    if a == INF or b == INF:
        return INF
    return a + b


def strict_sum_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise strict sum; raises if any entry pairs opposite infinities."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    bad = (np.isposinf(a) & np.isneginf(b)) | (np.isneginf(a) & np.isposinf(b))
    if np.any(bad):
        raise ExtRealError("(+inf) + (-inf) is undefined in strict mode")
    return a + b


def upper_sum_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise sum with ``(+inf) + (-inf) = +inf``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        out = a + b
    out = np.where(np.isposinf(a) | np.isposinf(b), INF, out)
    return out


def ext_scale(t: float, a: float, zero_times_inf: bool = False) -> float:
    """Product ``t * a`` for real ``t`` and extended real ``a``.

    Parameters
    ----------
    t : float
        Finite scalar.
    a : float
        Extended real.
    zero_times_inf : bool
        When true, ``0 * (+-inf) = 0``.  This is the convention used inside
        upper integrals (a null set carries no mass whatever the integrand
        does there).  When false such products raise.
    """
    t = _check_not_nan(t)
    a = _check_not_nan(a)
    if math.isinf(t):
        raise InputError("scale factor must be finite")
    if t == 0.0 and math.isinf(a):
        if zero_times_inf:
            return 0.0
        raise ExtRealError("0 * inf requires zero_times_inf=True")
    return t * a


def ext_equal(a, b, atol: float = 1e-12) -> bool:
    """Exact match on infinities, absolute tolerance on finite entries."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return False
    fa, fb = np.isfinite(a), np.isfinite(b)
    if not np.array_equal(fa, fb):
        return False
    if not np.array_equal(a[~fa], b[~fb]):
        return False
    return bool(np.all(np.abs(a[fa] - b[fb]) <= atol))


@dataclass(frozen=True)
class Grid:
    """Uniform rectilinear grid over a box in dimension 1 or 2.

    Parameters
    ----------
    min, max : tuple of float
        Per-axis window bounds.
    n : tuple of int
        Per-axis point counts, each at least 2.
    require_origin : bool
        If the window contains 0 on an axis, insist that 0 is a grid point
        on that axis.

    Notes
    -----
    The flat index of a point is row-major (last axis fastest), which is also
    the lexicographic order used for tie-breaking.
    """

    min: tuple
    max: tuple
    n: tuple
    require_origin: bool = field(default=True, compare=False)

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.min))
        hi = tuple(float(v) for v in np.atleast_1d(self.max))
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)
        object.__setattr__(self, "n", n)
        if not (len(lo) == len(hi) == len(n)) or len(n) not in (1, 2):
            raise InputError("grid dimension must be 1 or 2 with matching axes")
        for a, b, k in zip(lo, hi, n):
            if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
                raise InputError(f"bad window [{a}, {b}]")
            if k < 2:
                raise InputError("need at least 2 points per axis")
            if self.require_origin and a < 0.0 < b:
                step = (b - a) / (k - 1)
                pos = -a / step
                if abs(pos - round(pos)) > 1e-9 * max(1.0, pos):
                    raise InputError("origin must be a grid point")

    @classmethod
    def symmetric(cls, half_width: float, n: int, dim: int = 1) -> "Grid":
        """Window ``[-L, L]^dim`` with ``n`` points per axis (``n`` odd)."""
        if n % 2 == 0:
            raise InputError("symmetric grids need an odd point count")
        return cls((-half_width,) * dim, (half_width,) * dim, (n,) * dim)

    @classmethod
    def integer(cls, lo: int, hi: int) -> "Grid":
        """One-dimensional grid of the integers ``lo..hi``."""
        return cls((float(lo),), (float(hi),), (int(hi - lo + 1),))

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple:
        return self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def h(self) -> tuple:
        return tuple((b - a) / (k - 1) for a, b, k in zip(self.min, self.max, self.n))

    @property
    def spacing(self) -> float:
        """Largest axis spacing."""
        return max(self.h)

    def axis(self, k: int) -> np.ndarray:
        a, b, n = self.min[k], self.max[k], self.n[k]
        pts = a + np.arange(n) * ((b - a) / (n - 1))
        pts[-1] = b
        # snap near-zero coordinates so the origin is exactly 0
        pts[np.abs(pts) < 1e-12 * max(abs(a), abs(b))] = 0.0
        return pts

    def axes(self) -> list:
        return [self.axis(k) for k in range(self.dim)]

    def points(self) -> np.ndarray:
        """All grid points as an array of shape ``(size, dim)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def origin_index(self) -> tuple:
        out = []
        for k in range(self.dim):
            pos = -self.min[k] / self.h[k]
            out.append(int(round(pos)))
        return tuple(out)

    def locate(self, point: Sequence[float], tol: float = 1e-9) -> int:
        """Flat index of a grid point; raises if the point is off-grid."""
        p = np.atleast_1d(np.asarray(point, dtype=float))
        if p.shape != (self.dim,):
            raise InputError("point dimension does not match grid")
        idx = []
        for k in range(self.dim):
            pos = (p[k] - self.min[k]) / self.h[k]
            j = int(round(pos))
            if abs(pos - j) > tol or not 0 <= j < self.n[k]:
                raise InputError(f"point {tuple(p)} is not on the grid")
            idx.append(j)
        return int(np.ravel_multi_index(tuple(idx), self.n))

    def boundary_mask(self) -> np.ndarray:
        """Flat boolean mask of points on the window boundary."""
        mask = np.zeros(self.n, dtype=bool)
        for k in range(self.dim):
            sl = [slice(None)] * self.dim
            sl[k] = 0
            mask[tuple(sl)] = True
            sl[k] = -1
            mask[tuple(sl)] = True
        return mask.ravel()

    def to_dict(self) -> dict:
        return {"dim": self.dim, "min": list(self.min), "max": list(self.max), "n": list(self.n)}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        g = cls(tuple(d["min"]), tuple(d["max"]), tuple(d["n"]))
        if "dim" in d and int(d["dim"]) != g.dim:
            raise InputError("declared dim does not match axes")
        return g


def encode_value(v: float):
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return float(v)


def decode_value(v) -> float:
    if isinstance(v, str):
        if v in ("inf", "+inf"):
            return INF
        if v == "-inf":
            return -INF
        raise InputError(f"bad value {v!r}")
    return _check_not_nan(v)


@dataclass(frozen=True)
class GridFunction:
    """Extended-real function sampled at every point of a :class:`Grid`.

    ``values`` is stored flat in row-major order and made read-only.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size != self.grid.size:
            raise InputError(f"expected {self.grid.size} values, got {v.size}")
        if np.any(np.isnan(v)):
            raise InputError("NaN is not an extended real")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        """Sample ``fn`` on the grid; ``fn`` receives one array per axis."""
        pts = grid.points()
        vals = fn(*[pts[:, k] for k in range(grid.dim)])
        return cls(grid, np.broadcast_to(np.asarray(vals, dtype=float), (grid.size,)))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.size, float(c)))

    @property
    def domain(self) -> np.ndarray:
        """Boolean mask of the effective domain ``{f < +inf}``."""
        return self.values < INF

    @property
    def proper(self) -> bool:
        return bool(np.any(self.domain)) and not bool(np.any(self.values == -INF))

    def reshape(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def __call__(self, point) -> float:
        return float(self.values[self.grid.locate(point)])

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def to_json(self) -> str:
        return json.dumps({"grid": self.grid.to_dict(), "values": [encode_value(v) for v in self.values]})

    @classmethod
    def from_json(cls, text: str) -> "GridFunction":
        try:
            d = json.loads(text)
            grid = Grid.from_dict(d["grid"])
            vals = [decode_value(v) for v in d["values"]]
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise InputError(f"malformed grid function: {exc}") from exc
        return cls(grid, vals)


def indicator(point_set: Iterable, grid: Grid) -> GridFunction:
    """Indicator of a set of grid points: 0 on the set, ``+inf`` elsewhere."""
    vals = np.full(grid.size, INF)
    for p in point_set:
        vals[grid.locate(p)] = 0.0
    return GridFunction(grid, vals)


def sublevel(f: GridFunction, r: float) -> np.ndarray:
    """Flat indices of grid points with ``f(x) <= r``."""
    return np.flatnonzero(f.values <= float(r))
