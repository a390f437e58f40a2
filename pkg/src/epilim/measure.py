"""Finite measure spaces, integral functionals and equi-integrability tools.

A :class:`MeasureSpace` is a finite list of positive weights.  A dyadic
space of depth ``d`` splits ``(0, 1]`` into ``2**d`` equal cells and stands
in for an atomless space: statements that need atomless measures are only
exercised on such spaces, with the depth as the resolution parameter.

Sequences of per-atom vectors are :class:`AtomSequence` objects carrying a
:class:`~epilim.tails.Tail`, so lim sup over ``n`` is exact for constant or
periodic tails and a bracketed estimate otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .extreal import INF, Grid, GridFunction, InputError, ext_scale, upper_sum
from .legendre import conjugate_at
from .tails import DEFAULT_CEILING, Tail, tail_limit

__all__ = [
    "MeasureSpace",
    "SimpleFunction",
    "Integrand",
    "AtomSequence",
    "Refusal",
    "upper_integral",
    "integral_functional",
    "lp_norm",
    "orlicz_gauge",
    "knapsack_max",
    "default_eps_ladder",
    "zero_threshold",
    "DeltaPlusReport",
    "delta_plus_greedy",
    "delta_plus_bruteforce",
    "UIReport",
    "uniform_integrability_test",
    "PiecewiseLinearYoung",
    "young_from_ui",
    "BitingReport",
    "biting_extract",
    "InterchangeReport",
    "conjugate_interchange_check",
    "spike_sequence",
]


class Refusal(Exception):
    """An operation declined its input; ``witness`` explains why."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class MeasureSpace:
    """Finite weighted atom set, optionally a dyadic partition of ``(0, 1]``.

    Parameters
    ----------
    weights : array_like
        Strictly positive atom masses.
    depth : int, optional
        Set for dyadic spaces (``2**depth`` equal cells).
    covering : array_like of int, optional
        Exhaustion tags: atoms with tag ``<= k`` form ``Omega_k``.  The
        largest tag stands for the part of a sigma-finite space that was
        truncated away.
    """

    weights: np.ndarray
    depth: Optional[int] = None
    covering: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size == 0 or not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InputError("atom weights must be finite and strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.covering is not None:
            c = np.array(self.covering, dtype=np.int64).ravel()
            if c.size != w.size:
                raise InputError("covering tags must match the atoms")
            c.setflags(write=False)
            object.__setattr__(self, "covering", c)

    @classmethod
    def atoms(cls, weights, covering=None, label: str = "") -> "MeasureSpace":
        return cls(np.asarray(weights, dtype=float), None, covering, label)

    @classmethod
    def dyadic(cls, depth: int, label: str = "") -> "MeasureSpace":
        if depth < 0 or depth > 24:
            raise InputError("depth must lie in 0..24")
        m = 1 << depth
        return cls(np.full(m, 1.0 / m), depth, None, label or f"dyadic-{depth}")

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    @property
    def is_refinement(self) -> bool:
        return self.depth is not None

    @property
    def cell_mass(self) -> float:
        return float(np.min(self.weights))

    def cells(self) -> tuple:
        """Left and right endpoints of the dyadic cells."""
        if not self.is_refinement:
            raise InputError("only dyadic spaces have cells")
        m = self.size
        k = np.arange(m)
        return k / m, (k + 1) / m

    def midpoints(self) -> np.ndarray:
        a, b = self.cells()
        return 0.5 * (a + b)

    def overlap(self, a: float, b: float) -> np.ndarray:
        """Per-cell length of ``(a, b] ∩ cell``."""
        lo, hi = self.cells()
        return np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)

    def to_dict(self) -> dict:
        return {
            "atoms": self.weights.tolist(),
            "refinement": None if self.depth is None else {"depth": self.depth},
            "covering": None if self.covering is None else self.covering.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MeasureSpace":
        ref = d.get("refinement")
        if ref:
            sp = cls.dyadic(int(ref["depth"]))
            if d.get("atoms") and len(d["atoms"]) != sp.size:
                raise InputError("atom list does not match refinement depth")
            return sp
        return cls.atoms(d["atoms"], d.get("covering"))


@dataclass(frozen=True)
class SimpleFunction:
    """Per-atom vector in ``R^d``; stored with shape ``(atoms, d)``."""

    space: MeasureSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.space.size:
            raise InputError("values must have one row per atom")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    def __add__(self, other: "SimpleFunction") -> "SimpleFunction":
        return SimpleFunction(self.space, self.values + other.values)

    def scale(self, t: float) -> "SimpleFunction":
        return SimpleFunction(self.space, t * self.values)

    def to_dict(self) -> dict:
        return {"values": self.values.tolist()}

    @classmethod
    def from_dict(cls, space: MeasureSpace, d: dict) -> "SimpleFunction":
        return cls(space, np.asarray(d["values"], dtype=float))


@dataclass(frozen=True)
class Integrand:
    """Map ``(atom, e) -> extended real``, vectorized.

    Parameters
    ----------
    fn : callable
        ``fn(atoms, e)`` with ``atoms`` an int array of shape ``(k,)`` and
        ``e`` of shape ``(k, dim)``; returns shape ``(k,)``.
    dim : int
    convex_in_e, nonnegative, young : bool
        Structure flags.  ``young`` promises ``f(., 0) = 0`` and convexity
        and evenness in ``e``.
    grid : Grid, optional
        Evaluation grid used when an atom's function must be sampled.
    meta : dict
        Free-form attachments (e.g. the profile of a Young function).
    """

    fn: Callable
    dim: int = 1
    convex_in_e: bool = False
    nonnegative: bool = False
    young: bool = False
    grid: Optional[Grid] = None
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_scalar(cls, g: Callable, **kw) -> "Integrand":
        """Atom-independent integrand on ``R`` from a vectorized ``g(e)``."""
        return cls(lambda atoms, e: np.asarray(g(e[:, 0]), dtype=float), 1, **kw)

    def at(self, atoms, e) -> np.ndarray:
        atoms = np.asarray(atoms, dtype=np.int64).ravel()
        e = np.asarray(e, dtype=float)
        if e.ndim == 1:
            e = e[:, None] if self.dim == 1 else e[None, :]
        out = np.asarray(self.fn(atoms, e), dtype=float).ravel()
        if np.any(np.isnan(out)):
            raise InputError("integrand produced NaN")
        return out

    def evaluate(self, x: SimpleFunction) -> np.ndarray:
        """Per-atom values ``f(omega, x(omega))``."""
        if x.dim != self.dim:
            raise InputError("dimension mismatch between integrand and function")
        return self.at(np.arange(x.space.size), x.values)

    def sample(self, atom: int, grid: Optional[Grid] = None) -> GridFunction:
        """The atom's function sampled on a grid."""
        grid = grid or self.grid
        if grid is None:
            raise InputError("integrand has no evaluation grid")
        pts = grid.points()
        return GridFunction(grid, self.at(np.full(pts.shape[0], atom), pts))


def upper_integral(v, space: MeasureSpace) -> float:
    """Upper integral of a per-atom extended-real vector.

    Computed as ``I(v+) - I(v-)`` with ``(+inf) - (+inf) = +inf``.

    Examples
    --------
    >>> sp = MeasureSpace.atoms([1.0, 1.0])
    >>> upper_integral([INF, -INF], sp)
    inf
    >>> upper_integral([-INF, 3.0], sp)
    -inf
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size != space.size:
        raise InputError("vector length does not match the space")
    w = space.weights
    pos = 0.0
    neg = 0.0
    for wi, vi in zip(w.tolist(), v.tolist()):
        if vi > 0:
            pos = upper_sum(pos, ext_scale(wi, vi, zero_times_inf=True))
        elif vi < 0:
            neg = upper_sum(neg, ext_scale(wi, -vi, zero_times_inf=True))
    return upper_sum(pos, -neg)


def integral_functional(f: Integrand, x: SimpleFunction) -> float:
    """``I_f(x)``: upper integral of ``omega -> f(omega, x(omega))``."""
    return upper_integral(f.evaluate(x), x.space)


def lp_norm(x: SimpleFunction, p: float) -> float:
    """``L_p`` norm for ``p`` in ``[1, inf]`` (Euclidean norm on values)."""
    p = float(p)
    if p < 1:
        raise InputError("p must be at least 1")
    nr = x.norms()
    if math.isinf(p):
        return float(np.max(nr))
    return float(np.sum(x.space.weights * nr**p) ** (1.0 / p))


def orlicz_gauge(phi: Integrand, x: SimpleFunction, rtol: float = 1e-12) -> float:
    """Luxemburg gauge ``inf {t > 0 : I_phi(x / t) <= 1}`` by bisection.

    Returns the upper end of the final bracket, so ``I_phi(x / gauge) <= 1``
    holds whenever the gauge is finite and positive.
    """
    if not phi.young:
        raise InputError("the gauge needs a Young integrand")
    if not np.any(x.values != 0):
        return 0.0

    def inside(t: float) -> bool:
        return integral_functional(phi, x.scale(1.0 / t)) <= 1.0

    hi = max(lp_norm(x, math.inf), 1e-300)
    steps = 0
    while not inside(hi):
        hi *= 2.0
        steps += 1
        if steps > 2000 or math.isinf(hi):
            return INF
    lo = hi / 2.0
    while inside(lo):
        hi = lo
        lo /= 2.0
        if lo < 1e-300:
            return 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return hi


# knapsack ------------------------------------------------------------------

_MASS_SLACK = 1e-12


def knapsack_max(weights: np.ndarray, gains: np.ndarray, budget: float, node_limit: int = 2_000_000):
    """Exact ``max sum(gains[S])`` over atom sets with ``sum(weights[S]) <= budget``.

    Only positive gains are ever selected.  Equal weights use a sort; other
    weights use depth-first branch and bound with the fractional bound.

    Returns
    -------
    value : float
    chosen : np.ndarray of bool
    exact : bool
        False only if the node limit was hit.
    """
    w = np.asarray(weights, dtype=float)
    g = np.asarray(gains, dtype=float)
    chosen = np.zeros(w.size, dtype=bool)
    pos = np.flatnonzero(g > 0)
    if pos.size == 0 or budget <= 0:
        return 0.0, chosen, True
    # same relative slack as the enumeration, so sets of mass exactly the budget fit
    cap0 = float(budget) * (1 + _MASS_SLACK)
    if np.any(np.isposinf(g[pos])):
        idx = pos[np.isposinf(g[pos])]
        fits = idx[w[idx] <= cap0]
        if fits.size:
            chosen[fits[0]] = True
            return INF, chosen, True
        pos = pos[~np.isposinf(g[pos])]
        if pos.size == 0:
            return 0.0, chosen, True
    wp, gp = w[pos], g[pos]
    if np.all(wp == wp[0]):
        k = int(math.floor(cap0 / wp[0]))
        order = np.argsort(-gp, kind="stable")[:k]
        chosen[pos[order]] = True
        return float(np.sum(gp[order])), chosen, True

    order = np.argsort(-(gp / wp), kind="stable")
    ws, gs = wp[order].tolist(), gp[order].tolist()
    n = len(ws)
    best = [0.0, []]
    nodes = [0]

    def bound(i, cap, val):
        for j in range(i, n):
            if ws[j] <= cap:
                cap -= ws[j]
                val += gs[j]
            else:
                return val + gs[j] * cap / ws[j]
        return val

    def dfs(i, cap, val, take):
        nodes[0] += 1
        if val > best[0]:
            best[0], best[1] = val, list(take)
        if i == n or nodes[0] > node_limit:
            return
        if bound(i, cap, val) <= best[0]:
            return
        if ws[i] <= cap:
            take.append(i)
            dfs(i + 1, cap - ws[i], val + gs[i], take)
            take.pop()
        dfs(i + 1, cap, val, take)

    dfs(0, cap0, 0.0, [])
    sel = pos[order[np.array(best[1], dtype=np.int64)]] if best[1] else np.array([], dtype=np.int64)
    chosen[sel] = True
    # report the sum in atom order so equal sets give equal floats
    return float(np.sum(g[chosen])), chosen, nodes[0] <= node_limit


# sequences and the equi-integrability index ----------------------------------

@dataclass(frozen=True)
class AtomSequence:
    """Rule ``n -> per-atom real vector`` with a declared tail."""

    space: MeasureSpace
    provider: Callable
    tail: Tail
    label: str = ""

    def __call__(self, n: int) -> np.ndarray:
        v = np.asarray(self.provider(n), dtype=float).ravel()
        if v.size != self.space.size:
            raise InputError(f"term {n} has the wrong length")
        return v

    def materialize(self) -> dict:
        return {n: self(n) for n in self.tail.indices()}

    def subsequence(self, step: int) -> "AtomSequence":
        return AtomSequence(self.space, lambda n: self.provider(step * n), self.tail.subsequence(step), self.label)

    def norms(self) -> "AtomSequence":
        return AtomSequence(self.space, lambda n: np.abs(self.provider(n)), self.tail, self.label)


def default_eps_ladder(space: MeasureSpace) -> list:
    """Mass budgets ``total * 2**-k`` down to the resolution of the space.

    On dyadic spaces the last budget is one cell; on plain atom spaces it is
    the first budget below the lightest atom, where every set must be empty.
    """
    tot = space.total
    out = [tot]
    if space.is_refinement:
        while out[-1] > space.cell_mass * (1 + 1e-12):
            out.append(out[-1] / 2)
    else:
        while out[-1] >= space.cell_mass:
            out.append(out[-1] / 2)
    return out


def zero_threshold(space: MeasureSpace) -> float:
    """Largest value read as zero for resolution-limited indices.

    Plain atom spaces compute the index exactly, so the threshold is 0.  On
    dyadic spaces the finest budget is one cell, and the index of an
    equi-integrable sequence is only small, not zero; ``2**-4`` is used.
    """
    return 0.0625 if space.is_refinement else 0.0


@dataclass(frozen=True)
class DeltaPlusReport:
    """Value of the equi-integrability index with its budget trace."""

    value: float
    exact: bool
    diverging: bool
    trace: list
    witness: dict
    lower: float
    upper: float
    method: str


def _check_ladder(eps_ladder, space) -> list:
    eps = default_eps_ladder(space) if eps_ladder is None else [float(e) for e in eps_ladder]
    if not eps or any(e <= 0 for e in eps):
        raise InputError("budget ladder must be positive and nonempty")
    return sorted(eps, reverse=True)


def delta_plus_greedy(u: AtomSequence, eps_ladder=None, ceiling: float = DEFAULT_CEILING) -> DeltaPlusReport:
    """Mass-budget form of the equi-integrability index.

    For each budget ``eps`` computes ``limsup_n max_{mu(S) <= eps} int_S u_n``
    (exact knapsack per ``n``) and returns the value at the smallest budget;
    the trace is nondecreasing in ``eps``.
    """
    space = u.space
    eps = _check_ladder(eps_ladder, space)
    raw = u.materialize()
    w = space.weights
    trace, witness = [], {}
    last = None
    exact = u.tail.exact
    for e in eps:
        per_n, sets = {}, {}
        for n, v in raw.items():
            val, chosen, ok = knapsack_max(w, w * v, e)
            exact = exact and ok
            per_n[n] = np.array(val)
            sets[n] = np.flatnonzero(chosen)
        lim = tail_limit(per_n, u.tail, "sup", ceiling)
        val = float(lim.value)
        trace.append((e, val))
        top = max(raw, key=lambda n: (float(per_n[n]), n))
        witness[e] = {"n": int(top), "atoms": sets[top].tolist()}
        last = lim
    value = float(last.value)
    return DeltaPlusReport(
        value, exact, bool(last.diverging), trace, witness, float(last.lower), float(last.upper), "budget"
    )


def delta_plus_bruteforce(u: AtomSequence, max_depth: int = 4, eps_ladder=None) -> DeltaPlusReport:
    """Equi-integrability index by enumerating decreasing set sequences.

    A candidate is a chain ``S_1 ⊇ ... ⊇ S_D`` (``D <= max_depth``) frozen
    after ``D``, whose last set has mass at most the budget.  Its score
    ``limsup_k sup_{n>=k} int_{S_k} u_n`` only involves the frozen set, and
    every set is the last member of some chain, so the search runs over all
    ``2**atoms`` terminal sets.  Limited to 12 atoms, 8 materialized terms,
    depth 4 and exact (constant or periodic) tails.
    """
    space = u.space
    if space.size > 12:
        raise Refusal("brute force is limited to 12 atoms")
    if max_depth < 1 or max_depth > 4:
        raise Refusal("brute force depth must lie in 1..4")
    if not u.tail.exact:
        raise Refusal("brute force needs a constant or periodic tail")
    idx = u.tail.indices()
    if max(idx) > 8:
        raise Refusal("brute force horizon is limited to 8 terms")
    eps = _check_ladder(eps_ladder, space)
    m = space.size
    masks = ((np.arange(1 << m)[:, None] >> np.arange(m)[None, :]) & 1).astype(bool)
    mass = masks.astype(float) @ space.weights
    w = space.weights
    trace, witness = [], {}
    value = 0.0
    for e in eps:
        ok = mass <= e * (1 + _MASS_SLACK)
        best, best_set = 0.0, []
        for row in np.flatnonzero(ok):
            sel = masks[row]
            tail_vals = [float(np.sum((w * u(n))[sel])) for n in idx]
            score = max(tail_vals)
            if score > best:
                best, best_set = score, np.flatnonzero(sel).tolist()
        trace.append((e, best))
        witness[e] = {"atoms": best_set}
        value = best
    return DeltaPlusReport(value, True, False, trace, witness, value, value, "enumeration")


# uniform integrability ----------------------------------------------------

@dataclass(frozen=True)
class UIReport:
    """Outcome of the uniform-integrability test."""

    bounded: bool
    equi: bool
    equi_small_sets: bool
    equi_escape: bool
    ui: bool
    certificate: dict


def _family_norms(family, space):
    if isinstance(family, AtomSequence):
        raw = family.materialize()
        return [np.abs(raw[n]) for n in sorted(raw)], family.tail, raw
    rows = []
    for x in family:
        if x.space != space and x.space.size != space.size:
            raise InputError("family member on another space")
        rows.append(x.norms())
    return rows, None, None


def uniform_integrability_test(family, space: MeasureSpace, eta: Optional[float] = None,
                               tol: Optional[float] = None, bound: float = DEFAULT_CEILING) -> UIReport:
    """Bounded plus equi-integrable, both parts checked at the space's resolution.

    Parameters
    ----------
    family : list of SimpleFunction or AtomSequence
        For a sequence, boundedness uses the tail estimate (divergence means
        unbounded) and the small-set modulus is taken over the tail terms.
    eta : float, optional
        Small-set mass; defaults to the finest budget of the space.
    tol : float, optional
        Largest modulus read as zero; defaults to :func:`zero_threshold`.
    bound : float
        ``L_1`` norms above this count as unbounded.
    """
    rows, tail, raw = _family_norms(family, space)
    w = space.weights
    eta = default_eps_ladder(space)[-1] if eta is None else float(eta)
    tol = zero_threshold(space) if tol is None else float(tol)
    l1 = [float(np.sum(w * r)) for r in rows]
    if tail is not None:
        lim = tail_limit({n: np.array(np.sum(w * np.abs(raw[n]))) for n in raw}, tail, "sup")
        bounded = bool(not lim.diverging and float(lim.value) <= bound)
    else:
        bounded = bool(all(math.isfinite(v) and v <= bound for v in l1))

    # part (1): small sets, exact max over mu(A) <= eta for each member
    worst, worst_member, worst_set = 0.0, None, []
    for k, r in enumerate(rows):
        ordered = np.argsort(-r, kind="stable") if np.all(w == w[0]) else None
        if ordered is not None:
            cnt = int(math.floor(eta / w[0] + 1e-12))
            sel = ordered[:cnt]
            sel = sel[r[sel] > 0]
            val = float(np.sum((w * r)[np.sort(sel)]))
        else:
            val, chosen, _ = knapsack_max(w, w * r, eta)
            sel = np.flatnonzero(chosen)
        if val > worst:
            worst, worst_member, worst_set = val, k, sorted(int(i) for i in sel)
    small = worst <= tol

    # part (2): mass escaping every finite-measure piece of the exhaustion
    escape = True
    escape_val = 0.0
    if space.covering is not None and np.unique(space.covering).size > 1:
        tags = np.unique(space.covering)[:-1]
        vals = []
        for t in tags:
            out = space.covering > t
            vals.append(max(float(np.sum((w * r)[out])) for r in rows))
        escape_val = min(vals)
        escape = escape_val <= tol
    equi = small and escape
    cert = {
        "eta": eta,
        "tol": tol,
        "small_set_modulus": worst,
        "small_set_member": worst_member,
        "small_set": worst_set,
        "escape": escape_val,
        "l1_max": max(l1) if l1 else 0.0,
    }
    return UIReport(bounded, equi, small, escape, bounded and equi, cert)


@dataclass(frozen=True)
class PiecewiseLinearYoung:
    """Convex ``psi(t) = a t + sum_k (t - t_k)+`` on ``t >= 0``, extended evenly."""

    slope0: float
    knots: tuple

    def __call__(self, t) -> np.ndarray:
        t = np.abs(np.asarray(t, dtype=float))
        out = self.slope0 * t
        for k in self.knots:
            out = out + np.maximum(t - k, 0.0)
        return out

    def slopes(self) -> list:
        return [self.slope0 + j for j in range(len(self.knots) + 1)]


def young_from_ui(family, space: MeasureSpace, growth_knots: int = 8) -> Integrand:
    """Superlinear Young integrand ``psi(|e|)`` with ``sup I_psi(|x|) <= 1`` on the family.

    The knots ``t_k`` are chosen so that the family's mass above ``t_k`` is
    at most ``2**-(k+1)``; extra knots beyond the data range make ``psi``
    superlinear.  Any valid certificate is acceptable; the returned
    integrand stores ``psi`` and the verified supremum in ``meta``.

    Raises
    ------
    Refusal
        If the family fails :func:`uniform_integrability_test`.
    """
    rep = uniform_integrability_test(family, space)
    if not rep.ui:
        raise Refusal("family is not uniformly integrable", witness=rep.certificate)
    rows, _, _ = _family_norms(family, space)
    w = space.weights
    l1 = max((float(np.sum(w * r)) for r in rows), default=0.0)
    top = max((float(np.max(r)) for r in rows), default=0.0)
    a = 0.5 / l1 if l1 > 0 else 1.0
    knots = []
    vals = np.unique(np.concatenate(rows)) if rows else np.array([0.0])
    for k in range(1, 64):
        target = 2.0 ** -(k + 1)
        tk = None
        for t in vals:
            tail_mass = max(float(np.sum((w * r)[r > t])) for r in rows)
            if tail_mass <= target:
                tk = float(t)
                break
        if tk is None or tk >= top:
            break
        if not knots or tk > knots[-1]:
            knots.append(tk)
    base = max(top, 1.0)
    for j in range(growth_knots):
        knots.append(base * 2.0 ** j)
    psi = PiecewiseLinearYoung(a, tuple(knots))
    sup_val = max((float(np.sum(w * psi(r))) for r in rows), default=0.0)
    if sup_val > 1.0 + 1e-12:
        raise Refusal("construction failed its own check", witness={"sup": sup_val})

    def fn(atoms, e):
        return psi(np.linalg.norm(e, axis=1))

    return Integrand(fn, 1, convex_in_e=True, nonnegative=True, young=True,
                     meta={"psi": psi, "sup_integral": sup_val})


# biting -----------------------------------------------------------------

@dataclass(frozen=True)
class BitingReport:
    """Exceptional sets, their complements' certificates and a limit candidate."""

    indices: list
    exceptional: list
    certificates: list
    limit: np.ndarray
    heuristic: bool


def biting_extract(seq, space: MeasureSpace, levels: int = 8, bound: float = DEFAULT_CEILING) -> BitingReport:
    """Biting-style decomposition of an ``L_1``-bounded sequence.

    ``A_k`` collects the atoms where some tail term reaches ``k * B`` in
    norm (``B`` the largest ``L_1`` norm, at least 1); outside ``A_k`` the
    tail is bounded by ``k * B`` and hence equi-integrable.  The limit
    candidate is the tail average on atoms outside the last ``A_k`` (NaN on
    it).  Oscillating tails make the candidate heuristic.
    """
    if isinstance(seq, AtomSequence):
        raw = seq.materialize()
        idx = sorted(raw)
        allrows = rows = np.stack([raw[n] for n in idx])
    else:
        # a plain list: its second half plays the tail
        full = [x.values[:, 0] if isinstance(x, SimpleFunction) else np.asarray(x, float) for x in seq]
        if not full:
            raise InputError("empty sequence")
        start = len(full) // 2
        idx = list(range(start + 1, len(full) + 1))
        allrows = np.stack(full)
        rows = allrows[start:]
    w = space.weights
    l1_all = np.abs(allrows) @ w
    peak_all = np.max(np.abs(allrows), axis=0)
    if not np.all(np.isfinite(l1_all)) or float(np.max(l1_all)) > bound:
        raise Refusal("sequence is not bounded in L1", witness={"l1": l1_all.tolist()})
    B = max(1.0, float(np.max(l1_all)))
    peak = peak_all
    exc, certs = [], []
    for k in range(1, levels + 1):
        A = np.flatnonzero(peak >= k * B)
        rest = np.setdiff1d(np.arange(space.size), A)
        certs.append({
            "k": k,
            "mass": float(np.sum(w[A])),
            "remainder_sup": float(np.max(peak[rest])) if rest.size else 0.0,
        })
        exc.append(A.tolist())
    limit = np.mean(rows, axis=0)
    final = np.array(exc[-1], dtype=np.int64)
    limit[final] = np.nan
    keep = np.setdiff1d(np.arange(space.size), final)
    heur = bool(np.any(np.ptp(rows[:, keep], axis=0) > 0)) if keep.size else False
    return BitingReport(idx, exc, certs, limit, heur)


# conjugate interchange --------------------------------------------------

@dataclass(frozen=True)
class InterchangeReport:
    passed: bool
    lhs: float
    rhs: float
    gap: float
    tolerance: float
    boundary_atoms: list


def conjugate_interchange_check(f: Integrand, x_star: SimpleFunction, tol: float = 1e-9) -> InterchangeReport:
    """Compare ``(I_f)*(x*)`` with ``I_{f*}(x*)`` on a finite atom space.

    The left side maximizes ``<x*, x> - I_f(x)`` over per-atom grid
    selections and evaluates the functional at the maximizer; the right
    side integrates per-atom conjugates computed by the Legendre module.

    Raises
    ------
    Refusal
        If some atom's sampled function is not proper.
    """
    space = x_star.space
    if f.grid is None:
        raise InputError("integrand needs an evaluation grid")
    pts = f.grid.points()
    sel = np.empty((space.size, f.dim))
    conj_vals = np.empty(space.size)
    boundary = []
    bmask = f.grid.boundary_mask()
    for i in range(space.size):
        gi = f.sample(i)
        if not gi.proper:
            raise Refusal(f"atom {i} is not proper", witness={"atom": i})
        xs = x_star.values[i]
        score = pts @ xs - gi.values
        score[gi.values == INF] = -INF
        k = int(np.argmax(score))
        sel[i] = pts[k]
        if bmask[k]:
            boundary.append(i)
        val, _ = conjugate_at(gi, xs[None, :])
        conj_vals[i] = val[0]
    x = SimpleFunction(space, sel)
    pairing = float(np.sum(space.weights * np.sum(x_star.values * sel, axis=1)))
    i_f = integral_functional(f, x)
    lhs = upper_sum(pairing, -i_f)
    rhs = upper_integral(conj_vals, space)
    gap = 0.0 if lhs == rhs else abs(lhs - rhs)
    return InterchangeReport(bool(gap <= tol), lhs, rhs, gap, tol, boundary)


# builders ---------------------------------------------------------------

def spike_sequence(space: MeasureSpace, scale: float = 1.0, power: float = 1.0,
                   horizon: int = 10**6, label: str = "spike") -> AtomSequence:
    """``u_n = scale * n**power * 1_(0, 1/n]``, cell-averaged on a dyadic space."""
    w = space.weights

    def prov(n):
        return scale * float(n) ** power * space.overlap(0.0, 1.0 / n) / w

    return AtomSequence(space, prov, Tail.truncated(horizon), label)
