"""Tail declarations for sequences indexed by n >= 1 and their lim inf / lim sup.

A sequence is only ever materialized on finitely many indices.  Limits are
exact when the tail is declared eventually constant or eventually periodic;
for horizon-truncated sequences they are estimated from three blocks of
consecutive indices ending at ``N``, ``N // 2`` and ``N // 4`` and returned
as a bracket.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .extreal import INF, InputError

__all__ = ["Tail", "TailLimit", "tail_limit", "DEFAULT_CEILING"]

DEFAULT_CEILING = 1e9
_KINDS = ("constant", "periodic", "truncated")
_NOISE = 1e-12
_DRIFT = 1e-3


@dataclass(frozen=True)
class Tail:
    """How a sequence behaves for large n.

    Parameters
    ----------
    kind : {"constant", "periodic", "truncated"}
    start : int
        First index of the constant or periodic regime.
    period : int
        Period length (1 for constant tails).
    horizon : int
        Largest index materialized for truncated tails.
    block : int
        Consecutive indices per block for truncated tails.
    """

    kind: str
    start: int = 1
    period: int = 1
    horizon: int = 0
    block: int = 4

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InputError(f"unknown tail kind {self.kind!r}")
        if self.start < 1 or self.period < 1 or self.block < 1:
            raise InputError("tail parameters must be positive")
        if self.kind == "constant" and self.period != 1:
            raise InputError("constant tails have period 1")
        if self.kind == "truncated" and self.horizon < 4 * self.block:
            raise InputError("truncated tails need horizon >= 4 * block")

    @classmethod
    def constant(cls, start: int = 1) -> "Tail":
        return cls("constant", start=start)

    @classmethod
    def periodic(cls, period: int, start: int = 1) -> "Tail":
        return cls("periodic", start=start, period=period)

    @classmethod
    def truncated(cls, horizon: int, block: int = 4) -> "Tail":
        return cls("truncated", horizon=horizon, block=block)

    @property
    def exact(self) -> bool:
        return self.kind != "truncated"

    def blocks(self) -> list:
        """Index blocks used for the limit; one block for exact tails."""
        if self.exact:
            return [list(range(self.start, self.start + self.period))]
        out = []
        for j in range(3):
            end = self.horizon >> j
            out.append(list(range(end - self.block + 1, end + 1)))
        return out

    def indices(self) -> list:
        """All indices that must be materialized, ascending."""
        return sorted({n for b in self.blocks() for n in b})

    def subsequence(self, step: int) -> "Tail":
        """Tail of ``n -> a_{step * n}``."""
        if self.kind == "constant":
            return Tail.constant(-(-self.start // step))
        if self.kind == "periodic":
            per = self.period // np.gcd(self.period, step)
            return Tail.periodic(int(per), start=-(-self.start // step))
        return Tail.truncated(max(self.horizon // step, 4 * self.block), self.block)


@dataclass(frozen=True)
class TailLimit:
    """Estimated lim inf or lim sup, pointwise over trailing axes."""

    value: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    exact: bool
    diverging: np.ndarray


def tail_limit(values: dict, tail: Tail, mode: str, ceiling: float = DEFAULT_CEILING) -> TailLimit:
    """lim inf (``mode="inf"``) or lim sup (``mode="sup"``) of a sequence.

    Parameters
    ----------
    values : dict
        Maps each index in ``tail.indices()`` to an array (all equal shape).
    tail : Tail
    mode : {"inf", "sup"}
    ceiling : float
        Magnitude beyond which a truncated estimate is reported as diverging.
    """
    if mode not in ("inf", "sup"):
        raise InputError("mode must be 'inf' or 'sup'")
    red = np.min if mode == "inf" else np.max
    blocks = [np.stack([np.asarray(values[n], dtype=float) for n in b]) for b in tail.blocks()]
    if tail.exact:
        v = red(blocks[0], axis=0)
        return TailLimit(v, v, v, True, np.zeros(v.shape, dtype=bool))

    l0, l1, l2 = (red(b, axis=0) for b in blocks)
    last = blocks[0]
    with np.errstate(invalid="ignore"):
        d1 = l0 - l1
        d2 = l1 - l2
        # rounding noise is not drift
        floor = _NOISE * (1.0 + np.abs(l0))
        d1 = np.where(np.abs(d1) <= floor, 0.0, d1)
        d2 = np.where(np.abs(d2) <= floor, 0.0, d2)
        inside_up = np.all(np.diff(last, axis=0) >= 0, axis=0)
        inside_dn = np.all(np.diff(last, axis=0) <= 0, axis=0)
        up = (d1 >= 0) & (d2 >= 0) & inside_up
        dn = (d1 <= 0) & (d2 <= 0) & inside_dn
        growth = np.where(d2 != 0, d1 / np.where(d2 != 0, d2, 1.0), 0.0)
        # sustained, non-negligible drift is read as divergence
        big = np.abs(d1) > _DRIFT * (1.0 + np.abs(l0))
        div_up = (up & big & (d1 > 0) & (growth >= 0.9)) | (l0 > ceiling)
        div_dn = (dn & big & (d1 < 0) & (growth >= 0.9)) | (l0 < -ceiling)
        # geometric extrapolation of the remaining drift
        q = np.clip(growth, 0.0, 0.9)
        rest = np.where(np.isfinite(d1), d1 * q / (1.0 - q), 0.0)

    a_last = last[-1]
    value = np.where(up, np.maximum(l0, a_last), np.where(dn, np.minimum(l0, a_last), l0))
    lower = np.where(up, value, np.where(dn, value + rest, np.minimum(l0, l1)))
    upper = np.where(up, value + rest, np.where(dn, value, np.maximum(l0, l1)))
    upper = np.where(div_up, INF, upper)
    value = np.where(div_up, INF, value)
    lower = np.where(div_dn, -INF, lower)
    value = np.where(div_dn, -INF, value)
    diverging = div_up | div_dn
    return TailLimit(value, lower, upper, False, diverging)
