"""Small seeded generator with published constants.

xorshift64* (shifts 12, 25, 27; multiplier 0x2545F4914F6CDD1D) is easy to
port, so instance families can be regenerated bit for bit in another
language from the seed alone.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
MULTIPLIER = 0x2545F4914F6CDD1D
SHIFTS = (12, 25, 27)


class XorShift64Star:
    """xorshift64* stream; seed 0 is remapped to a fixed nonzero state."""

    def __init__(self, seed: int = 0):
        s = int(seed) & _MASK
        # splitmix-style scramble so nearby seeds give unrelated streams
        s = (s + 0x9E3779B97F4A7C15) & _MASK
        s = ((s ^ (s >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        s = ((s ^ (s >> 27)) * 0x94D049BB133111EB) & _MASK
        s ^= s >> 31
        self.state = s or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        a, b, c = SHIFTS
        x ^= x >> a
        x ^= (x << b) & _MASK
        x ^= x >> c
        self.state = x
        return (x * MULTIPLIER) & _MASK

    def random(self) -> float:
        """Uniform float in ``[0, 1)`` from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]`` (inclusive)."""
        span = hi - lo + 1
        if span <= 0:
            raise ValueError("empty range")
        return lo + self.next_u64() % span

    def choice(self, seq):
        return seq[self.integer(0, len(seq) - 1)]
