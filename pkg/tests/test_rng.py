from epilim.rng import MULTIPLIER, SHIFTS, XorShift64Star


def reference_stream(seed, count):
    """Straight transcription of xorshift64* after a splitmix64 scramble."""
    mask = (1 << 64) - 1
    z = (seed + 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    x = (z ^ (z >> 31)) or 0x9E3779B97F4A7C15
    out = []
    for _ in range(count):
        x ^= x >> 12
        x ^= (x << 25) & mask
        x ^= x >> 27
        out.append((x * 0x2545F4914F6CDD1D) & mask)
    return out


def test_published_constants():
    assert MULTIPLIER == 0x2545F4914F6CDD1D
    assert SHIFTS == (12, 25, 27)


def test_stream_matches_reference():
    for seed in (0, 1, 7, 2**63 + 5):
        r = XorShift64Star(seed)
        assert [r.next_u64() for _ in range(20)] == reference_stream(seed, 20)


def test_frozen_prefix():
    # frozen so ports to other languages can check themselves
    r = XorShift64Star(0)
    assert [r.next_u64() for _ in range(3)] == [0x7BBCB40D550682D0, 0xDE7FE413D00CC9FD, 0xB3C638353C668C91]
    r = XorShift64Star(7)
    assert [r.integer(0, 99) for _ in range(8)] == [38, 72, 57, 16, 9, 36, 2, 44]
    assert XorShift64Star(7).random() == 0.08170555950360558


def test_integer_range_inclusive():
    r = XorShift64Star(42)
    assert set(r.integer(1, 6) for _ in range(1000)) == {1, 2, 3, 4, 5, 6}
    assert all(0.0 <= XorShift64Star(s).random() < 1.0 for s in range(50))
