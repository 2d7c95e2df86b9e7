"""Counter-based reproducible random stream.

Output word ``i`` of a stream with seed ``s`` is ``splitmix64(s + (i + 1) * GAMMA)``
(the SplitMix64 finalizer of Steele, Lea and Flood), so any implementation
that reproduces those 64-bit words and the rejection rule in
:meth:`RngStream.below` reproduces every matrix bit for bit.
"""

from __future__ import annotations

import hashlib
import math
from collections.abc import Sequence

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int | str) -> int:
    """Hash an arbitrary tuple (campaign seed, cell index, trial index, ...) to a 64-bit seed.

    The hash is SHA-256 over the ``/``-joined decimal/str parts; the seed is the
    first 8 digest bytes read big-endian.
    """
    text = "/".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "big")


class RngStream:
    """Stream of uniform draws with exact entropy bookkeeping.

    ``entropy_bits`` accumulates ``log2(k)`` for every ``below(k)`` draw that
    was performed (rejected candidates of the 64-bit rejection loop do not
    count; rejected *matrices* in the generators do, since their draws
    were performed).
    """

    __slots__ = ("seed", "counter", "entropy_bits")

    def __init__(self, seed: int, counter: int = 0) -> None:
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.counter = counter
        self.entropy_bits = 0.0

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, counter={self.counter})"

    def next_u64(self) -> int:
        self.counter += 1
        return splitmix64(self.seed + self.counter * GAMMA)

    def below(self, k: int) -> int:
        """Uniform integer in ``[0, k)`` by rejection (no modulo bias)."""
        if k <= 0:
            raise ValueError("range must be positive")
        if k == 1:
            return 0
        if k > MASK64:
            raise ValueError("range exceeds 64 bits")
        limit = (1 << 64) - ((1 << 64) % k)
        while True:
            w = self.next_u64()
            if w < limit:
                self.entropy_bits += math.log2(k)
                return w % k

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed interval ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def sign(self) -> int:
        return 1 if self.below(2) else -1

    def permutation(self, n: int) -> list[int]:
        """Uniform permutation of ``range(n)`` by Fisher-Yates."""
        p = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            p[i], p[j] = p[j], p[i]
        return p

    def subset(self, n: int, d: int) -> list[int]:
        """Uniform ``d``-subset of ``range(n)``, sorted (partial Fisher-Yates)."""
        if not 0 <= d <= n:
            raise ValueError(f"cannot draw {d} of {n}")
        p = list(range(n))
        for i in range(d):
            j = i + self.below(n - i)
            p[i], p[j] = p[j], p[i]
        return sorted(p[:d])

    def choice(self, items: Sequence):
        return items[self.below(len(items))]

    def spawn(self, *parts: int | str) -> RngStream:
        """Independent child stream for worker/instance ``parts``."""
        return RngStream(derive_seed(self.seed, *parts))
