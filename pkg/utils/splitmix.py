"""
SplitMix64 pseudo-random generator.

Used to pick the zeroed positions of a sparsified matrix so that the same
(n, s, seed) produces the same pattern in any implementation.
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Integer in [0, bound) by plain modulo reduction."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound
