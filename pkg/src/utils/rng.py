"""
SplitMix64 pseudo-random stream.

The recurrence is fixed so that traces can be reproduced bit for bit in any
language (see docs/prng.md):

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- ((z xor (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z <- ((z xor (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output z xor (z >> 31)

Uniform floats use the top 53 bits: (output >> 11) * 2^-53, in [0, 1).
"""

import numbers

from src.utils.exceptions import ContractViolation

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB
TWO_POW_MINUS_53 = 1.0 / (1 << 53)


def validate_seed(seed):
    """
    Check that a seed fits an unsigned 64-bit integer

    Args:
        seed (int): Candidate seed

    Returns:
        int: The seed itself
    """
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise ContractViolation(f"Seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if seed < 0 or seed > MASK64:
        raise ContractViolation(f"Seed {seed} is outside the unsigned 64-bit range")
    return seed


class SplitMix64:
    """Stateful SplitMix64 generator; each instance owns its state."""

    __slots__ = ("_state",)

    def __init__(self, seed):
        self._state = validate_seed(seed)

    @property
    def state(self):
        return self._state

    def next_u64(self):
        self._state = (self._state + GOLDEN_GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * MIX_1) & MASK64
        z = ((z ^ (z >> 27)) * MIX_2) & MASK64
        return z ^ (z >> 31)

    def next_float(self):
        return (self.next_u64() >> 11) * TWO_POW_MINUS_53

    def uniform(self, low, high):
        """Draw a float in [low, high)"""
        return low + (high - low) * self.next_float()

    def next_below(self, n):
        """Draw an integer in [0, n) from one 64-bit output via the float path"""
        if n < 1:
            raise ContractViolation("n must be positive")
        return min(int(self.next_float() * n), n - 1)
