"""Deterministic 64-bit pseudo-random number generation.

The generator is splitmix64: a single 64-bit word of state advanced by a
fixed odd constant, with the output scrambled by two xor-multiply
rounds. Identical seeds give identical sequences on every platform,
which is what makes resampling and ensemble training reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(state: int) -> int:
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


@dataclass
class SeededRng:
    """Single-owner mutable generator; every draw advances ``state``."""

    state: int

    def __post_init__(self) -> None:
        self.state &= _MASK64

    def next_u64(self) -> int:
        """Next raw 64-bit output."""
        self.state = (self.state + _GOLDEN) & _MASK64
        return _mix(self.state)

    def next_float(self) -> float:
        """Uniform double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def random_integer(rng: SeededRng, a: int, b: int) -> int:
    """Uniform integer in the inclusive range [a, b].

    Range reduction is plain modulo; the bias is below 2**-50 for any
    range this toolkit draws from and is accepted.
    """
    if a > b:
        raise ValueError(f"empty range: a={a} > b={b}")
    span = b - a + 1
    return a + rng.next_u64() % span


def derive_seed(master_state: int, index: int) -> int:
    """Seed for ensemble member ``index``: the first splitmix64 output
    drawn from state ``master_state + index``.

    Members derived this way can be trained in any order, or in
    parallel, and still come out identical to sequential training.
    """
    return SeededRng((master_state + index) & _MASK64).next_u64()
