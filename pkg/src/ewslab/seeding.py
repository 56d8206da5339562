"""Deterministic 64-bit seed derivation.

Every stochastic component in this package draws from a NumPy generator
seeded through :func:`derive_seed`, so replicate- and attempt-level
streams are fixed by the master seed alone. Results are therefore
independent of execution order, batching, and worker count.

The mixing function is SplitMix64: child seeds are bounded hops on the
SplitMix64 sequence,

    child(master, index) = splitmix64((splitmix64(master) + index) mod 2**64)

which gives well-scrambled, collision-resistant streams for any
(master, index) pair.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One SplitMix64 output for a 64-bit state (Steele et al. finalizer)."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(master: int, index: int) -> int:
    """Derive the ``index``-th child seed from ``master``."""
    return splitmix64((splitmix64(master & _MASK64) + (index & _MASK64)) & _MASK64)


def derive_seed(master: int, *indices: int) -> int:
    """Fold a path of stream indices into a child seed.

    ``derive_seed(s, a, b)`` is ``mix_seed(mix_seed(s, a), b)``; each level
    opens an independent family of streams (e.g. per-purpose, then
    per-replicate).
    """
    seed = master & _MASK64
    for index in indices:
        seed = mix_seed(seed, index)
    return seed
