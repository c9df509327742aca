"""Seeded splitmix64 streams.

Every random draw in the package goes through splitmix64 so that the
compiled kernels, their interpreted fallback and the pure-Python reference
drivers consume identical letter sequences for a given seed.

Per-alphabet streams are derived from a master seed with
``seed_i = mix64(master ^ (i + 1) * GOLDEN)``.
"""

from __future__ import annotations

import numpy as np

from ._jit import njit

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB

_U_GOLDEN = np.uint64(GOLDEN)
_U_C1 = np.uint64(_C1)
_U_C2 = np.uint64(_C2)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """The splitmix64 finalizer on Python ints."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _C1) & MASK64
    z = ((z ^ (z >> 27)) * _C2) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    return mix64((master & MASK64) ^ (((index + 1) * GOLDEN) & MASK64))


@njit
def k_mix64(z):
    z = (z ^ (z >> _U30)) * _U_C1
    z = (z ^ (z >> _U27)) * _U_C2
    return z ^ (z >> _U31)


@njit
def k_next(states, i):
    """Advance stream ``i`` of ``states`` and return the next 64-bit output."""
    s = states[i] + _U_GOLDEN
    states[i] = s
    return k_mix64(s)


@njit
def k_uniform(states, i):
    return float(k_next(states, i) >> _U11) * _INV53


@njit
def k_derive(master, index):
    return k_mix64(master ^ (np.uint64(index + 1) * _U_GOLDEN))


class RandomStream:
    """A reproducible 64-bit stream.

    The state lives in a one-element ``uint64`` array so kernels can advance
    it in place; Python-side draws and kernel-side draws interleave on the
    same sequence.
    """

    __slots__ = ("seed", "state")

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & MASK64
        self.state = np.array([self.seed], dtype=np.uint64)

    def next_u64(self) -> int:
        s = (int(self.state[0]) + GOLDEN) & MASK64
        self.state[0] = s
        return mix64(s)

    def random(self) -> float:
        return (self.next_u64() >> 11) * _INV53

    def spawn(self, index: int) -> "RandomStream":
        """An independent stream derived from this stream's seed."""
        return RandomStream(derive_seed(self.seed, index))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed:#x}, state={int(self.state[0]):#x})"
