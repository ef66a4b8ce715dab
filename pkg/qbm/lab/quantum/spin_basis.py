"""Computational basis of n spins s ∈ {-1, +1}^n.

Basis index convention, shared by every module: bit b of the index encodes spin s_b,
with bit value 0 for s = +1 and bit value 1 for s = -1. Site 0 is the least
significant bit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

DEFAULT_MAX_SPINS = 12
MAX_SPINS_ENV = "QBM_LAB_MAX_N"


class SiteError(IndexError):
    pass


class SpinCountError(ValueError):
    pass


def max_spins() -> int:
    """Largest spin count accepted without an explicit override.

    The default of 12 (dense 4096 x 4096 complex matrices) can be changed through the
    `QBM_LAB_MAX_N` environment variable.
    """
    value = os.environ.get(MAX_SPINS_ENV)
    if not value:
        return DEFAULT_MAX_SPINS
    try:
        return int(value)
    except ValueError:
        msg = f"{MAX_SPINS_ENV} must be an integer, got '{value}'"
        raise SpinCountError(msg)


def check_spin_count(n: int, limit: int | None = None) -> int:
    """Validate a spin count against the dense-matrix guard."""
    limit = max_spins() if limit is None else limit
    if not isinstance(n, (int, np.integer)) or n < 1:
        msg = f"Spin count must be a positive integer, got {n}"
        raise SpinCountError(msg)
    if n > limit:
        msg = f"{n} spins exceed the limit of {limit} (set {MAX_SPINS_ENV} to override)"
        raise SpinCountError(msg)
    return int(n)


def check_site(n: int, i: int) -> int:
    if not 0 <= i < n:
        msg = f"Site {i} out of range for {n} spins"
        raise SiteError(msg)
    return int(i)


@dataclass(frozen=True)
class SpinConfig:
    """A basis configuration: n spins encoded as an integer index in [0, 2^n)."""

    n: int
    index: int

    def __post_init__(self):
        if self.n < 1:
            msg = f"Spin count must be positive, got {self.n}"
            raise SpinCountError(msg)
        if not 0 <= self.index < 2**self.n:
            msg = f"Index {self.index} out of range for {self.n} spins"
            raise ValueError(msg)

    @classmethod
    def from_spins(cls, spins: Sequence[int]) -> SpinConfig:
        return cls(n=len(spins), index=index_of(spins))

    @property
    def spins(self) -> tuple[int, ...]:
        return tuple(1 - 2 * ((self.index >> b) & 1) for b in range(self.n))

    @property
    def label(self) -> str:
        """Spins as a string of + and -, site 0 first."""
        return "".join("+" if s > 0 else "-" for s in self.spins)

    def __repr__(self) -> str:
        return f"SpinConfig({self.label})"


def index_of(spins: Iterable[int]) -> int:
    """Basis index of a ±1 spin vector."""
    index = 0
    for b, s in enumerate(spins):
        if s not in (1, -1):
            msg = f"Spin values must be +1 or -1, got {s}"
            raise ValueError(msg)
        if s == -1:
            index |= 1 << b
    return index


def flip(config: SpinConfig, i: int) -> SpinConfig:
    """F_i s: the configuration with spin i negated."""
    check_site(config.n, i)
    return SpinConfig(n=config.n, index=config.index ^ (1 << i))


def spin_value(config: SpinConfig, i: int) -> int:
    """s_i of a configuration."""
    check_site(config.n, i)
    return 1 - 2 * ((config.index >> i) & 1)


@lru_cache(maxsize=32)
def _indices(n: int) -> np.ndarray:
    indices = np.arange(2**n, dtype=np.int64)
    indices.flags.writeable = False
    return indices


def basis_spins(n: int) -> np.ndarray:
    """All 2^n configurations as a (2^n, n) array of ±1, rows in index order."""
    bits = (_indices(n)[:, None] >> np.arange(n)) & 1
    return (1 - 2 * bits).astype(np.int8)


def site_mask(n: int, sites: Iterable[int]) -> int:
    mask = 0
    for i in sites:
        mask |= 1 << check_site(n, i)
    return mask


def flip_indices(n: int, sites: Iterable[int]) -> np.ndarray:
    """Index of F_{sites} s for every basis index s."""
    return _indices(n) ^ site_mask(n, sites)


def site_signs(n: int, sites: Iterable[int]) -> np.ndarray:
    """Π_{i ∈ sites} s_i for every basis index."""
    mask = site_mask(n, sites)
    parity = np.zeros(2**n, dtype=np.int64)
    masked = _indices(n) & mask
    while mask:
        parity ^= masked & 1
        masked = masked >> 1
        mask >>= 1
    return (1 - 2 * parity).astype(np.int8)


def spins_to_indices(spins: np.ndarray) -> np.ndarray:
    """Basis indices of a (N, n) array of ±1 configurations."""
    spins = np.asarray(spins)
    bits = (spins == -1).astype(np.int64)
    return bits @ (1 << np.arange(spins.shape[1], dtype=np.int64))
