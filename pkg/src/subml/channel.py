"""Seed-reproducible symbol, noise and channel generation.

Random draws are organized in fixed blocks of ``BLOCK`` trials.  Block ``b``
of role ``r`` is generated by a Philox generator keyed from
``(master_seed, r, b)``, so the draws of any trial depend only on the seed,
the trial index and the role, never on how trials are split across workers.
The same streams are reused at every SNR point (noise is drawn at unit
variance and scaled), which keeps sweep curves free of point-to-point
sampling jitter.

Noise convention: complex circular Gaussian with total variance ``N0`` per
receive dimension (``N0/2`` per real component).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, VectorConstellation
from .errors import DimensionMismatch

__all__ = [
    "BLOCK",
    "Role",
    "SnrReference",
    "NOISE_CONVENTION",
    "noise_density",
    "SeedPolicy",
    "ChannelMode",
    "ChannelRealization",
    "draw_symbols",
    "draw_noise",
    "draw_channels",
    "transmit",
    "transmit_batch",
]

BLOCK = 4096

NOISE_CONVENTION = ("complex circular Gaussian, total variance N0 per receive "
                    "dimension (N0/2 per real component)")


class Role(enum.IntEnum):
    SYMBOLS = 1
    NOISE = 2
    CHANNEL = 3
    COIN = 4


class SnrReference(str, enum.Enum):
    """How an SNR in dB maps to ``N0``.

    ``dmin``: SNR = (d_min/2)^2 / N0, the energy of the half-distance per
    axis (the integer-grid convention; identical to Es/N0 for BPSK).
    ``es``: SNR = Es/N0 with unit average symbol energy.
    """

    DMIN = "dmin"
    ES = "es"


def noise_density(snr_db, c: Constellation, ref=SnrReference.DMIN):
    """``N0`` for an SNR given in dB under the chosen reference."""
    ref = SnrReference(ref)
    lin = 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    if ref is SnrReference.ES:
        es = float(np.mean(np.abs(c.points) ** 2))
        out = es / lin
    else:
        out = (0.5 * c.d_min) ** 2 / lin
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SeedPolicy:
    master_seed: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ValueError("master_seed must fit in 64 unsigned bits")

    def generator(self, role: Role, block: int) -> np.random.Generator:
        ss = np.random.SeedSequence([int(self.master_seed) & 0xFFFFFFFF,
                                     int(self.master_seed) >> 32,
                                     int(role), int(block)])
        return np.random.Generator(np.random.Philox(ss))

    def rows(self, role: Role, first: int, n: int, draw):
        """Per-trial draws for trials ``first .. first+n-1``.

        ``draw(gen, count)`` must return an array whose leading axis has
        ``count`` rows, one per trial.
        """
        if n < 1:
            raise ValueError("n must be >= 1")
        parts = []
        b0, b1 = first // BLOCK, (first + n - 1) // BLOCK
        for b in range(b0, b1 + 1):
            rows = draw(self.generator(role, b), BLOCK)
            lo = max(first, b * BLOCK) - b * BLOCK
            hi = min(first + n, (b + 1) * BLOCK) - b * BLOCK
            parts.append(rows[lo:hi])
        return parts[0] if len(parts) == 1 else np.concatenate(parts)


def draw_symbols(v, n: int, seed: SeedPolicy, first: int = 0) -> np.ndarray:
    """Uniform candidate indices for ``n`` trials starting at ``first``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = v.cardinality if isinstance(v, VectorConstellation) else len(v)
    return seed.rows(Role.SYMBOLS, first, n,
                     lambda g, m: g.integers(0, k, size=m))


def draw_noise(seed: SeedPolicy, first: int, n: int, dims: int) -> np.ndarray:
    """Unit-variance complex Gaussian noise, shape ``(n, dims)``."""
    def draw(g, m):
        z = g.standard_normal((m, dims, 2))
        return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)
    return seed.rows(Role.NOISE, first, n, draw)


def draw_channels(seed: SeedPolicy, first: int, n: int, nr: int, nt: int) -> np.ndarray:
    """Rayleigh channel matrices, shape ``(n, nr, nt)``, unit-variance entries."""
    def draw(g, m):
        z = g.standard_normal((m, nr, nt, 2))
        return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)
    return seed.rows(Role.CHANNEL, first, n, draw)


class ChannelMode(str, enum.Enum):
    IDENTITY = "identity"
    RAYLEIGH = "rayleigh"


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    H: np.ndarray
    mode: ChannelMode

    @property
    def nr(self) -> int:
        return self.H.shape[0]

    @property
    def nt(self) -> int:
        return self.H.shape[1]

    @classmethod
    def identity(cls, n: int) -> "ChannelRealization":
        return cls(np.eye(n, dtype=complex), ChannelMode.IDENTITY)

    @classmethod
    def rayleigh(cls, nr: int, nt: int, seed: SeedPolicy, trial: int) -> "ChannelRealization":
        return cls(draw_channels(seed, trial, 1, nr, nt)[0], ChannelMode.RAYLEIGH)


def transmit(x, H: ChannelRealization, n0: float, seed: SeedPolicy, trial: int):
    """``y = H x + w`` for a single trial."""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if x.shape != (H.nt,):
        raise DimensionMismatch(f"x has shape {x.shape}, channel expects ({H.nt},)")
    if not n0 > 0:
        raise ValueError("N0 must be positive")
    w = draw_noise(seed, trial, 1, H.nr)[0]
    return H.H @ x + math.sqrt(n0) * w


def transmit_batch(X, n0: float, seed: SeedPolicy, first: int, H=None,
                   nr: int | None = None) -> np.ndarray:
    """Received vectors for a batch of trials.

    Parameters
    ----------
    X : array, shape (n, nt)
        Transmitted vectors, one row per trial.
    H : None, (nr, nt) array or (n, nr, nt) array
        ``None`` means the identity channel.
    """
    X = np.asarray(X, dtype=complex)
    n, nt = X.shape
    if H is None:
        if nr is not None and nr != nt:
            raise DimensionMismatch("identity channel needs nr == nt")
        HX = X
    else:
        H = np.asarray(H)
        if H.shape[-1] != nt:
            raise DimensionMismatch(f"channel has {H.shape[-1]} inputs, x has {nt}")
        if H.ndim == 2:
            HX = X @ H.T
        else:
            if H.shape[0] != n:
                raise DimensionMismatch("one channel matrix per trial required")
            HX = np.einsum("nrt,nt->nr", H, X)
    w = draw_noise(seed, first, n, HX.shape[1])
    return HX + math.sqrt(n0) * w
