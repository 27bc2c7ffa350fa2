"""Signal constellations and their MIMO product sets.

Every constellation is normalized to unit average symbol energy, so its
minimum distance depends on the modulation order only.  QAM points are
enumerated row-major over Gray-coded (I, Q) axis levels; that order is the
linear-search order used by the early-exit detector.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import CapExceeded, UnsupportedOrder

__all__ = [
    "Scheme",
    "Constellation",
    "VectorConstellation",
    "PairDistances",
    "build_constellation",
    "parse_modulation",
    "gray_code",
    "pairwise_distances",
    "neighbor_counts",
    "DEFAULT_PAIR_CAP",
]

DEFAULT_PAIR_CAP = 4096

_PAM_ORDERS = (2, 4, 8, 16)
_QAM_ORDERS = (4, 16, 64, 256)


class Scheme(str, enum.Enum):
    BPSK = "bpsk"
    PAM = "pam"
    QAM = "qam"


def gray_code(n: int) -> int:
    return n ^ (n >> 1)


def _pam_levels(m: int) -> np.ndarray:
    return np.arange(-(m - 1), m, 2, dtype=float)


def _min_pair_distance(points: np.ndarray) -> float:
    diff = np.abs(points[:, None] - points[None, :])
    np.fill_diagonal(diff, np.inf)
    return float(diff.min())


@dataclass(frozen=True, eq=False)
class Constellation:
    """Ordered, unit-energy symbol set with Gray bit labels.

    Attributes
    ----------
    scheme : Scheme
    M : int
        Number of points.
    points : np.ndarray
        Complex points in enumeration order (read-only).
    labels : np.ndarray
        Integer bit label of each point; ``bits_per_symbol`` bits wide.
    d_min : float
        Minimum pairwise distance, found by exhaustive scan.
    """

    scheme: Scheme
    M: int
    points: np.ndarray
    labels: np.ndarray
    d_min: float
    axis_levels: np.ndarray = field(repr=False)

    @property
    def bits_per_symbol(self) -> int:
        return int(round(math.log2(self.M)))

    @property
    def name(self) -> str:
        if self.scheme is Scheme.BPSK:
            return "bpsk"
        return f"{self.scheme.value}{self.M}"

    def label_string(self, i: int) -> str:
        return format(int(self.labels[i]), f"0{self.bits_per_symbol}b")

    def scaled(self, c: float) -> "Constellation":
        """Copy with every point multiplied by ``c > 0`` (energy no longer 1)."""
        if not c > 0:
            raise ValueError("scale factor must be positive")
        pts = self.points * c
        pts.flags.writeable = False
        lv = self.axis_levels * c
        lv.flags.writeable = False
        return Constellation(self.scheme, self.M, pts, self.labels,
                             _min_pair_distance(pts), lv)

    def __len__(self) -> int:
        return self.M


def build_constellation(scheme, M: int) -> Constellation:
    """Build a normalized, Gray-labelled constellation.

    Parameters
    ----------
    scheme : Scheme or str
        ``bpsk``, ``pam`` or ``qam``.
    M : int
        Order. BPSK needs 2, PAM one of 2/4/8/16, QAM one of 4/16/64/256.

    Raises
    ------
    UnsupportedOrder
        For any other combination.

    Examples
    --------
    >>> c = build_constellation("pam", 4)
    >>> round(c.d_min * math.sqrt(5), 12)
    2.0
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.BPSK:
        if M != 2:
            raise UnsupportedOrder(f"BPSK requires M=2, got {M}")
        levels = np.array([-1.0, 1.0])
        points = levels.astype(complex)
        labels = np.array([0, 1])
    elif scheme is Scheme.PAM:
        if M not in _PAM_ORDERS:
            raise UnsupportedOrder(f"PAM order must be one of {_PAM_ORDERS}, got {M}")
        raw = _pam_levels(M)
        norm = math.sqrt(np.mean(raw ** 2))
        levels = raw / norm
        points = levels.astype(complex)
        labels = np.array([gray_code(i) for i in range(M)])
    else:
        if M not in _QAM_ORDERS:
            raise UnsupportedOrder(
                f"QAM order must be a square in {_QAM_ORDERS}, got {M}")
        side = math.isqrt(M)
        raw = _pam_levels(side)
        # two axes share the energy
        norm = math.sqrt(2 * np.mean(raw ** 2))
        levels = raw / norm
        points = (levels[:, None] + 1j * levels[None, :]).ravel()
        half = side.bit_length() - 1
        labels = np.array([(gray_code(i) << half) | gray_code(q)
                           for i in range(side) for q in range(side)])
    points = np.ascontiguousarray(points)
    points.flags.writeable = False
    labels.flags.writeable = False
    levels = np.asarray(levels, dtype=float)
    levels.flags.writeable = False
    return Constellation(scheme, M, points, labels, _min_pair_distance(points), levels)


def parse_modulation(text: str) -> Constellation:
    """Parse CLI-style names: ``bpsk``, ``pam4``, ``qam16`` ..."""
    t = text.strip().lower()
    if t == "bpsk":
        return build_constellation(Scheme.BPSK, 2)
    for scheme in (Scheme.PAM, Scheme.QAM):
        if t.startswith(scheme.value):
            digits = t[len(scheme.value):]
            if digits.isdigit():
                return build_constellation(scheme, int(digits))
    raise UnsupportedOrder(f"unknown modulation '{text}'")


def neighbor_counts(c: Constellation, rtol: float = 1e-9) -> np.ndarray:
    """Number of points at distance ``d_min`` from each point."""
    diff = np.abs(c.points[:, None] - c.points[None, :])
    np.fill_diagonal(diff, np.inf)
    return np.sum(np.abs(diff - c.d_min) <= rtol * max(c.d_min, 1.0), axis=1)


class VectorConstellation:
    """Cartesian product of per-antenna constellations.

    Candidate ``i`` is decomposed lexicographically into antenna indices with
    antenna 0 as the most significant digit.
    """

    def __init__(self, per_antenna: Sequence[Constellation]):
        if len(per_antenna) < 1:
            raise ValueError("need at least one transmit antenna")
        self.per_antenna = tuple(per_antenna)
        self.orders = tuple(c.M for c in self.per_antenna)
        self.cardinality = math.prod(self.orders)
        grids = np.meshgrid(*[np.arange(m) for m in self.orders], indexing="ij")
        self.indices = np.stack([g.ravel() for g in grids], axis=1)
        self.indices.flags.writeable = False
        cols = [c.points[self.indices[:, a]] for a, c in enumerate(self.per_antenna)]
        self.points = np.stack(cols, axis=1)
        self.points.flags.writeable = False
        self._d_min = None

    @classmethod
    def uniform(cls, c: Constellation, nt: int) -> "VectorConstellation":
        return cls([c] * nt)

    @property
    def nt(self) -> int:
        return len(self.per_antenna)

    def __len__(self) -> int:
        return self.cardinality

    @property
    def d_min(self) -> float:
        # all antennas but one equal gives the smallest nonzero distance
        if self._d_min is None:
            self._d_min = min(c.d_min for c in self.per_antenna)
        return self._d_min

    def antenna_indices(self, vector_index):
        """Per-antenna symbol indices for one or many candidate indices."""
        return self.indices[vector_index]

    def bit_labels(self) -> np.ndarray:
        """Concatenated per-antenna Gray labels for every candidate."""
        out = np.zeros(self.cardinality, dtype=np.int64)
        for a, c in enumerate(self.per_antenna):
            out = (out << c.bits_per_symbol) | c.labels[self.indices[:, a]]
        return out

    @property
    def bits_per_vector(self) -> int:
        return sum(c.bits_per_symbol for c in self.per_antenna)


class PairDistances(NamedTuple):
    i: np.ndarray
    j: np.ndarray
    d: np.ndarray


def pairwise_distances(v, cap: int = DEFAULT_PAIR_CAP) -> PairDistances:
    """All ordered pairs ``(i, j, |x_i - x_j|)`` with ``i != j``.

    Pairs come out row-major in ``(i, j)``.  ``cap`` bounds the candidate
    count; the scan is quadratic in it.

    Raises
    ------
    CapExceeded
        If the cardinality is above ``cap``.
    """
    if isinstance(v, Constellation):
        v = VectorConstellation([v])
    k = v.cardinality
    if k > cap:
        raise CapExceeded(f"cardinality {k} exceeds pair-scan cap {cap} "
                          f"({k * k} pair evaluations)")
    pts = v.points
    d2 = np.zeros((k, k))
    for a in range(v.nt):
        col = pts[:, a]
        d2 += np.abs(col[:, None] - col[None, :]) ** 2
    ii, jj = np.nonzero(~np.eye(k, dtype=bool))
    return PairDistances(ii, jj, np.sqrt(d2[ii, jj]))
