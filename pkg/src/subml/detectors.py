"""Exhaustive ML, early-exit threshold search and 1-D null-region detectors.

Cost is counted in cost-function evaluations (one per candidate distance
computed).  Scalar functions operate on one received vector and evaluate
distances lazily; the ``*_batch`` variants take a precomputed
``(trials, candidates)`` distance matrix and return the same decisions and
counts, which the Monte Carlo harness relies on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .constellation import Constellation, VectorConstellation
from .errors import DimensionMismatch, EmptyInput

__all__ = [
    "SearchOutcome",
    "distances",
    "iter_distances",
    "distance_matrix",
    "ml_exhaustive",
    "early_exit",
    "ml_batch",
    "early_exit_batch",
    "null_region_1d",
    "single_boundary_1d",
]


@dataclass(frozen=True)
class SearchOutcome:
    decided_index: int
    cf_evals: int
    hit: bool
    decided_distance: float


def _as_vector(v) -> VectorConstellation:
    if isinstance(v, Constellation):
        return VectorConstellation([v])
    return v


def _channel_matrix(H):
    if H is None:
        return None
    return getattr(H, "H", H)


def _candidates_rx(v: VectorConstellation, H) -> np.ndarray:
    """Noise-free received points ``H x_i`` for every candidate, shape (K, nr)."""
    Hm = _channel_matrix(H)
    if Hm is None:
        return v.points
    Hm = np.asarray(Hm)
    if Hm.shape[1] != v.nt:
        raise DimensionMismatch(f"channel has {Hm.shape[1]} inputs, "
                                f"constellation has {v.nt} antennas")
    return v.points @ Hm.T


def iter_distances(y, v, H=None) -> Iterator[float]:
    """Yield ``||y - H x_i||`` one candidate at a time, in enumeration order."""
    v = _as_vector(v)
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    Hm = _channel_matrix(H)
    nr = v.nt if Hm is None else np.asarray(Hm).shape[0]
    if y.shape != (nr,):
        raise DimensionMismatch(f"y has shape {y.shape}, expected ({nr},)")
    if Hm is not None and np.asarray(Hm).shape[1] != v.nt:
        raise DimensionMismatch("channel / constellation antenna count mismatch")
    for x in v.points:
        r = y - (x if Hm is None else Hm @ x)
        yield float(np.sqrt(np.sum(r.real ** 2 + r.imag ** 2)))


def distances(y, v, H=None) -> np.ndarray:
    """Full search space: every candidate distance in enumeration order."""
    v = _as_vector(v)
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    rx = _candidates_rx(v, H)
    if y.shape != (rx.shape[1],):
        raise DimensionMismatch(f"y has shape {y.shape}, expected ({rx.shape[1]},)")
    r = y[None, :] - rx
    return np.sqrt(np.sum(r.real ** 2 + r.imag ** 2, axis=1))


def distance_matrix(Y, v, H=None) -> np.ndarray:
    """Euclidean distances for a batch: ``(n, K)`` from ``Y`` of shape ``(n, nr)``.

    ``H`` may be ``None`` (identity), one ``(nr, nt)`` matrix, or one matrix
    per trial with shape ``(n, nr, nt)``.
    """
    v = _as_vector(v)
    Y = np.asarray(Y, dtype=complex)
    Hm = _channel_matrix(H)
    if Hm is not None and np.ndim(Hm) == 3:
        rx = np.einsum("nrt,kt->nkr", Hm, v.points)
        r = Y[:, None, :] - rx
    else:
        rx = _candidates_rx(v, Hm)
        if Y.shape[1] != rx.shape[1]:
            raise DimensionMismatch("received dimension does not match channel")
        # |y|^2 + |x|^2 - 2 Re(y . conj x): one matrix product instead of a 3-D temp
        yy = np.sum(Y.real ** 2 + Y.imag ** 2, axis=1)
        xx = np.sum(rx.real ** 2 + rx.imag ** 2, axis=1)
        cross = (Y @ rx.conj().T).real
        d2 = yy[:, None] + xx[None, :] - 2.0 * cross
        return np.sqrt(np.maximum(d2, 0.0))
    return np.sqrt(np.sum(r.real ** 2 + r.imag ** 2, axis=2))


def ml_exhaustive(dists) -> SearchOutcome:
    """Minimum-distance decision; ties go to the first index."""
    d = np.asarray(list(dists) if not isinstance(dists, np.ndarray) else dists,
                   dtype=float)
    if d.size == 0:
        raise EmptyInput("no candidate distances")
    i = int(np.argmin(d))
    return SearchOutcome(i, int(d.size), False, float(d[i]))


def early_exit(dists: Iterable[float], beta: float) -> SearchOutcome:
    """Accept the first candidate with distance ``<= beta``.

    ``dists`` is consumed lazily: on a hit, later distances are never
    requested.  Without a hit the full argmin is returned and every
    candidate counts as evaluated.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    best_i, best_d = -1, np.inf
    n = 0
    for i, d in enumerate(dists):
        n += 1
        if d <= beta:
            return SearchOutcome(i, n, True, float(d))
        if d < best_d:
            best_i, best_d = i, d
    if n == 0:
        raise EmptyInput("no candidate distances")
    return SearchOutcome(best_i, n, False, float(best_d))


def ml_batch(D: np.ndarray) -> np.ndarray:
    return np.argmin(D, axis=1)


def early_exit_batch(D: np.ndarray, beta: float):
    """Vectorized :func:`early_exit` over the rows of ``D``.

    Returns
    -------
    decided : int array
    cf_evals : int array
    hit : bool array
    """
    D = np.asarray(D)
    if D.shape[1] == 0:
        raise EmptyInput("no candidate distances")
    inside = D <= beta
    hit = inside.any(axis=1)
    first = np.argmax(inside, axis=1)
    decided = np.where(hit, first, np.argmin(D, axis=1))
    evals = np.where(hit, first + 1, D.shape[1])
    return decided, evals, hit


def _uniforms(rng, shape):
    if rng is None:
        raise ValueError("a random source is required for NULL-region decisions")
    if isinstance(rng, np.random.Generator):
        return rng.random(shape)
    u = np.asarray(rng, dtype=float)
    return np.broadcast_to(u, shape)


def null_region_1d(y, levels, beta: float, rng):
    """Symmetric shrunken-region detector on one real axis.

    Each level owns the interval within ``beta`` of it (the outermost
    levels also own everything beyond them).  A point between two adjacent
    levels that falls in neither or both of their intervals is resolved by
    a fair coin.

    Parameters
    ----------
    y : float or array
        Received real coordinate(s).
    levels : sorted array of floats
    beta : float
    rng : numpy Generator, or uniform draws in [0, 1) broadcastable to ``y``

    Returns
    -------
    Index (or array of indices) into ``levels``.
    """
    lv = np.asarray(levels, dtype=float)
    ya = np.asarray(y, dtype=float)
    scalar = ya.ndim == 0
    ya = np.atleast_1d(ya)
    u = _uniforms(rng, ya.shape)
    right = np.clip(np.searchsorted(lv, ya, side="right"), 1, lv.size - 1)
    left = right - 1
    near_left = (ya - lv[left]) <= beta
    near_right = (lv[right] - ya) <= beta
    # outside the outermost levels the nearest level owns the point
    near_left |= ya <= lv[0]
    near_right |= ya >= lv[-1]
    coin = np.where(u < 0.5, left, right)
    out = np.where(near_left & ~near_right, left,
                   np.where(near_right & ~near_left, right, coin))
    return int(out[0]) if scalar else out


def single_boundary_1d(y, s_accept: float, s_other: float, beta: float):
    """Binary rule with one boundary at distance ``beta`` from ``s_accept``.

    Decides ``s_accept`` (returns True) when ``y`` lies on its side of the
    boundary, i.e. at most ``beta`` away from it in the direction of
    ``s_other`` or anywhere beyond it.
    """
    ya = np.asarray(y, dtype=float)
    toward = np.sign(s_other - s_accept)
    out = (ya - s_accept) * toward <= beta
    return bool(out) if out.ndim == 0 else out
