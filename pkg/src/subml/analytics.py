"""Closed-form error probabilities for the shifted-boundary detector.

All SISO expressions are written in terms of the boundary shift ``beta``
(distance from a constellation point to its shrunken decision boundary),
the minimum distance ``d_min`` and the noise density ``N0``.  With
``beta = d_min / 2`` they reduce to the ML error probability.  Channel gains
are not modelled here; SNR enters only through ``N0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from .constellation import Constellation, Scheme
from .errors import EmptyPairs, UnsupportedOrder

__all__ = [
    "erfc",
    "qfunc",
    "likelihood",
    "SisoErrorParams",
    "ser_bpsk",
    "ser_pam4",
    "ser_pam4_single_boundary",
    "ser_qam16",
    "ser_mqam",
    "ser_qam16_exact",
    "ser_coefficient",
    "ser_shifted",
    "ser_to_ber",
    "avg_nearest_neighbors",
    "UnionBoundSiso",
    "union_bound_mqam_siso",
    "pairwise_error_prob",
    "pairwise_error_prob_asymptotic",
    "MimoBoundParams",
    "mimo_bound_constant",
    "union_bound_mimo",
    "union_bound_mimo_shifted",
]


def erfc(x):
    """Complementary error function; accepts scalars or arrays."""
    out = special.erfc(x)
    return float(out) if np.ndim(out) == 0 else out


def qfunc(x):
    """Gaussian tail probability ``Q(x) = erfc(x / sqrt 2) / 2``."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def likelihood(y, s, sigma: float):
    """Gaussian likelihood of observing ``y`` when ``s`` was sent."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    r = np.abs(np.asarray(y) - np.asarray(s)) / sigma
    val = np.exp(-0.5 * r * r) / math.sqrt(2.0 * math.pi * sigma * sigma)
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class SisoErrorParams:
    """``d_min``, ``N0`` and ``beta``; each may be a scalar or an array."""

    d_min: float
    n0: float
    beta: float

    def __post_init__(self):
        d = np.asarray(self.d_min, dtype=float)
        n0 = np.asarray(self.n0, dtype=float)
        b = np.asarray(self.beta, dtype=float)
        if np.any(d <= 0):
            raise ValueError("d_min must be positive")
        if np.any(n0 <= 0):
            raise ValueError("N0 must be positive")
        if np.any(b < 0) or np.any(b > d):
            raise ValueError("beta must lie in [0, d_min]")

    def erfc_pair(self):
        """``(erfc((d_min - beta)/sqrt N0), erfc(beta/sqrt N0))``."""
        s = np.sqrt(np.asarray(self.n0, dtype=float))
        far = erfc((np.asarray(self.d_min) - np.asarray(self.beta)) / s)
        near = erfc(np.asarray(self.beta) / s)
        return far, near


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def ser_bpsk(p: SisoErrorParams):
    """Null-region BPSK detector: ``(erfc((d-b)/sqrt N0) + erfc(b/sqrt N0)) / 4``."""
    far, near = p.erfc_pair()
    return _scalar(0.25 * far + 0.25 * near)


def ser_pam4(p: SisoErrorParams):
    far, near = p.erfc_pair()
    return _scalar(0.375 * far + 0.375 * near)


def ser_pam4_single_boundary(p: SisoErrorParams):
    """4-PAM with one shifted boundary per interval instead of a NULL region.

    Built from the two tail areas ``A1 = erfc(b/sqrt N0)/2`` and
    ``A2 = erfc((d-b)/sqrt N0)/2``; the four per-symbol error probabilities
    are ``A1, A1+A2, A1+A2, A2``.
    """
    far, near = p.erfc_pair()
    a1 = 0.5 * near
    a2 = 0.5 * far
    return _scalar(0.25 * (a1 + (a1 + a2) + (a1 + a2) + a2))


def ser_qam16(p: SisoErrorParams):
    far, near = p.erfc_pair()
    return _scalar(0.75 * far + 0.75 * near)


def _check_square(M: int) -> int:
    side = math.isqrt(int(M))
    if M < 4 or side * side != M:
        raise UnsupportedOrder(f"M-QAM needs a perfect square M >= 4, got {M}")
    return side


def ser_mqam(M: int, p: SisoErrorParams):
    """Square M-QAM shifted-boundary SER, coefficient ``1 - 1/sqrt(M)``."""
    side = _check_square(M)
    far, near = p.erfc_pair()
    return _scalar((1.0 - 1.0 / side) * (far + near))


def ser_qam16_exact(p: SisoErrorParams):
    """Average of the sixteen per-symbol product-form error probabilities.

    Each per-symbol detection probability is a product of two per-axis
    probabilities built from ``a = erfc((d-b)/sqrt N0)/2`` and
    ``c = erfc(b/sqrt N0)/2``.  No second-order terms are dropped.
    """
    far, near = p.erfc_pair()
    a = 0.5 * far
    c = 0.5 * near
    inner = 1.0 - (a + c)
    corner_mixed = 1.0 - (1.0 - a) * (1.0 - c)  # S0, S15
    corner_near = 1.0 - (1.0 - c) ** 2          # S3
    corner_far = 1.0 - (1.0 - a) ** 2           # S12
    edge_near = 1.0 - (1.0 - c) * inner         # S1, S2, S7, S11
    edge_far = 1.0 - (1.0 - a) * inner          # S4, S8, S13, S14
    interior = 1.0 - inner ** 2                 # S5, S6, S9, S10
    total = (corner_near + corner_far + 2.0 * corner_mixed
             + 4.0 * interior + 4.0 * edge_near + 4.0 * edge_far) / 16.0
    return _scalar(total)


def ser_coefficient(scheme, M: int) -> float:
    """Multiplier of ``[erfc(.) + erfc(.)]`` in the shifted-boundary SER."""
    scheme = Scheme(scheme)
    if scheme is Scheme.BPSK:
        return 0.25
    if scheme is Scheme.PAM:
        if M != 4:
            raise UnsupportedOrder("only 4-PAM has a closed-form shifted SER")
        return 0.375
    side = _check_square(M)
    return 1.0 - 1.0 / side


def ser_shifted(c: Constellation, n0, beta):
    """Shifted-boundary SER for the modulation of ``c``."""
    p = SisoErrorParams(c.d_min, n0, beta)
    far, near = p.erfc_pair()
    return _scalar(ser_coefficient(c.scheme, c.M) * (far + near))


def ser_to_ber(ser, M: int):
    """Gray-mapping approximation ``BER = SER / log2(M)``."""
    return ser / math.log2(M)


def avg_nearest_neighbors(M: int) -> float:
    """Average nearest-neighbour count of square M-QAM, ``4 (1 - 1/sqrt M)``."""
    side = _check_square(M)
    return 4.0 * (1.0 - 1.0 / side)


class UnionBoundSiso(NamedTuple):
    q_form: float
    exp_form: float


def union_bound_mqam_siso(M: int, p: SisoErrorParams) -> UnionBoundSiso:
    """Nearest-neighbour union bound and its exponential relaxation.

    Each Q term uses the per-axis noise standard deviation ``sqrt(N0/2)``
    (the convention under which the shifted-boundary SER is written), so
    the Q-form coincides with ``ser_mqam``.  The exponential form replaces
    every ``Q(x)`` by ``exp(-x^2/2)``.
    """
    nbar = avg_nearest_neighbors(M)
    beta = np.asarray(p.beta, dtype=float)
    far = np.asarray(p.d_min, dtype=float) - beta
    n0 = np.asarray(p.n0, dtype=float)
    sigma = np.sqrt(0.5 * n0)
    q_form = nbar * (0.5 * qfunc(beta / sigma) + 0.5 * qfunc(far / sigma))
    exp_form = nbar * (0.5 * np.exp(-beta ** 2 / n0) + 0.5 * np.exp(-far ** 2 / n0))
    return UnionBoundSiso(_scalar(q_form), _scalar(exp_form))


def pairwise_error_prob(gamma_c, nr: int):
    """Rayleigh-averaged pairwise error probability with ``nr`` receive branches.

    ``[(1-mu)/2]^nr * sum_k C(nr-1+k, k) [(1+mu)/2]^k`` with
    ``mu = sqrt(gamma / (1 + gamma))``.
    """
    if nr < 1:
        raise ValueError("nr must be >= 1")
    g = np.asarray(gamma_c, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma_c must be non-negative")
    mu = np.sqrt(g / (1.0 + g))
    lo = 0.5 * (1.0 - mu)
    hi = 0.5 * (1.0 + mu)
    acc = np.zeros_like(mu)
    for k in range(nr):
        acc = acc + math.comb(nr - 1 + k, k) * hi ** k
    return _scalar(lo ** nr * acc)


def pairwise_error_prob_asymptotic(gamma_c, nr: int):
    """High-SNR form ``(1 / (4 gamma))^nr * C(2 nr - 1, nr)``."""
    g = np.asarray(gamma_c, dtype=float)
    return _scalar((1.0 / (4.0 * g)) ** nr * math.comb(2 * nr - 1, nr))


@dataclass(frozen=True)
class MimoBoundParams:
    """Inputs of the simplified MIMO union bound.

    ``distances`` are the ordered-pair distances ``|x - x_hat|`` (one entry
    per ordered pair, as produced by ``pairwise_distances``).
    """

    nr: int
    n0: float
    distances: np.ndarray
    orders: Sequence[int]

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float)
        object.__setattr__(self, "distances", d)
        if self.nr < 1:
            raise ValueError("nr must be >= 1")
        if not self.n0 > 0:
            raise ValueError("N0 must be positive")
        if d.size == 0:
            raise EmptyPairs("no pair distances given")
        if np.any(d <= 0):
            raise ValueError("pair distances must be positive")

    @classmethod
    def from_vector(cls, v, nr: int, n0: float, cap=None):
        from .constellation import DEFAULT_PAIR_CAP, pairwise_distances
        pd = pairwise_distances(v, cap=cap or DEFAULT_PAIR_CAP)
        return cls(nr, n0, pd.d, v.orders)


def mimo_bound_constant(b: MimoBoundParams) -> float:
    """``(2 N0)^nr C(2 nr - 1, nr) / prod(M_i)``."""
    return ((2.0 * b.n0) ** b.nr * math.comb(2 * b.nr - 1, b.nr)
            / math.prod(b.orders))


def union_bound_mimo(b: MimoBoundParams) -> float:
    """Simplified union bound on the vector error probability.

    Not a probability: it exceeds 1 at low SNR.
    """
    terms = (1.0 / (4.0 * b.distances ** 2)) ** b.nr
    return mimo_bound_constant(b) * float(np.sum(terms))


def union_bound_mimo_shifted(b: MimoBoundParams, beta: float) -> float:
    """Union bound with each pair split at distance ``beta``.

    Every ordered pair contributes ``(1/(4 (d - beta)^2))^nr + (1/(4 beta^2))^nr``.
    """
    d = b.distances
    far = (1.0 / (4.0 * (d - beta) ** 2)) ** b.nr
    near = (1.0 / (4.0 * beta * beta)) ** b.nr
    return mimo_bound_constant(b) * (float(np.sum(far)) + d.size * near)
