"""Newton-Raphson inversion of an error curve into a boundary shift.

The objective ``g(beta) = curve(beta) - P`` is decreasing on
``(0, d_min/2]`` and (for SISO curves) mirror-symmetric about ``d_min/2``,
so a feasible target has one root per branch.  Newton steps are kept
inside a shrinking sign-change bracket; any step that leaves it, or that
fails to halve the previous step, is replaced by bisection.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np

from .analytics import (
    MimoBoundParams,
    SisoErrorParams,
    erfc,
    mimo_bound_constant,
    ser_coefficient,
    union_bound_mimo_shifted,
)
from .constellation import Constellation, Scheme
from .errors import Infeasible, NoConvergence, SingularPoint

__all__ = [
    "Branch",
    "SolverConfig",
    "BetaSolution",
    "g_siso",
    "g_siso_prime",
    "siso_curve",
    "g_mimo",
    "g_mimo_prime",
    "solve_beta",
    "solve_siso",
    "solve_mimo",
    "MIMO_START_FRACTION",
]

MIMO_START_FRACTION = 0.01
_MIMO_FLOOR_FRACTION = 1e-6
_POLE_GUARD = 1e-9


class Branch(str, enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and branch selection.

    ``floor`` is the lower end of the admissible interval as a fraction of
    ``d_min`` (the interval is mirrored for the upper branch); ``start`` is
    the initial iterate as a fraction of ``d_min``, defaulting to the floor.
    """

    tol: float = 1e-12
    max_iter: int = 100
    branch: Branch = Branch.LOWER
    newton_fallback: str = "bisection"
    floor: float = 0.0
    start: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "branch", Branch(self.branch))
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.newton_fallback != "bisection":
            raise ValueError("only bisection fallback is supported")
        if not 0.0 <= self.floor < 0.5:
            raise ValueError("floor must be in [0, 0.5)")


@dataclass
class BetaSolution:
    beta: float
    target_p: float
    residual: float
    iterations: int
    branch: Branch
    converged: bool
    d_min: float
    trace: List[float] = field(default_factory=list, repr=False)


def _k(M: int) -> float:
    return math.log2(M)


def g_siso(beta, target_p, M: int, p_or_dmin, n0=None, scheme=Scheme.QAM):
    """BER-domain objective ``coef/k [erfc((d-b)/sqrt N0) + erfc(b/sqrt N0)] - P``.

    ``p_or_dmin`` is either a :class:`SisoErrorParams` (its ``beta`` is
    ignored) or ``d_min`` together with ``n0``.
    """
    d_min, n0 = _unpack(p_or_dmin, n0)
    coef = ser_coefficient(scheme, M) / _k(M)
    s = math.sqrt(n0)
    return coef * (erfc((d_min - beta) / s) + erfc(beta / s)) - target_p


def g_siso_prime(beta, M: int, p_or_dmin, n0=None, scheme=Scheme.QAM):
    """Derivative of :func:`g_siso` with respect to ``beta``."""
    d_min, n0 = _unpack(p_or_dmin, n0)
    coef = 2.0 * ser_coefficient(scheme, M) / (_k(M) * math.sqrt(math.pi * n0))
    return coef * (np.exp(-(d_min - beta) ** 2 / n0) - np.exp(-beta ** 2 / n0))


def _unpack(p_or_dmin, n0):
    if isinstance(p_or_dmin, SisoErrorParams):
        return float(p_or_dmin.d_min), float(p_or_dmin.n0)
    if n0 is None:
        raise TypeError("n0 required when d_min is passed directly")
    return float(p_or_dmin), float(n0)


def siso_curve(c: Constellation, n0: float) -> Callable[[float], float]:
    """BER predicted by the shifted-boundary formula as a function of beta."""
    return lambda b: g_siso(b, 0.0, c.M, c.d_min, n0, c.scheme)


def _check_mimo_beta(beta, b: MimoBoundParams):
    if not beta > 0:
        raise SingularPoint(f"beta={beta!r} must be > 0")
    if np.min(np.abs(b.distances - beta)) <= _POLE_GUARD:
        raise SingularPoint(f"beta={beta!r} coincides with a pair distance")


def g_mimo(beta, target_p, b: MimoBoundParams):
    """Shifted union bound minus the target."""
    _check_mimo_beta(beta, b)
    return union_bound_mimo_shifted(b, beta) - target_p


def g_mimo_prime(beta, b: MimoBoundParams):
    _check_mimo_beta(beta, b)
    nr = b.nr
    d = b.distances
    far = (d - beta) * (1.0 / (4.0 * (d - beta) ** 2)) ** (nr + 1)
    near = -beta * (1.0 / (4.0 * beta * beta)) ** (nr + 1)
    return mimo_bound_constant(b) * 8.0 * nr * (float(np.sum(far)) + d.size * near)


def solve_beta(g, gprime, d_min: float, cfg: SolverConfig = SolverConfig(),
               target_p: float = float("nan")) -> BetaSolution:
    """Find the root of ``g`` on the configured branch.

    The lower branch searches ``[floor*d_min, d_min/2]`` where ``g`` is
    expected to decrease; the upper branch searches the mirrored interval.

    Raises
    ------
    Infeasible
        ``g(d_min/2) > tol``: the target is below the smallest achievable
        error, or ``g`` has the wrong sign at the outer end of the interval
        (target above the largest error the interval can produce).
    NoConvergence
        ``max_iter`` iterations without ``|g| <= tol``.
    """
    half = 0.5 * d_min
    edge = cfg.floor * d_min
    if cfg.branch is Branch.LOWER:
        outer, start = edge, (cfg.start * d_min if cfg.start is not None else edge)
    else:
        outer, start = d_min - edge, (d_min - cfg.start * d_min
                                      if cfg.start is not None else d_min - edge)
    trace: List[float] = []

    g_half = g(half)
    if g_half > cfg.tol:
        raise Infeasible(
            f"target error probability is below the minimum achievable "
            f"(g(d_min/2) = {g_half:.6g} > 0)", target_p=target_p)
    if abs(g_half) <= 64.0 * np.finfo(float).eps * max(abs(target_p), 1e-300):
        return BetaSolution(half, target_p, abs(g_half), 0, cfg.branch, True,
                            d_min, [half])
    g_outer = g(outer)
    if g_outer < 0:
        raise Infeasible(
            f"target error probability exceeds the error at beta={outer:.6g} "
            f"(g = {g_outer:.6g} < 0); no root on the {cfg.branch.value} branch",
            target_p=target_p)

    # pos: end where g >= 0, neg: end where g < 0
    pos, neg = outer, half
    x = min(max(start, min(pos, neg)), max(pos, neg))
    xtol = 4.0 * np.finfo(float).eps * d_min
    dx_old = abs(neg - pos)
    dx = dx_old
    gx = float(g(x))
    for it in range(1, cfg.max_iter + 1):
        trace.append(x)
        if gx == 0.0:
            return BetaSolution(x, target_p, 0.0, it, cfg.branch, True, d_min, trace)
        if gx > 0:
            pos = x
        else:
            neg = x
        lo, hi = min(pos, neg), max(pos, neg)
        dg = gprime(x)
        newton_ok = dg != 0 and np.isfinite(dg)
        if newton_ok:
            xn = x - gx / dg
            newton_ok = lo < xn < hi and abs(xn - x) <= 0.5 * dx_old
        if not newton_ok:
            xn = 0.5 * (lo + hi)
        dx_old, dx = dx, abs(xn - x)
        x = float(xn)
        gx = float(g(x))
        if dx <= xtol or (hi - lo) <= xtol:
            trace.append(x)
            if abs(gx) <= cfg.tol:
                return BetaSolution(x, target_p, abs(gx), it, cfg.branch, True,
                                    d_min, trace)
            break
    sol = BetaSolution(x, target_p, abs(gx), len(trace), cfg.branch, False,
                       d_min, trace)
    raise NoConvergence(
        f"no convergence after {cfg.max_iter} iterations (|g| = {abs(gx):.3g})",
        solution=sol)


def solve_siso(c: Constellation, n0: float, target_p: float,
               cfg: SolverConfig = SolverConfig()) -> BetaSolution:
    """Invert the SISO BER curve of ``c`` at noise density ``n0``."""
    g = lambda b: g_siso(b, target_p, c.M, c.d_min, n0, c.scheme)
    gp = lambda b: g_siso_prime(b, c.M, c.d_min, n0, c.scheme)
    return solve_beta(g, gp, c.d_min, cfg, target_p=target_p)


def solve_mimo(b: MimoBoundParams, d_min: float, target_p: float,
               cfg: SolverConfig | None = None) -> BetaSolution:
    """Invert the shifted MIMO union bound; starts at ``0.01 d_min``."""
    if cfg is None:
        cfg = SolverConfig(floor=_MIMO_FLOOR_FRACTION, start=MIMO_START_FRACTION)
    elif cfg.floor <= 0:
        cfg = SolverConfig(cfg.tol, cfg.max_iter, cfg.branch, cfg.newton_fallback,
                           _MIMO_FLOOR_FRACTION,
                           cfg.start if cfg.start is not None else MIMO_START_FRACTION)
    g = lambda beta: g_mimo(beta, target_p, b)
    gp = lambda beta: g_mimo_prime(beta, b)
    return solve_beta(g, gp, d_min, cfg, target_p=target_p)
