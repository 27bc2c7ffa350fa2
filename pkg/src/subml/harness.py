"""Monte Carlo sweeps: BER and search complexity of the early-exit detector.

Each SNR point solves for the boundary shift, then runs paired trials in
which the early-exit detector and exhaustive ML see the same symbols and
noise.  Trials are processed in blocks aligned with the channel module's
random-stream blocks, and only integer counts are reduced, so results do
not depend on the number of worker threads.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import List, Tuple

import numpy as np

from .analytics import MimoBoundParams, qfunc, union_bound_mimo_shifted
from .channel import (
    BLOCK,
    ChannelMode,
    SeedPolicy,
    SnrReference,
    draw_channels,
    draw_symbols,
    noise_density,
    transmit_batch,
)
from .constellation import VectorConstellation, parse_modulation
from .detectors import distance_matrix, early_exit_batch, ml_batch
from .errors import Infeasible, NoConvergence, SweepAborted
from .solver import Branch, SolverConfig, siso_curve, solve_mimo, solve_siso

__all__ = [
    "TargetRule",
    "BetaModel",
    "LinkConfig",
    "SweepPoint",
    "binomial_ci",
    "hit_probability_paper",
    "ml_hit_probability",
    "worker_count",
    "solve_point",
    "simulate_point",
    "run_sweep",
    "run_complexity_sweep",
    "run_ber_sweep",
]

THREADS_ENV = "SUBML_THREADS"


@dataclass(frozen=True)
class TargetRule:
    """``factor_of_pmin`` (P = c * P_min) or ``absolute`` (P given)."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("factor_of_pmin", "absolute"):
            raise ValueError(f"unknown target rule '{self.kind}'")
        if self.kind == "factor_of_pmin" and not self.value >= 1.0:
            raise ValueError("pmin factor must be >= 1")
        if self.kind == "absolute" and not 0.0 < self.value < 1.0:
            raise ValueError("absolute target must lie in (0, 1)")

    @classmethod
    def parse(cls, text: str) -> "TargetRule":
        key, sep, val = text.strip().partition(":")
        if not sep:
            raise ValueError(f"target '{text}' is not of the form kind:value")
        try:
            num = float(val)
        except ValueError:
            raise ValueError(f"target value '{val}' is not a number") from None
        kinds = {"pmin-factor": "factor_of_pmin", "abs": "absolute"}
        if key not in kinds:
            raise ValueError(f"unknown target kind '{key}' (pmin-factor|abs)")
        return cls(kinds[key], num)

    def __str__(self):
        tag = "pmin-factor" if self.kind == "factor_of_pmin" else "abs"
        return f"{tag}:{self.value!r}"


class BetaModel(str, enum.Enum):
    """Which error curve is inverted for the threshold.

    ``siso``: per-symbol shifted-boundary BER curve of the modulation.
    ``union``: shifted MIMO union bound over all candidate pairs.
    """

    SISO = "siso"
    UNION = "union"


@dataclass(frozen=True)
class LinkConfig:
    modulation: str = "qam16"
    nt: int = 2
    nr: int = 2
    channel: ChannelMode = ChannelMode.IDENTITY
    snr_db: Tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0)
    target: TargetRule = TargetRule("factor_of_pmin", 2.0)
    trials: int = 100_000
    seed: int = 0
    branch: Branch = Branch.LOWER
    snr_ref: SnrReference = SnrReference.DMIN
    beta_model: BetaModel = BetaModel.SISO

    def __post_init__(self):
        object.__setattr__(self, "channel", ChannelMode(self.channel))
        object.__setattr__(self, "branch", Branch(self.branch))
        object.__setattr__(self, "snr_ref", SnrReference(self.snr_ref))
        object.__setattr__(self, "beta_model", BetaModel(self.beta_model))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if isinstance(self.target, str):
            object.__setattr__(self, "target", TargetRule.parse(self.target))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.snr_db:
            raise ValueError("SNR grid must not be empty")
        if self.nt < 1 or self.nr < 1:
            raise ValueError("antenna counts must be >= 1")
        if self.channel is ChannelMode.IDENTITY and self.nr != self.nt:
            raise ValueError("identity channel requires nr == nt")
        parse_modulation(self.modulation)

    @property
    def constellation(self):
        return parse_modulation(self.modulation)

    def vector_constellation(self) -> VectorConstellation:
        return VectorConstellation.uniform(self.constellation, self.nt)

    def as_dict(self) -> dict:
        return {
            "modulation": self.modulation,
            "nt": self.nt,
            "nr": self.nr,
            "channel": self.channel.value,
            "snr_db": list(self.snr_db),
            "target": str(self.target),
            "trials": self.trials,
            "seed": self.seed,
            "branch": self.branch.value,
            "snr_ref": self.snr_ref.value,
            "beta_model": self.beta_model.value,
        }


@dataclass
class SweepPoint:
    snr_db: float
    n0: float
    beta: float
    target_p: float
    ser: float
    ser_ci: Tuple[float, float]
    ber: float
    ber_ci: Tuple[float, float]
    normalized_complexity: float
    hit_rate: float
    paper_hit_prob: float
    trials: int
    cardinality: int
    ml_ser: float = 0.0
    ml_ber: float = 0.0
    ml_normalized_complexity: float = 1.0
    vector_error_rate: float = 0.0
    ml_vector_error_rate: float = 0.0
    symbol_errors: int = 0
    ml_symbol_errors: int = 0
    bit_errors: int = 0
    vector_errors: int = 0
    ml_vector_errors: int = 0
    mismatches: int = 0
    solver_iterations: int = 0


def binomial_ci(errors: int, trials: int, level: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= errors <= trials:
        raise ValueError("need 0 <= errors <= trials")
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    n = float(trials)
    p = errors / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return lo, hi


def hit_probability_paper(n0: float, beta: float) -> float:
    """Reported hit probability ``1 - Q(N0 * beta)`` (taken as stated)."""
    return float(1.0 - qfunc(n0 * beta))


def ml_hit_probability(M: int, nt: int) -> float:
    return float(M) ** (-nt)


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


@dataclass(frozen=True)
class _PointPlan:
    snr_db: float
    n0: float
    beta: float
    target_p: float
    iterations: int


def solve_point(cfg: LinkConfig, snr_db: float, v: VectorConstellation | None = None,
                bound: MimoBoundParams | None = None) -> _PointPlan:
    """Noise density, target and threshold for one SNR value."""
    c = cfg.constellation
    n0 = noise_density(snr_db, c, cfg.snr_ref)
    scfg = SolverConfig(branch=cfg.branch)
    if cfg.beta_model is BetaModel.SISO:
        pmin = siso_curve(c, n0)(0.5 * c.d_min)
        target = pmin * cfg.target.value if cfg.target.kind == "factor_of_pmin" \
            else cfg.target.value
        sol = solve_siso(c, n0, target, scfg)
    else:
        v = v or cfg.vector_constellation()
        if bound is None:
            bound = MimoBoundParams.from_vector(v, cfg.nr, n0)
        else:
            bound = MimoBoundParams(cfg.nr, n0, bound.distances, bound.orders)
        pmin = union_bound_mimo_shifted(bound, 0.5 * v.d_min)
        target = pmin * cfg.target.value if cfg.target.kind == "factor_of_pmin" \
            else cfg.target.value
        sol = solve_mimo(bound, v.d_min, target,
                         SolverConfig(branch=cfg.branch, floor=1e-6, start=0.01))
    return _PointPlan(snr_db, n0, sol.beta, target, sol.iterations)


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.uint64)
    return np.unpackbits(a.view(np.uint8)).reshape(a.shape + (64,)).sum(axis=-1)


def _run_block(cfg: LinkConfig, v: VectorConstellation, labels: np.ndarray,
               plan: _PointPlan, seed: SeedPolicy, first: int, n: int) -> np.ndarray:
    idx = draw_symbols(v, n, seed, first)
    X = v.points[idx]
    H = None
    if cfg.channel is ChannelMode.RAYLEIGH:
        H = draw_channels(seed, first, n, cfg.nr, cfg.nt)
    Y = transmit_batch(X, plan.n0, seed, first, H=H, nr=cfg.nr)
    D = distance_matrix(Y, v, H)
    dec, evals, hit = early_exit_batch(D, plan.beta)
    ml = ml_batch(D)
    tx_ant = v.indices[idx]
    sym_err = int(np.sum(v.indices[dec] != tx_ant))
    ml_sym_err = int(np.sum(v.indices[ml] != tx_ant))
    bit_err = int(np.sum(_popcount(labels[dec] ^ labels[idx])))
    ml_bit_err = int(np.sum(_popcount(labels[ml] ^ labels[idx])))
    return np.array([
        sym_err, ml_sym_err, bit_err, ml_bit_err,
        int(np.sum(dec != idx)), int(np.sum(ml != idx)),
        int(np.sum(evals)), int(np.sum(hit)), int(np.sum(dec != ml)),
    ], dtype=np.int64)


def simulate_point(cfg: LinkConfig, plan: _PointPlan, threads: int | None = None,
                   v: VectorConstellation | None = None) -> SweepPoint:
    """Run ``cfg.trials`` paired trials at one SNR and aggregate them."""
    v = v or cfg.vector_constellation()
    labels = v.bit_labels()
    seed = SeedPolicy(cfg.seed)
    spans = [(s, min(BLOCK, cfg.trials - s)) for s in range(0, cfg.trials, BLOCK)]
    nw = min(worker_count(threads), len(spans))
    job = lambda sp: _run_block(cfg, v, labels, plan, seed, sp[0], sp[1])
    if nw == 1:
        parts = [job(sp) for sp in spans]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            parts = list(pool.map(job, spans))
    tot = np.sum(parts, axis=0)
    (sym_err, ml_sym_err, bit_err, ml_bit_err, vec_err, ml_vec_err,
     evals, hits, mism) = (int(t) for t in tot)
    n = cfg.trials
    n_sym = n * cfg.nt
    n_bits = n * v.bits_per_vector
    k = v.cardinality
    return SweepPoint(
        snr_db=plan.snr_db,
        n0=plan.n0,
        beta=plan.beta,
        target_p=plan.target_p,
        ser=sym_err / n_sym,
        ser_ci=binomial_ci(sym_err, n_sym),
        ber=bit_err / n_bits,
        ber_ci=binomial_ci(bit_err, n_bits),
        normalized_complexity=evals / (n * k),
        hit_rate=hits / n,
        paper_hit_prob=hit_probability_paper(plan.n0, plan.beta),
        trials=n,
        cardinality=k,
        ml_ser=ml_sym_err / n_sym,
        ml_ber=ml_bit_err / n_bits,
        ml_normalized_complexity=1.0,
        vector_error_rate=vec_err / n,
        ml_vector_error_rate=ml_vec_err / n,
        symbol_errors=sym_err,
        ml_symbol_errors=ml_sym_err,
        bit_errors=bit_err,
        vector_errors=vec_err,
        ml_vector_errors=ml_vec_err,
        mismatches=mism,
        solver_iterations=plan.iterations,
    )


def run_sweep(cfg: LinkConfig, threads: int | None = None) -> List[SweepPoint]:
    """Solve and simulate every SNR point of ``cfg``.

    Raises
    ------
    SweepAborted
        When the threshold cannot be solved at some SNR.
    """
    v = cfg.vector_constellation()
    bound = None
    if cfg.beta_model is BetaModel.UNION:
        bound = MimoBoundParams.from_vector(v, cfg.nr, 1.0)
    out = []
    for snr in cfg.snr_db:
        try:
            plan = solve_point(cfg, snr, v, bound)
        except (Infeasible, NoConvergence) as exc:
            raise SweepAborted(snr, exc) from exc
        out.append(simulate_point(cfg, plan, threads, v))
    return out


def run_complexity_sweep(cfg: LinkConfig, threads: int | None = None) -> List[SweepPoint]:
    """Mean cost-function evaluations per detection, normalized by ``prod M_i``."""
    return run_sweep(cfg, threads)


def run_ber_sweep(cfg: LinkConfig, threads: int | None = None) -> List[SweepPoint]:
    """Error rates of the early-exit detector and paired ML."""
    return run_sweep(cfg, threads)
