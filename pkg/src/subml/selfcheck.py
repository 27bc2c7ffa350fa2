"""Analytic and Monte Carlo self-checks behind ``subml validate``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np
from scipy import integrate

from . import analytics as an
from .channel import SeedPolicy, draw_noise, noise_density
from .constellation import VectorConstellation, build_constellation, neighbor_counts
from .detectors import distance_matrix, early_exit_batch, ml_batch, null_region_1d
from .harness import binomial_ci
from .solver import SolverConfig, g_siso, g_siso_prime, siso_curve, solve_siso

__all__ = ["Check", "run_checks", "erfc_quadrature"]


@dataclass
class Check:
    name: str
    ok: bool
    detail: str
    slow: bool = False


def erfc_quadrature(x: float) -> float:
    """``2/sqrt(pi) * integral_x^inf exp(-t^2) dt`` by adaptive quadrature."""
    c = 2.0 / math.sqrt(math.pi)
    if x >= 0:
        # shift so the integrand peaks at the origin of the integration range
        val, _ = integrate.quad(lambda u: math.exp(-(x + u) ** 2), 0.0, math.inf,
                                epsabs=0.0, epsrel=2e-14, limit=200)
        return c * val
    head, _ = integrate.quad(lambda t: math.exp(-t * t), x, 0.0,
                             epsabs=0.0, epsrel=2e-14, limit=200)
    return c * head + 1.0


def _check_erfc(erfc_impl) -> Check:
    worst = 0.0
    for x in np.linspace(-10.0, 10.0, 81):
        ref = erfc_quadrature(float(x))
        worst = max(worst, abs(erfc_impl(float(x)) - ref) / ref)
    return Check("erfc vs quadrature (|x|<=10)", worst <= 1e-12,
                 f"max rel err {worst:.2e}")


def _check_reflection(erfc_impl) -> Check:
    xs = np.linspace(-6, 6, 121)
    err = max(abs(erfc_impl(float(x)) + erfc_impl(float(-x)) - 2.0) for x in xs)
    return Check("erfc reflection", err <= 1e-12, f"max err {err:.2e}")


def _check_ser_shape() -> Check:
    bad = []
    for name, fn in (("bpsk", an.ser_bpsk), ("pam4", an.ser_pam4),
                     ("qam16", an.ser_qam16),
                     ("qam64", lambda p: an.ser_mqam(64, p))):
        for n0 in (0.05, 0.2, 1.0):
            d = 1.0
            b = np.linspace(0.0, d, 201)
            v = fn(an.SisoErrorParams(d, n0, b))
            if not np.allclose(v, v[::-1], rtol=1e-13, atol=0):
                bad.append(f"{name} asym")
            if int(np.argmin(v)) != 100:
                bad.append(f"{name} min")
    return Check("SER symmetric, minimum at d_min/2", not bad, ", ".join(bad) or "ok")


def _check_qam_forms() -> Check:
    d, n0 = 2 / math.sqrt(10), 0.1
    b = np.linspace(0.0, d, 51)
    p = an.SisoErrorParams(d, n0, b)
    ok = np.allclose(an.ser_mqam(16, p), an.ser_qam16(p), rtol=1e-15, atol=0)
    ok &= np.all(an.ser_qam16_exact(p) <= an.ser_qam16(p))
    ok &= np.allclose(an.ser_pam4(p), an.ser_pam4_single_boundary(p), rtol=1e-14, atol=0)
    return Check("QAM/PAM closed-form identities", bool(ok), "")


def _check_neighbors() -> Check:
    msgs, ok = [], True
    for m in (4, 16, 64):
        avg = float(np.mean(neighbor_counts(build_constellation("qam", m))))
        ok &= abs(avg - an.avg_nearest_neighbors(m)) < 1e-12
        msgs.append(f"M={m}: {avg:g}")
    return Check("nearest-neighbour average 4(1-1/sqrt M)", ok, "; ".join(msgs))


def _check_pep() -> Check:
    worst = 0.0
    for nr in (1, 2, 4):
        r = an.pairwise_error_prob(1e4, nr) * (4e4) ** nr / math.comb(2 * nr - 1, nr)
        worst = max(worst, abs(r - 1.0))
    return Check("pairwise error probability high-SNR limit", worst < 0.01,
                 f"max rel dev {worst:.2e}")


def _check_solver() -> Check:
    c = build_constellation("qam", 16)
    worst_g, worst_sym, worst_fd = 0.0, 0.0, 0.0
    for snr in range(0, 16, 2):
        n0 = noise_density(snr, c)
        target = 2.0 * siso_curve(c, n0)(c.d_min / 2)
        lo = solve_siso(c, n0, target)
        up = solve_siso(c, n0, target, SolverConfig(branch="upper"))
        worst_g = max(worst_g, abs(g_siso(lo.beta, target, 16, c.d_min, n0)))
        worst_sym = max(worst_sym, abs(up.beta - (c.d_min - lo.beta)))
        for frac in (0.1, 0.3, 0.45):
            b = frac * c.d_min
            h = 1e-6 * c.d_min
            fd = (g_siso(b + h, 0, 16, c.d_min, n0) - g_siso(b - h, 0, 16, c.d_min, n0)) / (2 * h)
            an_ = g_siso_prime(b, 16, c.d_min, n0)
            worst_fd = max(worst_fd, abs(fd - an_) / abs(an_))
    ok = bool(worst_g <= 1e-12 and worst_sym <= 1e-10 and worst_fd <= 1e-6)
    return Check("Newton solver (16-QAM, 0:2:14 dB)", ok,
                 f"|g|<={worst_g:.1e}, branch sym {worst_sym:.1e}, g' fd {worst_fd:.1e}")


def _check_ml_equivalence(trials: int) -> Check:
    c = build_constellation("qam", 16)
    v = VectorConstellation.uniform(c, 2)
    seed = SeedPolicy(7)
    rng = np.random.default_rng(7)
    idx = rng.integers(0, v.cardinality, trials)
    n0 = noise_density(8.0, c)
    Y = v.points[idx] + math.sqrt(n0) * draw_noise(seed, 0, trials, 2)
    D = distance_matrix(Y, v)
    dec, _, _ = early_exit_batch(D, c.d_min / 2)
    mism = int(np.sum(dec != ml_batch(D)))
    return Check(f"early exit == ML at beta=d_min/2 ({trials} trials)", mism == 0,
                 f"{mism} mismatches", slow=trials > 10_000)


def _check_null_region(trials: int) -> Check:
    c = build_constellation("bpsk", 2)
    n0 = noise_density(6.0, c)
    beta = 0.3 * c.d_min
    rng = np.random.default_rng(11)
    tx = rng.integers(0, 2, trials)
    y = c.axis_levels[tx] + rng.normal(0.0, math.sqrt(n0 / 2), trials)
    dec = null_region_1d(y, c.axis_levels, beta, rng)
    errs = int(np.sum(dec != tx))
    lo, hi = binomial_ci(errs, trials)
    se = (hi - lo) / (2 * 1.959963984540054)
    ref = an.ser_bpsk(an.SisoErrorParams(c.d_min, n0, beta))
    z = abs(errs / trials - ref) / se
    return Check(f"BPSK null-region SER vs formula ({trials} trials)", z <= 3.0,
                 f"{z:.2f} standard errors", slow=True)


def run_checks(quick: bool = False,
               erfc_impl: Callable[[float], float] = an.erfc) -> List[Check]:
    """Run every check; ``quick`` skips the million-trial Monte Carlo runs."""
    checks = [
        _check_erfc(erfc_impl),
        _check_reflection(erfc_impl),
        _check_ser_shape(),
        _check_qam_forms(),
        _check_neighbors(),
        _check_pep(),
        _check_solver(),
        _check_ml_equivalence(2_000 if quick else 100_000),
    ]
    if not quick:
        checks.append(_check_null_region(1_000_000))
    return checks
