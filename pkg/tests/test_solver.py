import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subml import analytics as an
from subml.channel import noise_density
from subml.constellation import VectorConstellation, build_constellation
from subml.errors import Infeasible, NoConvergence, SingularPoint
from subml.solver import (
    Branch,
    SolverConfig,
    g_mimo,
    g_mimo_prime,
    g_siso,
    g_siso_prime,
    siso_curve,
    solve_beta,
    solve_mimo,
    solve_siso,
)

QAM16 = build_constellation("qam", 16)
D16 = QAM16.d_min

# 16-QAM, N0 = 0.1 (10 dB E_s/N0), P = 2 P_min: plain bisection at 40 digits (mpmath)
ROOT_ES10 = 0.11448291761946007


def bisect(f, lo, hi, n=200):
    """Oracle: sign bisection assuming f(lo) > 0 > f(hi)."""
    for _ in range(n):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.fixture
def es10():
    n0 = 0.1
    pmin = siso_curve(QAM16, n0)(D16 / 2)
    return n0, 2 * pmin


class TestObjective:
    def test_zero_at_minimum(self):
        n0 = 0.05
        pmin = siso_curve(QAM16, n0)(D16 / 2)
        assert g_siso(D16 / 2, pmin, 16, D16, n0) == 0.0

    @given(st.floats(0.0, 1.0), st.floats(0.01, 1.0))
    def test_symmetry(self, frac, n0):
        b = frac * D16
        assert g_siso(b, 1e-3, 16, D16, n0) == pytest.approx(g_siso(D16 - b, 1e-3, 16, D16, n0),
                                                             rel=1e-12, abs=1e-15)

    def test_at_zero(self):
        n0, p = 0.1, 1e-3
        expected = 3 / 16 * (an.erfc(D16 / math.sqrt(n0)) + 1) - p
        assert g_siso(0.0, p, 16, D16, n0) == pytest.approx(expected, rel=1e-15)

    def test_accepts_params(self):
        p = an.SisoErrorParams(D16, 0.1, 0.0)
        assert g_siso(0.07, 1e-3, 16, p) == g_siso(0.07, 1e-3, 16, D16, 0.1)

    def test_prime_zero_at_half(self):
        assert g_siso_prime(D16 / 2, 16, D16, 0.1) == pytest.approx(0.0, abs=1e-15)

    def test_prime_at_zero(self):
        n0 = 0.1
        expected = 3 / (2 * 4 * math.sqrt(math.pi * n0)) * (math.exp(-D16 ** 2 / n0) - 1)
        assert g_siso_prime(0.0, 16, D16, n0) == pytest.approx(expected, rel=1e-14)
        assert expected < 0

    @pytest.mark.parametrize("mod", [("bpsk", 2), ("pam", 4), ("qam", 4), ("qam", 16), ("qam", 64)])
    @pytest.mark.parametrize("n0", [0.02, 0.1, 0.5])
    def test_prime_finite_difference(self, mod, n0):
        c = build_constellation(*mod)
        h = 1e-6 * c.d_min
        for frac in np.linspace(0.05, 0.45, 9):
            b = frac * c.d_min
            fd = (g_siso(b + h, 0, c.M, c.d_min, n0, c.scheme)
                  - g_siso(b - h, 0, c.M, c.d_min, n0, c.scheme)) / (2 * h)
            assert g_siso_prime(b, c.M, c.d_min, n0, c.scheme) == pytest.approx(fd, rel=1e-6)


class TestSolveSiso:
    def test_bisection_oracle(self, es10):
        n0, target = es10
        sol = solve_siso(QAM16, n0, target)
        assert sol.converged
        assert 0 < sol.beta < D16 / 2
        assert abs(g_siso(sol.beta, target, 16, D16, n0)) <= 1e-12
        oracle = bisect(lambda b: g_siso(b, target, 16, D16, n0), 0.0, D16 / 2)
        assert sol.beta == pytest.approx(oracle, rel=1e-10)
        assert sol.beta == pytest.approx(ROOT_ES10, rel=1e-10)

    def test_upper_branch_mirrors(self, es10):
        n0, target = es10
        lo = solve_siso(QAM16, n0, target)
        up = solve_siso(QAM16, n0, target, SolverConfig(branch="upper"))
        assert up.branch is Branch.UPPER and up.beta >= D16 / 2
        assert up.beta == pytest.approx(D16 - lo.beta, abs=1e-10)

    @pytest.mark.parametrize("branch", ["lower", "upper"])
    def test_target_at_minimum(self, branch):
        n0 = 0.1
        pmin = siso_curve(QAM16, n0)(D16 / 2)
        sol = solve_siso(QAM16, n0, pmin, SolverConfig(branch=branch))
        assert sol.beta == D16 / 2

    def test_ber_reproduces_target(self, es10):
        n0, target = es10
        sol = solve_siso(QAM16, n0, target)
        ser = an.ser_qam16(an.SisoErrorParams(D16, n0, sol.beta))
        assert abs(an.ser_to_ber(ser, 16) - target) <= 10 * 1e-12

    def test_monotone_in_target(self):
        n0 = noise_density(6.0, QAM16)
        pmin = siso_curve(QAM16, n0)(D16 / 2)
        betas = [solve_siso(QAM16, n0, f * pmin).beta for f in (1.01, 1.2, 1.5, 2, 3, 5, 10)]
        assert np.all(np.diff(betas) < 0)

    @given(st.floats(0.0, 14.0), st.floats(1.05, 20.0),
           st.sampled_from([("bpsk", 2), ("pam", 4), ("qam", 4), ("qam", 16), ("qam", 64)]))
    @settings(max_examples=60, deadline=None)
    def test_invariants(self, snr, factor, mod):
        c = build_constellation(*mod)
        n0 = noise_density(snr, c)
        target = factor * siso_curve(c, n0)(c.d_min / 2)
        try:
            sol = solve_siso(c, n0, target)
        except Infeasible:
            # only legitimate when the target is above the curve at beta = 0
            assert siso_curve(c, n0)(0.0) < target
            return
        assert sol.converged and sol.residual <= 1e-12
        assert 0 < sol.beta <= c.d_min / 2

    def test_infeasible_below_minimum(self):
        with pytest.raises(Infeasible):
            solve_siso(QAM16, 0.1, 1e-99)

    def test_infeasible_above_curve(self):
        with pytest.raises(Infeasible):
            solve_siso(QAM16, 0.1, 0.9)

    def test_no_convergence(self, es10):
        n0, target = es10
        with pytest.raises(NoConvergence) as info:
            solve_siso(QAM16, n0, target, SolverConfig(max_iter=1))
        assert info.value.solution is not None
        assert not info.value.solution.converged

    def test_trace_stays_in_bracket(self, es10):
        n0, target = es10
        sol = solve_siso(QAM16, n0, target)
        assert all(0.0 <= b <= D16 / 2 for b in sol.trace)

    def test_bad_config(self):
        with pytest.raises(ValueError):
            SolverConfig(tol=0)
        with pytest.raises(ValueError):
            SolverConfig(max_iter=0)


class TestGenericSolve:
    def test_newton_recovers_when_derivative_zero(self):
        # derivative returns 0 everywhere: pure bisection must still converge
        g = lambda b: 0.5 - 2 * b
        sol = solve_beta(g, lambda b: 0.0, 1.0, SolverConfig(tol=1e-13), target_p=0.25)
        assert sol.converged
        assert sol.beta == pytest.approx(0.25, abs=1e-12)


@pytest.fixture
def single_pair():
    return an.MimoBoundParams(1, 0.05, [1.0], (2,))


class TestMimo:
    def test_diverges_near_zero(self, single_pair):
        assert g_mimo(1e-8, 0.1, single_pair) > 1e10

    @pytest.mark.parametrize("beta", [0.0, -0.1, 1.0, 1.0 + 1e-10])
    def test_singular(self, single_pair, beta):
        with pytest.raises(SingularPoint):
            g_mimo(beta, 0.1, single_pair)
        with pytest.raises(SingularPoint):
            g_mimo_prime(beta, single_pair)

    @pytest.mark.parametrize("nr", [1, 2, 3])
    def test_prime_finite_difference(self, nr):
        v = VectorConstellation.uniform(build_constellation("qam", 4), 2)
        b = an.MimoBoundParams.from_vector(v, nr, 0.05)
        d = v.d_min
        h = 1e-6 * d
        for frac in np.linspace(0.1, 0.9, 9):
            x = frac * d
            fd = (g_mimo(x + h, 0, b) - g_mimo(x - h, 0, b)) / (2 * h)
            assert g_mimo_prime(x, b) == pytest.approx(fd, rel=1e-6)

    def test_single_pair_bisection(self, single_pair):
        b = single_pair
        c = an.mimo_bound_constant(b)
        target = 3 * c * (1 / (4 * 0.25) + 1 / (4 * 0.25))
        sol = solve_mimo(b, 1.0, target)
        closed = lambda x: c * (1 / (4 * (1 - x) ** 2) + 1 / (4 * x * x)) - target
        oracle = bisect(closed, 1e-9, 0.5)
        assert sol.converged
        assert sol.beta == pytest.approx(oracle, rel=1e-10)
        assert abs(closed(sol.beta)) <= 1e-12

    def test_qam16_two_by_two(self):
        v = VectorConstellation.uniform(QAM16, 2)
        n0 = noise_density(10.0, QAM16)
        b = an.MimoBoundParams.from_vector(v, 2, n0)
        target = 2 * an.union_bound_mimo_shifted(b, v.d_min / 2)
        sol = solve_mimo(b, v.d_min, target)
        assert 0 < sol.beta < v.d_min / 2
        assert abs(g_mimo(sol.beta, target, b)) <= 1e-12
