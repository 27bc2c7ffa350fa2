"""Early-exit maximum-likelihood detection with a relaxed BER target.

The detector accepts the first candidate whose distance to the received
vector is below a threshold ``beta``; ``beta`` is obtained by inverting a
closed-form error-probability curve so that a chosen (sub-optimal) BER is
met.  See the README for the command-line tool.
"""

__version__ = "0.1.0"

from .constellation import Constellation, Scheme, VectorConstellation, build_constellation
from .solver import BetaSolution, Branch, SolverConfig, solve_beta, solve_siso, solve_mimo
from .harness import LinkConfig, SweepPoint, TargetRule, run_ber_sweep, run_complexity_sweep

__all__ = [
    "Constellation", "Scheme", "VectorConstellation", "build_constellation",
    "BetaSolution", "Branch", "SolverConfig", "solve_beta", "solve_siso", "solve_mimo",
    "LinkConfig", "SweepPoint", "TargetRule", "run_ber_sweep", "run_complexity_sweep",
]
