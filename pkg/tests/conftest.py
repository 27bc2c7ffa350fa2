"""Shared fixtures; also prints the acceptance summary at the end of the run."""
import pytest

from subml.harness import LinkConfig, run_sweep

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_log():
    """``log(number, ok, detail)`` records one line of the acceptance report."""
    def log(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
    return log


@pytest.fixture(scope="session")
def reference_sweep():
    """16-QAM 2x2, identity channel, target 2 P_min, 1e5 trials per SNR in 0:2:14 dB."""
    cfg = LinkConfig(modulation="qam16", nt=2, nr=2, snr_db=tuple(range(0, 15, 2)),
                     target="pmin-factor:2.0", trials=100_000, seed=2024)
    return cfg, run_sweep(cfg)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])
