import math

import numpy as np
import pytest

from ocarydberg import config as cfgmod

# One (criterion, ok, detail) entry per acceptance check, echoed in the
# terminal summary so the verdicts appear even with output capture on.
ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record and print a PASS/FAIL line, then assert on it."""

    def _verdict(number, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {name} -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _verdict


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def short_config():
    """Default scenario cut to 16 s so end-to-end tests stay quick."""
    cfg = cfgmod.default_config()
    cfg.acquisition.duration = 16.0
    return cfg


@pytest.fixture
def scaled_drive():
    """Kilohertz-range parameter set that a T/200 RK4 step resolves."""
    from ocarydberg.dynamics import DriveProfile
    return DriveProfile(omega_p=2 * math.pi * 2e3, omega_c0=2 * math.pi * 5e3,
                        f_chop=1e3, gamma_e=5e4, gamma_r=1e4)
