import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240515)


def amps_of(state, tol=1e-12):
    """Nonzero amplitudes keyed by label tuples (APol, APath, BPol, BPath, BAux)."""
    return state.nonzero(tol)


def assert_same_up_to_phase(a, b, tol=1e-10):
    overlap = abs(np.vdot(np.asarray(a).ravel(), np.asarray(b).ravel()))
    assert abs(overlap - 1.0) < tol, overlap


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
