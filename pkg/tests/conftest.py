import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dddkit.dataset_io import named_profile, synth_dataset  # noqa: E402


@pytest.fixture(scope="session")
def separable_sessions():
    return synth_dataset(named_profile("separable"), 4, seed=0)


@pytest.fixture(scope="session")
def small_sessions():
    return synth_dataset(named_profile("separable", duration=240.0), 2, seed=5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(name, ok, detail, status=None)``."""
    def record(name, ok, detail="", status=None):
        status = status or ("PASS" if ok else "FAIL")
        line = f"[{status}] {name}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
