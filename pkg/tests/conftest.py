import os
import tempfile

import numpy as np
import pytest

# keep the eigenvalue cache out of the user's home during tests
os.environ.setdefault("ROSENLAB_CACHE_DIR", tempfile.mkdtemp(prefix="rosenlab-cache-"))

from rosenlab import simulate  # noqa: E402


@pytest.fixture(scope="session")
def paths07():
    """Shared moderate ensemble at H = 0.7."""
    return simulate.sample_paths(0.7, 2 ** 13, 60, seed=2024)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_lines():
    """Collector for the per-criterion lines shown in the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
