import numpy as np
import pytest

from ebzip import CompressorConfig, DataGrid, ErrorBoundSpec
from ebzip.codec import compress, decompress

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_recorder():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter, exitstatus):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger kernel compilation once so timed tests see steady state."""
    rng = np.random.default_rng(0)
    for dtype in (np.float32, np.float64):
        grid = DataGrid((8, 4), rng.standard_normal(32).astype(dtype))
        outcome = compress(grid, CompressorConfig(bound=ErrorBoundSpec(absolute=0.1)))
        decompress(outcome.stream)
