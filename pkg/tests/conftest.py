import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from avtestgen.gridworld import GridConfig  # noqa: E402

# Filled by test_acceptance; printed at the end of the session.
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def grid():
    return GridConfig()


@pytest.fixture(scope="session")
def narrow_grid():
    """Zones on the AV footprint columns only."""
    return GridConfig(zone_spans_lane=False)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
