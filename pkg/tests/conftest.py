import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_log  # noqa: E402

from triageq import triage  # noqa: E402


@pytest.fixture(scope="session")
def triage_fis():
    return triage.default_triage_fis()


@pytest.fixture(scope="session")
def thresholds():
    return triage.ColourThresholds()


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
