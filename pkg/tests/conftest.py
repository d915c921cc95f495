import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

ACCEPTANCE_LINES = []


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion, printed at session end."""

    def record(number, title, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] AC{number:02d} {title}" + (f" ({detail})" if detail else ""))
        assert ok, f"AC{number} {title}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
