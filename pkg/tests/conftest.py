from pathlib import Path

import pytest

from sdskit import _backend

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = Path(__file__).resolve().parent / "fixtures"
CONFIGS = ROOT / "examples_configs"

BACKEND_NAMES = sorted(_backend.BACKENDS)


@pytest.fixture(params=BACKEND_NAMES)
def backend(request):
    return request.param


@pytest.fixture
def fixture_trace_text():
    return (FIXTURES / "sphere1d_trace.json").read_text()


# -- acceptance reporting ---------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
