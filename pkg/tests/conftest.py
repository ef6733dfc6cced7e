import sys

import pytest

from ahdcov import make_model


@pytest.fixture
def sspm():
    return make_model([4.0])


@pytest.fixture
def dspm():
    return make_model([1.5, 4.0], [10.0])


@pytest.fixture
def mspm3():
    return make_model([1.5, 3.0, 4.5], [10.0, 50.0])


def pytest_terminal_summary(terminalreporter):
    lines = []
    for module in list(sys.modules.values()):
        if getattr(module, "__name__", "").endswith("test_acceptance"):
            lines.extend(getattr(module, "LINES", []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
