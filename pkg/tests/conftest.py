import pytest

from cuspcorr import forms

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def delta():
    return forms.build_delta(30000)


@pytest.fixture(scope="session")
def weight16():
    return forms.build_form(16, 2000)


@pytest.fixture
def criterion():
    """Call with (number, ok, detail); the line is printed now and again in the summary."""

    def report(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
