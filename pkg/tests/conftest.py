import pytest
from hypothesis import settings

from onerelator.freewords import CyclicWord

# property tests check correctness, not speed; a shared single core makes timings noisy
settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

ACCEPTANCE_LINES: list[str] = []

# worked examples shared by several test modules
MAGNUS_RELATOR = "abABabABABa"
BS12_RELATOR = "baBAA"  # t a t^-1 a^-2 with t = b
HULL_BAD = "cBacaCBcacABaaBc"
HULL_REPAIRED = "cBacaCBcacABBcbCaaBc"


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def check(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def cyc(text: str, rank: int) -> CyclicWord:
    return CyclicWord.parse(text, rank)
