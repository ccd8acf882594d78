from __future__ import annotations

from pathlib import Path

import pytest
from acceptance_log import RESULTS

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def sample_html() -> str:
    return (FIXTURES / "sample.html").read_text(encoding="utf-8")


@pytest.fixture
def sample_rules() -> str:
    return (FIXTURES / "sample.evl").read_text(encoding="utf-8")


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(RESULTS, key=lambda s: int(s.split()[0])):
        terminalreporter.write_line(f"[{RESULTS[label]}] criterion {label}")
