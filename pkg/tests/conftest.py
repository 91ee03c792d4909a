import os

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")

_LINES = []


@pytest.fixture
def report_line():
    """Record a one-line summary that is printed at the end of the run."""
    def add(line):
        print(line)
        _LINES.append(line)
    return add


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("XIDEFORM_CACHE_DIR", os.fspath(tmp_path / "cache"))


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
