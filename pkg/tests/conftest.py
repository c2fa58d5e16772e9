from __future__ import annotations

import contextlib

import pytest

_RESULTS: dict[int, tuple[str, str, str]] = {}


@contextlib.contextmanager
def _record(number: int, title: str):
    detail = []
    try:
        yield detail
    except BaseException:
        _RESULTS[number] = ("FAIL", title, "; ".join(detail))
        raise
    _RESULTS[number] = ("PASS", title, "; ".join(detail))


@pytest.fixture
def criterion():
    """``with criterion(n, title) as notes:`` records one acceptance outcome."""
    def make(number: int, title: str):
        return _record(number, title)
    return make


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        status, title, detail = _RESULTS[number]
        line = f"[{status}] {number}. {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
