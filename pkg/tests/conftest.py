from __future__ import annotations

from contextlib import contextmanager

import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion.

    Usage: ``with criterion(3, "monoidality") as note: ...``; ``note`` is a
    dict whose items are appended to the line.
    """

    @contextmanager
    def run(number: int, title: str):
        note: dict = {}
        try:
            yield note
        except BaseException as exc:
            note.setdefault("error", type(exc).__name__)
            _emit("FAIL", number, title, note)
            raise
        _emit("PASS", number, title, note)

    return run


def _emit(status, number, title, note):
    detail = " ".join(f"{k}={v}" for k, v in note.items())
    line = f"{status} criterion {number:2d} {title}" + (f" ({detail})" if detail else "")
    _LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
