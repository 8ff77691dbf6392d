from __future__ import annotations

import time
from contextlib import contextmanager

import pytest

_LINES: list[str] = []


class _Note:
    def __init__(self) -> None:
        self.parts: list[str] = []

    def __call__(self, text: str) -> None:
        self.parts.append(text)


@pytest.fixture
def criterion():
    """Context manager that records one PASS/FAIL line per acceptance criterion."""

    @contextmanager
    def run(number: int, title: str):
        note = _Note()
        start = time.perf_counter()
        status = "FAIL"
        try:
            yield note
            status = "PASS"
        finally:
            elapsed = time.perf_counter() - start
            detail = "; ".join(note.parts)
            line = f"criterion {number:>2} {status}  {title} ({elapsed:.2f} s)" + (f": {detail}" if detail else "")
            _LINES.append(line)
            print(line)

    return run


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
