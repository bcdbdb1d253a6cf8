import pytest

_CRITERIA: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def criterion():
    """Record one part of an acceptance criterion: ``criterion(number, passed, detail, part="")``."""

    def record(number: int, passed: bool, detail: str, part: str = ""):
        _CRITERIA.setdefault(number, []).append((part, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        parts = _CRITERIA[number]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        details = "; ".join(f"{p + ': ' if p else ''}{'ok' if ok else 'FAILED'} ({d})" for p, ok, d in parts)
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {details}")
