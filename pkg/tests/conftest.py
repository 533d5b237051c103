import pytest

N_CRITERIA = 9
_results = {}
_selected = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion: ``criterion(n, checks)``.

    ``checks`` is a list of ``(label, passed, value)``; the criterion passes
    when every check does.  Returns the overall verdict.
    """
    def record(number, checks):
        passed = all(bool(ok) for _, ok, _ in checks)
        detail = "; ".join(f"{label}={value}{'' if ok else ' (x)'}"
                           for label, ok, value in checks)
        _results[number] = (passed, detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed
    return record


def pytest_runtest_setup(item):
    if item.get_closest_marker("acceptance"):
        _selected.append(item)


def pytest_terminal_summary(terminalreporter):
    if not _selected:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        if n in _results:
            passed, detail = _results[n]
            terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}")
        elif any(f"criterion_{n}_" in item.name for item in _selected):
            terminalreporter.write_line(f"criterion {n}: FAIL  (no result recorded)")
