import pytest

_LINES = []


class _Recorder:
    def __call__(self, number, passed, detail, seconds):
        status = "PASS" if passed else "FAIL"
        _LINES.append((number, f"criterion {number:>2}: {status}  {detail}  [{seconds:.2f} s]"))


@pytest.fixture(scope="session")
def record():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
