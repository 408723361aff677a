import pytest

RESULTS: dict = {}


def record(number: int, text: str, passed: bool) -> None:
    RESULTS[number] = (text, passed)


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion for the summary."""

    class _Recorder:
        def __call__(self, number, text, passed):
            record(number, text, passed)
            assert passed, f"criterion {number} failed: {text}"

    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        text, passed = RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {text}")
