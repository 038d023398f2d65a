import pytest

from sglab import _kernels

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(params=_kernels.available_backends())
def kernel_backend(request):
    """Run the test once per available kernel backend."""
    previous = _kernels.use_backend(request.param)
    yield request.param
    _kernels.use_backend(previous)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
