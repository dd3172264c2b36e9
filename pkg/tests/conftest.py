import pytest
from hypothesis import settings

from asymadmit import AdmittanceParams

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


@pytest.fixture
def table_params():
    """Reference setup: m=0.1 kg, kx=ky=100 N/m, ka=10 N/m, d=0.34 N s/m."""
    return AdmittanceParams.from_values(0.1, 0.34, 100.0, 100.0, 0.0, 10.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
