import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA = []


@pytest.fixture
def criterion():
    """Log one PASS/FAIL line for an acceptance criterion."""

    def log(name, passed, seconds, detail=""):
        line = f"{'PASS' if passed else 'FAIL'}  {name}  ({seconds:.1f}s)"
        if detail:
            line += f"  {detail}"
        _CRITERIA.append(line)
        print(line)
        return passed

    return log


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
