import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=15, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


_VERDICTS = "_acceptance_verdicts"


@pytest.fixture
def criterion(request):
    """Record and print a one-line verdict for an acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
        print(line)
        getattr(request.config, _VERDICTS).append((number, line))
        return ok

    return record


def pytest_configure(config):
    setattr(config, _VERDICTS, [])


def pytest_terminal_summary(terminalreporter, config):
    verdicts = getattr(config, _VERDICTS, [])
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(verdicts):
            terminalreporter.write_line(line)
