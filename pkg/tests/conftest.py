import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import pytest

_criteria = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion: criterion(number, title, ok, detail)."""
    results = request.config.stash.setdefault(_criteria, {})

    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {title}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
        results[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_criteria, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
