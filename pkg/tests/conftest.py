import os
import re

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", parent=settings.get_profile("default"),
                          max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance criteria append (number, passed, detail) here
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")

    def key(r):
        return int(re.match(r"\d+", r[0]).group()), r[0]

    for num, ok, detail in sorted(ACCEPTANCE_RESULTS, key=key):
        terminalreporter.write_line(
            f"criterion {num:<3}: {'PASS' if ok else 'FAIL'}  {detail}")
