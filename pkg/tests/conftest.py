import random

import pytest
from hypothesis import HealthCheck, settings

from dosnsim.core import random_history

from .helpers import ACCEPTANCE

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def history_for():
    def make(seed, gtype, **kw):
        return random_history(random.Random(seed), gtype, **kw)
    return make
