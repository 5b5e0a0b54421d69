import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nonlocality.correlations import make_rng

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

TOL_ALG = 1e-9
TOL_OPT = 1e-6


@pytest.fixture
def rng():
    return make_rng(20240601)


def binomial_sigma(p: float, runs: int) -> float:
    return float(np.sqrt(p * (1 - p) / runs))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in sorted(mod.RESULTS.items()):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
