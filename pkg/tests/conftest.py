import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dirac_moutard import scenarios
from dirac_moutard.weierstrass import integrate_surface

settings.register_profile("default", max_examples=50, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion id -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


def record(criterion: str, passed: bool, detail: str = ""):
    prev = ACCEPTANCE.get(criterion)
    ok = passed and (prev is None or prev[0])
    details = detail if prev is None or not prev[1] else f"{prev[1]}; {detail}"
    ACCEPTANCE[criterion] = (ok, details)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=lambda c: int(c[1:])):
        ok, detail = ACCEPTANCE[crit]
        terminalreporter.write_line(f"{crit} {'PASS' if ok else 'FAIL'}  {detail}")


def frame_of(sc):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return integrate_surface(sc.psi, sc.grid, sc.base, sc.x0, U=sc.U)


@pytest.fixture(scope="session")
def sphere():
    return scenarios.sphere_offset(128)


@pytest.fixture(scope="session")
def sphere_frame(sphere):
    return frame_of(sphere)


@pytest.fixture(scope="session")
def plane():
    return scenarios.plane(64)


@pytest.fixture(scope="session")
def plane_frame(plane):
    return frame_of(plane)


@pytest.fixture(scope="session")
def torus():
    return scenarios.torus_of_revolution(128, 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
