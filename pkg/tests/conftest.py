import math

import numpy as np
import pytest

from oval_billiards import Circle, CosineRadius, ConstantLine, Ellipse, EllipseLevel, solve_beta0

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        num, text = mark.args
        prev = _results.get((num, text), "PASS")
        now = "PASS" if rep.outcome == "passed" else "FAIL"
        _results[(num, text)] = "FAIL" if "FAIL" in (prev, now) else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for (num, text), status in sorted(_results.items()):
        terminalreporter.write_line(f"criterion {num:>2}: {status}  {text}")


@pytest.fixture(scope="session")
def circle():
    return Circle(1.0)


@pytest.fixture(scope="session")
def ellipse():
    return Ellipse(0.35)


@pytest.fixture(scope="session")
def level():
    return EllipseLevel(0.25, 0.35)


@pytest.fixture(scope="session")
def gamma6():
    return CosineRadius(0.01, 6)


@pytest.fixture(scope="session")
def beta0():
    return solve_beta0(6)


@pytest.fixture(scope="session")
def line6(beta0):
    return ConstantLine(beta0)


@pytest.fixture(scope="session")
def tables():
    return {"circle": Circle(1.0), "ellipse": Ellipse(0.35), "cosine": CosineRadius(0.01, 6)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
