import numpy as np
import pytest

from hyperwave.space import SpaceParams
from hyperwave.transforms import RadialFunction


@pytest.fixture(params=[2, 3, 4, 5], ids=lambda n: f"n{n}")
def params(request):
    return SpaceParams(request.param)


@pytest.fixture
def h3():
    return SpaceParams(3)


def gaussian(scale=1.0, amplitude=1.0, r_max=8.0):
    return RadialFunction.sample(lambda r: amplitude * np.exp(-r * r / scale), r_max=r_max)


@pytest.fixture
def gauss():
    return gaussian()


ACCEPTANCE = {}


@pytest.fixture
def verdict(request):
    """Record ``(criterion, passed, detail)`` and print a PASS/FAIL line."""

    def record(number, ok, detail=""):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
