import math

import numpy as np
import pytest

from cylbem.boundary import Boundary, ClosedCurve, discretize
from cylbem.greens import GreenKernel
from cylbem.layerops import assemble
from cylbem.model import CylinderModel, build_model, strip_config
from cylbem.spectrum import eigensystem

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[1].split()[0])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def unit_model():
    return CylinderModel()


@pytest.fixture(scope="session")
def unit_spec(unit_model):
    return eigensystem(unit_model)


@pytest.fixture(scope="session")
def gk1(unit_spec):
    """Green kernel for V = 1 on the circle of length 2 pi."""
    return GreenKernel(unit_spec)


@pytest.fixture(scope="session")
def circle():
    return ClosedCurve.circle((0.0, math.pi), 0.5)


@pytest.fixture(scope="session")
def circle_ops(gk1, circle):
    return assemble(gk1, discretize(circle, 256))


@pytest.fixture(scope="session")
def circle_ops_128(gk1, circle):
    return assemble(gk1, discretize(circle, 128))


@pytest.fixture(scope="session")
def strip():
    model, region = build_model(strip_config())
    spec = eigensystem(model)
    return model, region, spec, GreenKernel(spec)


@pytest.fixture(scope="session")
def strip_ops(strip):
    model, region, spec, gk = strip
    bd = Boundary([discretize(c, 0.5, 20.0, decay_rate=gk.tail_bound_rate) for c in region.curves])
    return assemble(gk, bd)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
