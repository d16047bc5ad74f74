import numpy as np
import pytest

from lyapquant import make_scalar_field, make_vector_field
from lyapquant.levelset import Grid, build_sequence, extract_level_component


@pytest.fixture(scope="session")
def F_circle():
    return make_scalar_field("x^2 + y^2", 2)


@pytest.fixture(scope="session")
def grid2():
    return Grid.cube(2.0, 256, 2)


@pytest.fixture(scope="session")
def unit_circle(F_circle, grid2):
    return extract_level_component(F_circle, 1.0, grid2)


@pytest.fixture(scope="session")
def circle_seq(F_circle, grid2):
    return build_sequence(F_circle, grid2, 8, 0.5)


@pytest.fixture(scope="session")
def fields():
    return {
        "sink": make_vector_field(["-x", "-y"], 2),
        "rotation": make_vector_field(["y", "-x"], 2),
        "source": make_vector_field(["x", "y"], 2),
        "spiral": make_vector_field(["-y - x*(x^2 + y^2)", "x - y*(x^2 + y^2)"], 2),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results, key=lambda k: (int(k.rstrip("ab")), k)):
        terminalreporter.write_line(results[key])
