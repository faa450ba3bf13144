import numpy as np
import pytest

from ngmres import StoppingCriterion, make_problem

# (name, passed) pairs registered by the acceptance tests; echoed as a
# terminal section so the verdicts survive output capture
ACCEPTANCE_VERDICTS = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for name, ok in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")


@pytest.fixture(scope="session")
def contractive2d():
    """Contractive quadratic problem: ||q'(x*)|| = 2/5."""
    return make_problem("quadratic2d", c1=4.0 / 5.0, c2=2.0 / 3.0)


@pytest.fixture(scope="session")
def borderline2d():
    """Borderline quadratic problem: ||q'(x*)|| = 1/2."""
    return make_problem("quadratic2d", c1=1.0, c2=1.0)


@pytest.fixture(scope="session")
def noncontractive2d():
    """Noncontractive quadratic problem: ||q'(x*)|| = 1."""
    return make_problem("quadratic2d", c1=1.0, c2=2.0)


@pytest.fixture(scope="session")
def trig100():
    return make_problem("trigonometric", s=100)


@pytest.fixture(scope="session")
def stop14():
    """Benchmark stopping rule: ||r|| <= 1e-14, at most 300 iterations."""
    return StoppingCriterion(tol=1e-14, max_iters=300, divergence_cap=1e8)


@pytest.fixture(scope="session")
def x0_bench():
    return np.array([-0.25, 0.25])
