import numpy as np
import pytest

from otdistill.core import validate_distribution


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_distribution(rng, n, d, uniform=False, scale=1.0):
    pts = scale * rng.standard_normal((n, d))
    w = None if uniform else rng.dirichlet(np.ones(n))
    return validate_distribution(pts, w)


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
