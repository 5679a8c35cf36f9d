import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from heightdist.zpoly import IntPolynomial

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# Filled by tests/test_acceptance.py, printed at the end of the run.
ACCEPTANCE_LINES: dict[str, list[str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.split(".")[0]), k)):
        for line in ACCEPTANCE_LINES[key]:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_int_poly(rng, degree, bound=9, monic=False):
    c = [int(v) for v in rng.integers(-bound, bound + 1, degree + 1)]
    if c[-1] == 0 or monic:
        c[-1] = 1 if monic else int(rng.choice([-1, 1])) * int(rng.integers(1, bound + 1))
    return IntPolynomial(tuple(c))
