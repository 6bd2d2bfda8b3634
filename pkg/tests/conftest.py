import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from psr.cubic import CubicForm, StandardFormPoly, monomials
from psr.hyperbolicity import MAX_BOUND, sphere_max

settings.register_profile(
    "psr",
    deadline=None,
    derandomize=True,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("psr")

K = MAX_BOUND
SQ3 = math.sqrt(3.0)


def random_p3(rng, n):
    mons = monomials(n)
    return CubicForm.from_vector(n, rng.standard_normal(len(mons)))


def random_regular(rng, n, margin=0.02, low=0.05):
    """A standard form whose sphere maximum is uniform in ``[low, bound - margin]``."""
    p3 = random_p3(rng, n)
    top = sphere_max(p3).max_value
    target = rng.uniform(low, MAX_BOUND - margin)
    return StandardFormPoly(n, p3 * (target / top))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance report ------------------------------------------------------------

ACCEPTANCE = {}


def record(k, ok, detail):
    line = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[k] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
