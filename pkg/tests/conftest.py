import sys

import numpy as np
import pytest

from dfcb.coeffs import Coefficients, TimeProfile
from dfcb.seeds import SeedSpec

# the three coefficient pairs used across the residual suites
PROFILE_PAIRS = [
    Coefficients(TimeProfile.constant(1.0), TimeProfile.constant(0.0)),
    Coefficients(TimeProfile.exponential(1.0, 0.1), TimeProfile.sinusoidal(0.2)),
    Coefficients(TimeProfile.linear(0.2, 2.5), TimeProfile.exponential(0.3, -0.4)),
]


def random_seed(rng, kmin=0.1, kmax=2.0) -> SeedSpec:
    k = rng.uniform(kmin, kmax) * rng.choice([-1.0, 1.0])
    return SeedSpec(float(k), *(float(c) for c in rng.uniform(-3, 3, 3)))


def random_seeds(rng, n, kmin=0.1, kmax=2.0, gap=0.05):
    """n seeds whose wavenumbers differ pairwise by at least ``gap``."""
    out = []
    while len(out) < n:
        s = random_seed(rng, kmin, kmax)
        if all(abs(s.k - o.k) >= gap for o in out):
            out.append(s)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=range(len(PROFILE_PAIRS)), ids=["plain", "damped-forced", "linear-exp"])
def coeffs(request):
    return PROFILE_PAIRS[request.param]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
