import math

import numpy as np
import pytest
from hypothesis import settings
from scipy import stats

from lemonlens.dist import BUILTIN, Beta, TruncatedNormal, Uniform
from lemonlens.scenario import MarketScenario

# fixed example stream so repeated runs report identical results
settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")

PEAKED = TruncatedNormal(0.5, math.sqrt(0.001))

# families used by the information-side criteria
CORE = {
    "uniform": Uniform(),
    "beta(2,2)": Beta(2, 2),
    "beta(3,3)": Beta(3, 3),
    "truncnorm(0.5,0.1)": TruncatedNormal(0.5, 0.1),
    "truncnorm(0.5,sqrt0.001)": PEAKED,
}


def scipy_law(d):
    """Independent scipy.stats twin of a builtin family, for oracles."""
    if isinstance(d, Uniform):
        return stats.uniform()
    if isinstance(d, Beta):
        return stats.beta(d.alpha, d.beta)
    if isinstance(d, TruncatedNormal):
        return stats.truncnorm(-d.mean / d.sd, (1 - d.mean) / d.sd, loc=d.mean, scale=d.sd)
    raise TypeError(d)


def random_scenario(d, rng):
    q_lo = rng.uniform(1.0, 5.0)
    q_hi = q_lo * rng.uniform(1.2, 4.0)
    cost = q_lo * rng.uniform(0.05, 0.95)
    return MarketScenario(q_lo, q_hi, cost, d)


@pytest.fixture(params=sorted(BUILTIN), ids=str)
def builtin(request):
    return BUILTIN[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
