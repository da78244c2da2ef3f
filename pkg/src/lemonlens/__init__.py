"""Posted pricing and welfare under partially informed sellers."""

from .dist import (
    Beta,
    HazardProfile,
    Tabulated,
    TruncatedNormal,
    TypeDistribution,
    Uniform,
    check_regular,
    check_weak_regularity,
    from_spec,
)
from .errors import (
    ConfigError,
    DegenerateError,
    DomainError,
    LemonLensError,
    NumericalError,
    QuadratureError,
    RegularityError,
)
from .info import (
    InfoStructure,
    disclosure_equilibria,
    expected_welfare,
    garble_chain,
    is_mps,
    persuasion_check,
    posterior_means,
)
from .pricing import PricePoint, price_schedule, revenue, solve_price
from .scenario import MarketScenario, PosteriorMeanDistribution
from .welfare import (
    check_conditions,
    compute_k,
    consumer_surplus,
    curvature,
    sufficient_check,
    total_surplus,
)

__version__ = "0.1.0"
