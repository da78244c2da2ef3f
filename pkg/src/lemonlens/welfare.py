"""Buyer and total surplus per quality, curvature conditions, and the k threshold."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .dist import EPS, TypeDistribution
from .errors import ConfigError, QuadratureError, RegularityError
from .pricing import solve_price
from .scenario import MarketScenario

QUAD_TOL = 1e-12
QUAD_ACCEPT = 1e-9
ZERO_R2 = 1e-12


def _integrate(fn, a: float, b: float, points=None) -> float:
    """Adaptive Gauss-Kronrod on ``[a, b]``.

    Asks for ``QUAD_TOL`` but accepts a flagged result whose error estimate
    is within ``QUAD_ACCEPT`` (integrable endpoint singularities such as
    Beta(1, b < 1) densities trip QUADPACK's roundoff detector).
    """
    if b <= a:
        return 0.0
    out = quad(fn, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=500, points=points, full_output=1)
    val, err = out[0], out[1]
    if len(out) > 3 and not err <= QUAD_ACCEPT:
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {out[3]}")
    return val


def _peak_hint(dist: TypeDistribution, a: float, b: float):
    # give QUADPACK the mode of a peaked density so it is not stepped over
    mean = getattr(dist, "mean", None)
    if isinstance(mean, float) and a < mean < b:
        return [mean]
    return None


def consumer_surplus(s: MarketScenario, q: float) -> float:
    """Expected buyer surplus ``q - p - q * int_{pbar}^1 F(v) dv``."""
    pt = solve_price(s, q)
    a = pt.pbar
    area = _integrate(s.dist.cdf, a, 1.0, _peak_hint(s.dist, a, 1.0))
    return pt.q - pt.p - pt.q * area


def total_surplus(s: MarketScenario, q: float) -> float:
    """Expected gains from trade ``int_{pbar}^1 (v q - c) f(v) dv``.

    Integrated directly against the density rather than assembled from
    ``consumer_surplus + revenue``, so the two routes check each other.
    The substitution ``v = 1 - t**2`` absorbs ``(1 - v)**(-1/2)`` type
    singularities of the density at the top of the support.
    """
    pt = solve_price(s, q)
    c, q = s.cost, pt.q
    dist = s.dist

    def integrand(t):
        v = 1.0 - t * t
        return 2.0 * t * (v * q - c) * dist.density(v)

    top = math.sqrt(1.0 - pt.pbar)
    hint = None
    mean = getattr(dist, "mean", None)
    if isinstance(mean, float) and pt.pbar < mean < 1.0:
        hint = [math.sqrt(1.0 - mean)]
    return _integrate(integrand, 0.0, top, hint)


@dataclass(frozen=True)
class CurvaturePoint:
    q: float
    cs: float
    ts: float
    cs2: float
    ts2: float
    p2: float
    buyer_lhs: float
    total_rhs: float


def curvature(s: MarketScenario, q: float) -> CurvaturePoint:
    pt = solve_price(s, q)
    h = s.dist.hazard_profile(pt.pbar)
    m = h.psi1
    c, q = s.cost, pt.q
    scale = s.dist.pdf(pt.pbar) * c**2 / (q**3 * m**2)
    ratio = h.r * h.r2 / m
    return CurvaturePoint(
        q=q,
        cs=consumer_surplus(s, q),
        ts=total_surplus(s, q),
        cs2=scale * (1.0 - ratio),
        ts2=scale * (2.0 - h.r1 - ratio),
        p2=pt.p2,
        buyer_lhs=h.r * h.r2 + h.r1,
        total_rhs=1.0 + m**2,
    )


@dataclass
class ConditionReport:
    interval: tuple[float, float]
    buyer_holds: bool
    total_holds: bool
    price_direction: str  # decreasing | increasing | linear | mixed
    violations: list[dict] = field(default_factory=list)
    grid: int = 0

    def to_json(self) -> dict:
        return {
            "interval": list(self.interval),
            "buyer_holds": self.buyer_holds,
            "total_holds": self.total_holds,
            "price_direction": self.price_direction,
            "violations": self.violations,
            "grid": self.grid,
        }


def _direction(r2: np.ndarray) -> str:
    if r2.size == 0 or np.all(np.abs(r2) <= ZERO_R2):
        return "linear"
    if np.all(r2 <= ZERO_R2):
        return "decreasing"
    if np.all(r2 >= -ZERO_R2):
        return "increasing"
    return "mixed"


def check_conditions(s: MarketScenario, grid: int = 1000) -> ConditionReport:
    """Evaluate the buyer, total-surplus and price-direction conditions.

    Points are ``v_i = pbar(q_hi) + i * delta`` for ``i = 1 .. grid - 1``, so
    the endpoints of the open interval are excluded.  ``price_direction`` is
    ``decreasing`` when ``r`` is concave there (expected price falls with
    more information), ``increasing`` when convex, ``linear`` when
    ``r'' == 0``.
    """
    if grid < 100:
        raise ConfigError(f"grid must be >= 100, got {grid}")
    lo = solve_price(s, s.q_hi).pbar
    hi = solve_price(s, s.q_lo).pbar
    v = lo + np.arange(1, grid) * (hi - lo) / grid
    v = v[(v > lo) & (v < hi)]
    r, r1, r2 = s.dist.hazard_arrays(v)
    lhs = r * r2 + r1
    rhs = 1.0 + (1.0 - r1) ** 2
    violations = []
    for x, val in zip(v[lhs > 1.0], lhs[lhs > 1.0]):
        violations.append({"condition": "buyer", "v": float(x), "margin": float(val - 1.0)})
    tbad = lhs > rhs
    for x, val, bound in zip(v[tbad], lhs[tbad], rhs[tbad]):
        violations.append({"condition": "total", "v": float(x), "margin": float(val - bound)})
    return ConditionReport(
        interval=(float(lo), float(hi)),
        buyer_holds=not bool(np.any(lhs > 1.0)),
        total_holds=not bool(np.any(tbad)),
        price_direction=_direction(r2),
        violations=violations,
        grid=grid,
    )


@dataclass(frozen=True)
class KResult:
    k: float
    v_dagger: float | None
    resolution: int
    infinite_up_to_resolution: bool

    def to_json(self) -> dict:
        return {
            "k": None if math.isinf(self.k) else self.k,
            "v_dagger": self.v_dagger,
            "resolution": self.resolution,
            "infinite_up_to_resolution": self.infinite_up_to_resolution,
        }


@lru_cache(maxsize=128)
def compute_k(d: TypeDistribution, resolution: int = 100_000) -> KResult:
    """Largest ``alpha`` with ``r r'' + r' <= 1`` wherever ``psi >= 1/alpha``.

    Scans ``resolution`` points of ``{psi > 0}`` for violations.  With none,
    ``k`` is reported as infinite up to that resolution; otherwise the last
    violating cell is refined to locate ``v_dagger = sup S`` and
    ``k = 1 / psi(v_dagger)``.
    """
    if resolution < 10_000:
        raise ConfigError(f"resolution must be >= 1e4, got {resolution}")
    v = np.linspace(d.psi_zero, 1.0 - EPS, resolution + 1)[1:]
    r, r1, r2 = d.hazard_arrays(v)
    bad = (v - r > 0) & (r * r2 + r1 > 1.0)
    if not bad.any():
        return KResult(math.inf, None, resolution, True)
    i = int(np.flatnonzero(bad)[-1])
    if i == v.size - 1:
        raise RegularityError(f"buyer condition fails up to v=1 for {d!r}; F is not regular")
    g = lambda x: d.buyer_lhs(x) - 1.0
    a, b = float(v[i]), float(v[i + 1])
    if g(b) == 0.0:
        vd = b
    else:
        vd = brentq(g, a, b, xtol=1e-12)
    psi = d.virtual_value(vd)
    if not 0.0 < psi < 1.0:
        raise RegularityError(f"psi(v_dagger) = {psi} outside (0, 1)")
    return KResult(1.0 / psi, float(vd), resolution, False)


def sufficient_check(s: MarketScenario, k: KResult | None = None) -> bool:
    """``q_hi <= k * cost``; vacuously true when ``k`` is infinite."""
    if k is None:
        k = compute_k(s.dist)
    return math.isinf(k.k) or s.q_hi <= k.k * s.cost
