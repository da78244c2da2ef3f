"""Monopoly posted price for a given posterior mean quality.

The normalized price ``pbar = p / q`` solves ``psi(pbar) = c / q`` on the
region where the virtual valuation is positive.  Derivatives of the price
schedule use the ``1 - r'`` parameterisation throughout.
"""

from __future__ import annotations

import csv
import io
from dataclasses import astuple, dataclass, fields
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .dist import EPS, TypeDistribution
from .errors import ConfigError, LemonLensError, NumericalError, RegularityError
from .scenario import MarketScenario

ROOT_TOL = 1e-10
MAX_ITER = 200


@dataclass(frozen=True)
class PricePoint:
    q: float
    p: float
    pbar: float
    pbar1: float
    pbar2: float
    p2: float
    revenue: float


@lru_cache(maxsize=1 << 16)
def normalized_price(dist: TypeDistribution, ratio: float) -> float:
    """Root of ``psi(v) = ratio`` for ``ratio`` in (0, 1)."""
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"cost/quality ratio must lie in (0, 1), got {ratio}")
    lo, hi = dist.psi_zero, 1.0 - EPS
    g = lambda v: dist.virtual_value(v) - ratio
    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo < 0 < g_hi):
        raise RegularityError(
            f"cannot bracket psi(v) = {ratio} on [{lo}, {hi}] for {dist!r}"
        )
    try:
        v = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=MAX_ITER)
    except RuntimeError as exc:
        raise NumericalError(f"price root did not converge: {exc}") from exc
    # Newton polish, kept only when it improves the residual
    for _ in range(2):
        h = dist.hazard_profile(v)
        step = (h.psi - ratio) / h.psi1
        cand = v - step
        if lo < cand < hi and abs(g(cand)) < abs(h.psi - ratio):
            v = cand
        else:
            break
    if abs(g(v)) > ROOT_TOL:
        raise NumericalError(f"price root residual {g(v):.3g} exceeds {ROOT_TOL}")
    return float(v)


def solve_price(s: MarketScenario, q: float) -> PricePoint:
    q = s.check_quality(q)
    c = s.cost
    pbar = normalized_price(s.dist, c / q)
    h = s.dist.hazard_profile(pbar)
    m = h.psi1  # 1 - r'
    p = q * pbar
    return PricePoint(
        q=q,
        p=p,
        pbar=pbar,
        pbar1=-c / (q**2 * m),
        pbar2=h.r2 * c**2 / (q**4 * m**3) + 2 * c / (q**3 * m),
        p2=h.r2 * c**2 / (q**3 * m**3),
        revenue=(p - c) * s.dist.sf(pbar),
    )


def revenue(s: MarketScenario, q: float) -> float:
    return solve_price(s, q).revenue


def price_schedule(s: MarketScenario, grid: int) -> list[PricePoint]:
    """Price points at ``grid + 1`` evenly spaced qualities covering ``[q_lo, q_hi]``."""
    if grid < 1:
        raise ConfigError(f"grid must be >= 1, got {grid}")
    out = []
    for q in np.linspace(s.q_lo, s.q_hi, grid + 1):
        try:
            out.append(solve_price(s, q))
        except LemonLensError as exc:
            raise type(exc)(f"at q={q!r}: {exc}") from exc
    return out


def schedule_to_csv(points: list[PricePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(PricePoint)])
    for pt in points:
        w.writerow([format(x, ".17g") for x in astuple(pt)])
    return buf.getvalue()


def foc_residual(s: MarketScenario, pt: PricePoint) -> float:
    """``1 - F(pbar) - (pbar - c/q) f(pbar)``; zero at an interior optimum."""
    return s.dist.sf(pt.pbar) - (pt.pbar - s.cost / pt.q) * s.dist.pdf(pt.pbar)
