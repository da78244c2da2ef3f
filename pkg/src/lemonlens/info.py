"""Finite information structures, mean-preserving spreads and disclosure.

Qualities live on finite grids, so Bayes updating and the spread order are
exact up to floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ConfigError, DegenerateError
from .pricing import solve_price
from .scenario import MarketScenario, PosteriorMeanDistribution
from .welfare import consumer_surplus, total_surplus

ROW_TOL = 1e-12
MPS_SLACK = 1e-12
MEAN_TOL = 1e-9
REV_TOL = 1e-12
MAX_SIGNALS = 12
WITHHOLD = "∅"  # message sent on non-disclosure


@dataclass(frozen=True)
class InfoStructure:
    """Channel ``pi(x | q)``: one row per quality, one column per signal."""

    qualities: tuple[float, ...]
    prior: tuple[float, ...]
    signals: tuple[str, ...]
    channel: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        n, m = len(self.qualities), len(self.signals)
        if n == 0 or m == 0:
            raise ConfigError("need at least one quality and one signal")
        if len(self.prior) != n or len(self.channel) != n:
            raise ConfigError("prior and channel must have one entry per quality")
        if len(set(self.signals)) != m:
            raise ConfigError("signal labels must be unique")
        if any(w < 0 for w in self.prior) or abs(math.fsum(self.prior) - 1.0) > ROW_TOL:
            raise ConfigError("prior must be a probability vector")
        for row in self.channel:
            if len(row) != m:
                raise ConfigError("each channel row needs one entry per signal")
            if any(x < 0 for x in row) or abs(math.fsum(row) - 1.0) > ROW_TOL:
                raise ConfigError(f"channel row {row} is not a probability vector")

    @classmethod
    def from_json(cls, data: dict) -> "InfoStructure":
        extra = set(data) - {"qualities", "prior", "signals", "channel"}
        if extra:
            raise ConfigError(f"unknown keys in info structure: {sorted(extra)}")
        try:
            return cls(
                tuple(float(q) for q in data["qualities"]),
                tuple(float(w) for w in data["prior"]),
                tuple(str(x) for x in data["signals"]),
                tuple(tuple(float(p) for p in row) for row in data["channel"]),
            )
        except KeyError as exc:
            raise ConfigError(f"info structure missing key {exc}") from None

    @classmethod
    def full_revelation(cls, qualities: Sequence[float], prior: Sequence[float]):
        n = len(qualities)
        eye = tuple(tuple(1.0 if i == j else 0.0 for j in range(n)) for i in range(n))
        return cls(tuple(qualities), tuple(prior), tuple(f"x{i}" for i in range(n)), eye)

    @classmethod
    def uninformative(cls, qualities: Sequence[float], prior: Sequence[float]):
        return cls(tuple(qualities), tuple(prior), ("x0",), tuple((1.0,) for _ in qualities))

    @property
    def prior_mean(self) -> float:
        return math.fsum(q * w for q, w in zip(self.qualities, self.prior))


def signal_posteriors(info: InfoStructure) -> list[tuple[str, float, float]]:
    """``(label, probability, posterior mean)`` for every positive-probability signal."""
    q = np.array(info.qualities)
    w = np.array(info.prior)
    pi = np.array(info.channel)
    joint = w[:, None] * pi
    marg = joint.sum(axis=0)
    out = []
    for j, label in enumerate(info.signals):
        if marg[j] > 0:
            out.append((label, float(marg[j]), float(joint[:, j] @ q / marg[j])))
    if not out:
        raise DegenerateError("every signal has zero probability")
    return out


def posterior_means(info: InfoStructure) -> PosteriorMeanDistribution:
    post = signal_posteriors(info)
    return PosteriorMeanDistribution.from_pairs(((m, p) for _, p, m in post), normalize=True)


def _integrated_cdf(mu: PosteriorMeanDistribution, x: np.ndarray) -> np.ndarray:
    # int_{-inf}^x G(t) dt = E[(x - Q)^+]
    return np.maximum(x[:, None] - mu.qualities[None, :], 0.0) @ mu.weights


def is_mps(spread: PosteriorMeanDistribution, contraction: PosteriorMeanDistribution) -> bool:
    """True iff ``spread`` is a mean-preserving spread of ``contraction``.

    Both integrated CDFs are piecewise linear with kinks at the atoms, so
    comparing them at the union of atoms is exact.
    """
    if abs(spread.mean - contraction.mean) > MEAN_TOL:
        return False
    x = np.union1d(spread.qualities, contraction.qualities)
    gap = _integrated_cdf(spread, x) - _integrated_cdf(contraction, x)
    return bool(np.all(gap >= -MPS_SLACK))


def pool_adjacent(mu: PosteriorMeanDistribution, i: int) -> PosteriorMeanDistribution:
    """Merge atoms ``i`` and ``i + 1`` at their conditional mean."""
    (qa, wa), (qb, wb) = mu.atoms[i], mu.atoms[i + 1]
    w = wa + wb
    atoms = mu.atoms[:i] + (((qa * wa + qb * wb) / w, w),) + mu.atoms[i + 2 :]
    return PosteriorMeanDistribution(atoms)


def garble_chain(
    prior: PosteriorMeanDistribution, steps: int, seed: int | None = None
) -> list[PosteriorMeanDistribution]:
    """Blackwell-ordered chain, most informative first.

    Each step pools a randomly chosen adjacent pair of atoms.
    """
    n = len(prior)
    if n < 2:
        raise ConfigError("garble_chain needs a prior with at least two atoms")
    if not 1 <= steps <= n - 1:
        raise ConfigError(f"steps must lie in [1, {n - 1}], got {steps}")
    rng = np.random.default_rng(seed)
    chain = [prior]
    for _ in range(steps):
        cur = chain[-1]
        chain.append(pool_adjacent(cur, int(rng.integers(len(cur) - 1))))
    return chain


@dataclass(frozen=True)
class WelfareTotals:
    e_rev: float
    e_cs: float
    e_ts: float
    e_price: float


@lru_cache(maxsize=1 << 16)
def _point_welfare(s: MarketScenario, q: float) -> WelfareTotals:
    pt = solve_price(s, q)
    return WelfareTotals(pt.revenue, consumer_surplus(s, q), total_surplus(s, q), pt.p)


def expected_revenue(s: MarketScenario, mu: PosteriorMeanDistribution) -> float:
    return math.fsum(w * solve_price(s, q).revenue for q, w in mu.atoms)


def expected_welfare(s: MarketScenario, mu: PosteriorMeanDistribution) -> WelfareTotals:
    pts = [(w, _point_welfare(s, q)) for q, w in mu.atoms]
    return WelfareTotals(
        e_rev=math.fsum(w * p.e_rev for w, p in pts),
        e_cs=math.fsum(w * p.e_cs for w, p in pts),
        e_ts=math.fsum(w * p.e_ts for w, p in pts),
        e_price=math.fsum(w * p.e_price for w, p in pts),
    )


def garble(mu: PosteriorMeanDistribution, kernel: np.ndarray) -> PosteriorMeanDistribution:
    """Posterior means after sending atom ``i`` to message ``y`` w.p. ``kernel[i, y]``."""
    joint = mu.weights[:, None] * kernel
    marg = joint.sum(axis=0)
    keep = marg > 0
    means = (joint.T @ mu.qualities)[keep] / marg[keep]
    return PosteriorMeanDistribution.from_pairs(zip(means, marg[keep]), normalize=True)


def random_contraction(mu: PosteriorMeanDistribution, rng: np.random.Generator):
    n = len(mu)
    m = int(rng.integers(1, n + 1))
    if rng.random() < 0.5:
        kernel = np.zeros((n, m))
        kernel[np.arange(n), rng.integers(m, size=n)] = 1.0
    else:
        kernel = rng.dirichlet(np.ones(m), size=n)
    return garble(mu, kernel)


@dataclass(frozen=True)
class PersuasionResult:
    optimal_is_full: bool
    max_gap: float
    samples: int
    identical: int


def persuasion_check(
    s: MarketScenario, muS: PosteriorMeanDistribution, contractions: int = 200, seed: int | None = None
) -> PersuasionResult:
    """Compare seller revenue under ``muS`` with random garblings of it.

    ``max_gap`` is the largest ``E[rev | contraction] - E[rev | muS]`` over
    samples that differ from ``muS``; full disclosure is optimal when every
    such gap is strictly negative.
    """
    if muS.is_degenerate:
        return PersuasionResult(True, 0.0, 0, 0)
    rng = np.random.default_rng(seed)
    base = expected_revenue(s, muS)
    ok = True
    max_gap = -math.inf
    identical = 0
    for _ in range(contractions):
        mu = random_contraction(muS, rng)
        gap = expected_revenue(s, mu) - base
        if mu.close_to(muS):
            identical += 1
            ok &= gap <= REV_TOL
            continue
        ok &= gap < -REV_TOL
        max_gap = max(max_gap, gap)
    return PersuasionResult(ok, max_gap if max_gap > -math.inf else 0.0, contractions, identical)


@dataclass(frozen=True)
class DisclosureEquilibrium:
    strategy: dict[str, str]
    posterior_means: dict[str, float]
    off_path_belief: float | None
    induced: PosteriorMeanDistribution


def disclosure_equilibria(s: MarketScenario, info: InfoStructure) -> list[DisclosureEquilibrium]:
    """All pure disclose/withhold equilibria, by enumeration of ``2**|X|`` strategies.

    An empty withhold set leaves non-disclosure off path; the buyer then
    believes quality is ``q_lo``.
    """
    post = signal_posteriors(info)
    n = len(post)
    if n > MAX_SIGNALS:
        raise ConfigError(f"at most {MAX_SIGNALS} signals can be enumerated, got {n}")
    rev = {m: solve_price(s, m).revenue for _, _, m in post}
    out = []
    for mask in range(1 << n):
        withheld = [post[i] for i in range(n) if mask >> i & 1]
        disclosed = [post[i] for i in range(n) if not mask >> i & 1]
        if withheld:
            pw = math.fsum(p for _, p, _ in withheld)
            pooled = math.fsum(p * m for _, p, m in withheld) / pw
            off_path = None
        else:
            pw, pooled, off_path = 0.0, s.q_lo, s.q_lo
        r_pool = solve_price(s, pooled).revenue
        if any(rev[m] < r_pool - REV_TOL for _, _, m in disclosed):
            continue
        if any(r_pool < rev[m] - REV_TOL for _, _, m in withheld):
            continue
        pairs = [(m, p) for _, p, m in disclosed]
        if withheld:
            pairs.append((pooled, pw))
        out.append(
            DisclosureEquilibrium(
                strategy={x: ("withhold" if mask >> i & 1 else "disclose") for i, (x, _, _) in enumerate(post)},
                posterior_means={**{x: m for x, _, m in disclosed}, WITHHOLD: pooled},
                off_path_belief=off_path,
                induced=PosteriorMeanDistribution.from_pairs(pairs, normalize=True),
            )
        )
    return out


def unraveling_holds(s: MarketScenario, info: InfoStructure) -> bool:
    """Equilibria exist and every one reproduces the seller's posterior-mean distribution."""
    eqs = disclosure_equilibria(s, info)
    target = posterior_means(info)
    return bool(eqs) and all(e.induced.close_to(target) for e in eqs)
