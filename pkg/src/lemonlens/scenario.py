"""Market primitives shared by pricing, welfare and information modules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .dist import TypeDistribution
from .errors import ConfigError, DomainError

MERGE_TOL = 1e-9
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class PosteriorMeanDistribution:
    """Finite distribution of posterior mean qualities.

    Build with :meth:`from_pairs`, which sorts atoms, drops zero weights and
    merges means closer than ``MERGE_TOL``.
    """

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ConfigError("distribution needs at least one atom")
        qs = [q for q, _ in self.atoms]
        ws = [w for _, w in self.atoms]
        if any(w <= 0 for w in ws):
            raise ConfigError("atom weights must be positive")
        if abs(math.fsum(ws) - 1.0) > WEIGHT_TOL:
            raise ConfigError(f"atom weights sum to {math.fsum(ws)!r}, not 1")
        if any(b <= a for a, b in zip(qs, qs[1:])):
            raise ConfigError("atoms must be strictly increasing in quality")

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[tuple[float, float]], *, normalize: bool = False
    ) -> "PosteriorMeanDistribution":
        items = sorted((float(q), float(w)) for q, w in pairs if w > 0)
        if not items:
            raise ConfigError("distribution needs at least one positive weight")
        merged: list[list[float]] = []
        for q, w in items:
            if merged and q - merged[-1][0] <= MERGE_TOL:
                # weight-averaged location keeps the mean exact
                mq, mw = merged[-1]
                merged[-1] = [(mq * mw + q * w) / (mw + w), mw + w]
            else:
                merged.append([q, w])
        total = math.fsum(w for _, w in merged)
        if not normalize and abs(total - 1.0) > WEIGHT_TOL:
            raise ConfigError(f"atom weights sum to {total!r}, not 1")
        return cls(tuple((q, w / total) for q, w in merged))

    @classmethod
    def point(cls, q: float) -> "PosteriorMeanDistribution":
        return cls(((float(q), 1.0),))

    @cached_property
    def qualities(self) -> np.ndarray:
        return np.array([q for q, _ in self.atoms])

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    @cached_property
    def mean(self) -> float:
        return math.fsum(q * w for q, w in self.atoms)

    @property
    def is_degenerate(self) -> bool:
        return len(self.atoms) == 1

    def __len__(self) -> int:
        return len(self.atoms)

    def close_to(self, other: "PosteriorMeanDistribution", tol: float = MERGE_TOL) -> bool:
        if len(self) != len(other):
            return False
        return all(
            abs(a - c) <= tol and abs(b - d) <= tol
            for (a, b), (c, d) in zip(self.atoms, other.atoms)
        )


@dataclass(frozen=True)
class MarketScenario:
    """Quality interval, seller cost, prior over quality and buyer-type law.

    ``q_lo == q_hi`` is accepted as the degenerate singleton case.
    """

    q_lo: float
    q_hi: float
    cost: float
    dist: TypeDistribution
    prior: PosteriorMeanDistribution | None = None

    def __post_init__(self):
        if not 0 < self.q_lo <= self.q_hi < math.inf:
            raise ConfigError(f"need 0 < q_lo <= q_hi < inf, got [{self.q_lo}, {self.q_hi}]")
        if not 0 < self.cost < self.q_lo:
            raise ConfigError(
                f"need 0 < cost < q_lo (c < q_l), got cost={self.cost}, q_lo={self.q_lo}"
            )
        if self.prior is not None:
            lo, hi = self.prior.atoms[0][0], self.prior.atoms[-1][0]
            if lo < self.q_lo - MERGE_TOL or hi > self.q_hi + MERGE_TOL:
                raise ConfigError("prior atoms must lie inside [q_lo, q_hi]")

    def check_quality(self, q: float) -> float:
        q = float(q)
        # posterior means are convex combinations, so allow float slack only
        if not self.q_lo - MERGE_TOL <= q <= self.q_hi + MERGE_TOL:
            raise DomainError(f"quality {q} outside [{self.q_lo}, {self.q_hi}]")
        return q
