"""Buyer-type distributions on [0, 1] and their inverse hazard rates.

Every family is described through four primitives evaluated on arrays:
``log_pdf``, ``log_sf`` and the first two derivatives of ``log f``.  The
inverse hazard rate ``r = (1 - F) / f`` and its derivatives are composed
from these, which keeps the far right tail accurate for peaked densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, NamedTuple, Sequence

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import ConfigError, DomainError, NumericalError

EPS = 1e-9
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class DensityValues(NamedTuple):
    F: float
    f: float
    f1: float
    f2: float


class HazardProfile(NamedTuple):
    """Inverse hazard rate ``r`` with derivatives and the virtual valuation."""

    v: float
    r: float
    r1: float
    r2: float
    psi: float
    psi1: float


def _check(v):
    arr = np.asarray(v, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"type value outside [0, 1]: {v!r}")
    return arr


def _clip(v):
    return np.clip(_check(v), EPS, 1.0 - EPS)


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


class TypeDistribution:
    """Base class; subclasses implement the ``_``-prefixed array primitives."""

    name = "abstract"

    # primitives on already-clipped arrays
    def _cdf(self, v):
        raise NotImplementedError

    def _log_sf(self, v):
        raise NotImplementedError

    def _log_pdf(self, v):
        raise NotImplementedError

    def _dlog_pdf(self, v):
        raise NotImplementedError

    def _d2log_pdf(self, v):
        raise NotImplementedError

    def to_spec(self) -> dict[str, Any]:
        raise NotImplementedError

    # public, vectorised
    def cdf(self, v):
        # F is defined on the closed interval, so no clipping here
        return _out(np.clip(self._cdf(_check(v)), 0.0, 1.0))

    def sf(self, v):
        return _out(np.exp(self._log_sf(_clip(v))))

    def pdf(self, v):
        return _out(np.exp(self._log_pdf(_clip(v))))

    def density(self, v):
        """Unclipped density for quadrature nodes, which are never endpoints."""
        with np.errstate(divide="ignore"):
            return _out(np.exp(self._log_pdf(_check(v))))

    def evaluate(self, v: float) -> DensityValues:
        """Return ``F(v), f(v), f'(v), f''(v)`` after clipping to ``[EPS, 1-EPS]``."""
        x = _clip(v)
        f = np.exp(self._log_pdf(x))
        g1 = self._dlog_pdf(x)
        g2 = self._d2log_pdf(x)
        return DensityValues(
            float(self._cdf(x)), float(f), float(f * g1), float(f * (g2 + g1 * g1))
        )

    def hazard_arrays(self, v):
        """Vectorised ``(r, r', r'')`` on clipped ``v``."""
        x = _clip(v)
        log_pdf = self._log_pdf(x)
        if np.any(log_pdf < math.log(1e-300)):
            raise NumericalError(f"density below 1e-300 in {self!r}")
        log_sf = self._log_sf(x)
        if np.any(~np.isfinite(log_sf)):
            raise NumericalError(f"survival function lost all precision in {self!r}")
        r = np.exp(log_sf - log_pdf)
        g1 = self._dlog_pdf(x)
        g2 = self._d2log_pdf(x)
        r1 = -1.0 - r * g1
        # differentiate r1 = -1 - r*g1 once more
        r2 = -r1 * g1 - r * g2
        return r, r1, r2

    def inverse_hazard(self, v):
        return _out(self.hazard_arrays(v)[0])

    def virtual_value(self, v):
        x = _clip(v)
        return _out(x - self.hazard_arrays(x)[0])

    def buyer_lhs(self, v):
        """``r r'' + r'``, the quantity bounded by the buyer-benefit condition."""
        r, r1, r2 = self.hazard_arrays(v)
        return _out(r * r2 + r1)

    def hazard_profile(self, v: float) -> HazardProfile:
        x = float(_clip(v))
        r, r1, r2 = (float(a) for a in self.hazard_arrays(x))
        return HazardProfile(x, r, r1, r2, x - r, 1.0 - r1)

    @cached_property
    def psi_zero(self) -> float:
        """Smallest type with positive virtual valuation.

        Under weak regularity ``{psi > 0}`` is the interval ``(psi_zero, 1)``.
        """
        grid = np.linspace(EPS, 1.0 - EPS, 4001)
        psi = grid - self.hazard_arrays(grid)[0]
        pos = np.flatnonzero(psi > 0)
        if pos.size == 0:
            raise NumericalError(f"virtual valuation never positive for {self!r}")
        i = pos[0]
        if i == 0:
            return float(grid[0])
        g = lambda x: x - float(self.hazard_arrays(x)[0])
        return brentq(g, grid[i - 1], grid[i], xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class Uniform(TypeDistribution):
    name = "uniform"

    def _cdf(self, v):
        return v

    def _log_sf(self, v):
        return np.log1p(-v)

    def _log_pdf(self, v):
        return np.zeros_like(v)

    def _dlog_pdf(self, v):
        return np.zeros_like(v)

    def _d2log_pdf(self, v):
        return np.zeros_like(v)

    def to_spec(self):
        return {"family": "uniform"}


@dataclass(frozen=True)
class Beta(TypeDistribution):
    alpha: float
    beta: float
    name = "beta"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ConfigError(f"Beta parameters must be positive, got {self.alpha}, {self.beta}")

    @cached_property
    def _log_norm(self) -> float:
        return float(special.betaln(self.alpha, self.beta))

    def _cdf(self, v):
        return special.betainc(self.alpha, self.beta, v)

    def _log_sf(self, v):
        # upper tail through the reflected argument avoids 1 - F cancellation
        return np.log(special.betainc(self.beta, self.alpha, 1.0 - v))

    def _log_pdf(self, v):
        return (self.alpha - 1) * np.log(v) + (self.beta - 1) * np.log1p(-v) - self._log_norm

    def _dlog_pdf(self, v):
        return (self.alpha - 1) / v - (self.beta - 1) / (1.0 - v)

    def _d2log_pdf(self, v):
        return -(self.alpha - 1) / v**2 - (self.beta - 1) / (1.0 - v) ** 2

    def to_spec(self):
        return {"family": "beta", "params": [self.alpha, self.beta]}


@dataclass(frozen=True)
class TruncatedNormal(TypeDistribution):
    """Normal(mean, sd**2) truncated to [0, 1]; tails handled in log space."""

    mean: float
    sd: float
    name = "truncnorm"

    def __post_init__(self):
        if not self.sd > 0:
            raise ConfigError(f"sd must be positive, got {self.sd}")

    @property
    def _a(self) -> float:
        return (0.0 - self.mean) / self.sd

    @property
    def _b(self) -> float:
        return (1.0 - self.mean) / self.sd

    @staticmethod
    def _log_diff_ndtr(lo, hi):
        """``log(Phi(hi) - Phi(lo))`` for ``lo <= hi`` without cancellation."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        upper = lo > 0
        # in the upper tail use Phi(hi) - Phi(lo) = Phi(-lo) - Phi(-hi)
        big = np.where(upper, special.log_ndtr(-lo), special.log_ndtr(hi))
        small = np.where(upper, special.log_ndtr(-hi), special.log_ndtr(lo))
        with np.errstate(divide="ignore"):
            return big + np.log(-np.expm1(small - big))

    @cached_property
    def _log_z(self) -> float:
        out = float(self._log_diff_ndtr(self._a, self._b))
        if not np.isfinite(out):
            raise NumericalError(f"normalising constant underflows for {self!r}")
        return out

    def _z(self, v):
        return (v - self.mean) / self.sd

    def _cdf(self, v):
        return np.exp(self._log_diff_ndtr(self._a, self._z(v)) - self._log_z)

    def _log_sf(self, v):
        return self._log_diff_ndtr(self._z(v), self._b) - self._log_z

    def _log_pdf(self, v):
        z = self._z(v)
        return -0.5 * z * z - _LOG_SQRT_2PI - math.log(self.sd) - self._log_z

    def _dlog_pdf(self, v):
        return -self._z(v) / self.sd

    def _d2log_pdf(self, v):
        return np.full_like(v, -1.0 / self.sd**2)

    def to_spec(self):
        return {"family": "truncnorm", "params": [self.mean, self.sd]}


@dataclass(frozen=True)
class Tabulated(TypeDistribution):
    """Density given at knots spanning [0, 1], interpolated by monotone cubics.

    The density is renormalised to integrate to one.  Its second derivative
    is only piecewise continuous, so ``r''`` jumps at the knots.
    """

    knots: tuple[tuple[float, float], ...]
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False, hash=False)
    _anti: Any = field(init=False, repr=False, compare=False, hash=False)
    _total: float = field(init=False, repr=False, compare=False, hash=False)
    name = "tabulated"

    def __post_init__(self):
        knots = tuple((float(a), float(b)) for a, b in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 2:
            raise ConfigError("tabulated density needs at least two knots")
        x = np.array([k[0] for k in knots])
        y = np.array([k[1] for k in knots])
        if np.any(np.diff(x) <= 0):
            raise ConfigError("tabulated knots must be strictly increasing in v")
        if x[0] != 0.0 or x[-1] != 1.0:
            raise ConfigError("tabulated knots must start at v=0 and end at v=1")
        if np.any(y <= 0):
            raise ConfigError("tabulated density must be positive at every knot")
        interp = PchipInterpolator(x, y, extrapolate=False)
        anti = interp.antiderivative()
        object.__setattr__(self, "_interp", interp)
        object.__setattr__(self, "_anti", anti)
        object.__setattr__(self, "_total", float(anti(1.0)))

    def _cdf(self, v):
        return self._anti(v) / self._total

    def _log_sf(self, v):
        return np.log((self._total - self._anti(v)) / self._total)

    def _log_pdf(self, v):
        return np.log(self._interp(v) / self._total)

    def _dlog_pdf(self, v):
        return self._interp(v, 1) / self._interp(v)

    def _d2log_pdf(self, v):
        f = self._interp(v)
        g1 = self._interp(v, 1) / f
        return self._interp(v, 2) / f - g1 * g1

    def to_spec(self):
        return {"family": "tabulated", "knots": [list(k) for k in self.knots]}


def from_spec(spec: dict[str, Any]) -> TypeDistribution:
    """Build a distribution from its config form, e.g. ``{"family": "beta", "params": [3, 3]}``."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError(f"distribution spec needs a 'family' key: {spec!r}")
    family = spec["family"]
    allowed = {"family", "params"} if family != "tabulated" else {"family", "knots"}
    extra = set(spec) - allowed
    if extra:
        raise ConfigError(f"unknown keys in distribution spec: {sorted(extra)}")
    params: Sequence[float] = spec.get("params", ())
    if family == "uniform":
        if params:
            raise ConfigError("uniform takes no params")
        return Uniform()
    if family == "beta":
        if len(params) != 2:
            raise ConfigError("beta needs params [alpha, beta]")
        return Beta(float(params[0]), float(params[1]))
    if family == "truncnorm":
        if len(params) != 2:
            raise ConfigError("truncnorm needs params [mean, sd]")
        return TruncatedNormal(float(params[0]), float(params[1]))
    if family == "tabulated":
        return Tabulated(tuple(tuple(k) for k in spec.get("knots", ())))
    raise ConfigError(f"unknown distribution family {family!r}")


def check_weak_regularity(d: TypeDistribution, grid_size: int = 1000):
    """Check ``psi' > 0`` wherever ``psi > 0`` on an evenly spaced interior grid.

    Returns ``(holds, witnesses)`` where ``witnesses`` are the grid points
    violating the condition.
    """
    if grid_size < 100:
        raise ConfigError("grid_size must be at least 100")
    v = np.linspace(EPS, 1.0 - EPS, grid_size)
    r, r1, _ = d.hazard_arrays(v)
    bad = (v - r > 0) & (1.0 - r1 <= 0)
    witnesses = [float(x) for x in v[bad]]
    return not witnesses, witnesses


def check_regular(d: TypeDistribution) -> bool:
    """Heuristic for ``r''`` bounded above near 1.

    Samples ``r''`` at ``1 - 10**-k`` for k = 2..6 and flags sustained
    growth above 10x per step.  Advisory only.
    """
    v = 1.0 - 10.0 ** -np.arange(2, 7)
    r2 = d.hazard_arrays(v)[2]
    for prev, cur in zip(r2[:-1], r2[1:]):
        if cur > 0 and cur > 10.0 * max(abs(prev), 1.0):
            return False
    return True


BUILTIN = {
    "uniform": Uniform(),
    "beta(1,0.5)": Beta(1.0, 0.5),
    "beta(1,2)": Beta(1.0, 2.0),
    "beta(2,2)": Beta(2.0, 2.0),
    "beta(3,3)": Beta(3.0, 3.0),
    "truncnorm(0.5,0.1)": TruncatedNormal(0.5, 0.1),
    "truncnorm(0.5,sqrt0.1)": TruncatedNormal(0.5, math.sqrt(0.1)),
    "truncnorm(0.5,sqrt0.001)": TruncatedNormal(0.5, math.sqrt(0.001)),
}
