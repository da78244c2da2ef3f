"""Published worked examples as a table of expected vs computed values."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .dist import Beta, TruncatedNormal, Uniform
from .pricing import solve_price
from .scenario import MarketScenario
from .welfare import check_conditions, compute_k

GROUPS = ("k", "price", "conditions", "spot")
PEAKED = TruncatedNormal(0.5, math.sqrt(0.001))


@dataclass
class Row:
    group: str
    name: str
    expected: str
    computed: str
    tolerance: str
    passed: bool


def _k_rows(resolution: int) -> list[Row]:
    rows = []
    for name, d, target in [
        ("Beta(3,3)", Beta(3, 3), 9.68),
        ("TruncNormal(0.5,0.1)", TruncatedNormal(0.5, 0.1), 2.88),
    ]:
        k = compute_k(d, resolution).k
        rows.append(Row("k", f"k {name}", f"{target}", f"{k:.4f}", "±0.05", abs(k - target) <= 0.05))
    for name, d in [
        ("Uniform", Uniform()),
        ("Beta(1,0.5)", Beta(1, 0.5)),
        ("Beta(1,1)", Beta(1, 1)),
        ("Beta(1,2)", Beta(1, 2)),
        ("Beta(2,2)", Beta(2, 2)),
        ("TruncNormal(0.5,sqrt0.1)", TruncatedNormal(0.5, math.sqrt(0.1))),
    ]:
        res = compute_k(d, resolution)
        rows.append(
            Row("k", f"k {name}", "inf", "inf" if res.infinite_up_to_resolution else f"{res.k:.4f}",
                f"R={resolution}", res.infinite_up_to_resolution)
        )
    return rows


def _price_rows() -> list[Row]:
    s = MarketScenario(1.5, 20.0, 1.0, PEAKED)
    rows = []
    for q, target, tol in [(2, 0.52, 0.005), (4, 0.4546, 0.002), (5, 0.4507, 0.002), (20, 0.44, 0.005)]:
        pbar = solve_price(s, q).pbar
        rows.append(Row("price", f"pbar({q})", f"{target}", f"{pbar:.5f}", f"±{tol}", abs(pbar - target) <= tol))
    return rows


def _condition_rows() -> list[Row]:
    rows = []
    for (lo, hi), want in [((2.0, 4.0), True), ((5.0, 20.0), False)]:
        rep = check_conditions(MarketScenario(lo, hi, 1.0, PEAKED), 1000)
        rows.append(
            Row("conditions", f"total_holds Q=[{lo:g},{hi:g}]", str(want), str(rep.total_holds), "exact",
                rep.total_holds is want)
        )
    return rows


def _spot_rows() -> list[Row]:
    b33 = Beta(3, 3)
    h = b33.hazard_profile(0.4)
    lhs = h.r * h.r2 + h.r1
    vstar = Beta(2, 2).psi_zero
    exact = (1 + math.sqrt(33)) / 16
    return [
        Row("spot", "psi(0.4) Beta(3,3)", "0.005", f"{h.psi:.8f}", "±1e-6", abs(h.psi - 0.005) <= 1e-6),
        Row("spot", "r r''+r' at 0.4 Beta(3,3)", "2.25", f"{lhs:.5f}", "±0.01", abs(lhs - 2.25) <= 0.01),
        Row("spot", "psi>0 threshold Beta(2,2)", f"{exact:.8f}", f"{vstar:.8f}", "±1e-6", abs(vstar - exact) <= 1e-6),
    ]


def run(only: str | None = None, resolution: int = 100_000) -> list[Row]:
    builders: dict[str, Callable[[], list[Row]]] = {
        "k": lambda: _k_rows(resolution),
        "price": _price_rows,
        "conditions": _condition_rows,
        "spot": _spot_rows,
    }
    if only is not None and only not in builders:
        raise KeyError(only)
    rows = []
    for group, build in builders.items():
        if only is None or only == group:
            rows.extend(build())
    return rows
