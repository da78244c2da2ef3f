"""Independent oracle for the peaked truncated-normal counterexample.

Uses scipy.stats.truncnorm, a dense price grid refined by bounded scalar
maximisation, and direct quadrature of the surplus definitions.  None of
the library's hazard-rate machinery is touched.  The printed numbers are
frozen in tests/test_info.py.
"""

import math

import numpy as np
from scipy import integrate, optimize, stats

SD = math.sqrt(0.001)
F = stats.truncnorm((0 - 0.5) / SD, (1 - 0.5) / SD, loc=0.5, scale=SD)
C = 1.0


def price(q):
    grid = np.linspace(C, q, 1_000_001)
    prof = (grid - C) * F.sf(grid / q)
    i = int(np.argmax(prof))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(
        lambda p: -(p - C) * F.sf(p / q), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-13},
    )
    return res.x


def welfare(q):
    p = price(q)
    a = p / q
    kw = dict(epsabs=1e-13, epsrel=1e-13, limit=500, points=[0.5] if a < 0.5 else None)
    cs, _ = integrate.quad(lambda v: (v * q - p) * F.pdf(v), a, 1, **kw)
    ts, _ = integrate.quad(lambda v: (v * q - C) * F.pdf(v), a, 1, **kw)
    return p, cs, ts


if __name__ == "__main__":
    full = [welfare(5.0), welfare(20.0)]
    pooled = welfare(12.5)
    e = lambda k: 0.5 * full[0][k] + 0.5 * full[1][k]
    print(f"full:   e_price={e(0)!r} e_cs={e(1)!r} e_ts={e(2)!r}")
    print(f"pooled: e_price={pooled[0]!r} e_cs={pooled[1]!r} e_ts={pooled[2]!r}")
