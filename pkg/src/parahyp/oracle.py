"""Characteristics solution of u_t = c u u_x (scalar Burgers in the sign convention of the model)."""
from __future__ import annotations

from typing import Callable

import numpy as np

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50


def shock_time(du0_max: float, speed: float = 1.0) -> float:
    """T* = 1 / (c max u0')."""
    rate = speed * du0_max
    return np.inf if rate <= 0 else 1.0 / rate


def characteristics_solution(
    u0: Callable[[np.ndarray], np.ndarray],
    du0: Callable[[np.ndarray], np.ndarray],
    t: float,
    x: np.ndarray,
    speed: float = 1.0,
    bracket: float | None = None,
) -> np.ndarray:
    """u(t, x) = u0(x0) where x = x0 - c t u0(x0), solved pointwise for x0.

    Newton from x0 = x, then bisection on points where Newton did not meet the
    tolerance.  Valid for t below the shock time, where x0 -> x0 - c t u0(x0) is
    increasing.  ``bracket`` bounds |x0 - x|; it defaults to c t max|u0| sampled
    on a fine grid, plus a margin.
    """
    x = np.asarray(x, dtype=float)
    if t == 0:
        return u0(x)
    ct = speed * t

    def g(x0):
        return x0 - ct * u0(x0) - x

    x0 = x.copy()
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(NEWTON_MAXITER):
        r = g(x0)
        dg = 1.0 - ct * du0(x0)
        step = np.where(dg > 0, r / np.where(dg > 0, dg, 1.0), 0.0)
        x0 = x0 - step
        done = (np.abs(step) <= NEWTON_TOL) & (dg > 0)
        if np.all(done):
            break
    residual_ok = np.abs(g(x0)) <= 10 * NEWTON_TOL
    bad = ~(done & residual_ok)
    if np.any(bad):
        if bracket is None:
            probe = np.linspace(0, 2 * np.pi, 4097)
            bracket = abs(ct) * float(np.max(np.abs(u0(probe)))) + 1e-6
        lo = x[bad] - bracket
        hi = x[bad] + bracket
        xb = x[bad]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            val = mid - ct * u0(mid) - xb
            lo = np.where(val < 0, mid, lo)
            hi = np.where(val >= 0, mid, hi)
            if np.max(hi - lo) < NEWTON_TOL:
                break
        x0[bad] = 0.5 * (lo + hi)
    return u0(x0)
