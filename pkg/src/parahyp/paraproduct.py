"""Bony paraproducts T_f g, the high-high remainder Pi(f, g), and commutator checks.

T_f g = sum_k (phi_{k-gap-1} f) (P_k g), summed over shells k >= gap + 1, every
summand dealiased.  With this block convention a constant f gives
T_c g = c (g - phi_gap g).  Pi is the exact complement
Pi(f, g) = fg - T_f g - T_g f, so the trichotomy holds to round-off.

All routines accept a ``product`` callable acting pointwise on padded-grid
samples, so that matrix-vector paraproducts (T_{A(u)} d_j w) share the engine
with scalar ones.  ``product(first, second)`` always receives the factors in
the order of the mathematical product, whichever of them is the low one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .norms import gradient_sup, l2_norm, sup_norm
from .spectral import (
    Field,
    GridMismatch,
    GridSpec,
    Profile,
    block_multiplier,
    coarse_amplitudes,
    fine_values,
    lp_project,
    dealiased_product,
    shell_multiplier,
)

Quantization = Literal["coeff-lowpass", "arg-lowpass", "double-lowpass"]
QUANTIZATIONS = ("coeff-lowpass", "arg-lowpass", "double-lowpass")

Product = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ParaConfig:
    gap: int = 8
    quantization: Quantization = "arg-lowpass"
    profile: Profile = "sharp"

    def __post_init__(self):
        if self.gap < 2:
            raise ValueError(f"frequency gap must be >= 2, got {self.gap}")
        if self.quantization not in QUANTIZATIONS:
            raise ValueError(f"unknown quantization {self.quantization!r}")

    def high_shells(self, grid: GridSpec) -> range:
        """Shells k whose low-frequency coefficient block phi_{k-gap-1} is nonempty."""
        return range(self.gap + 1, grid.max_shell + 1)

    def coefficient_block(self, k: int) -> int:
        return k - self.gap - 1


def para_sum(
    grid: GridSpec,
    cfg: ParaConfig,
    coefficient: Callable[[int], np.ndarray],
    high: np.ndarray,
    product: Product,
    low_first: bool = True,
    low_lead: tuple[int, ...] | None = None,
) -> np.ndarray:
    """sum_k product(coefficient(k), P_k high) on the padded grid, truncated; returns amplitudes.

    ``coefficient(k)`` returns n-grid amplitudes of the low factor used at shell k;
    ``low_lead`` is its leading (component) shape, needed only to shape an empty sum.
    """
    acc = None
    for k in cfg.high_shells(grid):
        hk = high * shell_multiplier(grid.dim, grid.n, k, cfg.profile)
        if not np.any(hk):
            continue
        lo = fine_values(coefficient(k), grid.dim)
        hi = fine_values(hk, grid.dim)
        term = product(lo, hi) if low_first else product(hi, lo)
        acc = term if acc is None else acc + term
    if acc is None:
        hi_lead = high.shape[: high.ndim - grid.dim]
        lo_lead = hi_lead if low_lead is None else low_lead
        pts = (1,) * grid.dim
        a, b = np.zeros(lo_lead + pts), np.zeros(hi_lead + pts)
        lead = (product(a, b) if low_first else product(b, a)).shape[:-grid.dim]
        return np.zeros(lead + grid.shape, dtype=complex)
    return coarse_amplitudes(acc, grid.dim, grid.n)


def _lowpass_coefficient(low: np.ndarray, grid: GridSpec, cfg: ParaConfig) -> Callable[[int], np.ndarray]:
    def coef(k: int) -> np.ndarray:
        return low * block_multiplier(grid.dim, grid.n, cfg.coefficient_block(k), cfg.profile)

    return coef


def t_amplitudes(
    f: np.ndarray, g: np.ndarray, grid: GridSpec, cfg: ParaConfig, product: Product = np.multiply, low: int = 0
) -> np.ndarray:
    """Amplitudes of the low-high part of product(f, g) with slot ``low`` (0 or 1) as the low factor."""
    lead = lambda a: a.shape[: a.ndim - grid.dim]
    if low == 0:
        return para_sum(grid, cfg, _lowpass_coefficient(f, grid, cfg), g, product, True, lead(f))
    return para_sum(grid, cfg, _lowpass_coefficient(g, grid, cfg), f, product, False, lead(g))


def _check(f: Field, g: Field):
    if f.grid != g.grid:
        raise GridMismatch(f"{f.grid} vs {g.grid}")


def para_lowhigh(f: Field, g: Field, cfg: ParaConfig = ParaConfig(), product: Product = np.multiply) -> Field:
    """T_f g: f supplies the low frequencies."""
    _check(f, g)
    return Field.from_amplitudes(f.grid, t_amplitudes(f.amplitudes(), g.amplitudes(), f.grid, cfg, product, low=0))


def para_decompose(
    f: Field, g: Field, cfg: ParaConfig = ParaConfig(), product: Product = np.multiply
) -> tuple[Field, Field, Field]:
    """(T_f g, T_g f, Pi(f, g)) with the three parts summing to the dealiased product."""
    _check(f, g)
    grid = f.grid
    fa, ga = f.amplitudes(), g.amplitudes()
    full = coarse_amplitudes(product(fine_values(fa, grid.dim), fine_values(ga, grid.dim)), grid.dim, grid.n)
    tfg = t_amplitudes(fa, ga, grid, cfg, product, low=0)
    tgf = t_amplitudes(fa, ga, grid, cfg, product, low=1)
    pi = full - tfg - tgf
    return (
        Field.from_amplitudes(grid, tfg),
        Field.from_amplitudes(grid, tgf),
        Field.from_amplitudes(grid, pi),
    )


def para_highhigh(f: Field, g: Field, cfg: ParaConfig = ParaConfig(), product: Product = np.multiply) -> Field:
    return para_decompose(f, g, cfg, product)[2]


def pi_amplitudes(
    f: np.ndarray, g: np.ndarray, grid: GridSpec, cfg: ParaConfig, product: Product = np.multiply
) -> np.ndarray:
    full = coarse_amplitudes(product(fine_values(f, grid.dim), fine_values(g, grid.dim)), grid.dim, grid.n)
    return full - t_amplitudes(f, g, grid, cfg, product, 0) - t_amplitudes(f, g, grid, cfg, product, 1)


@dataclass(frozen=True)
class RatioReport:
    ratio: float
    numerator: float
    denominator: float


def _ratio(num: float, den: float) -> RatioReport:
    if den == 0:
        return RatioReport(0.0 if num == 0 else math.inf, num, den)
    return RatioReport(num / den, num, den)


def coifman_meyer_check(f: Field, g: Field, cfg: ParaConfig = ParaConfig()) -> RatioReport:
    """|T_f g|_{L2} / (|f|_inf |g|_{L2})."""
    return _ratio(l2_norm(para_lowhigh(f, g, cfg)), sup_norm(f) * l2_norm(g))


def highhigh_check(f: Field, g: Field, cfg: ParaConfig = ParaConfig()) -> RatioReport:
    """|Pi(f, g)|_{L2} / (|f|_inf |g|_{L2}); L-infinity stands in for BMO."""
    return _ratio(l2_norm(para_highhigh(f, g, cfg)), sup_norm(f) * l2_norm(g))


def commutator_check(f: Field, g: Field, k: int, profile: Profile = "smooth") -> RatioReport:
    """2^k |P_k(fg) - f P_k g|_{L2} / (|grad f|_inf |g|_{L2})."""
    _check(f, g)
    comm = lp_project(dealiased_product(f, g), k, profile) - dealiased_product(f, lp_project(g, k, profile))
    num = 2.0**k * l2_norm(comm)
    return _ratio(num, gradient_sup(f) * l2_norm(g))
