"""Sobolev norms on the torus and the control parameters A = |u|_inf, B = |grad u|_inf."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spectral import Field, compose_field, derivative_amplitudes, from_amplitudes, wavenumber_magnitude

S_CLAMP = 10.0


@dataclass(frozen=True)
class ControlPair:
    A: float
    B: float


def l2_norm(f: Field) -> float:
    return math.sqrt(f.grid.cell_volume * float(np.sum(f.values**2)))


def sobolev_weight(grid, s: float) -> np.ndarray:
    kmag = wavenumber_magnitude(grid.dim, grid.n)
    return (1.0 + kmag**2) ** s


def sobolev_norm_amplitudes(coef: np.ndarray, grid, s: float) -> float:
    s = float(np.clip(s, -S_CLAMP, S_CLAMP))
    total = np.sum(sobolev_weight(grid, s) * np.abs(coef) ** 2)
    return math.sqrt((2 * math.pi) ** grid.dim * float(total))


def sobolev_norm(f: Field, s: float) -> float:
    """(sum_xi <xi>^{2s} |fhat(xi)|^2)^{1/2}; s = 0 gives the L2 norm."""
    return sobolev_norm_amplitudes(f.amplitudes(), f.grid, s)


def sup_norm(f: Field) -> float:
    """Grid maximum of the pointwise Euclidean norm across components (a lower bound of the true sup)."""
    return float(np.max(np.sqrt(np.sum(f.values**2, axis=0))))


def gradient_sup(f: Field) -> float:
    coef = f.amplitudes()
    sq = np.zeros(f.grid.shape)
    for j in range(f.grid.dim):
        d = from_amplitudes(derivative_amplitudes(coef, f.grid, j), f.grid.dim)
        sq += np.sum(d**2, axis=0)
    return float(np.sqrt(np.max(sq)))


def control_params(f: Field) -> ControlPair:
    return ControlPair(A=sup_norm(f), B=gradient_sup(f))


@dataclass(frozen=True)
class MoserReport:
    ratio: float
    sup: float
    s: float


def moser_check(F: Callable[[np.ndarray], np.ndarray], f: Field, s: float) -> MoserReport:
    """Ratio |F(f)|_{H^s} / |f|_{H^s} with F composed on the dealiasing grid."""
    if s < 0:
        raise ValueError("Moser check needs s >= 0")
    den = sobolev_norm(f, s)
    num = sobolev_norm(compose_field(F, f), s)
    return MoserReport(ratio=num / den if den > 0 else 0.0, sup=sup_norm(f), s=s)
