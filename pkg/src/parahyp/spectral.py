"""Periodic grids, Fourier transforms and Littlewood-Paley multipliers on [0, 2pi)^dim.

Conventions
-----------
A field is stored as real samples ``values[a, x_1, ..., x_dim]`` with the
component index first.  Internally the module works with *amplitudes*
``c(xi)`` defined by ``f(x) = sum_xi c(xi) exp(i xi.x)``, i.e. ``fftn / n**dim``;
amplitudes do not depend on the grid size, which is what makes zero padding
trivial.

The public :class:`SpectralField` carries the L2-unitary normalisation
``fhat(xi) = (2pi)**(dim/2) * c(xi)`` so that Parseval reads
``||f||_{L2}^2 = sum |fhat|^2`` with ``||f||_{L2}^2 = int_{T^dim} |f|^2 dx``.

Dyadic blocks: ``phi_m`` is the low-frequency multiplier equal to 1 for
``|xi| <= 2**m``.  The sharp profile is the indicator of that ball, the smooth
profile ramps down as ``1 - r(t)`` with ``r(t) = 3t^2 - 2t^3`` and
``t = (|xi| - 2**m) / 2**m`` on ``[2**m, 2**(m+1)]``.  ``P_0 = phi_0`` (all
``|xi| <= 1``, including the mean) and ``P_k = phi_k - phi_{k-1}`` for ``k >= 1``.
For ``m < 0`` both profiles reduce to the projection onto the zero mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal

import numpy as np

Profile = Literal["sharp", "smooth"]
PROFILES = ("sharp", "smooth")


class BlowupDetected(RuntimeError):
    """Non-finite samples, or a solver's norm threshold was crossed.

    Solvers attach the partial trajectory and the detection time.
    """

    def __init__(self, message: str, time: float | None = None, trajectory=None):
        super().__init__(message)
        self.time = time
        self.trajectory = trajectory


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 16 or self.n & (self.n - 1):
            raise ValueError(f"points_per_axis must be a power of two >= 16, got {self.n}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def nyquist(self) -> int:
        return self.n // 2

    @property
    def padded_n(self) -> int:
        return 3 * self.n // 2

    @property
    def cell_volume(self) -> float:
        return (2 * math.pi / self.n) ** self.dim

    @property
    def max_shell(self) -> int:
        """Smallest K with phi_K = 1 on every retained mode."""
        kmax = float(np.max(wavenumber_magnitude(self.dim, self.n)))
        return max(0, math.ceil(math.log2(kmax))) if kmax > 1 else 0

    def coordinates(self) -> tuple[np.ndarray, ...]:
        x = 2 * math.pi * np.arange(self.n) / self.n
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@lru_cache(maxsize=None)
def wavenumbers(dim: int, n: int) -> tuple[np.ndarray, ...]:
    k = np.fft.fftfreq(n, d=1.0 / n)
    return tuple(_readonly(g) for g in np.meshgrid(*([k] * dim), indexing="ij"))


@lru_cache(maxsize=None)
def wavenumber_magnitude(dim: int, n: int) -> np.ndarray:
    ks = wavenumbers(dim, n)
    return _readonly(np.sqrt(sum(k * k for k in ks)))


@lru_cache(maxsize=None)
def nyquist_mask(dim: int, n: int) -> np.ndarray:
    """True on modes with some |xi_j| == n/2 (no conjugate partner on the grid)."""
    ks = wavenumbers(dim, n)
    mask = np.zeros((n,) * dim, dtype=bool)
    for k in ks:
        mask |= np.abs(k) == n // 2
    return _readonly(mask)


def _ramp(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return 3 * t**2 - 2 * t**3


@lru_cache(maxsize=None)
def block_multiplier(dim: int, n: int, m: int, profile: Profile = "sharp") -> np.ndarray:
    """phi_m: low-frequency multiplier for the blocks 0..m."""
    kmag = wavenumber_magnitude(dim, n)
    if m < 0:
        return _readonly((kmag == 0).astype(float))
    lam = 2.0**m
    if profile == "sharp":
        out = (kmag <= lam).astype(float)
    elif profile == "smooth":
        out = 1.0 - _ramp((kmag - lam) / lam)
    else:
        raise ValueError(f"unknown profile {profile!r}")
    return _readonly(out)


@lru_cache(maxsize=None)
def shell_multiplier(dim: int, n: int, k: int, profile: Profile = "sharp") -> np.ndarray:
    if k < 0:
        raise ValueError("shell index must be >= 0")
    if k == 0:
        return block_multiplier(dim, n, 0, profile)
    return _readonly(block_multiplier(dim, n, k, profile) - block_multiplier(dim, n, k - 1, profile))


@lru_cache(maxsize=None)
def lowpass_multiplier(dim: int, n: int, cutoff: float, profile: Profile = "sharp") -> np.ndarray:
    """P_{<cutoff}: sharp keeps |xi| < cutoff; smooth ramps 1 -> 0 over [cutoff/2, cutoff]."""
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    kmag = wavenumber_magnitude(dim, n)
    if profile == "sharp":
        out = (kmag < cutoff).astype(float)
    elif profile == "smooth":
        half = cutoff / 2
        out = 1.0 - _ramp((kmag - half) / half)
    else:
        raise ValueError(f"unknown profile {profile!r}")
    return _readonly(out)


# -- raw array transforms ---------------------------------------------------


def _axes(dim: int) -> tuple[int, ...]:
    return tuple(range(-dim, 0))


def to_amplitudes(values: np.ndarray, dim: int) -> np.ndarray:
    n = values.shape[-1]
    return np.fft.fftn(values, axes=_axes(dim)) / n**dim


def from_amplitudes(coef: np.ndarray, dim: int) -> np.ndarray:
    n = coef.shape[-1]
    return np.fft.ifftn(coef * n**dim, axes=_axes(dim)).real


def pad_amplitudes(coef: np.ndarray, dim: int, m: int) -> np.ndarray:
    """Embed the retained modes of an n-grid spectrum into an m-grid spectrum (m > n).

    Nyquist modes of the source are dropped.
    """
    n = coef.shape[-1]
    h = n // 2
    out = np.zeros(coef.shape[:-dim] + (m,) * dim, dtype=complex)
    lo = slice(0, h)
    src_hi = slice(n - h + 1, n)
    dst_hi = slice(m - h + 1, m)
    lead = (Ellipsis,)
    if dim == 1:
        out[lead + (lo,)] = coef[lead + (lo,)]
        out[lead + (dst_hi,)] = coef[lead + (src_hi,)]
    else:
        for si, di in ((lo, lo), (src_hi, dst_hi)):
            for sj, dj in ((lo, lo), (src_hi, dst_hi)):
                out[lead + (di, dj)] = coef[lead + (si, sj)]
    return out


def truncate_amplitudes(coef: np.ndarray, dim: int, n: int) -> np.ndarray:
    """Inverse of :func:`pad_amplitudes`: keep |xi_j| < n/2, Nyquist set to zero."""
    m = coef.shape[-1]
    h = n // 2
    out = np.zeros(coef.shape[:-dim] + (n,) * dim, dtype=complex)
    lo = slice(0, h)
    dst_hi = slice(n - h + 1, n)
    src_hi = slice(m - h + 1, m)
    lead = (Ellipsis,)
    if dim == 1:
        out[lead + (lo,)] = coef[lead + (lo,)]
        out[lead + (dst_hi,)] = coef[lead + (src_hi,)]
    else:
        for di, si in ((lo, lo), (dst_hi, src_hi)):
            for dj, sj in ((lo, lo), (dst_hi, src_hi)):
                out[lead + (di, dj)] = coef[lead + (si, sj)]
    return out


def fine_values(coef: np.ndarray, dim: int) -> np.ndarray:
    """Samples on the 3/2-padded grid of a band-limited spectrum."""
    m = 3 * coef.shape[-1] // 2
    return from_amplitudes(pad_amplitudes(coef, dim, m), dim)


def coarse_amplitudes(fine: np.ndarray, dim: int, n: int) -> np.ndarray:
    """Spectrum of padded-grid samples, truncated back to the n-grid."""
    return truncate_amplitudes(to_amplitudes(fine, dim), dim, n)


# -- fields -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Field:
    """Real multi-component samples on a periodic grid; values shape (m, *grid.shape)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == self.grid.dim:
            v = v[None]
        if v.shape[1:] != self.grid.shape:
            raise GridMismatch(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise BlowupDetected("non-finite samples in field")
        object.__setattr__(self, "values", v)

    @property
    def components(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable[..., np.ndarray | float]) -> Field:
        """Sample ``fn(x)`` (1D) or ``fn(x, y)`` (2D); fn may return a stacked (m, ...) array."""
        xs = grid.coordinates()
        vals = np.asarray(fn(*xs), dtype=float)
        if vals.ndim < grid.dim:
            vals = np.broadcast_to(vals, grid.shape)
        return cls(grid, np.array(vals, dtype=float))

    @classmethod
    def constant(cls, grid: GridSpec, value, components: int = 1) -> Field:
        val = np.broadcast_to(np.asarray(value, dtype=float).reshape(-1), (components,))
        vals = np.ones((components,) + grid.shape) * val.reshape((components,) + (1,) * grid.dim)
        return cls(grid, vals)

    @classmethod
    def zeros(cls, grid: GridSpec, components: int = 1) -> Field:
        return cls(grid, np.zeros((components,) + grid.shape))

    def like(self, values: np.ndarray) -> Field:
        return Field(self.grid, values)

    def _check(self, other: Field):
        if not isinstance(other, Field):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatch(f"{self.grid} vs {other.grid}")
        if other.components != self.components:
            raise GridMismatch(f"{self.components} vs {other.components} components")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return self.like(self.values + other.values)
        return self.like(self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return self.like(self.values - other.values)
        return self.like(self.values - other)

    def __mul__(self, c):
        if isinstance(c, Field):
            raise TypeError("use dealiased_product for products of fields")
        return self.like(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.like(-self.values)

    def __truediv__(self, c):
        return self.like(self.values / c)

    def amplitudes(self) -> np.ndarray:
        return to_amplitudes(self.values, self.grid.dim)

    @classmethod
    def from_amplitudes(cls, grid: GridSpec, coef: np.ndarray) -> Field:
        return cls(grid, from_amplitudes(coef, grid.dim))


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: GridSpec
    coefficients: np.ndarray

    @property
    def components(self) -> int:
        return self.coefficients.shape[0]

    def hermitian_defect(self) -> float:
        """Relative violation of conjugate symmetry c(-xi) = conj(c(xi))."""
        c = self.coefficients
        axes = _axes(self.grid.dim)
        flipped = np.roll(np.flip(c, axis=axes), shift=1, axis=axes)
        scale = np.linalg.norm(c)
        return float(np.linalg.norm(c - np.conj(flipped)) / scale) if scale > 0 else 0.0


def _unitary_scale(grid: GridSpec) -> float:
    return (2 * math.pi) ** (grid.dim / 2)


def transform(f: Field) -> SpectralField:
    return SpectralField(f.grid, f.amplitudes() * _unitary_scale(f.grid))


def inverse_transform(F: SpectralField) -> Field:
    return Field.from_amplitudes(F.grid, F.coefficients / _unitary_scale(F.grid))


def apply_multiplier(f: Field, mult: np.ndarray) -> Field:
    return Field.from_amplitudes(f.grid, f.amplitudes() * mult)


def derivative(f: Field, axis: int) -> Field:
    if not 0 <= axis < f.grid.dim:
        raise ValueError(f"axis {axis} out of range for dim {f.grid.dim}")
    return Field.from_amplitudes(f.grid, derivative_amplitudes(f.amplitudes(), f.grid, axis))


def derivative_amplitudes(coef: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    k = wavenumbers(grid.dim, grid.n)[axis]
    mult = np.where(nyquist_mask(grid.dim, grid.n), 0.0, 1j * k)
    return coef * mult


def gradient(f: Field) -> list[Field]:
    coef = f.amplitudes()
    return [Field.from_amplitudes(f.grid, derivative_amplitudes(coef, f.grid, j)) for j in range(f.grid.dim)]


def shell_resolved(grid: GridSpec, k: int) -> bool:
    return 0 <= k <= grid.max_shell


def lp_project_flagged(f: Field, k: int, profile: Profile = "sharp") -> tuple[Field, bool]:
    """P_k f plus a flag that is False when shell k lies beyond the grid."""
    if k > f.grid.max_shell:
        return Field.zeros(f.grid, f.components), False
    return apply_multiplier(f, shell_multiplier(f.grid.dim, f.grid.n, k, profile)), True


def lp_project(f: Field, k: int, profile: Profile = "sharp") -> Field:
    return lp_project_flagged(f, k, profile)[0]


def lp_block(f: Field, m: int, profile: Profile = "sharp") -> Field:
    """phi_m f = sum_{k <= m} P_k f."""
    return apply_multiplier(f, block_multiplier(f.grid.dim, f.grid.n, m, profile))


def low_pass(f: Field, cutoff: float, profile: Profile = "sharp") -> Field:
    return apply_multiplier(f, lowpass_multiplier(f.grid.dim, f.grid.n, float(cutoff), profile))


def shells(grid: GridSpec) -> range:
    return range(grid.max_shell + 1)


def dealiased_product(f: Field, g: Field) -> Field:
    """Componentwise product with 3/2 zero padding (2/3 rule).

    A one-component factor broadcasts against the other.
    """
    if f.grid != g.grid:
        raise GridMismatch(f"{f.grid} vs {g.grid}")
    if f.components != g.components and 1 not in (f.components, g.components):
        raise GridMismatch(f"{f.components} vs {g.components} components")
    return Field(f.grid, bilinear(f.amplitudes(), g.amplitudes(), f.grid, np.multiply))


def bilinear(a: np.ndarray, b: np.ndarray, grid: GridSpec, product: Callable) -> np.ndarray:
    """Dealiased pointwise bilinear map of two spectra, returned as n-grid samples."""
    fa = fine_values(a, grid.dim)
    fb = fine_values(b, grid.dim)
    return from_amplitudes(coarse_amplitudes(product(fa, fb), grid.dim, grid.n), grid.dim)


def compose(fn: Callable[[np.ndarray], np.ndarray], f: Field) -> np.ndarray:
    """Evaluate a pointwise map on the padded grid and truncate; returns n-grid amplitudes."""
    fine = fine_values(f.amplitudes(), f.grid.dim)
    return coarse_amplitudes(np.asarray(fn(fine), dtype=float), f.grid.dim, f.grid.n)


def compose_field(fn: Callable[[np.ndarray], np.ndarray], f: Field) -> Field:
    return Field.from_amplitudes(f.grid, compose(fn, f))
