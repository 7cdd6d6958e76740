"""Symmetric hyperbolic systems u_t = A^j(u) d_j u and their right-hand sides.

Coefficient callbacks work on stacked point arrays: ``coeff(u)`` takes ``u`` of
shape (m, *pts) and returns (dim, m, m, *pts); ``coeff_jacobian(u, v)`` returns
the matrices DA^j(u) v with the same shape.

Notation used below, all as n-grid fields:

* ``a_j = A^j(u)``, composed on the padded grid and truncated;
* ``M(u)`` with ``M(u) v = sum_j (DA^j(u) v) d_j u``, the zeroth-order coefficient.

Then N(u) = sum_j a_j d_j u, the linearised operator is
sum_j a_j d_j v + M(u) v, and the paradifferential operator keeps the low-high
parts T_{a_j} d_j w + T_{M(u)} w.  F(u) and F^lin(u) v are taken as exact
complements of the paradifferential part; the displayed three-term forms are
available separately as cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .norms import gradient_sup, l2_norm, sobolev_norm, sup_norm
from .paraproduct import ParaConfig, para_sum, pi_amplitudes, t_amplitudes
from .spectral import (
    BlowupDetected,
    Field,
    GridMismatch,
    GridSpec,
    block_multiplier,
    coarse_amplitudes,
    derivative_amplitudes,
    fine_values,
    from_amplitudes,
    shell_multiplier,
)

CoeffFn = Callable[[np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def matvec(mat: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Pointwise (m, m, *pts) x (m, *pts) -> (m, *pts)."""
    return np.einsum("ab...,b...->a...", mat, vec)


class InvalidSystem(ValueError):
    pass


@dataclass(eq=False)
class HyperbolicSystem:
    name: str
    dim: int
    components: int
    coeff: CoeffFn
    coeff_jacobian: JacobianFn
    validate_on_init: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.validate_on_init:
            self.validate()

    def validate(self, samples: int = 1000, seed: int = 0, fd_step: float = 1e-5, fd_tol: float = 1e-6):
        """Symmetry of A^j on random states and a central-difference check of the Jacobian."""
        rng = np.random.default_rng(seed)
        m = self.components
        u = rng.uniform(-1.0, 1.0, size=(m, samples))
        v = rng.uniform(-1.0, 1.0, size=(m, samples))
        a = np.asarray(self.coeff(u), dtype=float)
        if a.shape != (self.dim, m, m, samples):
            raise InvalidSystem(f"{self.name}: coeff returned shape {a.shape}, expected {(self.dim, m, m, samples)}")
        asym = np.max(np.abs(a - np.swapaxes(a, 1, 2)))
        if asym != 0.0:
            raise InvalidSystem(f"{self.name}: coefficient matrices not symmetric (defect {asym:.3e})")
        jac = np.asarray(self.coeff_jacobian(u, v), dtype=float)
        fd = (np.asarray(self.coeff(u + fd_step * v)) - np.asarray(self.coeff(u - fd_step * v))) / (2 * fd_step)
        scale = max(np.max(np.abs(jac)), np.max(np.abs(fd)), 1e-300)
        if np.max(np.abs(jac)) == 0 and np.max(np.abs(fd)) == 0:
            return
        err = np.max(np.abs(jac - fd)) / scale
        if err > fd_tol:
            raise InvalidSystem(f"{self.name}: Jacobian disagrees with finite differences (rel err {err:.3e})")

    def jacobian_tensor(self, u: np.ndarray) -> np.ndarray:
        """J[j, a, b, c] = (DA^j(u) e_c)_{ab}, shape (dim, m, m, m, *pts)."""
        m = self.components
        pts = u.shape[1:]
        cols = []
        for c in range(m):
            e = np.zeros((m,) + pts)
            e[c] = 1.0
            cols.append(np.asarray(self.coeff_jacobian(u, e), dtype=float))
        return np.stack(cols, axis=3)

    def spectral_radius(self, u: Field) -> float:
        """max over points and j of the largest |eigenvalue| of A^j(u(x))."""
        a = np.asarray(self.coeff(u.values.reshape(self.components, -1)))
        if self.components == 1:
            return float(np.max(np.abs(a))) if a.size else 0.0
        mats = np.moveaxis(a, -1, 1)  # (dim, pts, m, m)
        return float(np.max(np.abs(np.linalg.eigvalsh(mats))))


# -- built-in instances -------------------------------------------------------


def _burgers_coeff(u):
    return u[None, None]  # (1, 1, 1, *pts)


def _burgers_jac(u, v):
    return v[None, None]


def _sym2_coeff(u):
    u1, u2 = u[0], u[1]
    return np.stack([np.stack([u1, u2]), np.stack([u2, -u1])])[None]


def _sym2_jac(u, v):
    return _sym2_coeff(v)


def _burgers2d_coeff(u):
    return np.stack([u[None], 0.5 * u[None]])


def _burgers2d_jac(u, v):
    return _burgers2d_coeff(v)


def zero_system(dim: int = 1, components: int = 1) -> HyperbolicSystem:
    def coeff(u):
        return np.zeros((dim, components, components) + u.shape[1:])

    return HyperbolicSystem(f"zero{dim}d{components}", dim, components, coeff, lambda u, v: coeff(u))


def transport_system(speeds) -> HyperbolicSystem:
    """Constant-coefficient system u_t = C^j d_j u with given symmetric matrices C^j."""
    mats = np.asarray(speeds, dtype=float)
    if mats.ndim == 1:
        mats = mats[:, None, None]
    dim, m = mats.shape[0], mats.shape[1]

    def coeff(u):
        return np.broadcast_to(mats.reshape(mats.shape + (1,) * (u.ndim - 1)), (dim, m, m) + u.shape[1:]).copy()

    def jac(u, v):
        return np.zeros((dim, m, m) + u.shape[1:])

    return HyperbolicSystem("transport", dim, m, coeff, jac)


_REGISTRY: dict[str, Callable[[], HyperbolicSystem]] = {
    "burgers": lambda: HyperbolicSystem("burgers", 1, 1, _burgers_coeff, _burgers_jac),
    "sym2": lambda: HyperbolicSystem("sym2", 1, 2, _sym2_coeff, _sym2_jac),
    "burgers2d": lambda: HyperbolicSystem("burgers2d", 2, 1, _burgers2d_coeff, _burgers2d_jac),
    "zero": lambda: zero_system(1, 1),
    "transport": lambda: transport_system([1.0]),
}


def register_system(name: str, dim: int, components: int, coeff: CoeffFn, coeff_jacobian: JacobianFn):
    """Add a custom system to the registry; it is validated immediately."""
    sys = HyperbolicSystem(name, dim, components, coeff, coeff_jacobian)
    _REGISTRY[name] = lambda: HyperbolicSystem(name, dim, components, coeff, coeff_jacobian, validate_on_init=False)
    return sys


def get_system(name: str) -> HyperbolicSystem:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown system {name!r}; known: {sorted(_REGISTRY)}") from None


def system_names() -> list[str]:
    return sorted(_REGISTRY)


# -- coefficient fields ---------------------------------------------------------


def _check_state(sys: HyperbolicSystem, *fields: Field):
    for f in fields:
        if f.components != sys.components:
            raise GridMismatch(f"{sys.name} has {sys.components} components, field has {f.components}")
        if f.grid.dim != sys.dim:
            raise GridMismatch(f"{sys.name} is {sys.dim}-dimensional, grid is {f.grid.dim}-dimensional")
    g0 = fields[0].grid
    for f in fields[1:]:
        if f.grid != g0:
            raise GridMismatch(f"{g0} vs {f.grid}")


@dataclass
class Coefficients:
    """n-grid amplitudes of a_j = A^j(u) (dim, m, m, ...) and M(u) (m, m, ...), plus du (dim, m, ...)."""

    a: np.ndarray
    M: np.ndarray
    du: np.ndarray


def coefficient_amplitudes(sys: HyperbolicSystem, grid: GridSpec, u: np.ndarray) -> Coefficients:
    """Dealiased coefficients from n-grid amplitudes ``u`` of the state."""
    d = grid.dim
    ufine = fine_values(u, d)
    a = coarse_amplitudes(np.asarray(sys.coeff(ufine), dtype=float), d, grid.n)
    jac = coarse_amplitudes(sys.jacobian_tensor(ufine), d, grid.n)  # (dim, m, m, m, ...)
    du = np.stack([derivative_amplitudes(u, grid, j) for j in range(d)])
    dufine = fine_values(du, d)
    jfine = fine_values(jac, d)
    # M_{ac} = sum_j sum_b J[j, a, b, c] d_j u_b
    mfine = np.einsum("jabc...,jb...->ac...", jfine, dufine)
    M = coarse_amplitudes(mfine, d, grid.n)
    return Coefficients(a=a, M=M, du=du)


def _finite_or_raise(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise BlowupDetected(f"non-finite values in {what}")
    return values


def _to_field(grid: GridSpec, amp: np.ndarray, what: str) -> Field:
    return Field(grid, _finite_or_raise(from_amplitudes(amp, grid.dim), what))


def n_amplitudes(sys: HyperbolicSystem, grid: GridSpec, u: np.ndarray) -> np.ndarray:
    d = grid.dim
    a = coarse_amplitudes(np.asarray(sys.coeff(fine_values(u, d)), dtype=float), d, grid.n)
    afine = fine_values(a, d)
    acc = sum(matvec(afine[j], fine_values(derivative_amplitudes(u, grid, j), d)) for j in range(d))
    return coarse_amplitudes(acc, d, grid.n)


def apply_N(sys: HyperbolicSystem, u: Field) -> Field:
    """N(u) = sum_j A^j(u) d_j u, coefficients composed on the padded grid."""
    _check_state(sys, u)
    return _to_field(u.grid, n_amplitudes(sys, u.grid, u.amplitudes()), "N(u)")


def linearized_amplitudes(sys, grid, coefs: Coefficients, v: np.ndarray) -> np.ndarray:
    d = grid.dim
    afine = fine_values(coefs.a, d)
    acc = matvec(fine_values(coefs.M, d), fine_values(v, d))
    for j in range(d):
        acc = acc + matvec(afine[j], fine_values(derivative_amplitudes(v, grid, j), d))
    return coarse_amplitudes(acc, d, grid.n)


def apply_linearized(sys: HyperbolicSystem, u: Field, v: Field) -> Field:
    """A^j(u) d_j v + (DA^j(u) v) d_j u."""
    _check_state(sys, u, v)
    coefs = coefficient_amplitudes(sys, u.grid, u.amplitudes())
    return _to_field(u.grid, linearized_amplitudes(sys, u.grid, coefs, v.amplitudes()), "linearized")


# -- paradifferential operator ----------------------------------------------------


class ParadiffOperator:
    """w -> T_{A^j(u)} d_j w + T_{M(u)} w for a frozen state u.

    Per-shell coefficients are precomputed on the padded grid so that repeated
    applications (inner time stepping) cost only the shell products.
    """

    def __init__(self, sys: HyperbolicSystem, u: Field, cfg: ParaConfig = ParaConfig(), drop_zeroth: bool = False):
        _check_state(sys, u)
        self.sys, self.grid, self.cfg, self.drop_zeroth = sys, u.grid, cfg, drop_zeroth
        grid, d = u.grid, u.grid.dim
        uamp = u.amplitudes()
        self._base = coefficient_amplitudes(sys, grid, uamp)
        self._shell_coefs: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for k in cfg.high_shells(grid):
            a_k, M_k = self._coefficients_at(k, uamp)
            self._shell_coefs[k] = (fine_values(a_k, d), fine_values(M_k, d))

    def _coefficients_at(self, k: int, uamp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        grid, cfg = self.grid, self.cfg
        m = cfg.coefficient_block(k)
        low = lambda amp, mm: amp * block_multiplier(grid.dim, grid.n, mm, cfg.profile)
        if cfg.quantization == "coeff-lowpass":
            return low(self._base.a, m), low(self._base.M, m)
        c = coefficient_amplitudes(self.sys, grid, low(uamp, m))
        if cfg.quantization == "arg-lowpass":
            return c.a, c.M
        outer = k - cfg.gap // 2 - 1
        return low(c.a, outer), low(c.M, outer)

    @property
    def coefficients(self) -> Coefficients:
        return self._base

    def apply_amplitudes(self, w: np.ndarray) -> np.ndarray:
        grid, d = self.grid, self.grid.dim
        dw = [derivative_amplitudes(w, grid, j) for j in range(d)]
        acc = None
        for k, (afine, Mfine) in self._shell_coefs.items():
            mult = shell_multiplier(d, grid.n, k, self.cfg.profile)
            term = None
            for j in range(d):
                piece = dw[j] * mult
                if np.any(piece):
                    t = matvec(afine[j], fine_values(piece, d))
                    term = t if term is None else term + t
            if not self.drop_zeroth:
                piece = w * mult
                if np.any(piece):
                    t = matvec(Mfine, fine_values(piece, d))
                    term = t if term is None else term + t
            if term is not None:
                acc = term if acc is None else acc + term
        if acc is None:
            return np.zeros_like(w, dtype=complex)
        return coarse_amplitudes(acc, d, grid.n)

    def __call__(self, w: Field) -> Field:
        return _to_field(self.grid, self.apply_amplitudes(w.amplitudes()), "paradifferential operator")


def apply_paradiff(
    sys: HyperbolicSystem, u: Field, w: Field, cfg: ParaConfig = ParaConfig(), drop_zeroth: bool = False
) -> Field:
    """T_{A^j(u)} d_j w + T_{DA^j(u) d_j u} w with the configured quantization."""
    _check_state(sys, u, w)
    return ParadiffOperator(sys, u, cfg, drop_zeroth)(w)


def perturbative_F(sys: HyperbolicSystem, u: Field, cfg: ParaConfig = ParaConfig()) -> Field:
    """F(u) = N(u) - T_{DN(u)} u, the exact complement of the paradifferential part."""
    _check_state(sys, u)
    op = ParadiffOperator(sys, u, cfg)
    uamp = u.amplitudes()
    return _to_field(u.grid, n_amplitudes(sys, u.grid, uamp) - op.apply_amplitudes(uamp), "F(u)")


def perturbative_F_displayed(sys: HyperbolicSystem, u: Field, cfg: ParaConfig = ParaConfig()) -> Field:
    """Pi(A^j(u), d_j u) + T_{d_j u} A^j(u) - T_{DA^j(u) d_j u} u, summed term by term.

    Coincides with :func:`perturbative_F` for the coeff-lowpass quantization (and for
    coefficients linear in u under every quantization).
    """
    _check_state(sys, u)
    grid = u.grid
    uamp = u.amplitudes()
    c = coefficient_amplitudes(sys, grid, uamp)
    total = -t_amplitudes(c.M, uamp, grid, cfg, matvec, low=0)
    for j in range(grid.dim):
        total = total + pi_amplitudes(c.a[j], c.du[j], grid, cfg, matvec)
        total = total + t_amplitudes(c.a[j], c.du[j], grid, cfg, matvec, low=1)
    return _to_field(grid, total, "F(u) displayed")


def linearized_remainder(
    sys: HyperbolicSystem, u: Field, v: Field, cfg: ParaConfig = ParaConfig()
) -> tuple[Field, Field]:
    """(F^lin_Pi(u) v, F^lin_T(u) v).

    The Pi part is summed from its definition; the T part is the complement, so
    linearized = paradiff(u, v) + Pi part + T part holds to round-off.
    """
    _check_state(sys, u, v)
    grid = u.grid
    op = ParadiffOperator(sys, u, cfg)
    c = op.coefficients
    vamp = v.amplitudes()
    lin = linearized_amplitudes(sys, grid, c, vamp)
    para = op.apply_amplitudes(vamp)
    pi_part = pi_amplitudes(c.M, vamp, grid, cfg, matvec)
    for j in range(grid.dim):
        pi_part = pi_part + pi_amplitudes(c.a[j], derivative_amplitudes(vamp, grid, j), grid, cfg, matvec)
    t_part = lin - para - pi_part
    return _to_field(grid, pi_part, "F_lin_Pi"), _to_field(grid, t_part, "F_lin_T")


def linearized_T_displayed(sys: HyperbolicSystem, u: Field, v: Field, cfg: ParaConfig = ParaConfig()) -> Field:
    """T_{d_j v} A^j(u) + T_v (DA^j(u) d_j u), summed from the definition."""
    _check_state(sys, u, v)
    grid = u.grid
    c = coefficient_amplitudes(sys, grid, u.amplitudes())
    vamp = v.amplitudes()
    total = t_amplitudes(c.M, vamp, grid, cfg, matvec, low=1)
    for j in range(grid.dim):
        total = total + t_amplitudes(c.a[j], derivative_amplitudes(vamp, grid, j), grid, cfg, matvec, low=1)
    return _to_field(grid, total, "F_lin_T displayed")


@dataclass(frozen=True)
class DifferenceReport:
    ratio: float
    ratio_l2: float
    difference: float
    rhs: float
    rhs_l2: float


def F_difference_check(
    sys: HyperbolicSystem, u: Field, v: Field, sigma: float, cfg: ParaConfig = ParaConfig()
) -> DifferenceReport:
    """|F(u) - F(v)|_{H^sigma} against B [|u-v|_{H^sigma} + |u-v|_inf (|u|_{H^sigma} + |v|_{H^sigma})],
    and the L2 difference against B |u-v|_{L2}; B = B(u) + B(v)."""
    _check_state(sys, u, v)
    dF = perturbative_F(sys, u, cfg) - perturbative_F(sys, v, cfg)
    w = u - v
    B = gradient_sup(u) + gradient_sup(v)
    rhs = B * (sobolev_norm(w, sigma) + sup_norm(w) * (sobolev_norm(u, sigma) + sobolev_norm(v, sigma)))
    rhs_l2 = B * l2_norm(w)
    diff = sobolev_norm(dF, sigma)
    diff_l2 = l2_norm(dF)
    ratio = diff / rhs if rhs > 0 else (0.0 if diff == 0 else np.inf)
    ratio_l2 = diff_l2 / rhs_l2 if rhs_l2 > 0 else (0.0 if diff_l2 == 0 else np.inf)
    return DifferenceReport(float(ratio), float(ratio_l2), diff, rhs, rhs_l2)
