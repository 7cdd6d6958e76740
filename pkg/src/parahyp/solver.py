"""Time-advance schemes and trajectories.

* ``euler_reg``  regularise on the scale eps^{-1/2}, then one explicit Euler step;
* ``iteration``  u^{n+1}_t = T_{DN(u^n)} u^{n+1} + F(u^n), integrated with RK4;
* ``parabolic``  u_t = N(u) - nu (-Lap)^p u, integrating-factor RK4;
* ``galerkin``   u_t = P_{<2^h} N(P_{<2^h} u), RK4.

Every solver records, per stored sample, the H^s and L2 norms, A, B and the
running integral of B (trapezoid over every step, not only stored samples).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .model import HyperbolicSystem, ParadiffOperator, n_amplitudes
from .norms import control_params, l2_norm, sobolev_norm, sobolev_norm_amplitudes
from .paraproduct import ParaConfig
from .spectral import (
    BlowupDetected,
    Field,
    GridSpec,
    Profile,
    from_amplitudes,
    low_pass,
    lowpass_multiplier,
    wavenumber_magnitude,
)

Scheme = Literal["euler_reg", "iteration", "parabolic", "galerkin"]
SCHEMES = ("euler_reg", "iteration", "parabolic", "galerkin")
CFL_LIMIT = 0.5
CFL_TARGET = 0.25
MAX_DT = 1e-2


class GridTooCoarse(ValueError):
    pass


class CFLViolation(ValueError):
    pass


class NonContraction(RuntimeError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolveConfig:
    scheme: Scheme = "euler_reg"
    epsilon: float = 2.0**-8
    T: float = 0.5
    s: float = 3.0
    inner_dt: float | None = None
    nu: float = 1e-3
    h_cut: int | None = None
    para: ParaConfig = field(default_factory=ParaConfig)
    monitor_every: int = 1
    blowup_factor: float = 1e6
    # optional resolution-loss stop: B >= fraction * A * (resolved cutoff), i.e. the
    # steepest gradient the grid can carry at this amplitude
    gradient_fraction: float | None = None
    lowpass_profile: Profile = "sharp"
    dissipation_power: int = 1
    drop_zeroth: bool = False
    max_iterations: int = 12

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.epsilon <= 0 or self.T <= 0:
            raise ValueError("epsilon and T must be positive")
        if self.monitor_every < 1:
            raise ValueError("monitor_every must be >= 1")

    def check_threshold(self, dim: int):
        if self.s <= dim / 2 + 1:
            warnings.warn(f"s = {self.s} is at or below the well-posedness threshold {dim / 2 + 1}", stacklevel=3)


@dataclass
class Trajectory:
    times: list[float]
    states: list[Field]
    s: float
    scheme: str
    diagnostics: dict[str, list[float]] = field(default_factory=lambda: {k: [] for k in DIAG_KEYS})
    blowup_time: float | None = None

    @property
    def final(self) -> Field:
        return self.states[-1]

    def diag(self, key: str) -> np.ndarray:
        return np.asarray(self.diagnostics[key])

    def at(self, t: float) -> Field:
        """Linear interpolation between stored samples."""
        ts = self.times
        if t <= ts[0]:
            return self.states[0]
        if t >= ts[-1]:
            return self.states[-1]
        i = int(np.searchsorted(ts, t, side="right")) - 1
        w = (t - ts[i]) / (ts[i + 1] - ts[i])
        return self.states[i] * (1 - w) + self.states[i + 1] * w

    def rows(self) -> list[dict]:
        out = []
        for i, t in enumerate(self.times):
            row = {"t": t}
            st = self.states[i]
            for a in range(st.components):
                row[f"l2_c{a}"] = l2_norm(st.like(st.values[a : a + 1]))
            for key in DIAG_KEYS:
                row[key] = self.diagnostics[key][i]
            out.append(row)
        return out


DIAG_KEYS = ("hs", "l2", "A", "B", "intB")


class _Monitor:
    """Tracks B every step, stores samples, and applies the blow-up rules."""

    def __init__(self, sys: HyperbolicSystem, u0: Field, cfg: SolveConfig, resolved_cutoff: float):
        self.cfg = cfg
        self.traj = Trajectory(times=[], states=[], s=cfg.s, scheme=cfg.scheme)
        self.hs0 = sobolev_norm(u0, cfg.s)
        self.cutoff = resolved_cutoff
        self.int_b = 0.0
        self.last = None  # (t, B)
        self.step = 0
        self.observe(0.0, u0, force=True)

    def observe(self, t: float, u: Field, force: bool = False):
        cp = control_params(u)
        if self.last is not None:
            t0, b0 = self.last
            self.int_b += 0.5 * (b0 + cp.B) * (t - t0)
        self.last = (t, cp.B)
        hs = sobolev_norm(u, self.cfg.s)
        store = force or self.step % self.cfg.monitor_every == 0
        self.step += 1
        reason = self._blowup_reason(hs, cp)
        if store or reason:
            self._store(t, u, hs, cp)
        if reason:
            self.traj.blowup_time = t
            raise BlowupDetected(f"{reason} at t = {t:.6g}", time=t, trajectory=self.traj)

    def finish(self, t: float, u: Field):
        if not self.traj.times or self.traj.times[-1] != t:
            cp = control_params(u)
            self._store(t, u, sobolev_norm(u, self.cfg.s), cp)
        return self.traj

    def _store(self, t, u, hs, cp):
        tr = self.traj
        if tr.times and t <= tr.times[-1]:
            return
        tr.times.append(float(t))
        tr.states.append(u)
        for key, val in zip(DIAG_KEYS, (hs, l2_norm(u), cp.A, cp.B, self.int_b)):
            tr.diagnostics[key].append(float(val))

    def _blowup_reason(self, hs: float, cp) -> str | None:
        if not math.isfinite(hs):
            return "non-finite H^s norm"
        if self.hs0 > 0 and hs > self.cfg.blowup_factor * self.hs0:
            return f"H^s norm exceeded {self.cfg.blowup_factor:g} x initial"
        frac = self.cfg.gradient_fraction
        if frac is not None and cp.B > 0 and cp.B >= frac * cp.A * self.cutoff:
            return f"gradient {cp.B:.4g} reached {frac:g} x A x cutoff {self.cutoff:g}"
        return None


def _wrap_blowup(monitor: _Monitor, t: float):
    """Attach the partial trajectory to a BlowupDetected raised while building a Field."""
    return BlowupDetected(f"non-finite state at t = {t:.6g}", time=t, trajectory=monitor.traj)


# -- S1: regularisation + Euler --------------------------------------------------


@dataclass(frozen=True)
class StepReport:
    regularization_ratio: float  # |u~|_{H^{s+1}} / (eps^{-1/2} |u|_{H^s})
    energy_ratio: float  # |u~|_{H^s}^2 / |u|_{H^s}^2
    truncation_l2: float  # |u~ - u|_{L2}
    data_hs: float  # |u|_{H^s}
    defect_l2: float  # |u_next - u - eps N(u)|_{L2}
    step_energy_ratio: float  # |u_next|_{H^s} / |u|_{H^s}


def regularization_cutoff(epsilon: float, grid: GridSpec) -> float:
    lam = epsilon**-0.5
    if lam >= grid.nyquist:
        raise GridTooCoarse(f"eps^(-1/2) = {lam:.4g} is not below the Nyquist frequency {grid.nyquist}")
    return lam


def euler_reg_step(
    sys: HyperbolicSystem, u: Field, epsilon: float, cfg: SolveConfig | None = None, audit: bool = True
) -> tuple[Field, StepReport | None]:
    """u~ = P_{<eps^{-1/2}} u, u_next = u~ + eps N(u~)."""
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    cfg = cfg or SolveConfig()
    lam = regularization_cutoff(epsilon, u.grid)
    ut = low_pass(u, lam, cfg.lowpass_profile)
    nt = Field(u.grid, from_amplitudes(n_amplitudes(sys, u.grid, ut.amplitudes()), u.grid.dim))
    u_next = ut + nt * epsilon
    if not audit:
        return u_next, None
    s = cfg.s
    hs = sobolev_norm(u, s)
    hs_t = sobolev_norm(ut, s)
    nu = Field(u.grid, from_amplitudes(n_amplitudes(sys, u.grid, u.amplitudes()), u.grid.dim))
    safe = lambda a, b: a / b if b > 0 else 0.0
    report = StepReport(
        regularization_ratio=safe(sobolev_norm(ut, s + 1), lam * hs),
        energy_ratio=safe(hs_t**2, hs**2),
        truncation_l2=l2_norm(ut - u),
        data_hs=hs,
        defect_l2=l2_norm(u_next - u - nu * epsilon),
        step_energy_ratio=safe(sobolev_norm(u_next, s), hs),
    )
    return u_next, report


def _solve_euler(sys, u0, cfg: SolveConfig) -> Trajectory:
    eps = cfg.epsilon
    lam = regularization_cutoff(eps, u0.grid)
    mon = _Monitor(sys, u0, cfg, lam)
    nsteps = math.ceil(cfg.T / eps - 1e-9)
    u, t = u0, 0.0
    for j in range(nsteps):
        try:
            u_next, _ = euler_reg_step(sys, u, eps, cfg, audit=False)
        except BlowupDetected:
            raise _wrap_blowup(mon, t) from None
        t_next = (j + 1) * eps
        if t_next > cfg.T + 1e-12:
            w = (cfg.T - t) / eps
            u_next = u * (1 - w) + u_next * w
            t_next = cfg.T
        u, t = u_next, t_next
        mon.observe(t, u)
    return mon.finish(t, u)


# -- explicit RK4 machinery -------------------------------------------------------------


def _spectral_radius(sys: HyperbolicSystem, u: Field) -> float:
    return sys.spectral_radius(u)


def _pick_dt(sys, u0: Field, cfg: SolveConfig) -> float:
    n = u0.grid.n
    amax = _spectral_radius(sys, u0)
    if cfg.inner_dt is not None:
        if cfg.inner_dt * n * amax > CFL_LIMIT:
            raise CFLViolation(f"inner_dt*N*max|A| = {cfg.inner_dt * n * amax:.3g} exceeds {CFL_LIMIT}")
        dt = cfg.inner_dt
    else:
        dt = CFL_TARGET / (n * amax) if amax > 0 else MAX_DT
        dt = min(dt, MAX_DT)
    steps = max(1, math.ceil(cfg.T / dt - 1e-9))
    return cfg.T / steps


def _cfl_guard(sys, u: Field, dt: float):
    c = dt * u.grid.n * _spectral_radius(sys, u)
    if c > CFL_LIMIT:
        raise CFLViolation(f"inner_dt*N*max|A| = {c:.3g} exceeds {CFL_LIMIT} during the run")


def _rk4_solve(sys, u0: Field, cfg: SolveConfig, rhs, cutoff: float, linear=None) -> Trajectory:
    """Integrate amplitudes with classical RK4, or IF-RK4 when ``linear`` (a diagonal symbol) is given."""
    grid = u0.grid
    dt = _pick_dt(sys, u0, cfg)
    steps = round(cfg.T / dt)
    mon = _Monitor(sys, u0, cfg, cutoff)
    c = u0.amplitudes()
    if linear is not None:
        e1 = np.exp(linear * dt)
        e2 = np.exp(linear * dt / 2)
    t = 0.0
    for i in range(steps):
        if linear is None:
            k1 = rhs(c)
            k2 = rhs(c + 0.5 * dt * k1)
            k3 = rhs(c + 0.5 * dt * k2)
            k4 = rhs(c + dt * k3)
            c = c + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        else:
            k1 = rhs(c)
            k2 = rhs(e2 * (c + 0.5 * dt * k1))
            k3 = rhs(e2 * c + 0.5 * dt * k2)
            k4 = rhs(e1 * c + dt * e2 * k3)
            c = e1 * c + dt / 6 * (e1 * k1 + 2 * e2 * (k2 + k3) + k4)
        t = (i + 1) * dt
        try:
            u = Field.from_amplitudes(grid, c)
        except BlowupDetected:
            raise _wrap_blowup(mon, t) from None
        mon.observe(t, u)
        if i + 1 < steps:
            _cfl_guard(sys, u, dt)
    return mon.finish(t, Field.from_amplitudes(grid, c))


def _n_rhs(sys, grid):
    def rhs(c):
        out = n_amplitudes(sys, grid, c)
        if not np.all(np.isfinite(out)):
            raise BlowupDetected("non-finite right-hand side")
        return out

    return rhs


def parabolic_solve(sys: HyperbolicSystem, u0: Field, cfg: SolveConfig) -> Trajectory:
    """u_t = N(u) - nu (-Lap)^p u with the dissipation handled by an integrating factor."""
    if cfg.nu <= 0:
        raise ValueError("parabolic regularisation needs nu > 0")
    grid = u0.grid
    kmag = wavenumber_magnitude(grid.dim, grid.n)
    symbol = -cfg.nu * kmag ** (2 * cfg.dissipation_power)
    return _rk4_solve(sys, u0, cfg, _n_rhs(sys, grid), grid.nyquist, linear=symbol)


def galerkin_solve(sys: HyperbolicSystem, u0: Field, cfg: SolveConfig) -> Trajectory:
    """u_t = P_{<2^h} N(P_{<2^h} u); modes at or above 2^h keep their initial amplitudes."""
    grid = u0.grid
    if cfg.h_cut is None:
        mask = np.ones(grid.shape)
        cutoff = float(grid.nyquist)
    else:
        if cfg.h_cut < 0:
            raise ValueError("h_cut must be >= 0")
        cutoff = 2.0**cfg.h_cut
        mask = lowpass_multiplier(grid.dim, grid.n, cutoff, "sharp")
        cutoff = min(cutoff, grid.nyquist)
    n_rhs = _n_rhs(sys, grid)

    def rhs(c):
        return mask * n_rhs(mask * c)

    return _rk4_solve(sys, u0, cfg, rhs, cutoff)


# -- S2: paradifferential iteration -------------------------------------------------


@dataclass
class ContractionReport:
    distances: list[float]  # d_n = sup_t |u^n - u^{n-1}|_{L2}, n = 1, 2, ...
    ratios: list[float]  # d_n / d_{n-1}, n = 2, 3, ...
    iterations: int
    converged: bool
    dt: float


class _Path:
    """A sampled-in-time iterate: amplitudes and time derivatives at the full steps."""

    def __init__(self, values: list[np.ndarray], rates: list[np.ndarray], dt: float):
        self.values, self.rates, self.dt = values, rates, dt

    def midpoint(self, i: int) -> np.ndarray:
        # cubic Hermite interpolation at t_i + dt/2
        return 0.5 * (self.values[i] + self.values[i + 1]) + self.dt / 8 * (self.rates[i] - self.rates[i + 1])


def _frozen_terms(sys, grid, cfg: SolveConfig, amp: np.ndarray):
    u = Field.from_amplitudes(grid, amp)
    op = ParadiffOperator(sys, u, cfg.para, cfg.drop_zeroth)
    forcing = n_amplitudes(sys, grid, amp) - op.apply_amplitudes(amp)
    return op, forcing


def _iterate_once(sys, grid, cfg: SolveConfig, prev: _Path, c0: np.ndarray, dt: float, steps: int) -> _Path:
    full = [_frozen_terms(sys, grid, cfg, prev.values[i]) for i in range(steps + 1)]
    mids = [_frozen_terms(sys, grid, cfg, prev.midpoint(i)) for i in range(steps)]

    def f(terms, w):
        op, forcing = terms
        return op.apply_amplitudes(w) + forcing

    c = c0.copy()
    values, rates = [c], []
    for i in range(steps):
        k1 = f(full[i], c)
        k2 = f(mids[i], c + 0.5 * dt * k1)
        k3 = f(mids[i], c + 0.5 * dt * k2)
        k4 = f(full[i + 1], c + dt * k3)
        rates.append(k1)
        c = c + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(c)):
            raise BlowupDetected("non-finite iterate")
        values.append(c)
    rates.append(f(full[steps], c))
    return _Path(values, rates, dt)


def iteration_solve(sys: HyperbolicSystem, u0: Field, cfg: SolveConfig) -> tuple[Trajectory, ContractionReport]:
    """Fixed-point iteration on the paradifferential formulation with RK4 inner steps.

    Stops when d_n <= 1e-10 |u0|_{L2} or after ``max_iterations``; raises
    NonContraction after two consecutive ratios >= 1.
    """
    grid = u0.grid
    dt = _pick_dt(sys, u0, cfg)
    steps = round(cfg.T / dt)
    c0 = u0.amplitudes()
    zero = np.zeros_like(c0)
    path = _Path([c0] * (steps + 1), [zero] * (steps + 1), dt)
    tol = 1e-10 * l2_norm(u0)
    distances: list[float] = []
    ratios: list[float] = []
    converged = False
    above = 0
    for n in range(1, cfg.max_iterations + 1):
        new = _iterate_once(sys, grid, cfg, path, c0, dt, steps)
        d = max(sobolev_norm_amplitudes(a - b, grid, 0.0) for a, b in zip(new.values, path.values))
        distances.append(d)
        if len(distances) >= 2 and distances[-2] > 0:
            ratios.append(d / distances[-2])
            above = above + 1 if ratios[-1] >= 1 else 0
        path = new
        for c in path.values:
            _cfl_guard(sys, Field.from_amplitudes(grid, c), dt)
        if d <= tol:
            converged = True
            break
        if above >= 2:
            report = ContractionReport(distances, ratios, n, False, dt)
            raise NonContraction(f"iteration ratios >= 1 twice in a row ({ratios[-2]:.3g}, {ratios[-1]:.3g})", report)
    report = ContractionReport(distances, ratios, len(distances), converged, dt)
    mon = _Monitor(sys, u0, cfg, grid.nyquist)
    for i in range(1, steps + 1):
        mon.observe(i * dt, Field.from_amplitudes(grid, path.values[i]))
    return mon.finish(steps * dt, Field.from_amplitudes(grid, path.values[-1])), report


# -- dispatcher --------------------------------------------------------------------------


def solve(sys: HyperbolicSystem, u0: Field, cfg: SolveConfig) -> Trajectory:
    """Advance u0 to cfg.T with the configured scheme.

    Raises BlowupDetected (with ``.trajectory``) or GridTooCoarse.
    """
    if u0.components != sys.components or u0.grid.dim != sys.dim:
        raise ValueError(f"initial data incompatible with system {sys.name}")
    cfg.check_threshold(u0.grid.dim)
    if cfg.scheme == "euler_reg":
        return _solve_euler(sys, u0, cfg)
    if cfg.scheme == "parabolic":
        return parabolic_solve(sys, u0, cfg)
    if cfg.scheme == "galerkin":
        return galerkin_solve(sys, u0, cfg)
    return iteration_solve(sys, u0, cfg)[0]


def with_scheme(cfg: SolveConfig, scheme: str, **changes) -> SolveConfig:
    return replace(cfg, scheme=scheme, **changes)
