"""Frequency envelopes: sharp construction from dyadic H^s shell norms, tails, audits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .norms import sobolev_norm_amplitudes
from .spectral import Field, GridSpec, Profile, shell_multiplier

SLACK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FrequencyEnvelope:
    """c_k for k = 0..k_max; ``delta_hi`` differs from ``delta`` only in the unbalanced mode.

    Slow variation reads c_k / c_j <= 2^{delta (j - k)} for k < j and
    c_k / c_j <= 2^{delta_hi (k - j)} for k > j.
    """

    s: float
    delta: float
    c: np.ndarray
    shell_norms: np.ndarray | None = None
    delta_hi: float | None = None
    profile: Profile = "sharp"

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))

    @property
    def k_max(self) -> int:
        return len(self.c) - 1

    @property
    def upward_slack(self) -> float:
        return self.delta if self.delta_hi is None else self.delta_hi

    def slack_matrix(self) -> np.ndarray:
        """E[k, j] with c_k <= 2^{E[k, j]} c_j required."""
        k = np.arange(len(self.c))
        diff = k[:, None] - k[None, :]  # k - j
        return np.where(diff > 0, self.upward_slack * diff, self.delta * (-diff))

    def slowly_varying(self) -> bool:
        c = self.c
        bound = np.exp2(self.slack_matrix()) * c[None, :] * (1 + SLACK_TOL)
        return bool(np.all(c[:, None] <= bound))

    def dominates(self, shell_norms: np.ndarray) -> bool:
        a = np.asarray(shell_norms, dtype=float)
        return bool(np.all(a[: len(self.c)] <= self.c))

    def l2(self) -> float:
        return float(np.sqrt(np.sum(self.c**2)))


def shell_norms(u: Field, s: float, profile: Profile = "sharp") -> np.ndarray:
    """a_k = |P_k u|_{H^s} for every shell resolved by the grid."""
    coef = u.amplitudes()
    grid = u.grid
    return np.array(
        [sobolev_norm_amplitudes(coef * shell_multiplier(grid.dim, grid.n, k, profile), grid, s) for k in range(grid.max_shell + 1)]
    )


def envelope_from_norms(
    a: np.ndarray, s: float, delta: float, delta_hi: float | None = None, profile: Profile = "sharp"
) -> FrequencyEnvelope:
    """c_k = max_j 2^{-w(k, j)} a_j with w(k, j) = delta_hi (j - k) for j > k, delta (k - j) for j < k."""
    a = np.asarray(a, dtype=float)
    hi = delta if delta_hi is None else delta_hi
    k = np.arange(len(a))
    diff = k[None, :] - k[:, None]  # j - k
    weight = np.where(diff > 0, hi * diff, delta * (-diff))
    c = np.max(np.exp2(-weight) * a[None, :], axis=1)
    return FrequencyEnvelope(s=s, delta=delta, c=c, shell_norms=a, delta_hi=delta_hi, profile=profile)


def sharp_envelope(
    u: Field, s: float, delta: float = 0.25, delta_hi: float | None = None, profile: Profile = "sharp"
) -> FrequencyEnvelope:
    """Sharp envelope of u in H^s; pass ``delta_hi`` (e.g. 2) for the unbalanced variant."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return envelope_from_norms(shell_norms(u, s, profile), s, delta, delta_hi, profile)


def sharpness_bound(delta: float, k_max: int | None = None) -> float:
    """C(delta) = sum_m 2^{-2 delta |m|}; truncated to |m| <= k_max when given."""
    if k_max is None:
        q = 2.0 ** (-2 * delta)
        return (1 + q) / (1 - q)
    m = np.arange(-k_max, k_max + 1)
    return float(np.sum(np.exp2(-2 * delta * np.abs(m))))


def tail(env: FrequencyEnvelope, h: int) -> float:
    """c_{>=h} = (sum_{m >= h} c_m^2)^{1/2}; zero beyond k_max."""
    if h > env.k_max:
        return 0.0
    return float(np.sqrt(np.sum(env.c[max(h, 0):] ** 2)))


def envelope_l2_distance(a: FrequencyEnvelope, b: FrequencyEnvelope) -> float:
    if a.c.shape != b.c.shape or a.s != b.s or a.delta != b.delta:
        raise ValueError("envelopes differ in length, s or delta")
    return float(np.linalg.norm(a.c - b.c))


@dataclass(frozen=True)
class PropagationReport:
    max_ratio: float
    ratios: np.ndarray  # (samples, shells)
    times: np.ndarray
    exponent: float
    h: int | None


def propagation_audit(traj, env0: FrequencyEnvelope, h: int | None = None, exponent: float = 2.0) -> PropagationReport:
    """max over samples and shells of |P_k u(t)|_{H^s} / (c_k 2^{-exponent (k - h)_+})."""
    times = np.asarray(traj.times)
    rows = []
    for state in traj.states:
        a = shell_norms(state, env0.s, env0.profile)[: len(env0.c)]
        k = np.arange(len(a))
        damp = np.ones_like(a) if h is None else np.exp2(-exponent * np.maximum(k - h, 0))
        bound = env0.c * damp
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(bound > 0, a / np.where(bound > 0, bound, 1.0), np.where(a > 0, np.inf, 0.0))
        rows.append(r)
    ratios = np.array(rows)
    return PropagationReport(float(np.max(ratios)) if ratios.size else 0.0, ratios, times, exponent, h)


def envelope_rows(env: FrequencyEnvelope) -> list[dict]:
    a = env.shell_norms if env.shell_norms is not None else np.full_like(env.c, math.nan)
    return [{"k": k, "a_k": float(a[k]), "c_k": float(env.c[k])} for k in range(len(env.c))]
