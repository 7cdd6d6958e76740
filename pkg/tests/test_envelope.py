import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from parahyp.envelope import (
    envelope_from_norms,
    envelope_l2_distance,
    envelope_rows,
    propagation_audit,
    sharp_envelope,
    sharpness_bound,
    shell_norms,
    tail,
)
from parahyp.model import get_system
from parahyp.norms import sobolev_norm
from parahyp.solver import SolveConfig, solve
from parahyp.spectral import Field, GridSpec, lp_project

from conftest import smooth


def single_shell(g, k, s):
    f = lp_project(smooth(g, 1, decay=0.0), k)
    return f / sobolev_norm(f, s)


def test_single_shell_envelope(grid256):
    env = sharp_envelope(single_shell(grid256, 3, 3.0), 3.0, 0.25)
    k = np.arange(env.k_max + 1)
    assert np.allclose(env.c, 2.0 ** (-0.25 * np.abs(k - 3)), rtol=1e-12)


def test_zero_field(grid256):
    env = sharp_envelope(Field.zeros(grid256), 3.0)
    assert np.all(env.c == 0)
    assert env.slowly_varying() and env.dominates(env.shell_norms)


def test_delta_validation(grid256):
    with pytest.raises(ValueError):
        sharp_envelope(Field.zeros(grid256), 3.0, delta=1.0)


@given(seed=st.integers(0, 2**32 - 1), delta=st.sampled_from([0.1, 0.25, 0.5, 0.9]))
def test_envelope_axioms_and_sharpness(seed, delta):
    g = GridSpec(1, 256)
    u = smooth(g, seed, decay=2.0)
    env = sharp_envelope(u, 3.0, delta)
    assert env.dominates(env.shell_norms)
    assert env.slowly_varying()
    ratio = np.sum(env.c**2) / sobolev_norm(u, 3.0) ** 2
    assert 1 - 1e-12 <= ratio <= sharpness_bound(delta) * (1 + 1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_unbalanced_envelope(seed):
    u = smooth(GridSpec(1, 256), seed, decay=1.0)
    env = sharp_envelope(u, 3.0, 0.25, delta_hi=2.0)
    assert env.dominates(env.shell_norms) and env.slowly_varying()


def test_sharpness_bound_truncation():
    assert sharpness_bound(0.5, 50) == pytest.approx(sharpness_bound(0.5), rel=1e-12)
    assert sharpness_bound(0.5, 2) < sharpness_bound(0.5)


def test_tail_examples(grid256):
    env = sharp_envelope(smooth(grid256, 2), 3.0)
    assert tail(env, 0) == pytest.approx(env.l2())
    assert tail(env, env.k_max + 1) == 0.0
    values = [tail(env, h) for h in range(env.k_max + 2)]
    assert all(b <= a for a, b in zip(values, values[1:]))
    # single shell at 3, delta 1/2, long shell range: geometric series -> sqrt 2
    a = np.zeros(80)
    a[3] = 1.0
    assert tail(envelope_from_norms(a, 3.0, 0.5), 3) == pytest.approx(math.sqrt(2), rel=1e-12)


def test_distance_examples(grid256):
    u = single_shell(grid256, 3, 3.0)
    e1, e2 = sharp_envelope(u, 3.0), sharp_envelope(u * 2, 3.0)
    assert envelope_l2_distance(e1, e1) == 0
    k = np.arange(e1.k_max + 1)
    assert envelope_l2_distance(e1, e2) == pytest.approx(np.linalg.norm(2.0 ** (-0.25 * np.abs(k - 3))), rel=1e-12)
    with pytest.raises(ValueError):
        envelope_l2_distance(e1, sharp_envelope(u, 2.0))


@given(seed=st.integers(0, 2**32 - 1))
def test_distance_triangle(seed):
    g = GridSpec(1, 128)
    rng = np.random.default_rng(seed)
    a, b, c = (sharp_envelope(smooth(g, int(rng.integers(2**32)), decay=1.5), 2.0) for _ in range(3))
    assert envelope_l2_distance(a, c) <= envelope_l2_distance(a, b) + envelope_l2_distance(b, c) + 1e-12


class _Frozen:
    def __init__(self, u, n):
        self.times = list(np.linspace(0, 1, n))
        self.states = [u] * n


def test_propagation_constant_and_zero(grid256):
    u = smooth(grid256, 3)
    env = sharp_envelope(u, 3.0)
    rep = propagation_audit(_Frozen(u, 4), env)
    assert np.allclose(rep.ratios, rep.ratios[0])
    assert rep.max_ratio <= 1.0 + 1e-12
    z = Field.zeros(grid256)
    assert propagation_audit(_Frozen(z, 3), sharp_envelope(z, 3.0)).max_ratio == 0.0


def test_propagation_under_refinement():
    sys = get_system("burgers")
    worst = []
    for n in (128, 256):
        g = GridSpec(1, n)
        u0 = Field.from_function(g, np.sin)
        traj = solve(sys, u0, SolveConfig(scheme="galerkin", T=0.5, monitor_every=10))
        rep = propagation_audit(traj, sharp_envelope(u0, 3.0))
        assert math.isfinite(rep.max_ratio)
        worst.append(rep.max_ratio)
    assert max(worst) / min(worst) <= 2.0


def test_rows(grid256):
    rows = envelope_rows(sharp_envelope(smooth(grid256, 1), 3.0))
    assert [r["k"] for r in rows] == list(range(8))
    assert all(r["a_k"] <= r["c_k"] for r in rows)


def test_shell_norms_sum(grid256):
    u = smooth(grid256, 4, decay=1.0)
    assert np.sum(shell_norms(u, 2.0) ** 2) == pytest.approx(sobolev_norm(u, 2.0) ** 2, rel=1e-12)
