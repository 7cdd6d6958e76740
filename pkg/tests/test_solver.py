import math

import numpy as np
import pytest

from parahyp.harness import fit_slope, random_field
from parahyp.model import get_system, transport_system, zero_system
from parahyp.norms import l2_norm, sobolev_norm
from parahyp.oracle import characteristics_solution
from parahyp.paraproduct import ParaConfig
from parahyp.solver import (
    CFLViolation,
    GridTooCoarse,
    NonContraction,
    SolveConfig,
    euler_reg_step,
    galerkin_solve,
    iteration_solve,
    parabolic_solve,
    solve,
)
from parahyp.spectral import BlowupDetected, Field, GridSpec, low_pass, lowpass_multiplier, wavenumber_magnitude

BURGERS = get_system("burgers")


def sine(g):
    return Field.from_function(g, np.sin)


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(scheme="leapfrog")
    with pytest.raises(ValueError):
        SolveConfig(T=0)


def test_threshold_warning(grid256):
    with pytest.warns(UserWarning):
        solve(BURGERS, sine(grid256), SolveConfig(s=1.0, T=0.01, epsilon=2.0**-10))


def test_step_fixed_point_on_constants(grid256):
    u = Field.constant(grid256, 0.4)
    nxt, rep = euler_reg_step(BURGERS, u, 2.0**-8)
    assert np.array_equal(nxt.values, u.values)
    assert rep.defect_l2 == 0


def test_step_grid_too_coarse(grid256):
    with pytest.raises(GridTooCoarse):
        euler_reg_step(BURGERS, sine(grid256), 2.0**-15)
    with pytest.raises(ValueError):
        euler_reg_step(BURGERS, sine(grid256), 0.75)


def test_step_audits(grid256):
    u = random_field(grid256, np.random.default_rng(0), 2.0)
    _, rep = euler_reg_step(BURGERS, u, 2.0**-8)
    assert rep.regularization_ratio <= 1.0 + 1e-12  # |P_<lam u|_{s+1} <= lam |u|_s for a sharp cutoff
    assert rep.energy_ratio <= 1.0 + 1e-12
    assert rep.truncation_l2 > 0
    assert rep.data_hs == pytest.approx(sobolev_norm(u, 3.0))


def test_single_step_order_on_rough_datum(grid256):
    """|u_1 - u_0 - eps N(u_0)| = O(eps^2) when the truncation error is itself O(eps^2)."""
    u = random_field(grid256, np.random.default_rng(1), 5.0, scale=0.5)
    eps = [2.0**-j for j in range(6, 13)]
    defects = [euler_reg_step(BURGERS, u, e)[1].defect_l2 for e in eps]
    assert fit_slope(eps, defects) >= 1.9


def test_step_energy_constant_stable_in_eps(grid256):
    u0 = sine(grid256)
    cs = []
    for j in (8, 9, 10):
        eps = 2.0**-j
        u, worst = u0, 0.0
        for _ in range(int(0.3 / eps)):
            u, rep = euler_reg_step(BURGERS, u, eps)
            worst = max(worst, (rep.step_energy_ratio - 1) / eps)
        cs.append(worst)
    assert max(cs) / min(cs) <= 2.0


@pytest.mark.parametrize("scheme", ["euler_reg", "iteration", "parabolic", "galerkin"])
def test_constant_data_stay_constant(grid256, scheme):
    u0 = Field.constant(grid256, 0.3)
    traj = solve(BURGERS, u0, SolveConfig(scheme=scheme, T=0.05, para=ParaConfig(gap=3)))
    assert all(np.array_equal(st.values, u0.values) for st in traj.states)
    assert traj.diag("intB")[-1] == 0


@pytest.mark.parametrize("scheme", ["euler_reg", "iteration", "parabolic", "galerkin"])
def test_zero_system_consistency(grid256, scheme):
    sys = zero_system(1, 1)
    u0 = low_pass(random_field(grid256, np.random.default_rng(2), 4.0), 30.0)
    traj = solve(sys, u0, SolveConfig(scheme=scheme, T=0.05, nu=1e-12, epsilon=2.0**-10))
    assert l2_norm(traj.final - u0) <= 1e-10 * l2_norm(u0)


def test_times_strictly_increasing_and_interpolation(grid256):
    traj = solve(BURGERS, sine(grid256), SolveConfig(epsilon=2.0**-8, T=0.1))
    assert all(b > a for a, b in zip(traj.times, traj.times[1:]))
    assert traj.times[-1] == pytest.approx(0.1)
    mid = 0.5 * (traj.times[3] + traj.times[4])
    expect = (traj.states[3] + traj.states[4]) * 0.5
    assert l2_norm(traj.at(mid) - expect) <= 1e-15


def test_monitor_every(grid256):
    traj = solve(BURGERS, sine(grid256), SolveConfig(epsilon=2.0**-8, T=0.1, monitor_every=5))
    assert len(traj.times) < 10
    assert traj.times[-1] == pytest.approx(0.1)


def test_s1_converges_to_oracle(grid256):
    x = grid256.coordinates()[0]
    exact = Field(grid256, characteristics_solution(np.sin, np.cos, 0.5, x))
    errs = [l2_norm(solve(BURGERS, sine(grid256), SolveConfig(epsilon=2.0**-j, T=0.5)).final - exact) for j in (7, 8, 9)]
    assert errs[0] > errs[1] > errs[2]


def test_s1_matches_parabolic_on_sym2(grid256):
    sys = get_system("sym2")
    u0 = Field.from_function(grid256, lambda x: np.stack([np.sin(x), 0.5 * np.cos(x)]))
    a = solve(sys, u0, SolveConfig(epsilon=2.0**-10, T=0.3)).final
    b = solve(sys, u0, SolveConfig(scheme="parabolic", nu=1e-4, T=0.3)).final
    assert l2_norm(a - b) <= 5e-3


def test_blowup_carries_partial_trajectory():
    g = GridSpec(1, 128)
    with pytest.raises(BlowupDetected) as info:
        solve(BURGERS, sine(g), SolveConfig(scheme="galerkin", T=1.5, gradient_fraction=0.2))
    exc = info.value
    assert 0.9 <= exc.time < 1.0
    assert exc.trajectory.times[-1] == exc.time
    assert np.all(np.isfinite(exc.trajectory.diag("hs")))


def test_blowup_factor_threshold(grid256):
    with pytest.raises(BlowupDetected):
        solve(BURGERS, sine(grid256), SolveConfig(scheme="galerkin", T=1.0, blowup_factor=10.0))


# -- iteration ------------------------------------------------------------------------------


def test_iteration_constant_converges_at_once(grid256):
    _, rep = iteration_solve(BURGERS, Field.constant(grid256, 0.2), SolveConfig(scheme="iteration", T=0.05))
    assert rep.iterations == 1 and rep.converged


@pytest.mark.parametrize("gap", [2, 8])
def test_iteration_contracts(grid256, gap):
    cfg = SolveConfig(scheme="iteration", T=0.05, para=ParaConfig(gap=gap))
    _, rep = iteration_solve(BURGERS, sine(grid256), cfg)
    assert rep.converged
    assert max(rep.ratios) <= 0.5


def test_iteration_agrees_with_direct_solve(grid256):
    traj, _ = iteration_solve(BURGERS, sine(grid256), SolveConfig(scheme="iteration", T=0.05, para=ParaConfig(gap=2)))
    ref = solve(BURGERS, sine(grid256), SolveConfig(scheme="galerkin", T=0.05))
    assert l2_norm(traj.final - ref.final) <= 1e-8


def test_iteration_non_contraction():
    g = GridSpec(1, 64)
    u0 = Field.from_function(g, lambda x: 3 * np.sin(x))
    with pytest.raises((NonContraction, BlowupDetected, CFLViolation)):
        iteration_solve(BURGERS, u0, SolveConfig(scheme="iteration", T=2.0, max_iterations=12))


def test_inner_cfl_guard(grid256):
    with pytest.raises(CFLViolation):
        solve(BURGERS, sine(grid256), SolveConfig(scheme="galerkin", T=0.1, inner_dt=0.01))


# -- parabolic and Galerkin references ----------------------------------------------------------


def test_heat_multiplier_exact(grid256):
    u0 = random_field(grid256, np.random.default_rng(3), 2.0)
    nu, T = 1e-2, 0.2
    traj = parabolic_solve(zero_system(1, 1), u0, SolveConfig(scheme="parabolic", nu=nu, T=T))
    l2 = traj.diag("l2")
    assert all(b <= a for a, b in zip(l2, l2[1:]))
    expected = Field.from_amplitudes(grid256, u0.amplitudes() * np.exp(-nu * T * wavenumber_magnitude(1, 256) ** 2))
    assert l2_norm(traj.final - expected) <= 1e-10


def test_biharmonic_option(grid256):
    u0 = random_field(grid256, np.random.default_rng(4), 2.0)
    traj = parabolic_solve(zero_system(1, 1), u0, SolveConfig(scheme="parabolic", nu=1e-4, T=0.1, dissipation_power=2))
    expected = Field.from_amplitudes(grid256, u0.amplitudes() * np.exp(-1e-5 * wavenumber_magnitude(1, 256) ** 4))
    assert l2_norm(traj.final - expected) <= 1e-10


def test_viscosity_limit(grid256):
    x = grid256.coordinates()[0]
    exact = Field(grid256, characteristics_solution(np.sin, np.cos, 0.3, x))
    errs = [l2_norm(solve(BURGERS, sine(grid256), SolveConfig(scheme="parabolic", nu=nu, T=0.3)).final - exact) for nu in (1e-1, 1e-2, 1e-3)]
    assert errs[0] > errs[1] > errs[2]


def test_galerkin_inactive_projector(grid256):
    sys = transport_system([1.0])
    u0 = Field.from_function(grid256, lambda x: np.sin(x) + 0.3 * np.cos(5 * x))
    a = galerkin_solve(sys, u0, SolveConfig(scheme="galerkin", h_cut=4, T=0.2)).final
    b = galerkin_solve(sys, u0, SolveConfig(scheme="galerkin", T=0.2)).final
    assert np.max(np.abs(a.values - b.values)) <= 1e-13


def test_galerkin_high_modes_frozen(grid256):
    u0 = random_field(grid256, np.random.default_rng(5), 3.0)
    traj = galerkin_solve(BURGERS, u0, SolveConfig(scheme="galerkin", h_cut=4, T=0.2))
    high = 1 - lowpass_multiplier(1, 256, 16.0)
    assert np.max(np.abs(traj.final.amplitudes() * high - u0.amplitudes() * high)) <= 1e-15


def test_galerkin_cutoff_limit(grid256):
    ref = solve(BURGERS, sine(grid256), SolveConfig(scheme="parabolic", nu=1e-6, T=0.3)).final
    errs = [l2_norm(solve(BURGERS, sine(grid256), SolveConfig(scheme="galerkin", h_cut=h, T=0.3)).final - ref) for h in range(2, 8)]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-5
