import numpy as np
import pytest
from hypothesis import given, strategies as st

from parahyp.norms import l2_norm, sobolev_norm
from parahyp.spectral import (
    BlowupDetected,
    Field,
    GridMismatch,
    GridSpec,
    dealiased_product,
    derivative,
    inverse_transform,
    low_pass,
    lp_project,
    lp_project_flagged,
    shells,
    transform,
)

from conftest import smooth


def test_grid_rejects_bad_sizes():
    for n in (8, 100, 0):
        with pytest.raises(ValueError):
            GridSpec(1, n)
    with pytest.raises(ValueError):
        GridSpec(3, 16)


def test_grid_properties():
    g = GridSpec(1, 256)
    assert g.nyquist == 128
    assert g.max_shell == 7


def test_nonfinite_samples_raise():
    g = GridSpec(1, 16)
    vals = np.zeros(16)
    vals[3] = np.nan
    with pytest.raises(BlowupDetected):
        Field(g, vals)


def test_constant_has_only_zero_mode(grid64):
    F = transform(Field.constant(grid64, 3.0))
    nz = np.flatnonzero(np.abs(F.coefficients[0]) > 1e-12)
    assert list(nz) == [0]


def test_cosine_has_two_modes(grid64):
    F = transform(Field.from_function(grid64, lambda x: np.cos(4 * x)))
    nz = sorted(np.flatnonzero(np.abs(F.coefficients[0]) > 1e-12))
    assert nz == [4, 60]


@given(st.integers(0, 2**32 - 1))
def test_round_trip(seed):
    g = GridSpec(1, 128)
    f = smooth(g, seed)
    back = inverse_transform(transform(f))
    assert l2_norm(back - f) <= 1e-12 * l2_norm(f)


def test_transform_is_hermitian(grid64):
    assert transform(smooth(grid64, 3)).hermitian_defect() <= 1e-12


def test_grid_mismatch():
    a = Field.zeros(GridSpec(1, 32))
    b = Field.zeros(GridSpec(1, 64))
    with pytest.raises(GridMismatch):
        a + b
    with pytest.raises(GridMismatch):
        dealiased_product(a, b)


@pytest.mark.parametrize("m", [1, 3])
def test_derivative_of_sine(grid64, m):
    f = Field.from_function(grid64, lambda x: np.sin(m * x))
    expected = Field.from_function(grid64, lambda x: m * np.cos(m * x))
    assert np.max(np.abs(derivative(f, 0).values - expected.values)) <= 1e-12


def test_derivative_of_constant_and_bad_axis(grid64):
    assert np.all(derivative(Field.constant(grid64, 2.0), 0).values == 0)
    with pytest.raises(ValueError):
        derivative(Field.constant(grid64, 2.0), 1)


def test_lp_single_harmonic(grid64):
    f = Field.from_function(grid64, lambda x: np.cos(4 * x))
    for k in shells(grid64):
        pk = lp_project(f, k)
        target = f.values if k == 2 else 0.0
        assert np.max(np.abs(pk.values - target)) <= 1e-13


def test_lp_constant_in_zero_block(grid64):
    f = Field.constant(grid64, 1.5)
    assert np.allclose(lp_project(f, 0).values, 1.5)
    assert all(np.all(np.abs(lp_project(f, k).values) < 1e-14) for k in range(1, 6))


def test_lp_beyond_nyquist_is_flagged(grid64):
    out, resolved = lp_project_flagged(smooth(grid64, 0), 12)
    assert not resolved
    assert np.all(out.values == 0)


@pytest.mark.parametrize("profile", ["sharp", "smooth"])
@given(seed=st.integers(0, 2**32 - 1))
def test_resolution_of_identity(profile, seed):
    g = GridSpec(1, 128)
    f = smooth(g, seed, decay=1.0)
    total = sum((lp_project(f, k, profile) for k in shells(g)), Field.zeros(g))
    assert l2_norm(total - f) <= 1e-12 * l2_norm(f)


def test_low_pass_examples(grid64):
    f = Field.from_function(grid64, lambda x: np.cos(4 * x) + np.cos(20 * x))
    assert np.allclose(low_pass(f, 8).values, np.cos(4 * grid64.coordinates()[0]), atol=1e-13)
    assert np.allclose(low_pass(f, 1000).values, f.values)


@given(seed=st.integers(0, 2**32 - 1), lam=st.sampled_from([4.0, 8.0, 16.0, 32.0]))
def test_low_pass_error_bound(seed, lam):
    g = GridSpec(1, 128)
    s = 2.0
    f = smooth(g, seed, decay=s + 1)
    assert l2_norm(low_pass(f, lam) - f) <= lam**-s * sobolev_norm(f, s) * (1 + 1e-12)


def test_product_to_sum(grid64):
    c = Field.from_function(grid64, np.cos)
    expected = Field.from_function(grid64, lambda x: 0.5 + 0.5 * np.cos(2 * x))
    assert np.max(np.abs(dealiased_product(c, c).values - expected.values)) <= 1e-12


def test_product_identity(grid64):
    g = smooth(grid64, 5)
    assert np.allclose(dealiased_product(Field.constant(grid64, 1.0), g).values, g.values, atol=1e-14)


def test_product_no_aliasing():
    g = GridSpec(1, 64)
    m = 21  # about N/3: 2m aliases on the unpadded grid
    f = Field.from_function(g, lambda x: np.cos(m * x))
    out = dealiased_product(f, f)
    # exact product 1/2 + 1/2 cos(42 x); mode 42 is unresolved (> 32) and must vanish, not fold back
    assert np.max(np.abs(out.values - 0.5)) <= 1e-12
