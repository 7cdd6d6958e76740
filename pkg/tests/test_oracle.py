import numpy as np
import pytest

from parahyp.oracle import characteristics_solution, shock_time


def test_shock_time():
    assert shock_time(1.0) == 1.0
    assert shock_time(2.0, speed=0.5) == 1.0
    assert shock_time(-1.0) == np.inf


def test_initial_time_is_identity():
    x = np.linspace(0, 2 * np.pi, 17)
    assert np.array_equal(characteristics_solution(np.sin, np.cos, 0.0, x), np.sin(x))


@pytest.mark.parametrize("t", [0.1, 0.5, 0.9, 0.99])
def test_implicit_relation_holds(t):
    x = np.linspace(0, 2 * np.pi, 257)
    u = characteristics_solution(np.sin, np.cos, t, x)
    # u = sin(x0) with x0 = x + t u
    assert np.max(np.abs(u - np.sin(x + t * u))) <= 1e-11


def test_bisection_fallback_matches():
    x = np.linspace(0, 2 * np.pi, 65)
    # derivative reported as zero forces Newton to make no progress
    u = characteristics_solution(np.sin, lambda y: np.zeros_like(y) - 1e9, 0.5, x)
    assert np.max(np.abs(u - np.sin(x + 0.5 * u))) <= 1e-10
