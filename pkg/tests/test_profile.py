import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rollsing.errors import InvalidSpec
from rollsing.profile import RestToRestSpec, beta_profile

specs = st.builds(RestToRestSpec, k=st.floats(-10, 10), T=st.floats(0.1, 100))


def test_start_at_rest():
    assert beta_profile(0.0, RestToRestSpec(2.0, 3.0)) == (0.0, 0.0, 0.0)


def test_end_at_target():
    theta, theta_dot, theta_ddot = beta_profile(6.0, RestToRestSpec(math.pi / 2, 6.0))
    assert theta == pytest.approx(math.pi / 2, abs=1e-15)
    assert theta_dot == 0.0
    assert theta_ddot == 0.0


@given(specs)
def test_midpoint_is_half(spec):
    theta, _, theta_ddot = beta_profile(spec.T / 2, spec)
    assert theta == pytest.approx(spec.k / 2, abs=1e-12 * max(1.0, abs(spec.k)))
    assert theta_ddot == pytest.approx(0.0, abs=1e-12 * max(1.0, abs(spec.k)) / spec.T ** 2)


@given(specs, st.floats(0, 1))
def test_symmetry(spec, frac):
    t = frac * spec.T
    assert beta_profile(spec.T - t, spec)[0] == pytest.approx(
        spec.k - beta_profile(t, spec)[0], abs=1e-12 * max(1.0, abs(spec.k)))


def test_monotone_for_positive_k():
    spec = RestToRestSpec(math.pi / 2, 6.0)
    t = np.linspace(0, 6, 20001)
    _, theta_dot, _ = beta_profile(t, spec)
    assert np.all(theta_dot >= 0.0)


def test_derivatives_match_finite_differences():
    spec = RestToRestSpec(math.pi / 2, 6.0)
    h = 1e-4
    t = np.linspace(h, spec.T - h, 1000)
    th_m, thd_m, _ = beta_profile(t - h, spec)
    _, thd, thdd = beta_profile(t, spec)
    th_p, thd_p, _ = beta_profile(t + h, spec)
    # relative to the peak of each derivative
    assert np.max(np.abs((th_p - th_m) / (2 * h) - thd)) <= 1e-8 * np.max(np.abs(thd))
    assert np.max(np.abs((thd_p - thd_m) / (2 * h) - thdd)) <= 1e-8 * np.max(np.abs(thdd))


def test_clamps_outside_interval():
    spec = RestToRestSpec(1.0, 2.0)
    assert beta_profile(-1.0, spec) == beta_profile(0.0, spec)
    assert beta_profile(2.5, spec) == beta_profile(2.0, spec)


def test_array_input():
    spec = RestToRestSpec(1.0, 2.0)
    t = np.array([0.0, 0.5, 2.0])
    theta, _, _ = beta_profile(t, spec)
    assert theta.shape == (3,)
    assert theta[1] == beta_profile(0.5, spec)[0]


@pytest.mark.parametrize("T", [0.0, -1.0, math.nan])
def test_invalid_duration(T):
    with pytest.raises(InvalidSpec):
        RestToRestSpec(1.0, T)
