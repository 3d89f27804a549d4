import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from pydantic import ValidationError
from pytest import approx

from conftest import SENSOR
from reactive_osa.errors import InvalidParametersError
from reactive_osa.models import ChannelParams, PuState, Scenario
from reactive_osa.pu_model import (
    benchmark_throughput,
    busy_idle_marginal,
    reduce_to_nonreactive,
    sensed_kernel,
    stationary_level0,
    transition_row_sensed,
    transition_row_unsensed,
)

prob = st.floats(min_value=0.0, max_value=1.0)


@st.composite
def channel_params(draw):
    a0 = draw(prob)
    b0 = draw(prob)
    a1 = draw(st.floats(min_value=a0, max_value=1.0))
    b1 = draw(st.floats(min_value=b0, max_value=1.0))
    return ChannelParams(alpha0=a0, beta0=b0, alpha1=a1, beta1=b1)


def test_unsensed_rows():
    p = ChannelParams(alpha0=0.1, beta0=0.2, alpha1=0.9, beta1=0.95)
    assert transition_row_unsensed(p, PuState.BUSY_L0) == approx([0.9, 0.1, 0.0, 0.0])
    assert transition_row_unsensed(p, PuState.BUSY_L1) == approx([0.9, 0.1, 0.0, 0.0])
    assert transition_row_unsensed(p, PuState.IDLE_L1) == approx([0.0, 0.0, 0.05, 0.95])


def test_sensed_rows():
    p = ChannelParams(alpha0=0.5, beta0=0.5, alpha1=0.9, beta1=0.9)
    assert transition_row_sensed(p, PuState.BUSY_L0, 0.25) == approx([0.375, 0.375, 0.025, 0.225])
    assert transition_row_sensed(p, PuState.IDLE_L0, 0.7) == approx([0.5, 0.5, 0.0, 0.0])
    assert transition_row_sensed(p, PuState.BUSY_L0, 0.0) == approx(transition_row_unsensed(p, PuState.BUSY_L0))


def test_sensed_row_rejects_bad_mu():
    p = ChannelParams(alpha0=0.5, beta0=0.5, alpha1=0.9, beta1=0.9)
    with pytest.raises(InvalidParametersError):
        transition_row_sensed(p, PuState.BUSY_L0, 1.5)


@settings(max_examples=200)
@given(params=channel_params(), mu=prob)
def test_kernel_rows_are_distributions(params, mu):
    kernel = sensed_kernel(params, mu)
    assert np.all(kernel >= 0.0) and np.all(kernel <= 1.0)
    assert kernel.sum(axis=1) == approx(np.ones(4), abs=1e-12)
    # busy states share their outgoing row
    assert np.array_equal(kernel[PuState.BUSY_L0], kernel[PuState.BUSY_L1])


@settings(max_examples=100)
@given(params=channel_params(), mu1=prob, mu2=prob)
def test_level1_mass_grows_with_mu(params, mu1, mu2):
    lo, hi = sorted((mu1, mu2))
    row_lo = transition_row_sensed(params, PuState.BUSY_L0, lo)
    row_hi = transition_row_sensed(params, PuState.BUSY_L0, hi)
    assert row_lo[2] + row_lo[3] <= row_hi[2] + row_hi[3] + 1e-15


def test_stationary_level0():
    busy, idle = stationary_level0(ChannelParams(alpha0=0.1, beta0=0.2, alpha1=0.9, beta1=0.95))
    assert busy == approx(0.8888888888888888, abs=1e-12)
    assert idle == approx(0.1111111111111111, abs=1e-12)
    assert stationary_level0(ChannelParams(alpha0=0.5, beta0=0.5, alpha1=0.5, beta1=0.5)) == approx((0.5, 0.5))


@settings(max_examples=100)
@given(params=channel_params())
def test_stationary_is_fixed_point(params):
    assume(1.0 + params.alpha0 - params.beta0 > 1e-6)
    busy, idle = stationary_level0(params)
    two_state = np.array([[1 - params.alpha0, params.alpha0], [1 - params.beta0, params.beta0]])
    assert np.array([busy, idle]) @ two_state == approx([busy, idle], abs=1e-12)


def test_degenerate_chain():
    p = ChannelParams(alpha0=0.0, beta0=1.0, alpha1=0.0, beta1=1.0)
    with pytest.raises(InvalidParametersError):
        stationary_level0(p)
    with pytest.raises(ValidationError):
        Scenario(channels=[p], horizon=1, zeta=0.05, sensor=SENSOR)


def test_benchmark_values():
    assert benchmark_throughput(ChannelParams(alpha0=0.1, beta0=0.2, alpha1=0.9, beta1=0.95), 0.1) == approx(0.8, abs=1e-12)
    assert benchmark_throughput(ChannelParams(alpha0=0.1, beta0=0.1, alpha1=0.9, beta1=0.95), 0.05) == approx(0.855, abs=1e-12)
    # closed form gives 0.84444...; the rounded 0.846 lies within 2e-3
    upsilon = benchmark_throughput(ChannelParams(alpha0=0.1, beta0=0.2, alpha1=0.9, beta1=0.95), 0.05)
    assert upsilon == approx(0.8444444444444444, abs=1e-12)
    assert abs(upsilon - 0.846) < 2e-3


def test_benchmark_without_collisions_is_stationary():
    p = ChannelParams(alpha0=0.3, beta0=0.4, alpha1=0.5, beta1=0.6)
    assert benchmark_throughput(p, 0.0) == approx(stationary_level0(p)[0], abs=1e-15)


def test_params_enforce_level_order():
    with pytest.raises(ValidationError):
        ChannelParams(alpha0=0.1, beta0=0.2, alpha1=0.05, beta1=0.95)
    with pytest.raises(ValidationError):
        ChannelParams(alpha0=0.1, beta0=0.2, alpha1=0.9, beta1=0.1)
    with pytest.raises(ValidationError):
        ChannelParams(alpha0=-0.1, beta0=0.2, alpha1=0.9, beta1=0.95)


def test_reduce_to_nonreactive():
    p = ChannelParams(alpha0=0.1, beta0=0.2, alpha1=0.9, beta1=0.95)
    reduced = reduce_to_nonreactive(p)
    assert (reduced.alpha0, reduced.beta0, reduced.alpha1, reduced.beta1) == (0.1, 0.2, 0.1, 0.2)
    assert reduce_to_nonreactive(reduced) == reduced


@settings(max_examples=100)
@given(params=channel_params(), mu=prob)
def test_nonreactive_marginal_is_two_state_chain(params, mu):
    reduced = reduce_to_nonreactive(params)
    for state, expected in (
        (PuState.BUSY_L0, 1 - params.alpha0),
        (PuState.BUSY_L1, 1 - params.alpha0),
        (PuState.IDLE_L0, 1 - params.beta0),
        (PuState.IDLE_L1, 1 - params.beta0),
    ):
        busy, idle = busy_idle_marginal(transition_row_sensed(reduced, state, mu))
        assert busy == approx(expected, abs=1e-12)
        assert idle == approx(1 - expected, abs=1e-12)
