import numpy as np
import pytest
from pytest import approx

from conftest import MULTI, SENSOR, SINGLE, make_scenario
from reactive_osa.evaluator import evaluate_exact
from reactive_osa.errors import InfeasibleRequirementError, InvalidArgumentError, SurplusPreconditionError
from reactive_osa.belief import expected_su_reward
from reactive_osa.models import ActionTriple, ChannelParams, ConstraintKind
from reactive_osa.policy_lput import (
    build_schedule,
    check_schedule,
    m_coefficients,
    mdp_pu_reward,
    mdp_step,
    multi_channel_policy,
    pm_lower,
    pm_upper,
    pomdp_mdp_consistency,
    requirement_recursion,
    tighten_final_slot,
)
from reactive_osa.pu_model import benchmark_throughput, reduce_to_nonreactive, unsensed_kernel
from reactive_osa.sensor_roc import EnergyDetectorRoc, epsilon_for_delta

TABLE1 = ChannelParams(alpha0=0.5, beta0=0.5, alpha1=0.9, beta1=0.9)
UPSILON = 0.8444444444444444


def random_params(rng):
    a0, b0 = rng.uniform(0.05, 0.6, size=2)
    return ChannelParams(alpha0=a0, beta0=b0, alpha1=rng.uniform(a0, 1.0), beta1=rng.uniform(b0, 1.0))


# -----------------------------
# Deterministic MDP
# -----------------------------
def test_mdp_step():
    assert mdp_step(np.array([1.0, 0.0, 0.0, 0.0]), TABLE1, 0.25) == approx([0.375, 0.375, 0.025, 0.225])
    state = np.array([0.2, 0.3, 0.4, 0.1])
    assert mdp_step(state, SINGLE, 0.0) == approx(state @ unsensed_kernel(SINGLE), abs=1e-15)
    with pytest.raises(InvalidArgumentError):
        mdp_step(state, SINGLE, -0.1)


def test_mdp_pu_reward():
    start = np.array([8 / 9, 1 / 9, 0.0, 0.0])
    assert mdp_pu_reward(start, 0.05) == approx(UPSILON, abs=1e-12)
    assert mdp_pu_reward(np.array([0.2, 0.3, 0.4, 0.1]), 1.0) == 0.0


def test_requirement_recursion():
    x = requirement_recursion(0.5, 3, [0.4, 0.7])
    assert x == approx([1.5, 1.1, 0.4])
    with pytest.raises(InvalidArgumentError):
        requirement_recursion(0.5, 0, [])


def test_m_coefficients():
    m = m_coefficients(SINGLE, 2)
    assert m[1] == approx([1.0, 0.0, 0.0, 1.0])
    assert m[0] == approx([1.9, 0.8, 0.05, 1.8])


def test_m_coefficients_nonreactive():
    m = m_coefficients(reduce_to_nonreactive(SINGLE), 8)
    assert m[:, 2] == approx(m[:, 1], abs=1e-15)
    assert m[:, 3] == approx(np.ones(8), abs=1e-15)


# -----------------------------
# Mis-detection bounds
# -----------------------------
def test_pm_lower():
    assert pm_lower(np.array([0.5, 0.5, 0.0, 0.0]), 0.25) == approx(0.5)
    assert pm_lower(np.array([0.5, 0.5, 0.0, 0.0]), 0.9) == 0.0
    assert pm_lower(np.array([0.5, 0.5, 0.0, 0.0]), -0.1) == 1.0
    assert pm_lower(np.array([0.0, 1.0, 0.0, 0.0]), 0.0) == 1.0
    with pytest.raises(InfeasibleRequirementError):
        pm_lower(np.array([0.0, 1.0, 0.0, 0.0]), 0.1, slot=3)


def test_pm_upper_last_slot_equals_lower():
    state = np.array([0.6, 0.2, 0.1, 0.1])
    assert pm_upper(state, 0.35, (1.0, 0.0, 0.0, 1.0)) == approx(pm_lower(state, 0.35))


def test_pm_upper_edges():
    row = (1.9, 0.8, 0.05, 1.8)
    assert pm_upper(np.array([0.0, 1.0, 0.0, 0.0]), 0.5, row) == 1.0
    with pytest.raises(InfeasibleRequirementError):
        pm_upper(np.array([0.0, 1.0, 0.0, 0.0]), 0.9, row)
    with pytest.raises(InfeasibleRequirementError) as info:
        pm_upper(np.array([1.0, 0.0, 0.0, 0.0]), 2.0, (1.0, 0.0, 0.0, 1.0), slot=4)
    assert info.value.slot == 4
    assert pm_upper(np.array([1.0, 0.0, 0.0, 0.0]), 0.0, row) == 1.0


# -----------------------------
# Schedule
# -----------------------------
@pytest.mark.parametrize("psi", [0.0, 0.5, 0.8, 1.0])
def test_schedule_meets_benchmark_exactly(psi):
    for horizon in range(1, 9):
        schedule = build_schedule(SINGLE, SENSOR, 0.05, horizon, psi)
        assert schedule.upsilon == approx(UPSILON, abs=1e-12)
        assert schedule.pu_total == approx(UPSILON * horizon, abs=1e-9)
        check = check_schedule(schedule)
        assert check.ok, check
        last = schedule.records[-1]
        assert last.delta_high - last.delta_low == approx(0.0, abs=1e-12)


def test_single_slot_schedule_is_sccp_point():
    schedule = build_schedule(SINGLE, SENSOR, 0.05, 1)
    record = schedule.records[0]
    assert record.delta_star == approx(0.05, abs=1e-12)
    assert record.epsilon_star == approx(epsilon_for_delta(SENSOR, 0.05)[0], abs=1e-9)


def test_schedule_records():
    schedule = build_schedule(SINGLE, SENSOR, 0.05, 5, [0.1, 0.9, 0.5, 0.3, 0.7])
    assert [r.slot for r in schedule.records] == [1, 2, 3, 4, 5]
    assert schedule.records[0].requirement == approx(5 * UPSILON)
    for prev, nxt in zip(schedule.records, schedule.records[1:]):
        assert nxt.requirement == approx(prev.requirement - prev.pu_reward, abs=1e-12)
    rewards = [r.pu_reward for r in schedule.records]
    expected = requirement_recursion(schedule.upsilon, 5, rewards)
    assert [r.requirement for r in schedule.records] == approx(list(expected), abs=1e-15)
    assert check_schedule(schedule).chain_gap == 0.0
    for act, r in zip(schedule.actions(), schedule.records):
        assert (act.f0, act.f1) == (0.0, 1.0)
        assert act.mu == approx(r.delta_star)


def test_random_psi_paths_stay_in_box():
    rng = np.random.default_rng(99)
    for _ in range(50):
        params = random_params(rng)
        horizon = int(rng.integers(1, 9))
        psi = list(rng.uniform(0.0, 1.0, size=horizon))
        zeta = float(rng.uniform(0.01, 0.3))
        schedule = build_schedule(params, SENSOR, zeta, horizon, psi)
        check = check_schedule(schedule)
        assert check.ok, (params, psi, check)
        assert schedule.pu_total == approx(benchmark_throughput(params, zeta) * horizon, abs=1e-9)


def test_psi_validation():
    with pytest.raises(InvalidArgumentError):
        build_schedule(SINGLE, SENSOR, 0.05, 3, [0.5, 0.5])
    with pytest.raises(InvalidArgumentError):
        build_schedule(SINGLE, SENSOR, 0.05, 2, [0.5, 1.5])


def test_multi_channel_policy_keeps_benchmark():
    for horizon in range(1, 7):
        scenario = make_scenario(MULTI, horizon)
        schedules, policy = multi_channel_policy(scenario)
        assert policy.constraint == ConstraintKind.LPUT
        assert len(schedules) == 3
        report = evaluate_exact(scenario, policy)
        for pu, ups in zip(report.pu_normalized, report.benchmark):
            assert pu >= ups - 1e-9


# -----------------------------
# Final-slot tightening
# -----------------------------
def test_tighten_final_slot():
    row = np.array([0.3, 0.3, 0.2, 0.2])
    act = tighten_final_slot(row, 0.8, 2, 1.4, SENSOR)
    assert act.point.delta == approx(0.6)
    assert (act.f0, act.f1) == (0.0, 1.0)
    exact = tighten_final_slot(row, 0.8, 2, 1.6, SENSOR)
    assert exact.point.delta == approx(1.0)
    assert exact.point.epsilon == 0.0


@pytest.mark.parametrize("realized", [1.7, 1.0])
def test_tighten_final_slot_precondition(realized):
    row = np.array([0.3, 0.3, 0.2, 0.2])
    with pytest.raises(SurplusPreconditionError):
        tighten_final_slot(row, 0.8, 2, realized, SENSOR)


def test_tightening_raises_final_slot_su_reward():
    row = np.array([0.3, 0.3, 0.2, 0.2])
    roc = EnergyDetectorRoc(SENSOR)
    loose = ActionTriple(channel=0, point=roc.point_for_delta(0.3), f0=0.0, f1=1.0)
    realized = 1.4
    # the loose final slot over-delivers: 1.4 + 0.35 > 0.8 * 2
    assert realized + mdp_pu_reward(row, loose.point.delta) > 0.8 * 2 + 1e-6
    tight = tighten_final_slot(row, 0.8, 2, realized, roc)
    assert realized + mdp_pu_reward(row, tight.point.delta) == approx(1.6, abs=1e-12)
    assert expected_su_reward(row, tight) > expected_su_reward(row, loose) + 1e-6


def test_tightening_a_built_schedule():
    schedule = build_schedule(SINGLE, SENSOR, 0.05, 4, 0.0)
    last = schedule.records[-1]
    realized = sum(r.pu_reward for r in schedule.records[:-1])
    loose = ActionTriple(channel=0, point=EnergyDetectorRoc(SENSOR).point_for_delta(0.0), f0=0.0, f1=1.0)
    row = np.array(last.omega)
    tight = tighten_final_slot(row, schedule.upsilon, 4, realized, SENSOR)
    assert tight.point.delta == approx(last.delta_star, abs=1e-9)
    if last.delta_star > 1e-9:
        assert expected_su_reward(row, tight) > expected_su_reward(row, loose)


# -----------------------------
# POMDP / MDP consistency
# -----------------------------
def test_mdp_tracks_belief_mixture():
    for horizon in range(1, 9):
        scenario = make_scenario([SINGLE], horizon)
        schedule = build_schedule(SINGLE, SENSOR, 0.05, horizon)
        assert pomdp_mdp_consistency(scenario, schedule.deltas) < 1e-12


def test_mdp_tracks_belief_mixture_random():
    rng = np.random.default_rng(17)
    for _ in range(20):
        params = random_params(rng)
        horizon = int(rng.integers(2, 9))
        deltas = list(rng.uniform(0.0, 1.0, size=horizon))
        scenario = make_scenario([params], horizon)
        assert pomdp_mdp_consistency(scenario, deltas) < 1e-12


def test_consistency_needs_one_channel():
    with pytest.raises(InvalidArgumentError):
        pomdp_mdp_consistency(make_scenario(MULTI, 2), [0.1, 0.1])
