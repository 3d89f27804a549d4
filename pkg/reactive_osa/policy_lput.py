"""LPUT-constrained access: long-term PU throughput kept at the benchmark.

The sensed channel is replaced by its deterministic MDP counterpart (the PU
state distribution when the channel is sensed every slot). A forward pass keeps
the remaining PU requirement X(t) reachable: delta(t) is picked inside
[delta_low, delta_high], where delta_high leaves enough room to meet X with
zero mis-detection afterwards.
"""
import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .belief import BeliefStepper, busy_mass, initial_row
from .config import DEFAULT_PSI, EQUALITY_TOL, PROB_TOL
from .errors import InfeasibleRequirementError, InvalidArgumentError, SurplusPreconditionError
from .models import (
    ActionTriple,
    ChannelParams,
    ConstraintKind,
    EnergyDetectorParams,
    OperatingPoint,
    PolicySchedule,
    Scenario,
)
from .policy_sccp import as_roc, check_budget, solve_sensing
from .pu_model import benchmark_throughput, sensed_kernel
from .sensor_roc import RocCurve

logger = logging.getLogger(__name__)

# MdpState: length-4 array (omega_0..omega_3) on the simplex
# MCoefficients: (T, 4) array, row t-1 holds (m1, m2, m3, m4) for slot t


# -----------------------------
# Models
# -----------------------------
class LputSlotRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    slot: int = Field(ge=1)
    requirement: float            # X(t)
    omega: List[float]
    delta_low: float
    delta_high: float
    psi: float
    delta_star: float
    epsilon_star: float
    pu_reward: float              # (omega0 + omega2)(1 - delta_star)


class LputSchedule(BaseModel):
    """Suboptimal LPUT schedule of one channel; the access pair is always (0, 1)."""
    model_config = ConfigDict(frozen=True)

    channel: int = Field(ge=0)
    upsilon: float
    records: List[LputSlotRecord]

    @property
    def horizon(self) -> int:
        return len(self.records)

    @property
    def deltas(self) -> List[float]:
        return [r.delta_star for r in self.records]

    @property
    def pu_total(self) -> float:
        return float(sum(r.pu_reward for r in self.records))

    def actions(self) -> List[ActionTriple]:
        return [
            ActionTriple(
                channel=self.channel,
                point=OperatingPoint(epsilon=r.epsilon_star, delta=r.delta_star),
                f0=0.0,
                f1=1.0,
            )
            for r in self.records
        ]


class ScheduleCheck(BaseModel):
    box_violation: float           # worst amount by which a bound is broken, 0 if none
    min_requirement: float
    total_gap: float               # |sum R - upsilon*T|
    chain_gap: float               # recorded X(t) vs the requirement recursion
    worst_slot: Optional[int] = None

    @property
    def ok(self) -> bool:
        return (
            self.box_violation <= EQUALITY_TOL
            and self.min_requirement >= -PROB_TOL
            and self.total_gap <= EQUALITY_TOL
            and self.chain_gap <= EQUALITY_TOL
        )


# -----------------------------
# Deterministic MDP
# -----------------------------
def mdp_step(state: np.ndarray, params: ChannelParams, delta: float) -> np.ndarray:
    if not 0.0 <= delta <= 1.0:
        raise InvalidArgumentError(f"delta={delta} outside [0, 1]")
    return np.asarray(state, dtype=float) @ sensed_kernel(params, delta)


def mdp_pu_reward(state: np.ndarray, delta: float) -> float:
    if not 0.0 <= delta <= 1.0:
        raise InvalidArgumentError(f"delta={delta} outside [0, 1]")
    return busy_mass(state) * (1.0 - delta)


def requirement_recursion(upsilon: float, horizon: int, rewards: Sequence[float]) -> np.ndarray:
    """X(1) = upsilon*T, X(t) = X(t-1) - R(t-1)."""
    if horizon < 1:
        raise InvalidArgumentError(f"horizon must be >= 1, got {horizon}")
    x = np.empty(horizon)
    x[0] = upsilon * horizon
    for t in range(1, horizon):
        x[t] = x[t - 1] - rewards[t - 1]
    return x


def m_coefficients(params: ChannelParams, horizon: int) -> np.ndarray:
    """Coefficients of the most PU throughput reachable with zero mis-detection after slot t."""
    if horizon < 1:
        raise InvalidArgumentError(f"horizon must be >= 1, got {horizon}")
    a0, b0, a1, b1 = params.alpha0, params.beta0, params.alpha1, params.beta1
    m = np.empty((horizon, 4))
    m[-1] = (1.0, 0.0, 0.0, 1.0)
    for t in range(horizon - 2, -1, -1):
        n1, n2, n3, _ = m[t + 1]
        m[t] = (
            1.0 + (1.0 - a0) * n1 + a0 * n2,
            (1.0 - b0) * n1 + b0 * n2,
            (1.0 - b1) * n1 + b1 * n3,
            1.0 + (a1 - a0) * n1 + a0 * n2 - a1 * n3,
        )
    return m


# -----------------------------
# Mis-detection bounds
# -----------------------------
def pm_lower(state: np.ndarray, requirement: float, slot: int = 0) -> float:
    busy = busy_mass(state)
    if busy <= 0.0:
        if requirement <= 0.0:
            return 1.0
        raise InfeasibleRequirementError(slot, 1.0, 1.0, requirement,
                                         detail=f"PU busy mass is 0 at slot {slot} but X={requirement:.12g}")
    return float(min(1.0, max(0.0, 1.0 - requirement / busy)))


def pm_upper(state: np.ndarray, requirement: float, m_row: Sequence[float], slot: int = 0) -> float:
    w0, w1, w2, w3 = (float(v) for v in state)
    busy = w0 + w2
    m1, m2, m3, m4 = (float(v) for v in m_row)
    if busy <= 0.0:
        if requirement <= w1 * m2 + w3 * m3:
            return 1.0
        raise InfeasibleRequirementError(slot, 1.0, 1.0, requirement,
                                         detail=f"PU busy mass is 0 at slot {slot} but X={requirement:.12g}")
    high = (w1 * m2 + w3 * m3 - requirement) / (busy * m4) + m1 / m4
    if high < 0.0:
        if high < -PROB_TOL:
            raise InfeasibleRequirementError(slot, pm_lower(state, requirement, slot), high, requirement)
        high = 0.0
    return min(1.0, high)


# -----------------------------
# Schedule
# -----------------------------
def _psi_path(psi: Union[None, float, Sequence[float]], horizon: int) -> List[float]:
    if psi is None:
        path = [DEFAULT_PSI] * horizon
    elif isinstance(psi, (int, float)):
        path = [float(psi)] * horizon
    else:
        path = [float(p) for p in psi]
    if len(path) != horizon:
        raise InvalidArgumentError(f"psi has {len(path)} entries, horizon is {horizon}")
    for t, p in enumerate(path, start=1):
        if not 0.0 <= p <= 1.0:
            raise InvalidArgumentError(f"psi({t})={p} outside [0, 1]")
    return path


def build_schedule(
    params: ChannelParams,
    sensor: Union[EnergyDetectorParams, RocCurve],
    zeta: float,
    horizon: int,
    psi: Union[None, float, Sequence[float]] = None,
    channel: int = 0,
) -> LputSchedule:
    """Forward pass: delta* = delta_low + psi (delta_high - delta_low) each slot."""
    roc = as_roc(sensor)
    path = _psi_path(psi, horizon)
    upsilon = benchmark_throughput(params, zeta)
    m = m_coefficients(params, horizon)
    omega = initial_row(params)
    requirement = upsilon * horizon
    records = []
    for t in range(1, horizon + 1):
        low = pm_lower(omega, requirement, t)
        high = pm_upper(omega, requirement, m[t - 1], t)
        if high < low - EQUALITY_TOL:
            raise InfeasibleRequirementError(t, low, high, requirement)
        high = max(high, low)
        delta = float(min(1.0, max(0.0, low + path[t - 1] * (high - low))))
        reward = mdp_pu_reward(omega, delta)
        records.append(LputSlotRecord(
            slot=t,
            requirement=requirement,
            omega=[float(v) for v in omega],
            delta_low=low,
            delta_high=high,
            psi=path[t - 1],
            delta_star=delta,
            epsilon_star=roc.epsilon_for_delta(delta),
            pu_reward=reward,
        ))
        logger.debug(f"LPUT slot {t}: X={requirement:.12g}, delta in [{low:.6f}, {high:.6f}] -> {delta:.6f}")
        requirement -= reward
        omega = mdp_step(omega, params, delta)
    schedule = LputSchedule(channel=channel, upsilon=upsilon, records=records)
    check = check_schedule(schedule)
    if not check.ok:
        logger.warning(f"LPUT schedule for channel {channel + 1} fails its checks: {check}")
    return schedule


def check_schedule(schedule: LputSchedule) -> ScheduleCheck:
    recorded = np.array([r.requirement for r in schedule.records])
    expected = requirement_recursion(schedule.upsilon, schedule.horizon, [r.pu_reward for r in schedule.records])
    worst, worst_slot = 0.0, None
    for r in schedule.records:
        gaps = (
            -r.delta_low,
            r.delta_low - r.delta_star,
            r.delta_star - r.delta_high,
            r.delta_high - 1.0,
        )
        violation = max(gaps)
        if violation > worst:
            worst, worst_slot = violation, r.slot
    return ScheduleCheck(
        box_violation=worst,
        min_requirement=min(r.requirement for r in schedule.records),
        total_gap=abs(schedule.pu_total - schedule.upsilon * schedule.horizon),
        chain_gap=float(np.max(np.abs(recorded - expected))),
        worst_slot=worst_slot,
    )


def multi_channel_policy(
    scenario: Scenario,
    psi: Union[None, float, Sequence[float]] = None,
    roc: Optional[RocCurve] = None,
    budget: Optional[int] = None,
) -> Tuple[List[LputSchedule], PolicySchedule]:
    """Per-channel always-sensed schedules, then the best sensing rule for those actions."""
    roc = roc or as_roc(scenario.sensor)
    schedules = [
        build_schedule(params, roc, scenario.zeta, scenario.horizon, psi, channel=n)
        for n, params in enumerate(scenario.channels)
    ]
    per_channel = [s.actions() for s in schedules]
    actions = [[per_channel[n][t] for n in range(scenario.n_channels)] for t in range(scenario.horizon)]
    value, tree = solve_sensing(scenario.channels, actions, budget=budget)
    logger.info(f"LPUT solved: N={scenario.n_channels}, T={scenario.horizon}, V1={value:.12g}")
    policy = PolicySchedule(constraint=ConstraintKind.LPUT, actions=actions, tree=tree, value=value)
    return schedules, policy


def tighten_final_slot(
    row: np.ndarray,
    upsilon: float,
    horizon: int,
    realized: float,
    sensor: Union[EnergyDetectorParams, RocCurve],
    channel: int = 0,
) -> ActionTriple:
    """Final-slot action that spends exactly the PU surplus left after slots 1..T-1."""
    need = upsilon * horizon - realized
    busy = busy_mass(row)
    if need < -EQUALITY_TOL or need > busy + EQUALITY_TOL:
        raise SurplusPreconditionError(
            f"Remaining requirement {need:.12g} is outside [0, {busy:.12g}]"
        )
    delta = 1.0 if busy <= 0.0 else float(min(1.0, max(0.0, 1.0 - need / busy)))
    epsilon = as_roc(sensor).epsilon_for_delta(delta)
    return ActionTriple(channel=channel, point=OperatingPoint(epsilon=epsilon, delta=delta), f0=0.0, f1=1.0)


# -----------------------------
# POMDP / MDP consistency
# -----------------------------
def pomdp_mdp_consistency(
    scenario: Scenario,
    deltas: Sequence[float],
    roc: Optional[RocCurve] = None,
    budget: Optional[int] = None,
) -> float:
    """max_t max_j |omega_j(t) - sum_b h_b(t) lambda_j^b(t)| over all observation branches."""
    if scenario.n_channels != 1:
        raise InvalidArgumentError("consistency check is defined for a single channel")
    horizon = len(deltas)
    check_budget(1, horizon, budget)
    params = scenario.channels[0]
    roc = roc or as_roc(scenario.sensor)
    actions = [[ActionTriple(channel=0, point=roc.point_for_delta(d), f0=0.0, f1=1.0)] for d in deltas]
    stepper = BeliefStepper(scenario.channels, actions)

    omega = initial_row(params)
    branches = [(1.0, omega[None, :].copy())]
    worst = 0.0
    for t in range(1, horizon + 1):
        mixture = sum(h * b[0] for h, b in branches)
        worst = max(worst, float(np.max(np.abs(omega - mixture))))
        if t == horizon:
            break
        branches = [
            (h * p, nxt)
            for h, b in branches
            for _, p, nxt in stepper.branches(b, t, 0)
        ]
        omega = mdp_step(omega, params, deltas[t - 1])
    return worst
