"""SCCP-constrained access: the per-slot optimal action and the sensing tree.

Under a per-slot conditional collision cap the optimal sensor/access pair does
not depend on the belief, so only the channel choice is left to the belief-tree
dynamic program. solve_sensing is that program for any fixed action table and is
shared with the multi-channel LPUT policy.
"""
import logging
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .belief import BeliefStepper, initial_belief, observation_likelihood, update_belief
from .config import BRANCH_PRUNE, TIE_TOL, node_budget
from .errors import BudgetExceededError, InvalidArgumentError
from .models import (
    ActionTriple,
    ChannelParams,
    ConstraintKind,
    EnergyDetectorParams,
    OperatingPoint,
    PolicySchedule,
    Scenario,
    SensingPolicyTree,
)
from .sensor_roc import EnergyDetectorRoc, RocCurve

logger = logging.getLogger(__name__)

ActionTable = Sequence[Sequence[ActionTriple]]   # [slot][channel]
Continuation = Callable[[np.ndarray], float]


def as_roc(sensor: Union[EnergyDetectorParams, RocCurve]) -> RocCurve:
    return sensor if isinstance(sensor, RocCurve) else EnergyDetectorRoc(sensor)


# -----------------------------
# Per-slot action
# -----------------------------
def sccp_action(zeta: float, sensor: Union[EnergyDetectorParams, RocCurve], channel: int = 0) -> ActionTriple:
    """delta = zeta, epsilon on the ROC, transmit only when the channel is sensed idle."""
    if not 0.0 <= zeta <= 1.0:
        raise InvalidArgumentError(f"zeta={zeta} outside [0, 1]")
    epsilon = as_roc(sensor).epsilon_for_delta(zeta)
    return ActionTriple(
        channel=channel,
        point=OperatingPoint(epsilon=epsilon, delta=zeta),
        f0=0.0,
        f1=1.0,
    )


def sccp_action_table(scenario: Scenario, roc: Optional[RocCurve] = None) -> List[List[ActionTriple]]:
    roc = roc or as_roc(scenario.sensor)
    row = [sccp_action(scenario.zeta, roc, channel=n) for n in range(scenario.n_channels)]
    return [list(row) for _ in range(scenario.horizon)]


def sccp_sigma(action: ActionTriple, channel: int, sensed: int) -> float:
    """Conditional collision probability on `channel` when `sensed` is the sensed channel."""
    return action.mu if channel == sensed else 0.0


# -----------------------------
# Q value
# -----------------------------
def q_value(
    belief: np.ndarray,
    action: ActionTriple,
    channels: Sequence[ChannelParams],
    continuation: Optional[Continuation],
    t: int,
    horizon: int,
) -> float:
    """Expected ack plus continuation value, averaged over the observation."""
    if t > horizon:
        raise InvalidArgumentError(f"slot {t} beyond horizon {horizon}")
    belief = np.asarray(belief, dtype=float)
    total = 0.0
    for k in (0, 1):
        p = float(belief[action.channel] @ observation_likelihood(action, k))
        if p <= 0.0:
            continue
        total += p * k
        if t < horizon and continuation is not None:
            total += p * continuation(update_belief(belief, channels, action, k))
    return total


# -----------------------------
# Belief-tree dynamic program
# -----------------------------
def required_nodes(n_channels: int, horizon: int) -> int:
    return sum((2 * n_channels) ** (t - 1) for t in range(1, horizon + 1))


def check_budget(n_channels: int, horizon: int, budget: Optional[int] = None) -> int:
    budget = node_budget(budget)
    required = required_nodes(n_channels, horizon)
    if required > budget:
        raise BudgetExceededError(required, budget)
    if required > 0.8 * budget:
        logger.warning(f"Belief tree of {required} nodes is close to the budget of {budget}")
    return required


def _flatten(plan, slot: int, tree: SensingPolicyTree) -> int:
    channel, children = plan
    idx = tree.size
    tree.slot.append(slot)
    tree.channel.append(channel)
    tree.children0.append(-1)
    tree.children1.append(-1)
    for k, sub in children.items():
        child = _flatten(sub, slot + 1, tree)
        if k:
            tree.children1[idx] = child
        else:
            tree.children0[idx] = child
    return idx


def solve_sensing(
    channels: Sequence[ChannelParams],
    actions: ActionTable,
    belief: Optional[np.ndarray] = None,
    budget: Optional[int] = None,
) -> Tuple[float, SensingPolicyTree]:
    """Channel choice maximizing expected acks for a fixed [slot][channel] action table.

    Returns V_1 at `belief` (the initial belief by default) and the policy tree.
    Ties within TIE_TOL go to the lowest channel index.
    """
    horizon = len(actions)
    n_channels = len(channels)
    check_budget(n_channels, horizon, budget)
    stepper = BeliefStepper(channels, actions)
    root = initial_belief(channels) if belief is None else np.asarray(belief, dtype=float)

    def solve(b: np.ndarray, t: int):
        best_value, best_plan = -np.inf, None
        for a in range(n_channels):
            if t == horizon:
                value = stepper.ack_probability(b, t, a)
                if value > best_value + TIE_TOL:
                    best_value, best_plan = value, (a, {})
                continue
            value = 0.0
            children = {}
            for k, p, nxt in stepper.branches(b, t, a, prune=BRANCH_PRUNE):
                sub_value, sub_plan = solve(nxt, t + 1)
                value += p * (k + sub_value)
                children[k] = sub_plan
            if value > best_value + TIE_TOL:
                best_value, best_plan = value, (a, children)
        return best_value, best_plan

    value, plan = solve(root, 1)
    tree = SensingPolicyTree()
    _flatten(plan, 1, tree)
    logger.debug(f"Sensing tree solved: V1={value:.12g}, {tree.size} nodes")
    return value, tree


def solve_sccp(
    scenario: Scenario,
    roc: Optional[RocCurve] = None,
    budget: Optional[int] = None,
) -> PolicySchedule:
    """Optimal SCCP policy; the returned schedule carries V_1 in `value`."""
    actions = sccp_action_table(scenario, roc)
    value, tree = solve_sensing(scenario.channels, actions, budget=budget)
    logger.info(f"SCCP solved: N={scenario.n_channels}, T={scenario.horizon}, V1={value:.12g}")
    return PolicySchedule(constraint=ConstraintKind.SCCP, actions=actions, tree=tree, value=value)


# -----------------------------
# Single-channel closed form
# -----------------------------
def su_value_coefficients(params: ChannelParams, actions: Sequence[ActionTriple]) -> np.ndarray:
    """Rows (D_t, F_t, H_t), t = 1..T, with V_t = D_t (l0 + l2) + F_t l1 + H_t l3.

    Valid for one channel under a fixed per-slot action.
    """
    horizon = len(actions)
    coef = np.zeros((horizon + 1, 3))
    for t in range(horizon - 1, -1, -1):
        g, mu = actions[t].g, actions[t].mu
        d, f, h = coef[t + 1]
        coef[t] = (
            ((1 - mu) * (1 - params.alpha0) + mu * (1 - params.alpha1)) * d
            + (1 - mu) * params.alpha0 * f
            + mu * params.alpha1 * h,
            g + (1 - params.beta0) * d + params.beta0 * f,
            g + (1 - params.beta1) * d + params.beta1 * h,
        )
    return coef[:horizon]


def affine_value(coef_row: np.ndarray, row: np.ndarray) -> float:
    return float(coef_row[0] * (row[0] + row[2]) + coef_row[1] * row[1] + coef_row[2] * row[3])
