"""Exact and Monte Carlo evaluation of SU and PU throughput under a policy."""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from .belief import BeliefStepper, busy_mass, initial_belief
from .config import BRANCH_PRUNE, MC_RECORD_LIMIT, PROB_TOL, node_budget
from .errors import BudgetExceededError, InvalidArgumentError, UsageError
from .models import ActionTriple, ChannelParams, EvalMethod, PolicySchedule, Scenario
from .policy_sccp import affine_value, required_nodes, su_value_coefficients
from .pu_model import benchmark_throughput

logger = logging.getLogger(__name__)


class EvaluationReport(BaseModel):
    method: EvalMethod
    horizon: int
    su_total: float
    su_normalized: float
    pu_normalized: List[float]
    su_share: List[float]             # normalized SU reward collected on each channel
    sum_throughput: List[float]       # pu_normalized + su_share, per channel
    benchmark: List[float]            # Upsilon per channel
    upper_bound: List[float]          # 1 - Upsilon per channel
    branch_count: Optional[int] = None
    probability_mass: Optional[float] = None
    episodes: Optional[int] = None
    seed: Optional[int] = None
    su_stderr: Optional[float] = None
    pu_stderr: Optional[List[float]] = None
    sum_stderr: Optional[List[float]] = None
    episode_rewards: Optional[List[float]] = None

    def below_benchmark(self, tol: float = 1e-9) -> List[int]:
        """0-based channels whose PU throughput falls short of Upsilon."""
        return [n for n, (pu, ups) in enumerate(zip(self.pu_normalized, self.benchmark)) if pu < ups - tol]


def su_upper_bound(params: ChannelParams, zeta: float) -> float:
    return 1.0 - benchmark_throughput(params, zeta)


def _benchmarks(scenario: Scenario) -> List[float]:
    return [benchmark_throughput(p, scenario.zeta) for p in scenario.channels]


def _check_policy(scenario: Scenario, policy: PolicySchedule):
    if policy.horizon != scenario.horizon:
        raise UsageError(f"policy horizon {policy.horizon} does not match scenario horizon {scenario.horizon}")
    if any(len(row) != scenario.n_channels for row in policy.actions):
        raise UsageError("policy action table does not cover every channel")


# -----------------------------
# Exact tree walk
# -----------------------------
def _walk(scenario: Scenario, policy: PolicySchedule, budget: Optional[int] = None):
    """Expected SU acks per channel, PU rewards per channel, leaf count and leaf mass."""
    _check_policy(scenario, policy)
    budget = node_budget(budget)
    required = required_nodes(1, scenario.horizon)
    if required > budget:
        raise BudgetExceededError(required, budget)
    n_channels, horizon = scenario.n_channels, scenario.horizon
    tree = policy.tree
    stepper = BeliefStepper(scenario.channels, policy.actions)
    su_share = np.zeros(n_channels)
    pu = np.zeros(n_channels)
    leaves, mass = 0, 0.0

    stack = [(0, 1.0, initial_belief(scenario.channels))]
    while stack:
        node, h, belief = stack.pop()
        t, a = tree.slot[node], tree.channel[node]
        mu = policy.action(t, a).mu
        for n in range(n_channels):
            pu[n] += h * busy_mass(belief[n]) * (1.0 - (mu if n == a else 0.0))
        for k, p, nxt in stepper.branches(belief, t, a, prune=BRANCH_PRUNE):
            su_share[a] += h * p * k
            if t == horizon:
                leaves += 1
                mass += h * p
                continue
            child = tree.child(node, k)
            if child < 0:
                raise UsageError(f"policy tree has no node after K={k} at slot {t} (node {node})")
            stack.append((child, h * p, nxt))

    if abs(mass - 1.0) > PROB_TOL:
        logger.warning(f"Leaf probabilities sum to {mass:.17g}")
    return su_share, pu, leaves, mass


def exact_su_value(scenario: Scenario, policy: PolicySchedule, normalize: bool = False,
                   budget: Optional[int] = None) -> float:
    su_share, _, _, _ = _walk(scenario, policy, budget)
    total = float(su_share.sum())
    return total / scenario.horizon if normalize else total


def exact_pu_throughput(scenario: Scenario, policy: PolicySchedule,
                        budget: Optional[int] = None) -> List[float]:
    """Normalized PU throughput G_1 / T per channel."""
    _, pu, _, _ = _walk(scenario, policy, budget)
    return [float(v) / scenario.horizon for v in pu]


def evaluate_exact(scenario: Scenario, policy: PolicySchedule,
                   budget: Optional[int] = None) -> EvaluationReport:
    su_share, pu, leaves, mass = _walk(scenario, policy, budget)
    horizon = scenario.horizon
    benchmark = _benchmarks(scenario)
    share = [float(v) / horizon for v in su_share]
    pu_norm = [float(v) / horizon for v in pu]
    su_total = float(su_share.sum())
    logger.info(f"Exact evaluation: SU={su_total / horizon:.12g}, PU={pu_norm}, {leaves} branches")
    return EvaluationReport(
        method=EvalMethod.EXACT,
        horizon=horizon,
        su_total=su_total,
        su_normalized=su_total / horizon,
        pu_normalized=pu_norm,
        su_share=share,
        sum_throughput=[p + s for p, s in zip(pu_norm, share)],
        benchmark=benchmark,
        upper_bound=[1.0 - b for b in benchmark],
        branch_count=leaves,
        probability_mass=mass,
    )


# -----------------------------
# Single-channel closed form
# -----------------------------
def pu_throughput_coefficients(params: ChannelParams, actions: Sequence[ActionTriple]) -> np.ndarray:
    """Rows (q_t, w_t, m_t), t = 1..T, with G_t = q_t (l0 + l2) + w_t l1 + m_t l3."""
    horizon = len(actions)
    coef = np.zeros((horizon + 1, 3))
    a0, b0, a1, b1 = params.alpha0, params.beta0, params.alpha1, params.beta1
    for t in range(horizon - 1, -1, -1):
        mu = actions[t].mu
        q, w, m = coef[t + 1]
        coef[t] = (
            (1 - mu) + ((1 - mu) * (1 - a0) + mu * (1 - a1)) * q + (1 - mu) * a0 * w + mu * a1 * m,
            (1 - b0) * q + b0 * w,
            (1 - b1) * q + b1 * m,
        )
    return coef[:horizon]


def closed_form_single_channel(scenario: Scenario, actions: Sequence[ActionTriple],
                               row: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """(SU total, PU total) for N=1 in O(T), no tree needed."""
    if scenario.n_channels != 1:
        raise InvalidArgumentError("closed form needs a single channel")
    params = scenario.channels[0]
    row = initial_belief(scenario.channels)[0] if row is None else np.asarray(row, dtype=float)
    su = affine_value(su_value_coefficients(params, actions)[0], row)
    pu = affine_value(pu_throughput_coefficients(params, actions)[0], row)
    return su, pu


def evaluate_closed_form(scenario: Scenario, actions: Sequence[ActionTriple]) -> EvaluationReport:
    """Exact single-channel report from the affine recursions; no tree, no node budget."""
    if len(actions) != scenario.horizon:
        raise UsageError(f"{len(actions)} actions for horizon {scenario.horizon}")
    su_total, pu_total = closed_form_single_channel(scenario, actions)
    horizon = scenario.horizon
    benchmark = _benchmarks(scenario)
    su, pu = su_total / horizon, pu_total / horizon
    logger.info(f"Closed-form evaluation: SU={su:.12g}, PU={pu:.12g}")
    return EvaluationReport(
        method=EvalMethod.EXACT,
        horizon=horizon,
        su_total=su_total,
        su_normalized=su,
        pu_normalized=[pu],
        su_share=[su],
        sum_throughput=[pu + su],
        benchmark=benchmark,
        upper_bound=[1.0 - b for b in benchmark],
    )


# -----------------------------
# Monte Carlo
# -----------------------------
MAX_SEED = 2**128 - 1   # Philox key is two 64-bit words


def episode_uniforms(seed: int, episodes: int, width: int) -> np.ndarray:
    """One Philox stream per episode, so any episode can be replayed on its own."""
    out = np.empty((episodes, width))
    for e in range(episodes):
        bitgen = np.random.Philox(key=seed, counter=[0, 0, 0, e])
        out[e] = np.random.Generator(bitgen).random(width)
    return out


def _stderr(samples: np.ndarray) -> Optional[float]:
    if samples.shape[0] < 2:
        return None
    return float(np.std(samples, ddof=1) / math.sqrt(samples.shape[0]))


def monte_carlo(scenario: Scenario, policy: PolicySchedule, episodes: int, seed: int) -> EvaluationReport:
    if episodes < 1:
        raise InvalidArgumentError(f"episodes must be >= 1, got {episodes}")
    if not 0 <= seed <= MAX_SEED:
        raise InvalidArgumentError(f"seed must be in [0, 2**128 - 1], got {seed}")
    _check_policy(scenario, policy)
    n_channels, horizon = scenario.n_channels, scenario.horizon
    tree = policy.tree
    children = np.array([tree.children0, tree.children1], dtype=np.int64)
    node_channel = np.array(tree.channel, dtype=np.int64)

    chan = scenario.channels
    alpha0 = np.array([p.alpha0 for p in chan])
    alpha1 = np.array([p.alpha1 for p in chan])
    beta0 = np.array([p.beta0 for p in chan])
    beta1 = np.array([p.beta1 for p in chan])
    eps = np.array([[a.point.epsilon for a in row] for row in policy.actions])
    dlt = np.array([[a.point.delta for a in row] for row in policy.actions])
    f0 = np.array([[a.f0 for a in row] for row in policy.actions])
    f1 = np.array([[a.f1 for a in row] for row in policy.actions])

    width = n_channels + horizon * (n_channels + 2)
    u = episode_uniforms(seed, episodes, width)
    rows = np.arange(episodes)

    idle0 = initial_belief(chan)[:, 1]
    state = (u[:, :n_channels] < idle0).astype(np.int64)    # Level 0, busy=0 / idle=1
    node = np.zeros(episodes, dtype=np.int64)
    su = np.zeros(episodes)
    share = np.zeros((episodes, n_channels))
    pu = np.zeros((episodes, n_channels))

    for t in range(horizon):
        base = n_channels + t * (n_channels + 2)
        u_next = u[:, base:base + n_channels]
        u_sense = u[:, base + n_channels]
        u_access = u[:, base + n_channels + 1]

        if np.any(node < 0):
            raise UsageError(f"policy tree has no node for a sampled path at slot {t + 1}")
        a = node_channel[node]
        sensed_state = state[rows, a]
        sensed_idle = (sensed_state & 1).astype(bool)
        says_idle = np.where(sensed_idle, u_sense >= eps[t, a], u_sense < dlt[t, a])
        access = u_access < np.where(says_idle, f1[t, a], f0[t, a])
        ack = access & sensed_idle

        su += ack
        share[rows, a] += ack
        busy = (state & 1) == 0
        collided = np.zeros_like(busy)
        collided[rows, a] = access & ~sensed_idle
        pu += busy & ~collided

        level = np.where(busy, collided, state >> 1).astype(np.int64)
        p_idle = np.where(
            busy,
            np.where(collided, alpha1, alpha0),
            np.where(state >> 1, beta1, beta0),
        )
        state = 2 * level + (u_next < p_idle)
        node = children[ack.astype(np.int64), node]

    benchmark = _benchmarks(scenario)
    su_norm = su / horizon
    pu_norm = pu / horizon
    share_norm = share / horizon
    sums = pu_norm + share_norm
    report = EvaluationReport(
        method=EvalMethod.MONTE_CARLO,
        horizon=horizon,
        su_total=float(su.mean()),
        su_normalized=float(su_norm.mean()),
        pu_normalized=[float(v) for v in pu_norm.mean(axis=0)],
        su_share=[float(v) for v in share_norm.mean(axis=0)],
        sum_throughput=[float(v) for v in sums.mean(axis=0)],
        benchmark=benchmark,
        upper_bound=[1.0 - b for b in benchmark],
        episodes=episodes,
        seed=seed,
        su_stderr=_stderr(su_norm),
        pu_stderr=None if episodes < 2 else [_stderr(pu_norm[:, n]) for n in range(n_channels)],
        sum_stderr=None if episodes < 2 else [_stderr(sums[:, n]) for n in range(n_channels)],
        episode_rewards=[float(v) for v in su] if episodes <= MC_RECORD_LIMIT else None,
    )
    logger.info(f"Monte Carlo ({episodes} episodes, seed {seed}): SU={report.su_normalized:.6f}")
    return report


def cross_check(exact: EvaluationReport, mc: EvaluationReport, k: float = 4.0) -> List[Tuple[str, float, float, Optional[float], bool]]:
    """(name, exact, estimate, stderr, within k standard errors) per estimate."""
    rows = [("su", exact.su_normalized, mc.su_normalized, mc.su_stderr)]
    for n, (ex, est) in enumerate(zip(exact.pu_normalized, mc.pu_normalized)):
        rows.append((f"pu[{n + 1}]", ex, est, mc.pu_stderr[n] if mc.pu_stderr else None))
    out = []
    for name, ex, est, se in rows:
        if se is None:
            ok = False
        elif se == 0.0:
            ok = abs(ex - est) <= 1e-12
        else:
            ok = abs(ex - est) <= k * se
        out.append((name, ex, est, se, ok))
    return out
