"""SU belief over PU states: observation model, Bayes updates and per-slot rewards.

A BeliefMatrix is an (N, 4) float array; row n is the distribution of channel n
over (BusyL0, IdleL0, BusyL1, IdleL1).
"""
import logging
from typing import Sequence

import numpy as np

from .config import PROB_TOL
from .errors import ImpossibleObservationError
from .models import ActionTriple, ChannelParams, Observation, PuState
from .pu_model import sensed_kernel, stationary_level0, unsensed_kernel

logger = logging.getLogger(__name__)

_IDLE_MASK = np.array([0.0, 1.0, 0.0, 1.0])
_BUSY_MASK = np.array([1.0, 0.0, 1.0, 0.0])


def initial_row(params: ChannelParams) -> np.ndarray:
    busy, idle = stationary_level0(params)
    return np.array([busy, idle, 0.0, 0.0])


def initial_belief(channels: Sequence[ChannelParams]) -> np.ndarray:
    """Level-0 stationary rows, nothing in Level 1."""
    return np.vstack([initial_row(p) for p in channels])


# -----------------------------
# Access and observation probabilities
# -----------------------------
def access_prob_idle(action: ActionTriple) -> float:
    return action.g


def access_prob_busy(action: ActionTriple) -> float:
    return action.mu


def observation_likelihood(action: ActionTriple, k: int) -> np.ndarray:
    """U(k | i) for the four PU states."""
    ack = _IDLE_MASK * action.g
    return ack if k == Observation.ACK else 1.0 - ack


def observation_prob(action: ActionTriple, state: PuState, k: int) -> float:
    return float(observation_likelihood(action, k)[int(state)])


# -----------------------------
# Updates
# -----------------------------
def _renormalize(row: np.ndarray) -> np.ndarray:
    row = np.clip(row, 0.0, None)
    total = row.sum()
    if abs(total - 1.0) > PROB_TOL:
        logger.warning(f"Belief row drifted to mass {total:.17g}; renormalizing")
        row = row / total
    return row


def update_unselected(row: np.ndarray, params: ChannelParams) -> np.ndarray:
    return _renormalize(np.asarray(row, dtype=float) @ unsensed_kernel(params))


def update_selected(
    row: np.ndarray, params: ChannelParams, action: ActionTriple, k: int
) -> np.ndarray:
    """Bayes update of the sensed channel's row after observing K=k."""
    weights = np.asarray(row, dtype=float) * observation_likelihood(action, k)
    denom = weights.sum()
    if denom <= 0.0:
        raise ImpossibleObservationError(k)
    return _renormalize((weights @ sensed_kernel(params, action.mu)) / denom)


def update_belief(
    belief: np.ndarray,
    channels: Sequence[ChannelParams],
    action: ActionTriple,
    k: int,
) -> np.ndarray:
    """Advance every row: Bayes on the sensed channel, prior push elsewhere."""
    nxt = np.empty_like(belief)
    for n, params in enumerate(channels):
        if n == action.channel:
            nxt[n] = update_selected(belief[n], params, action, k)
        else:
            nxt[n] = update_unselected(belief[n], params)
    return nxt


# -----------------------------
# Rewards
# -----------------------------
def idle_mass(row: np.ndarray) -> float:
    return float(row[1] + row[3])


def busy_mass(row: np.ndarray) -> float:
    return float(row[0] + row[2])


def ack_probability(row: np.ndarray, action: ActionTriple) -> float:
    return idle_mass(row) * action.g


def expected_su_reward(row: np.ndarray, action: ActionTriple) -> float:
    return ack_probability(row, action)


def expected_pu_reward_slot(row: np.ndarray, sigma: float) -> float:
    return busy_mass(row) * (1.0 - sigma)


# -----------------------------
# Batched stepping for tree solvers
# -----------------------------
class BeliefStepper:
    """Precomputed kernels for a fixed [slot][channel] action table.

    branches() gives the same rows as update_belief, without rebuilding the
    kernels at every node of a belief tree.
    """

    def __init__(self, channels: Sequence[ChannelParams], actions: Sequence[Sequence[ActionTriple]]):
        self.channels = list(channels)
        self.actions = actions
        self._unsensed = np.stack([unsensed_kernel(p) for p in self.channels])
        self._sensed = [
            [sensed_kernel(p, row[n].mu) for n, p in enumerate(self.channels)]
            for row in actions
        ]

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    def push_unselected(self, belief: np.ndarray) -> np.ndarray:
        return np.einsum("ni,nij->nj", belief, self._unsensed)

    def branches(self, belief: np.ndarray, t: int, channel: int, prune: float = 0.0):
        """[(k, probability, next belief)] for sensing `channel` in 1-based slot t.

        Branches with probability <= prune are dropped.
        """
        action = self.actions[t - 1][channel]
        pushed = self.push_unselected(belief)
        ack = belief[channel] * _IDLE_MASK * action.g
        out = []
        for k, weights in ((0, belief[channel] - ack), (1, ack)):
            p = float(weights.sum())
            if p <= 0.0 or p < prune:
                continue
            nxt = pushed.copy()
            nxt[channel] = _renormalize((weights @ self._sensed[t - 1][channel]) / p)
            out.append((k, p, nxt))
        return out

    def ack_probability(self, belief: np.ndarray, t: int, channel: int) -> float:
        return ack_probability(belief[channel], self.actions[t - 1][channel])
