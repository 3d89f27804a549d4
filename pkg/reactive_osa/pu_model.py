"""Reactive primary-user channel: a two-level, four-state Markov chain.

States are encoded 0..3 as BusyL0, IdleL0, BusyL1, IdleL1. A collision with the
SU while the PU is busy pushes it into Level 1; a busy slot without collision
brings it back to Level 0. Idle rows never depend on the SU's action.
"""
import logging
from typing import Tuple

import numpy as np

from .errors import InvalidParametersError
from .models import ChannelParams, PuState

logger = logging.getLogger(__name__)


def _idle_rows(params: ChannelParams) -> Tuple[np.ndarray, np.ndarray]:
    idle_l0 = np.array([1.0 - params.beta0, params.beta0, 0.0, 0.0])
    idle_l1 = np.array([0.0, 0.0, 1.0 - params.beta1, params.beta1])
    return idle_l0, idle_l1


def _busy_row(params: ChannelParams, mu: float) -> np.ndarray:
    return np.array([
        (1.0 - mu) * (1.0 - params.alpha0),
        (1.0 - mu) * params.alpha0,
        mu * (1.0 - params.alpha1),
        mu * params.alpha1,
    ])


def sensed_kernel(params: ChannelParams, mu: float) -> np.ndarray:
    """4x4 row-stochastic kernel P[j, i] = P(next=i | now=j) when the SU accesses a busy PU w.p. mu."""
    busy = _busy_row(params, mu)
    idle_l0, idle_l1 = _idle_rows(params)
    return np.vstack([busy, idle_l0, busy, idle_l1])


def unsensed_kernel(params: ChannelParams) -> np.ndarray:
    return sensed_kernel(params, 0.0)


def transition_row_unsensed(params: ChannelParams, state: PuState) -> np.ndarray:
    return unsensed_kernel(params)[int(state)].copy()


def transition_row_sensed(params: ChannelParams, state: PuState, mu: float) -> np.ndarray:
    if not 0.0 <= mu <= 1.0:
        raise InvalidParametersError(f"mu={mu} outside [0, 1]")
    return sensed_kernel(params, mu)[int(state)].copy()


def stationary_level0(params: ChannelParams) -> Tuple[float, float]:
    """Stationary (busy, idle) probabilities of the Level-0 two-state chain."""
    denom = 1.0 + params.alpha0 - params.beta0
    if denom == 0.0:
        raise InvalidParametersError(
            f"Degenerate Level-0 chain: alpha0={params.alpha0}, beta0={params.beta0}"
        )
    busy = (1.0 - params.beta0) / denom
    return busy, 1.0 - busy


def benchmark_throughput(params: ChannelParams, zeta: float) -> float:
    """PU throughput a non-reactive PU keeps under a collision cap zeta."""
    if not 0.0 <= zeta <= 1.0:
        raise InvalidParametersError(f"zeta={zeta} outside [0, 1]")
    busy, _ = stationary_level0(params)
    return busy * (1.0 - zeta)


def reduce_to_nonreactive(params: ChannelParams) -> ChannelParams:
    return ChannelParams(
        alpha0=params.alpha0,
        beta0=params.beta0,
        alpha1=params.alpha0,
        beta1=params.beta0,
    )


def busy_idle_marginal(row: np.ndarray) -> Tuple[float, float]:
    """Collapse a 4-state distribution onto (busy, idle)."""
    return float(row[0] + row[2]), float(row[1] + row[3])
