from enum import Enum, IntEnum
from typing import Annotated, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


# -----------------------------
# Enums and Constants
# -----------------------------
class PuState(IntEnum):
    BUSY_L0 = 0   # '00'
    IDLE_L0 = 1   # '01'
    BUSY_L1 = 2   # '10'
    IDLE_L1 = 3   # '11'


class Observation(IntEnum):
    NO_ACK = 0    # collision, or the SU stayed silent
    ACK = 1       # successful SU transmission


class ConstraintKind(str, Enum):
    SCCP = "sccp"
    LPUT = "lput"


class EvalMethod(str, Enum):
    EXACT = "exact"
    MONTE_CARLO = "mc"


Probability = Annotated[float, Field(ge=0.0, le=1.0)]


# -----------------------------
# Channel and sensor models
# -----------------------------
class ChannelParams(BaseModel):
    """Transition probabilities of one reactive PU channel.

    alpha*: busy -> idle, beta*: idle -> idle, for Level 0 and Level 1.
    """
    model_config = ConfigDict(frozen=True)

    alpha0: Probability
    beta0: Probability
    alpha1: Probability
    beta1: Probability

    @model_validator(mode="after")
    def _check_levels(self):
        if self.alpha1 < self.alpha0:
            raise ValueError(f"alpha1={self.alpha1} must be >= alpha0={self.alpha0}")
        if self.beta1 < self.beta0:
            raise ValueError(f"beta1={self.beta1} must be >= beta0={self.beta0}")
        return self

    @property
    def is_degenerate(self) -> bool:
        return 1.0 + self.alpha0 - self.beta0 == 0.0


class EnergyDetectorParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    m_samples: int = Field(ge=1)
    noise_power: float = Field(gt=0.0)    # linear scale
    signal_power: float = Field(gt=0.0)   # linear scale


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    channels: List[ChannelParams] = Field(min_length=1)
    horizon: int = Field(ge=1)
    zeta: Probability
    sensor: EnergyDetectorParams

    @model_validator(mode="after")
    def _check_chains(self):
        for n, params in enumerate(self.channels):
            if params.is_degenerate:
                raise ValueError(f"channel {n}: degenerate Level-0 chain (1 + alpha0 - beta0 = 0)")
        return self

    @property
    def n_channels(self) -> int:
        return len(self.channels)


# -----------------------------
# Actions
# -----------------------------
class OperatingPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: Probability   # false alarm
    delta: Probability     # mis-detection


class ActionTriple(BaseModel):
    """Sensed channel (0-based), sensor operating point and access pair (f(0), f(1))."""
    model_config = ConfigDict(frozen=True)

    channel: int = Field(ge=0)
    point: OperatingPoint
    f0: Probability
    f1: Probability

    @property
    def g(self) -> float:
        """Access probability given the PU is idle."""
        return self.point.epsilon * self.f0 + (1.0 - self.point.epsilon) * self.f1

    @property
    def mu(self) -> float:
        """Access probability given the PU is busy."""
        return (1.0 - self.point.delta) * self.f0 + self.point.delta * self.f1


class SensingPolicyTree(BaseModel):
    """Channel choice per reachable belief node, stored flat.

    Node 0 is the root (slot 1). children0/children1 hold the node index reached
    after observing K=0/K=1, or -1 at the last slot and on pruned branches.
    """
    slot: List[int] = []
    channel: List[int] = []
    children0: List[int] = []
    children1: List[int] = []

    @property
    def size(self) -> int:
        return len(self.channel)

    def child(self, node: int, k: int) -> int:
        return self.children1[node] if k else self.children0[node]

    def to_nested(self, node: int = 0) -> dict:
        """Nested observation-indexed form used by the policy JSON (channels 1-based)."""
        out = {"slot": self.slot[node], "channel": self.channel[node] + 1, "children": {}}
        for k in (0, 1):
            c = self.child(node, k)
            if c >= 0:
                out["children"][str(k)] = self.to_nested(c)
        return out


class PolicySchedule(BaseModel):
    """Per-slot, per-channel actions plus the sensing rule that picks the channel."""
    constraint: ConstraintKind
    actions: List[List[ActionTriple]]   # [slot][channel]
    tree: SensingPolicyTree
    value: Optional[float] = None       # solver's V_1 when known

    @property
    def horizon(self) -> int:
        return len(self.actions)

    def action(self, t: int, channel: int) -> ActionTriple:
        """Action for 1-based slot t on a 0-based channel."""
        return self.actions[t - 1][channel]
