"""ScenarioConfig: the JSON document every CLI command reads."""
import logging
import math
import os
from typing import Any, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator, model_validator

from .config import DEFAULT_HORIZONS, DEFAULT_PSI
from .errors import ConfigValidationError
from .models import ChannelParams, ConstraintKind, EnergyDetectorParams, EvalMethod, Probability, Scenario
from .storage import JsonStorage

logger = logging.getLogger(__name__)

PRESET_DIR = os.path.join(os.path.dirname(__file__), "presets")


def db_to_linear(db: float) -> float:
    try:
        return 10.0 ** (db / 10.0)
    except OverflowError:
        return math.inf


# -----------------------------
# Schema
# -----------------------------
class ChannelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha0: Probability
    beta0: Probability
    alpha1: Probability
    beta1: Probability


class SensorConfig(BaseModel):
    """Powers arrive in dB and are converted to linear scale while the document is parsed."""
    model_config = ConfigDict(extra="forbid")

    m_samples: int = Field(ge=1)
    noise_power_db: float
    signal_power_db: float

    _params: Optional[EnergyDetectorParams] = PrivateAttr(default=None)

    @field_validator("noise_power_db", "signal_power_db")
    @classmethod
    def _check_db(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"power {v} dB is not finite")
        linear = db_to_linear(v)
        if not (math.isfinite(linear) and linear > 0.0):
            raise ValueError(f"power {v} dB has no finite positive linear value")
        return v

    @model_validator(mode="after")
    def _to_linear(self):
        self._params = EnergyDetectorParams(
            m_samples=self.m_samples,
            noise_power=db_to_linear(self.noise_power_db),
            signal_power=db_to_linear(self.signal_power_db),
        )
        return self

    @property
    def params(self) -> EnergyDetectorParams:
        return self._params


class EvalConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: EvalMethod = EvalMethod.EXACT
    episodes: int = Field(default=100_000, ge=1)
    seed: int = Field(default=0, ge=0, le=2**128 - 1)


class CaseConfig(BaseModel):
    """A hand-set first-slot action (f0, f1, epsilon, delta)."""
    model_config = ConfigDict(extra="forbid")

    f0: Probability
    f1: Probability
    epsilon: Probability
    delta: Probability


class ReproduceConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    horizons: List[int] = Field(default_factory=lambda: list(DEFAULT_HORIZONS))
    zetas: List[Probability] = Field(default_factory=list)
    cases: List[CaseConfig] = Field(default_factory=list)


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    channels: List[ChannelConfig] = Field(min_length=1)
    horizon: int = Field(ge=1)
    zeta: Probability
    constraint: ConstraintKind = ConstraintKind.SCCP
    psi: Union[float, List[float]] = DEFAULT_PSI
    sensor: SensorConfig
    evaluation: EvalConfig = Field(default_factory=EvalConfig, alias="eval")
    node_budget: Optional[int] = Field(default=None, ge=1)
    reproduce: Optional[ReproduceConfig] = None

    def sensor_params(self) -> EnergyDetectorParams:
        return self.sensor.params

    def channel_params(self) -> List[ChannelParams]:
        return [ChannelParams(**c.model_dump()) for c in self.channels]

    def to_scenario(self, horizon: Optional[int] = None, zeta: Optional[float] = None) -> Scenario:
        return Scenario(
            channels=self.channel_params(),
            horizon=self.horizon if horizon is None else horizon,
            zeta=self.zeta if zeta is None else zeta,
            sensor=self.sensor_params(),
        )

    def psi_for(self, horizon: int) -> Union[float, List[float]]:
        """A scalar psi stretches to any horizon; a list is kept only for its own horizon."""
        if isinstance(self.psi, list):
            if len(self.psi) == horizon:
                return self.psi
            return self.psi[:horizon] + [self.psi[-1]] * max(0, horizon - len(self.psi))
        return self.psi


# -----------------------------
# Validation
# -----------------------------
def _pointer(loc: Tuple[Any, ...]) -> str:
    return "/" + "/".join(str(p) for p in loc)


def model_violations(cfg: ScenarioConfig) -> List[Tuple[str, str]]:
    """Constraints the schema cannot express, as (JSON pointer, message)."""
    out = []
    for n, c in enumerate(cfg.channels):
        if c.alpha1 < c.alpha0:
            out.append((f"/channels/{n}/alpha1", f"alpha1={c.alpha1} must be >= alpha0={c.alpha0}"))
        if c.beta1 < c.beta0:
            out.append((f"/channels/{n}/beta1", f"beta1={c.beta1} must be >= beta0={c.beta0}"))
        if 1.0 + c.alpha0 - c.beta0 == 0.0:
            out.append((f"/channels/{n}", "degenerate Level-0 chain (1 + alpha0 - beta0 = 0)"))
    if isinstance(cfg.psi, list):
        if len(cfg.psi) != cfg.horizon:
            out.append(("/psi", f"psi has {len(cfg.psi)} entries, horizon is {cfg.horizon}"))
        for j, p in enumerate(cfg.psi):
            if not 0.0 <= p <= 1.0:
                out.append((f"/psi/{j}", f"psi={p} outside [0, 1]"))
    elif not 0.0 <= cfg.psi <= 1.0:
        out.append(("/psi", f"psi={cfg.psi} outside [0, 1]"))
    return out


def parse_config(doc: Any) -> ScenarioConfig:
    try:
        cfg = ScenarioConfig.model_validate(doc)
    except ValidationError as e:
        raise ConfigValidationError([(_pointer(err["loc"]), err["msg"]) for err in e.errors()])
    violations = model_violations(cfg)
    if violations:
        raise ConfigValidationError(violations)
    return cfg


def load_config(path: str) -> ScenarioConfig:
    """Read and validate a config file; UsageError on unreadable JSON."""
    cfg = parse_config(JsonStorage(path).load())
    logger.info(f"Loaded scenario {path}: N={len(cfg.channels)}, T={cfg.horizon}, {cfg.constraint.value}")
    return cfg


def load_preset(name: str) -> ScenarioConfig:
    return load_config(os.path.join(PRESET_DIR, f"{name}.json"))
