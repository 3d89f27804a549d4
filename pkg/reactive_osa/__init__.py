"""Opportunistic spectrum access policies for reactive primary users."""
from .models import (
    ActionTriple,
    ChannelParams,
    ConstraintKind,
    EnergyDetectorParams,
    OperatingPoint,
    PolicySchedule,
    PuState,
    Scenario,
)

__version__ = "0.1.0"
