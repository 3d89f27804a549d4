"""Energy-detector ROC: thresholds to (false alarm, mis-detection) and back."""
import logging
import math
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Tuple

from scipy.optimize import brentq

from .config import ETA_XTOL, ROC_TOL
from .errors import InvalidArgumentError
from .models import EnergyDetectorParams, OperatingPoint

logger = logging.getLogger(__name__)

_EPS = 1e-16
_FPMIN = 1e-300
_MAX_ITER = 10_000


# -----------------------------
# Regularized incomplete gamma
# -----------------------------
def _gamma_series(a: float, x: float) -> float:
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        logger.warning(f"Gamma series did not converge for a={a}, x={x}")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_continued_fraction(a: float, x: float) -> float:
    """Upper regularized gamma Q(a, x) by modified Lentz."""
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _EPS:
            break
    else:
        logger.warning(f"Gamma continued fraction did not converge for a={a}, x={x}")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_lower_gamma(a: float, x: float) -> float:
    """P(a, x) = (1/Gamma(a)) * integral_0^x t^(a-1) e^(-t) dt."""
    if not a > 0.0:
        raise InvalidArgumentError(f"regularized_lower_gamma needs a > 0, got a={a}")
    if not x >= 0.0:
        raise InvalidArgumentError(f"regularized_lower_gamma needs x >= 0, got x={x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _gamma_series(a, x))
    return max(0.0, 1.0 - _gamma_continued_fraction(a, x))


def regularized_upper_gamma(a: float, x: float) -> float:
    """Q(a, x) = 1 - P(a, x), computed directly so tiny tails keep their precision."""
    if not a > 0.0:
        raise InvalidArgumentError(f"regularized_upper_gamma needs a > 0, got a={a}")
    if not x >= 0.0:
        raise InvalidArgumentError(f"regularized_upper_gamma needs x >= 0, got x={x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_continued_fraction(a, x))


# -----------------------------
# Energy detector operating points
# -----------------------------
def operating_point_from_threshold(params: EnergyDetectorParams, eta: float) -> OperatingPoint:
    if not eta >= 0.0:
        raise InvalidArgumentError(f"threshold must be >= 0, got {eta}")
    half_m = params.m_samples / 2.0
    delta = regularized_lower_gamma(half_m, eta / (2.0 * (params.noise_power + params.signal_power)))
    epsilon = regularized_upper_gamma(half_m, eta / (2.0 * params.noise_power))
    return OperatingPoint(epsilon=epsilon, delta=delta)


def _expand_bracket(fn, start: float) -> float:
    hi = start
    while fn(hi) <= 0.0:
        hi *= 2.0
        if math.isinf(hi):
            raise InvalidArgumentError("threshold bracket overflowed")
    return hi


@lru_cache(maxsize=4096)
def epsilon_for_delta(params: EnergyDetectorParams, delta_target: float) -> Tuple[float, float]:
    """Threshold and false alarm that put the detector at mis-detection delta_target.

    delta_target = 1 maps to (epsilon=0, eta=inf) by convention.
    """
    if not 0.0 <= delta_target <= 1.0:
        raise InvalidArgumentError(f"delta target {delta_target} outside [0, 1]")
    if delta_target == 0.0:
        return 1.0, 0.0
    if delta_target == 1.0:
        return 0.0, math.inf

    def gap(eta: float) -> float:
        return operating_point_from_threshold(params, eta).delta - delta_target

    hi = _expand_bracket(gap, 2.0 * (params.noise_power + params.signal_power) * params.m_samples)
    eta = brentq(gap, 0.0, hi, xtol=ETA_XTOL, maxiter=500)
    return operating_point_from_threshold(params, eta).epsilon, eta


@lru_cache(maxsize=4096)
def delta_for_epsilon(params: EnergyDetectorParams, epsilon: float) -> float:
    """Smallest achievable mis-detection at false alarm epsilon (the ROC curve itself)."""
    if not 0.0 <= epsilon <= 1.0:
        raise InvalidArgumentError(f"epsilon {epsilon} outside [0, 1]")
    if epsilon == 1.0:
        return 0.0
    if epsilon == 0.0:
        return 1.0

    def gap(eta: float) -> float:
        return epsilon - operating_point_from_threshold(params, eta).epsilon

    hi = _expand_bracket(gap, 2.0 * params.noise_power * params.m_samples)
    eta = brentq(gap, 0.0, hi, xtol=ETA_XTOL, maxiter=500)
    return operating_point_from_threshold(params, eta).delta


# -----------------------------
# ROC interface
# -----------------------------
class RocCurve(ABC):
    """Pareto frontier of achievable (epsilon, delta) pairs."""

    @abstractmethod
    def epsilon_for_delta(self, delta: float) -> float:
        ...

    @abstractmethod
    def min_delta(self, epsilon: float) -> float:
        ...

    def point_for_delta(self, delta: float) -> OperatingPoint:
        return OperatingPoint(epsilon=self.epsilon_for_delta(delta), delta=delta)

    def roc_gap(self, point: OperatingPoint) -> float:
        """Distance above the curve along delta; zero on the curve."""
        return point.delta - self.min_delta(point.epsilon)

    def is_feasible(self, point: OperatingPoint) -> bool:
        return (
            self.roc_gap(point) >= -ROC_TOL
            and 1.0 - point.delta >= point.epsilon - ROC_TOL
        )


class EnergyDetectorRoc(RocCurve):
    def __init__(self, params: EnergyDetectorParams):
        self.params = params

    def epsilon_for_delta(self, delta: float) -> float:
        return epsilon_for_delta(self.params, float(delta))[0]

    def min_delta(self, epsilon: float) -> float:
        return delta_for_epsilon(self.params, float(epsilon))

    def __repr__(self):
        return f"EnergyDetectorRoc({self.params!r})"


class PerfectSensorRoc(RocCurve):
    """Error-free sensing: any mis-detection target comes with zero false alarm."""

    def epsilon_for_delta(self, delta: float) -> float:
        if not 0.0 <= delta <= 1.0:
            raise InvalidArgumentError(f"delta {delta} outside [0, 1]")
        return 0.0

    def min_delta(self, epsilon: float) -> float:
        return 0.0

    def __repr__(self):
        return "PerfectSensorRoc()"


def is_feasible(params: EnergyDetectorParams, point: OperatingPoint) -> bool:
    return EnergyDetectorRoc(params).is_feasible(point)
