"""Scenario risk, residual risk and micromort unit conversion."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ClampWarning, OutOfRange, ValidationError, ZeroControl

PER_MILLION = 1e6

# Parse-time floor for control effectiveness; keeps residual_risk away from
# division blow-ups on hand-written scenario files.
MIN_CONTROL_EFFECTIVENESS = 1e-9


def _finite(value, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"expected a number, got {value!r}", field=name) from None
    if not math.isfinite(value):
        raise ValidationError(f"must be finite, got {value!r}", field=name)
    return value


@dataclass(frozen=True)
class Scenario:
    description: str
    probability: float
    consequence: float

    def __post_init__(self):
        p = _finite(self.probability, "probability")
        x = _finite(self.consequence, "consequence")
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"probability {p} outside [0, 1]", field="probability")
        if x < 0:
            raise ValidationError(f"consequence {x} is negative", field="consequence")
        object.__setattr__(self, "probability", p)
        object.__setattr__(self, "consequence", x)


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple[Scenario, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))

    def __len__(self) -> int:
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)


@dataclass(frozen=True)
class MicromortRate:
    """Rate of digital death; one micromort is a 10^-6 chance over the horizon."""

    micromorts: float

    def __post_init__(self):
        m = _finite(self.micromorts, "micromorts")
        if m < 0:
            raise ValidationError(f"micromort rate {m} is negative", field="micromorts")
        object.__setattr__(self, "micromorts", m)

    @property
    def as_probability(self) -> float:
        p = self.micromorts / PER_MILLION
        if p > 1.0:
            warnings.warn(
                f"{self.micromorts} micromorts exceeds certainty; clamped to probability 1",
                ClampWarning,
                stacklevel=2,
            )
            return 1.0
        return p


@dataclass(frozen=True)
class RiskFactorProfile:
    """Key risk factor groups for one asset.

    The technological and non-technological entries are descriptive tags for
    reporting; only `inherent_risk` and `control_effectiveness` enter the
    residual-risk arithmetic.
    """

    inherent_risk: float
    control_effectiveness: float
    technological: tuple[str, ...] = ()
    non_technological: tuple[str, ...] = ()

    def __post_init__(self):
        inherent = _finite(self.inherent_risk, "inherent_risk")
        control = _finite(self.control_effectiveness, "control_effectiveness")
        if inherent < 0:
            raise ValidationError(f"inherent risk {inherent} is negative", field="inherent_risk")
        if control < MIN_CONTROL_EFFECTIVENESS:
            raise ValidationError(
                f"control effectiveness {control} is below {MIN_CONTROL_EFFECTIVENESS}",
                field="control_effectiveness",
            )
        object.__setattr__(self, "inherent_risk", inherent)
        object.__setattr__(self, "control_effectiveness", control)
        object.__setattr__(self, "technological", tuple(str(t) for t in self.technological))
        object.__setattr__(self, "non_technological", tuple(str(t) for t in self.non_technological))

    @property
    def residual(self) -> float:
        return residual_risk(self.inherent_risk, self.control_effectiveness)


def scenario_risk(scenario: Scenario) -> float:
    """Likelihood times consequence."""
    return scenario.probability * scenario.consequence


def expected_consequence(scenarios: ScenarioSet | Iterable[Scenario]) -> float:
    return math.fsum(scenario_risk(s) for s in scenarios)


def residual_risk(inherent_risk: float, control_effectiveness: float) -> float:
    """Inherent risk divided by control effectiveness.

    The result is not clamped; it stays in whatever unit the caller used for
    `inherent_risk`.
    """
    if not control_effectiveness > 0:
        raise ZeroControl(
            f"control effectiveness must be > 0, got {control_effectiveness}",
            field="control_effectiveness",
        )
    if inherent_risk < 0:
        raise ValidationError(f"inherent risk {inherent_risk} is negative", field="inherent_risk")
    return inherent_risk / control_effectiveness


def to_micromorts(probability: float) -> MicromortRate:
    if not 0.0 <= probability <= 1.0:
        raise OutOfRange(f"probability {probability} outside [0, 1]", field="probability")
    return MicromortRate(probability * PER_MILLION)


def from_micromorts(rate: MicromortRate | float) -> float:
    if not isinstance(rate, MicromortRate):
        rate = MicromortRate(rate)
    return rate.as_probability


def scenario_set(rows: Sequence[tuple[str, float, float]]) -> ScenarioSet:
    return ScenarioSet(tuple(Scenario(*row) for row in rows))
