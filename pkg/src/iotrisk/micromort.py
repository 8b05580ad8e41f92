"""Fleet-level IoT micromort fractions and willingness-to-pay arithmetic.

Counts are integers, so fractions are computed exactly with
:class:`fractions.Fraction` and rounded once to the nearest float. Rounding
for display happens only in the ``render_*`` helpers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .errors import InconsistentReduction, ValidationError
from .risk import PER_MILLION


def _count(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool):
        raise ValidationError(f"expected an integer count, got {value!r}", field=name)
    if isinstance(value, float):
        if not value.is_integer():
            raise ValidationError(f"expected an integer count, got {value!r}", field=name)
        value = int(value)
    if not isinstance(value, int):
        raise ValidationError(f"expected an integer count, got {value!r}", field=name)
    if value < minimum:
        raise ValidationError(f"must be >= {minimum}, got {value}", field=name)
    return value


@dataclass(frozen=True)
class FleetStats:
    total_devices: int
    vulnerable_devices: int

    def __post_init__(self):
        total = _count(self.total_devices, "total_devices", minimum=1)
        vulnerable = _count(self.vulnerable_devices, "vulnerable_devices")
        if vulnerable > total:
            raise ValidationError(
                f"{vulnerable} vulnerable devices out of only {total}", field="vulnerable_devices"
            )
        object.__setattr__(self, "total_devices", total)
        object.__setattr__(self, "vulnerable_devices", vulnerable)


@dataclass(frozen=True)
class ScanResult:
    """Outcome of a network scan campaign: devices scanned and devices flagged."""

    scanned: int
    flagged: int

    def __post_init__(self):
        scanned = _count(self.scanned, "scanned", minimum=1)
        flagged = _count(self.flagged, "flagged")
        if flagged > scanned:
            raise ValidationError(f"{flagged} flagged out of {scanned} scanned", field="flagged")
        object.__setattr__(self, "scanned", scanned)
        object.__setattr__(self, "flagged", flagged)


@dataclass(frozen=True)
class WtpParams:
    per_unit_wtp: float
    population: int
    per_capita_risk_reduction: float

    def __post_init__(self):
        wtp = float(self.per_unit_wtp)
        if not math.isfinite(wtp) or wtp < 0:
            raise ValidationError(f"must be finite and >= 0, got {wtp}", field="per_unit_wtp")
        reduction = float(self.per_capita_risk_reduction)
        if not 0.0 < reduction <= 1.0:
            raise ValidationError(
                f"must be in (0, 1], got {reduction}", field="per_capita_risk_reduction"
            )
        object.__setattr__(self, "per_unit_wtp", wtp)
        object.__setattr__(self, "population", _count(self.population, "population", minimum=1))
        object.__setattr__(self, "per_capita_risk_reduction", reduction)


def fleet_iotmm(stats: FleetStats) -> float:
    """Share of the device fleet that is vulnerable, at full precision."""
    return float(Fraction(stats.vulnerable_devices, stats.total_devices))


def scan_vulnerability_rate(scanned: int, flagged: int) -> float:
    scan = ScanResult(scanned, flagged)
    return float(Fraction(scan.flagged, scan.scanned))


def value_of_one_iotmm(total_security_spending: float) -> float:
    """Per-micromort value implied by a total security budget.

    A linear guidance figure only: real utility curves are not linear over
    large risks.
    """
    spending = float(total_security_spending)
    if not math.isfinite(spending) or spending < 0:
        raise ValidationError(f"spending must be finite and >= 0, got {spending}",
                              field="total_security_spending")
    return spending / PER_MILLION


def group_wtp(params: WtpParams) -> float:
    """Total the group would pay to remove one statistical digital death.

    Warns with :class:`InconsistentReduction` when the per-capita reduction
    times the population is not one death.
    """
    removed = params.per_capita_risk_reduction * params.population
    if abs(removed - 1.0) > 1e-6:
        warnings.warn(
            f"per-capita reduction x population = {removed!r}, not one statistical death",
            InconsistentReduction,
            stacklevel=2,
        )
    return params.per_unit_wtp * params.population


def render_iotmm(fraction: float) -> str:
    return f"{fraction:.3f}"


def render_percent(fraction: float, decimals: int = 1) -> str:
    return f"{fraction * 100:.{decimals}f}%"
