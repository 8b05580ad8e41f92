"""Linear VaR, exact and simulated loss distributions, quantiles and VaR curves.

Loss model: each asset suffers an independent Bernoulli "digital death" with
probability taken from its micromort rate, and a dead asset loses its full
value. A trial's loss is accumulated left to right in exposure order, and the
exact enumeration accumulates the same way, so a simulated loss is always
bit-identical to one of the exact atoms.

Monte Carlo randomness is counter based. Trial ``t`` reads its uniforms from
a Philox4x64 stream keyed by the seed at counter ``t * ceil(n / 4)``, so a
trial's draws depend only on ``(seed, t)`` and chunking or threading cannot
change the output.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import BadGrid, EmptyHistory, OutOfRange, TooManyAssets, ValidationError, WrongHorizon
from .risk import MicromortRate

GENERATOR = "numpy.Philox4x64-10/trial-counter-v1"
MAX_ENUMERATION = 20
DEFAULT_GRID = (0.5, 0.75, 0.9, 0.95, 0.975, 0.99, 0.995, 0.999)
CHUNK_TRIALS = 1 << 16
# Slack when comparing an exact CDF against a confidence level; matches the
# tolerance on the atom probabilities summing to one.
CDF_SLACK = 1e-12


@dataclass(frozen=True)
class Exposure:
    asset_id: str
    value: float
    residual_rate: MicromortRate

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value) or value < 0:
            raise ValidationError(f"exposure value must be finite and >= 0, got {value}",
                                  field=self.asset_id)
        object.__setattr__(self, "value", value)
        if not isinstance(self.residual_rate, MicromortRate):
            object.__setattr__(self, "residual_rate", MicromortRate(self.residual_rate))

    @property
    def probability(self) -> float:
        return self.residual_rate.as_probability

    @classmethod
    def from_probability(cls, asset_id: str, value: float, probability: float) -> Exposure:
        return cls(asset_id, value, MicromortRate(probability * 1e6))


@dataclass(frozen=True)
class SimConfig:
    trials: int = 10_000
    seed: int = 0
    horizon_months: int = 12
    confidence: float = 0.95

    def __post_init__(self):
        for name, lo in (("trials", 1), ("horizon_months", 1)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < lo:
                raise ValidationError(f"{name} must be an integer >= {lo}, got {v!r}", field=name)
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}",
                                  field="seed")
        c = float(self.confidence)
        if not 0.0 < c < 1.0:
            raise ValidationError(f"confidence must be in (0, 1), got {c}", field="confidence")
        object.__setattr__(self, "confidence", c)


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class LossDistribution:
    """Either exact (sorted distinct losses with probabilities) or empirical
    (equal-weight samples, kept in the order they were produced)."""

    kind: str
    losses: np.ndarray
    probabilities: np.ndarray | None
    source: str
    metadata: dict = field(default_factory=dict)
    _sorted: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.kind == "exact":
            losses, probs = _readonly(self.losses), _readonly(self.probabilities)
            if losses.shape != probs.shape or losses.ndim != 1 or not len(losses):
                raise ValidationError("exact distribution needs matching nonempty atoms")
            if np.any(np.diff(losses) <= 0):
                raise ValidationError("atom losses must be distinct and ascending")
            if np.any(probs <= 0) or np.any(probs > 1):
                raise ValidationError("atom probabilities must lie in (0, 1]")
            if abs(math.fsum(probs) - 1.0) > CDF_SLACK:
                raise ValidationError(f"atom probabilities sum to {math.fsum(probs)!r}")
            object.__setattr__(self, "probabilities", probs)
            object.__setattr__(self, "_sorted", losses)
        elif self.kind == "empirical":
            losses = _readonly(self.losses)
            if losses.ndim != 1 or not len(losses):
                raise EmptyHistory("empirical distribution needs at least one sample")
            object.__setattr__(self, "_sorted", _readonly(np.sort(losses)))
        else:
            raise ValidationError(f"unknown distribution kind {self.kind!r}")
        if not np.all(np.isfinite(losses)) or np.any(losses < 0):
            raise ValidationError("losses must be finite and >= 0")
        object.__setattr__(self, "losses", losses)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @classmethod
    def exact(cls, losses, probabilities, source: str = "enumeration", **metadata):
        return cls("exact", losses, probabilities, source, metadata)

    @classmethod
    def empirical(cls, samples, source: str, **metadata):
        return cls("empirical", samples, None, source, metadata)

    @property
    def samples(self) -> np.ndarray:
        if self.kind != "empirical":
            raise AttributeError("exact distributions have atoms, not samples")
        return self.losses

    @property
    def atoms(self) -> list[tuple[float, float]]:
        if self.kind != "exact":
            raise AttributeError("empirical distributions have samples, not atoms")
        return list(zip(self.losses.tolist(), self.probabilities.tolist()))

    def mean(self) -> float:
        if self.kind == "exact":
            return math.fsum(self.losses * self.probabilities)
        return math.fsum(self.losses) / len(self.losses)

    def cdf(self, loss: float) -> float:
        """P(loss <= `loss`)."""
        if self.kind == "exact":
            idx = np.searchsorted(self.losses, loss, side="right")
            return math.fsum(self.probabilities[:idx])
        return np.searchsorted(self._sorted, loss, side="right") / len(self._sorted)

    def scaled(self, k: float) -> LossDistribution:
        k = float(k)
        if self.kind == "exact":
            if k == 0:
                return LossDistribution.exact([0.0], [1.0], self.source, **self.metadata)
            return LossDistribution.exact(self.losses * k, self.probabilities, self.source,
                                          **self.metadata)
        return LossDistribution.empirical(self.losses * k, self.source, **self.metadata)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "source": self.source, "metadata": dict(self.metadata)}
        if self.kind == "exact":
            out["atoms"] = [[loss, p] for loss, p in self.atoms]
        else:
            out["samples"] = self.losses.tolist()
        return out


@dataclass(frozen=True)
class VaRCurve:
    points: tuple[tuple[float, float], ...]

    @property
    def confidences(self) -> list[float]:
        return [c for c, _ in self.points]

    @property
    def losses(self) -> list[float]:
        return [loss for _, loss in self.points]


@dataclass(frozen=True)
class IoTMM2Report:
    horizon_months: int
    confidence: float
    loss_limit: float
    declared_wtp_for_reduction: float | None = None

    @property
    def one_percent_reduction(self) -> float:
        return self.loss_limit / 100

    def to_dict(self) -> dict:
        return {
            "horizon_months": self.horizon_months,
            "confidence": self.confidence,
            "loss_limit": self.loss_limit,
            "one_percent_reduction": self.one_percent_reduction,
            "declared_wtp_for_reduction": self.declared_wtp_for_reduction,
        }


def linear_var(exposures: Iterable[Exposure]) -> float:
    """Sum of asset value times death probability over all exposures.

    This is the expected loss under the independent-death model.
    """
    return math.fsum(e.value * e.probability for e in exposures)


def horizon_probability(p: float, horizon_months: int) -> float:
    """Scale a 12-month death probability to another horizon assuming a
    constant hazard: ``1 - (1 - p) ** (h / 12)``."""
    if horizon_months == 12 or p in (0.0, 1.0):
        return p
    return -math.expm1((horizon_months / 12) * math.log1p(-p))


def exact_distribution(exposures: Sequence[Exposure]) -> LossDistribution:
    """Enumerate every subset of dead assets (at most 2**20) and merge equal losses."""
    exposures = list(exposures)
    if len(exposures) > MAX_ENUMERATION:
        raise TooManyAssets(
            f"{len(exposures)} exposures exceed the enumeration limit of {MAX_ENUMERATION}"
        )
    losses = np.zeros(1)
    probs = np.ones(1)
    for e in exposures:
        p = e.probability
        if p == 0.0 or e.value == 0.0:
            continue
        if p == 1.0:
            losses = losses + e.value
        else:
            losses = np.concatenate([losses, losses + e.value])
            probs = np.concatenate([probs * (1.0 - p), probs * p])
        # Adding a large value can absorb a tiny one, so merge even on the certain path.
        losses, inverse = np.unique(losses, return_inverse=True)
        probs = np.bincount(inverse, weights=probs, minlength=len(losses))
    keep = probs > 0
    return LossDistribution.exact(losses[keep], probs[keep], "enumeration",
                                  n_exposures=len(exposures))


def _trial_uniforms(seed: int, start: int, count: int, n: int) -> np.ndarray:
    stride = -(-n // 4)  # Philox blocks (4 x uint64) per trial
    bitgen = np.random.Philox(key=seed, counter=start * stride)
    raw = bitgen.random_raw(count * stride * 4).reshape(count, stride * 4)[:, :n]
    return (raw >> np.uint64(11)) * (1.0 / (1 << 53))


def _simulate_chunk(values, probs, seed: int, start: int, count: int) -> np.ndarray:
    losses = np.zeros(count)
    if not len(values):
        return losses
    u = _trial_uniforms(seed, start, count, len(values))
    for i, (v, p) in enumerate(zip(values, probs)):
        losses += np.where(u[:, i] < p, v, 0.0)
    return losses


def simulate_losses(
    exposures: Sequence[Exposure],
    config: SimConfig,
    workers: int = 1,
    chunk_trials: int = CHUNK_TRIALS,
) -> LossDistribution:
    """Monte Carlo loss distribution with ``config.trials`` equal-weight samples.

    Parameters
    ----------
    exposures : sequence of Exposure
        Rates are 12-month rates; other horizons are pro-rated with
        :func:`horizon_probability`.
    config : SimConfig
    workers : int
        Threads used to fill chunks. Output is identical for any value.
    chunk_trials : int
        Trials per chunk. Output is identical for any value.
    """
    exposures = list(exposures)
    values = [e.value for e in exposures]
    probs = [horizon_probability(e.probability, config.horizon_months) for e in exposures]
    starts = range(0, config.trials, chunk_trials)

    def run(start):
        return _simulate_chunk(values, probs, config.seed, start,
                               min(chunk_trials, config.trials - start))

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    return LossDistribution.empirical(
        np.concatenate(parts), "monte_carlo",
        generator=GENERATOR, seed=config.seed, trials=config.trials,
        horizon_months=config.horizon_months,
    )


def historical_distribution(losses: Iterable[float]) -> LossDistribution:
    losses = [float(x) for x in losses]
    if not losses:
        raise EmptyHistory("loss history is empty")
    return LossDistribution.empirical(losses, "historical", n_observations=len(losses))


def _check_confidence(confidence: float) -> float:
    confidence = float(confidence)
    if not 0.0 < confidence < 1.0:
        raise OutOfRange(f"confidence {confidence} outside (0, 1)", field="confidence")
    return confidence


def var_at(distribution: LossDistribution, confidence: float) -> float:
    """Smallest loss L with P(loss <= L) >= `confidence`.

    For samples this is the ceil(confidence * n)-th order statistic. The
    product is taken on the decimal the float prints as, so ``0.1 * 10``
    gives the 1st order statistic rather than the 2nd.
    """
    confidence = _check_confidence(confidence)
    if distribution.kind == "exact":
        cdf = np.cumsum(distribution.probabilities)
        idx = int(np.searchsorted(cdf, confidence - CDF_SLACK, side="left"))
        return float(distribution.losses[min(idx, len(cdf) - 1)])
    ordered = distribution._sorted
    k = math.ceil(Fraction(repr(confidence)) * len(ordered))
    return float(ordered[max(k, 1) - 1])


def var_curve(distribution: LossDistribution, grid: Sequence[float] = DEFAULT_GRID) -> VaRCurve:
    grid = [float(a) for a in grid]
    if not grid:
        raise BadGrid("confidence grid is empty")
    if any(not 0.0 < a < 1.0 for a in grid):
        raise BadGrid(f"confidence grid {grid} has values outside (0, 1)")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise BadGrid(f"confidence grid {grid} is not strictly increasing")
    return VaRCurve(tuple((a, var_at(distribution, a)) for a in grid))


def iotmm2_report(
    distribution: LossDistribution,
    config: SimConfig,
    declared_wtp: float | None = None,
) -> IoTMM2Report:
    """12-month loss limit at ``config.confidence``.

    `declared_wtp` is what the entity says it would pay to cut the limit by
    1%; it is echoed, never derived.
    """
    if config.horizon_months != 12:
        raise WrongHorizon(
            f"the loss limit is defined over 12 months, got {config.horizon_months}",
            field="horizon_months",
        )
    if declared_wtp is not None:
        declared_wtp = float(declared_wtp)
        if not math.isfinite(declared_wtp) or declared_wtp < 0:
            raise ValidationError(f"declared WTP must be finite and >= 0, got {declared_wtp}",
                                  field="declared_wtp")
    return IoTMM2Report(
        horizon_months=12,
        confidence=config.confidence,
        loss_limit=var_at(distribution, config.confidence),
        declared_wtp_for_reduction=declared_wtp,
    )
