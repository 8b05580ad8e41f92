"""Digital asset taxonomy, valuation and inventory totals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import NoValuation, ValidationError


class Category(str, Enum):
    CORE_VALUE = "core_value"
    OPERATIONAL = "operational"


class Origin(str, Enum):
    DIGITISED = "digitised"
    BORN_DIGITAL = "born_digital"
    NOT_APPLICABLE = "not_applicable"


class Basis(str, Enum):
    MARKET = "market"
    INTRINSIC = "intrinsic"
    SUBJECTIVE = "subjective"


class Axis(str, Enum):
    CORE_TO_OPERATIONAL = "core_to_operational"
    DIGITISED_TO_BORN_DIGITAL = "digitised_to_born_digital"


DEFAULT_POLICY: tuple[Basis, ...] = (Basis.MARKET, Basis.INTRINSIC, Basis.SUBJECTIVE)


def _check_money(value, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"expected a number, got {value!r}", field=name) from None
    if not math.isfinite(value) or value < 0:
        raise ValidationError(f"must be finite and >= 0, got {value!r}", field=name)
    return value


@dataclass(frozen=True)
class AssetClass:
    """Taxonomy label. Core-value classes must say whether they are digitised
    or born digital; operational classes carry no origin."""

    code: str
    category: Category
    origin: Origin = Origin.NOT_APPLICABLE

    def __post_init__(self):
        if not isinstance(self.code, str) or not self.code:
            raise ValidationError("asset class code must be a nonempty string", field="code")
        object.__setattr__(self, "category", Category(self.category))
        object.__setattr__(self, "origin", Origin(self.origin))
        if self.category is Category.CORE_VALUE and self.origin is Origin.NOT_APPLICABLE:
            raise ValidationError(
                f"core-value class {self.code!r} needs origin digitised or born_digital",
                field="origin",
            )
        if self.category is Category.OPERATIONAL and self.origin is not Origin.NOT_APPLICABLE:
            raise ValidationError(
                f"operational class {self.code!r} cannot have origin {self.origin.value}",
                field="origin",
            )


@dataclass(frozen=True)
class Valuation:
    intrinsic: float | None = None
    market: float | None = None
    subjective: float | None = None

    def __post_init__(self):
        present = 0
        for basis in Basis:
            value = getattr(self, basis.value)
            if value is not None:
                object.__setattr__(self, basis.value, _check_money(value, basis.value))
                present += 1
        if not present:
            raise ValidationError("at least one of intrinsic, market, subjective is required")

    def get(self, basis: Basis) -> float | None:
        return getattr(self, Basis(basis).value)

    def scaled(self, k: float) -> Valuation:
        return Valuation(**{
            b.value: None if self.get(b) is None else self.get(b) * k for b in Basis
        })


@dataclass(frozen=True)
class Asset:
    id: str
    asset_class: AssetClass
    valuation: Valuation
    residual_rate: float | None = None  # micromorts; None means "take it from the risk profile"

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("asset id must be a nonempty string", field="id")
        if self.residual_rate is not None:
            object.__setattr__(
                self, "residual_rate", _check_money(self.residual_rate, "residual_rate")
            )

    @property
    def is_core(self) -> bool:
        return self.asset_class.category is Category.CORE_VALUE


@dataclass(frozen=True)
class Inventory:
    assets: tuple[Asset, ...] = ()
    _by_id: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(self.assets))
        by_id: dict[str, Asset] = {}
        classes: dict[str, AssetClass] = {}
        for asset in self.assets:
            if asset.id in by_id:
                raise ValidationError(f"duplicate asset id {asset.id!r}", field="inventory")
            by_id[asset.id] = asset
            known = classes.setdefault(asset.asset_class.code, asset.asset_class)
            if known != asset.asset_class:
                raise ValidationError(
                    f"class code {known.code!r} is defined twice with different categories",
                    field="inventory",
                )
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.assets)

    def __iter__(self):
        return iter(self.assets)

    def __contains__(self, asset_id: str) -> bool:
        return asset_id in self._by_id

    def get(self, asset_id: str) -> Asset:
        return self._by_id[asset_id]

    @property
    def core(self) -> tuple[Asset, ...]:
        return tuple(a for a in self.assets if a.is_core)

    @property
    def operational(self) -> tuple[Asset, ...]:
        return tuple(a for a in self.assets if not a.is_core)

    @property
    def n_core(self) -> int:
        return len(self.core)

    @property
    def n_operational(self) -> int:
        return len(self.operational)

    def taxonomy(self) -> dict[str, AssetClass]:
        """Class registry keyed by code, as used by this inventory."""
        return {a.asset_class.code: a.asset_class for a in self.assets}


@dataclass(frozen=True)
class CompositionRatio:
    numerator_total: float
    denominator_total: float
    numerator_count: int
    denominator_count: int

    @property
    def value_ratio(self) -> float | None:
        """None when the denominator is worth nothing (undefined, not infinite)."""
        if self.denominator_total == 0:
            return None
        return self.numerator_total / self.denominator_total

    @property
    def count_ratio(self) -> float | None:
        if self.denominator_count == 0:
            return None
        return self.numerator_count / self.denominator_count

    def to_dict(self) -> dict:
        return {
            "numerator_total": self.numerator_total,
            "denominator_total": self.denominator_total,
            "numerator_count": self.numerator_count,
            "denominator_count": self.denominator_count,
            "value_ratio": self.value_ratio,
            "count_ratio": self.count_ratio,
        }


def normalize_policy(policy: Iterable[Basis | str] | str | None) -> tuple[Basis, ...]:
    """Accept a basis sequence or a comma-separated string such as
    ``"market,intrinsic"``."""
    if policy is None:
        return DEFAULT_POLICY
    if isinstance(policy, str):
        policy = [p.strip() for p in policy.split(",") if p.strip()]
    try:
        bases = tuple(Basis(str(p.value if isinstance(p, Basis) else p).lower()) for p in policy)
    except ValueError as exc:
        raise ValidationError(str(exc), field="valuation_policy") from None
    if not bases:
        raise ValidationError("valuation policy is empty", field="valuation_policy")
    if len(set(bases)) != len(bases):
        raise ValidationError("valuation policy repeats a basis", field="valuation_policy")
    return bases


def value_of(asset: Asset, policy: Sequence[Basis | str] | None = DEFAULT_POLICY) -> float:
    """Value of `asset` under the first basis in `policy` it actually carries."""
    for basis in normalize_policy(policy):
        value = asset.valuation.get(basis)
        if value is not None:
            return value
    raise NoValuation(
        f"asset {asset.id!r} has no value under policy "
        + ",".join(b.value for b in normalize_policy(policy)),
        field=asset.id,
    )


def total_value(inventory: Inventory, policy: Sequence[Basis | str] | None = DEFAULT_POLICY) -> float:
    """Total digital value: core-value assets plus operational assets.

    Each partition is summed with ``math.fsum`` so the result does not depend
    on asset order.
    """
    policy = normalize_policy(policy)
    core = math.fsum(value_of(a, policy) for a in inventory.core)
    operational = math.fsum(value_of(a, policy) for a in inventory.operational)
    return core + operational


def _partition(inventory: Inventory, axis: Axis):
    if axis is Axis.CORE_TO_OPERATIONAL:
        return inventory.core, inventory.operational
    core = inventory.core
    return (
        tuple(a for a in core if a.asset_class.origin is Origin.DIGITISED),
        tuple(a for a in core if a.asset_class.origin is Origin.BORN_DIGITAL),
    )


def composition_ratio(
    inventory: Inventory,
    axis: Axis | str = Axis.CORE_TO_OPERATIONAL,
    policy: Sequence[Basis | str] | None = DEFAULT_POLICY,
) -> CompositionRatio:
    """Value and count ratio of one side of `axis` to the other.

    Only core-value assets take part on the digitised/born-digital axis.
    """
    if not len(inventory):
        raise ValidationError("composition ratio needs a nonempty inventory", field="inventory")
    axis = Axis(axis)
    policy = normalize_policy(policy)
    num, den = _partition(inventory, axis)
    return CompositionRatio(
        numerator_total=math.fsum(value_of(a, policy) for a in num),
        denominator_total=math.fsum(value_of(a, policy) for a in den),
        numerator_count=len(num),
        denominator_count=len(den),
    )
