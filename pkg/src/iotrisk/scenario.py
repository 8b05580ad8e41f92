"""Scenario documents, loss histories, reports and their on-disk formats.

A scenario file is JSON with a ``schema_version`` field. See
``docs/scenario-schema.md`` in the repository for the layout.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

from . import __version__
from .assets import (
    Asset,
    AssetClass,
    Axis,
    Basis,
    Inventory,
    Valuation,
    composition_ratio,
    normalize_policy,
    total_value,
    value_of,
)
from .errors import DanglingReference, EmptyHistory, IoError, IoTRiskError, ParseError, ValidationError
from .micromort import (
    FleetStats,
    ScanResult,
    WtpParams,
    fleet_iotmm,
    group_wtp,
    render_iotmm,
    render_percent,
    scan_vulnerability_rate,
    value_of_one_iotmm,
)
from .risk import MicromortRate, RiskFactorProfile, residual_risk, to_micromorts
from .var import (
    DEFAULT_GRID,
    GENERATOR,
    MAX_ENUMERATION,
    Exposure,
    SimConfig,
    exact_distribution,
    iotmm2_report,
    linear_var,
    simulate_losses,
    var_curve,
)

SCHEMA_VERSION = 1
REPORT_VERSION = 1
FORMATS = ("structured", "curve_points")


@dataclass(frozen=True)
class ScenarioDocument:
    name: str
    currency: str = "USD"
    inventory: Inventory = field(default_factory=Inventory)
    risk_profiles: dict = field(default_factory=dict)  # asset id -> RiskFactorProfile | MicromortRate
    fleet: FleetStats | None = None
    scan: ScanResult | None = None
    security_spending: float | None = None
    wtp: WtpParams | None = None
    sim: SimConfig = field(default_factory=SimConfig)
    valuation_policy: tuple[Basis, ...] = (Basis.MARKET, Basis.INTRINSIC, Basis.SUBJECTIVE)
    var_grid: tuple[float, ...] = DEFAULT_GRID
    declared_wtp: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "valuation_policy", normalize_policy(self.valuation_policy))
        object.__setattr__(self, "var_grid", tuple(float(a) for a in self.var_grid))
        for asset_id in self.risk_profiles:
            if asset_id not in self.inventory:
                raise DanglingReference(f"risk profile for unknown asset {asset_id!r}",
                                        field=f"risk_profiles.{asset_id}")
        for asset in self.inventory:
            has_profile = asset.id in self.risk_profiles
            if asset.residual_rate is not None and has_profile:
                raise ValidationError(
                    f"asset {asset.id!r} has both a residual_rate and a risk profile",
                    field=f"risk_profiles.{asset.id}",
                )
            if asset.residual_rate is None and not has_profile:
                raise ValidationError(f"asset {asset.id!r} has no residual rate or risk profile",
                                      field=f"inventory.{asset.id}")

    def residual_rate(self, asset_id: str) -> MicromortRate:
        asset = self.inventory.get(asset_id)
        if asset.residual_rate is not None:
            return MicromortRate(asset.residual_rate)
        profile = self.risk_profiles[asset_id]
        if isinstance(profile, MicromortRate):
            return profile
        return MicromortRate(residual_risk(profile.inherent_risk, profile.control_effectiveness))

    def exposures(self) -> list[Exposure]:
        return [
            Exposure(a.id, value_of(a, self.valuation_policy), self.residual_rate(a.id))
            for a in self.inventory
        ]

    def with_overrides(self, *, trials=None, seed=None, confidence=None, horizon_months=None,
                       valuation_policy=None) -> ScenarioDocument:
        """Command-line flags win over file values."""
        sim_changes = {k: v for k, v in (("trials", trials), ("seed", seed),
                                         ("confidence", confidence),
                                         ("horizon_months", horizon_months)) if v is not None}
        doc = self
        if sim_changes:
            doc = replace(doc, sim=replace(doc.sim, **sim_changes))
        if valuation_policy is not None:
            doc = replace(doc, valuation_policy=normalize_policy(valuation_policy))
        return doc


# -- reading ---------------------------------------------------------------

_MISSING = object()


def _get(obj: dict, key: str, path: str, kind=None, default=_MISSING):
    if key not in obj or obj[key] is None:
        if default is _MISSING:
            raise ParseError(f"missing required field {key!r}", field=_join(path, key))
        return default
    value = obj[key]
    if kind is not None and not _is(value, kind):
        raise ParseError(f"expected {_kind_name(kind)}, got {type(value).__name__}",
                         field=_join(path, key))
    return value


def _join(path: str, key) -> str:
    return f"{path}.{key}" if path else str(key)


def _is(value, kind) -> bool:
    if kind is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind is int:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, kind)


def _kind_name(kind) -> str:
    return {float: "number", int: "integer", str: "string", dict: "object", list: "array"}.get(
        kind, getattr(kind, "__name__", str(kind)))


def _build(path: str, factory, *args, **kwargs):
    """Construct a value type, attaching the document path to invariant errors."""
    try:
        return factory(*args, **kwargs)
    except IoTRiskError as exc:
        exc.field = _join(path, exc.field) if exc.field else path
        raise
    except ValueError as exc:
        raise ValidationError(str(exc), field=path) from None


def _parse_asset(raw, path: str) -> Asset:
    if not isinstance(raw, dict):
        raise ParseError("expected an object", field=path)
    cls = _get(raw, "class", path, dict)
    cpath = _join(path, "class")
    asset_class = _build(cpath, AssetClass,
                         _get(cls, "code", cpath, str),
                         _get(cls, "category", cpath, str),
                         _get(cls, "origin", cpath, str, default="not_applicable"))
    val = _get(raw, "valuation", path, dict)
    vpath = _join(path, "valuation")
    unknown = set(val) - {b.value for b in Basis}
    if unknown:
        raise ParseError(f"unknown valuation bases {sorted(unknown)}", field=vpath)
    valuation = _build(vpath, Valuation, **{
        b.value: _get(val, b.value, vpath, float, default=None) for b in Basis
    })
    return _build(path, Asset,
                  _get(raw, "id", path, str),
                  asset_class, valuation,
                  _get(raw, "residual_rate", path, float, default=None))


def _parse_profile(raw, path: str):
    if not isinstance(raw, dict):
        raise ParseError("expected an object", field=path)
    if "micromorts" in raw:
        return _build(path, MicromortRate, _get(raw, "micromorts", path, float))
    return _build(
        path, RiskFactorProfile,
        _get(raw, "inherent_risk", path, float),
        _get(raw, "control_effectiveness", path, float),
        tuple(_get(raw, "technological", path, list, default=[])),
        tuple(_get(raw, "non_technological", path, list, default=[])),
    )


def scenario_from_dict(data: Any) -> ScenarioDocument:
    if not isinstance(data, dict):
        raise ParseError("scenario must be a JSON object")
    version = _get(data, "schema_version", "", int)
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version}", field="schema_version")

    assets = [_parse_asset(a, f"inventory[{i}]")
              for i, a in enumerate(_get(data, "inventory", "", list, default=[]))]
    inventory = _build("inventory", Inventory, tuple(assets))
    profiles = {
        key: _parse_profile(raw, f"risk_profiles.{key}")
        for key, raw in _get(data, "risk_profiles", "", dict, default={}).items()
    }

    fleet = scan = wtp = None
    if (raw := _get(data, "fleet", "", dict, default=None)) is not None:
        fleet = _build("fleet", FleetStats, _get(raw, "total_devices", "fleet", float),
                       _get(raw, "vulnerable_devices", "fleet", float))
    if (raw := _get(data, "scan", "", dict, default=None)) is not None:
        scan = _build("scan", ScanResult, _get(raw, "scanned", "scan", float),
                      _get(raw, "flagged", "scan", float))
    spending = _get(data, "security_spending", "", float, default=None)
    if spending is not None and (not math.isfinite(spending) or spending < 0):
        raise ValidationError(f"must be finite and >= 0, got {spending}", field="security_spending")
    if (raw := _get(data, "wtp", "", dict, default=None)) is not None:
        per_unit = _get(raw, "per_unit_wtp", "wtp", float, default=None)
        if per_unit is None:
            if spending is None:
                raise ParseError("per_unit_wtp is required when security_spending is absent",
                                 field="wtp.per_unit_wtp")
            per_unit = value_of_one_iotmm(spending)
        population = _get(raw, "population", "wtp", float)
        reduction = _get(raw, "per_capita_risk_reduction", "wtp", float,
                         default=1 / population if population else None)
        wtp = _build("wtp", WtpParams, per_unit, population, reduction)

    sim_raw = _get(data, "sim", "", dict, default={})
    defaults = SimConfig()
    sim = _build("sim", SimConfig,
                 trials=_get(sim_raw, "trials", "sim", int, default=defaults.trials),
                 seed=_get(sim_raw, "seed", "sim", int, default=defaults.seed),
                 horizon_months=_get(sim_raw, "horizon_months", "sim", int,
                                     default=defaults.horizon_months),
                 confidence=_get(sim_raw, "confidence", "sim", float, default=defaults.confidence))
    declared = _get(data, "declared_wtp", "", float, default=None)
    if declared is not None and (not math.isfinite(declared) or declared < 0):
        raise ValidationError(f"must be finite and >= 0, got {declared}", field="declared_wtp")

    return _build(
        "", ScenarioDocument,
        name=_get(data, "name", "", str),
        currency=_get(data, "currency", "", str, default="USD"),
        inventory=inventory,
        risk_profiles=profiles,
        fleet=fleet,
        scan=scan,
        security_spending=spending,
        wtp=wtp,
        sim=sim,
        valuation_policy=_get(data, "valuation_policy", "", list,
                              default=["market", "intrinsic", "subjective"]),
        var_grid=_get(data, "var_grid", "", list, default=list(DEFAULT_GRID)),
        declared_wtp=declared,
    )


def load_scenario(path) -> ScenarioDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}", field=str(path)) from None
    if not text.strip():
        raise ParseError("scenario file is empty", field=str(path))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, field=f"column {exc.colno}") from None
    return scenario_from_dict(data)


def bundled_scenario(name: str) -> Path:
    """Path of a scenario shipped with the package, e.g. ``paper_2017``."""
    if not name.endswith(".scenario"):
        name += ".scenario"
    return Path(str(resources.files("iotrisk") / "examples" / name))


def load_loss_history(path) -> list[float]:
    """One nonnegative decimal per line; blank lines and ``#`` comments skipped."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}", field=str(path)) from None
    losses = []
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            value = float(text)
        except ValueError:
            raise ParseError(f"not a number: {text!r}", line=lineno, field=str(path)) from None
        if not math.isfinite(value) or value < 0:
            raise ParseError(f"loss must be finite and >= 0, got {text!r}", line=lineno,
                             field=str(path))
        losses.append(value)
    if not losses:
        raise EmptyHistory("loss history has no values", field=str(path))
    return losses


# -- writing ---------------------------------------------------------------

def scenario_to_dict(doc: ScenarioDocument) -> dict:
    def asset(a: Asset) -> dict:
        out = {
            "id": a.id,
            "class": {"code": a.asset_class.code, "category": a.asset_class.category.value,
                      "origin": a.asset_class.origin.value},
            "valuation": {b.value: a.valuation.get(b) for b in Basis
                          if a.valuation.get(b) is not None},
        }
        if a.residual_rate is not None:
            out["residual_rate"] = a.residual_rate
        return out

    def profile(p) -> dict:
        if isinstance(p, MicromortRate):
            return {"micromorts": p.micromorts}
        return {"inherent_risk": p.inherent_risk,
                "control_effectiveness": p.control_effectiveness,
                "technological": list(p.technological),
                "non_technological": list(p.non_technological)}

    out: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "name": doc.name,
        "currency": doc.currency,
        "valuation_policy": [b.value for b in doc.valuation_policy],
        "inventory": [asset(a) for a in doc.inventory],
        "risk_profiles": {k: profile(v) for k, v in doc.risk_profiles.items()},
        "sim": {"trials": doc.sim.trials, "seed": doc.sim.seed,
                "horizon_months": doc.sim.horizon_months, "confidence": doc.sim.confidence},
        "var_grid": list(doc.var_grid),
    }
    if doc.fleet is not None:
        out["fleet"] = {"total_devices": doc.fleet.total_devices,
                        "vulnerable_devices": doc.fleet.vulnerable_devices}
    if doc.scan is not None:
        out["scan"] = {"scanned": doc.scan.scanned, "flagged": doc.scan.flagged}
    if doc.security_spending is not None:
        out["security_spending"] = doc.security_spending
    if doc.wtp is not None:
        out["wtp"] = {"per_unit_wtp": doc.wtp.per_unit_wtp, "population": doc.wtp.population,
                      "per_capita_risk_reduction": doc.wtp.per_capita_risk_reduction}
    if doc.declared_wtp is not None:
        out["declared_wtp"] = doc.declared_wtp
    return out


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def save_scenario(doc: ScenarioDocument, path) -> None:
    write_text(path, dumps(scenario_to_dict(doc)))


def write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}", field=str(path)) from None


# -- reports ---------------------------------------------------------------

def render_money(amount: float | None, currency: str) -> str | None:
    if amount is None:
        return None
    return f"{currency} {amount:,.2f}"


@dataclass
class Report:
    """Everything computed for one scenario, as JSON-native values."""

    scenario: dict
    total_value: float
    composition: dict
    fleet: dict | None
    scan: dict | None
    wtp: dict | None
    linear_var: float
    expected_loss_simulated: float
    var_curve: list
    exact_var_curve: list | None
    iotmm2: dict | None
    rendered: dict
    provenance: dict
    report_version: int = REPORT_VERSION

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, data: dict) -> Report:
        return cls(**data)


def provenance(doc: ScenarioDocument) -> dict:
    return {
        "tool_version": __version__,
        "generator": GENERATOR,
        "seed": doc.sim.seed,
        "trials": doc.sim.trials,
        "horizon_months": doc.sim.horizon_months,
        "confidence": doc.sim.confidence,
        "valuation_policy": [b.value for b in doc.valuation_policy],
        "method": "monte_carlo",
    }


def micromort_figures(doc: ScenarioDocument) -> dict:
    fleet = scan = wtp = None
    if doc.fleet is not None:
        fraction = fleet_iotmm(doc.fleet)
        fleet = {"total_devices": doc.fleet.total_devices,
                 "vulnerable_devices": doc.fleet.vulnerable_devices,
                 "fleet_iotmm": fraction,
                 "fleet_iotmm_rendered": render_iotmm(fraction),
                 "micromorts": to_micromorts(fraction).micromorts}
    if doc.scan is not None:
        rate = scan_vulnerability_rate(doc.scan.scanned, doc.scan.flagged)
        scan = {"scanned": doc.scan.scanned, "flagged": doc.scan.flagged,
                "rate": rate, "rate_rendered": render_percent(rate)}
    if doc.wtp is not None or doc.security_spending is not None:
        wtp = {"security_spending": doc.security_spending,
               "value_of_one_iotmm": (None if doc.security_spending is None
                                      else value_of_one_iotmm(doc.security_spending))}
        if doc.wtp is not None:
            wtp.update(per_unit_wtp=doc.wtp.per_unit_wtp, population=doc.wtp.population,
                       per_capita_risk_reduction=doc.wtp.per_capita_risk_reduction,
                       group_wtp=group_wtp(doc.wtp))
    return {"fleet": fleet, "scan": scan, "wtp": wtp}


def value_figures(doc: ScenarioDocument) -> dict:
    comp = {}
    if len(doc.inventory):
        for axis in Axis:
            comp[axis.value] = composition_ratio(doc.inventory, axis,
                                                 doc.valuation_policy).to_dict()
    return {"total_value": total_value(doc.inventory, doc.valuation_policy),
            "n_core": doc.inventory.n_core, "n_operational": doc.inventory.n_operational,
            "composition": comp}


def build_report(doc: ScenarioDocument, workers: int = 1) -> Report:
    exposures = doc.exposures()
    values = value_figures(doc)
    mm = micromort_figures(doc)
    dist = simulate_losses(exposures, doc.sim, workers=workers)
    curve = var_curve(dist, doc.var_grid)
    exact_curve = None
    if len(exposures) <= MAX_ENUMERATION and doc.sim.horizon_months == 12:
        exact_curve = [list(p) for p in var_curve(exact_distribution(exposures), doc.var_grid).points]
    limit = None
    if doc.sim.horizon_months == 12:
        limit = iotmm2_report(dist, doc.sim, doc.declared_wtp).to_dict()
    lv = linear_var(exposures)

    cur = doc.currency
    rendered = {
        "total_value": render_money(values["total_value"], cur),
        "linear_var": render_money(lv, cur),
        "loss_limit": render_money(limit["loss_limit"], cur) if limit else None,
        "one_percent_reduction": (render_money(limit["one_percent_reduction"], cur)
                                  if limit else None),
        "fleet_iotmm": mm["fleet"]["fleet_iotmm_rendered"] if mm["fleet"] else None,
        "scan_rate": mm["scan"]["rate_rendered"] if mm["scan"] else None,
        "value_of_one_iotmm": (render_money(mm["wtp"]["value_of_one_iotmm"], cur)
                               if mm["wtp"] else None),
        "group_wtp": render_money(mm["wtp"].get("group_wtp"), cur) if mm["wtp"] else None,
    }
    return Report(
        scenario=scenario_to_dict(doc),
        total_value=values["total_value"],
        composition=values["composition"],
        fleet=mm["fleet"],
        scan=mm["scan"],
        wtp=mm["wtp"],
        linear_var=lv,
        expected_loss_simulated=dist.mean(),
        var_curve=[list(p) for p in curve.points],
        exact_var_curve=exact_curve,
        iotmm2=limit,
        rendered=rendered,
        provenance=provenance(doc),
    )


def reproduce(report: Report | dict) -> Report:
    """Re-run a report from its scenario echo and provenance block."""
    data = report.to_dict() if isinstance(report, Report) else report
    prov = data["provenance"]
    doc = scenario_from_dict(data["scenario"]).with_overrides(
        trials=prov["trials"], seed=prov["seed"], confidence=prov["confidence"],
        horizon_months=prov["horizon_months"], valuation_policy=prov["valuation_policy"],
    )
    return build_report(doc)


def curve_points_text(points) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["confidence", "loss"])
    for confidence, loss in points:
        writer.writerow([repr(float(confidence)), repr(float(loss))])
    return buf.getvalue()


def emit_report(report: Report, fmt: str = "structured", path=None) -> str:
    """Serialise `report`; write it to `path` when given. Returns the text."""
    if fmt == "structured":
        text = dumps(report.to_dict())
    elif fmt == "curve_points":
        text = curve_points_text(report.var_curve)
    else:
        raise ValidationError(f"unknown format {fmt!r}; expected one of {FORMATS}", field="format")
    if path is not None:
        write_text(path, text)
    return text


def read_report(path) -> Report:
    try:
        return Report.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}", field=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
