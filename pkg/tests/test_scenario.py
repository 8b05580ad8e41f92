import json

import pytest

from iotrisk.errors import DanglingReference, EmptyHistory, ParseError, ValidationError
from iotrisk.risk import MicromortRate, RiskFactorProfile
from iotrisk.scenario import (
    Report,
    build_report,
    emit_report,
    load_loss_history,
    load_scenario,
    read_report,
    reproduce,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

MINIMAL = {
    "schema_version": 1,
    "name": "t",
    "inventory": [
        {"id": "a", "class": {"code": "DA", "category": "core_value", "origin": "digitised"},
         "valuation": {"market": 100.0}, "residual_rate": 300000},
        {"id": "b", "class": {"code": "OA", "category": "operational"},
         "valuation": {"subjective": 40.0}},
    ],
    "risk_profiles": {"b": {"inherent_risk": 500000, "control_effectiveness": 2.0}},
    "sim": {"trials": 2000, "seed": 42},
}


def write(tmp_path, data, name="s.scenario"):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return path


def test_bundled_2017(bundled):
    doc = load_scenario(bundled("paper_2017"))
    assert (doc.fleet.vulnerable_devices, doc.fleet.total_devices) == (378_000_000, 8_400_000_000)
    assert (doc.scan.scanned, doc.scan.flagged) == (310_000, 14_000)


def test_bundled_2020_derives_per_unit_wtp(bundled):
    doc = load_scenario(bundled("paper_2020"))
    assert doc.wtp.per_unit_wtp == 840.5
    assert doc.wtp.population == 100_000


def test_residual_rates_resolve(tmp_path):
    doc = load_scenario(write(tmp_path, MINIMAL))
    assert doc.residual_rate("a") == MicromortRate(300000)
    assert doc.residual_rate("b") == MicromortRate(250000)
    assert [(e.value, e.probability) for e in doc.exposures()] == [(100.0, 0.3), (40.0, 0.25)]


def test_duplicate_ids(tmp_path):
    data = json.loads(json.dumps(MINIMAL))
    data["inventory"][1]["id"] = "a"
    with pytest.raises(ValidationError, match="'a'"):
        load_scenario(write(tmp_path, data))


def test_empty_file(tmp_path):
    with pytest.raises(ParseError):
        load_scenario(write(tmp_path, ""))


def test_syntax_error_has_line(tmp_path):
    with pytest.raises(ParseError) as info:
        load_scenario(write(tmp_path, '{\n  "name": "x",\n  oops\n}'))
    assert info.value.line == 3


def test_missing_field_is_parse_error(tmp_path):
    data = dict(MINIMAL)
    del data["name"]
    with pytest.raises(ParseError, match="name"):
        load_scenario(write(tmp_path, data))


def test_wrong_schema_version():
    with pytest.raises(ParseError):
        scenario_from_dict({**MINIMAL, "schema_version": 99})


def test_dangling_profile():
    data = {**MINIMAL, "risk_profiles": {**MINIMAL["risk_profiles"], "ghost": {"micromorts": 1}}}
    with pytest.raises(DanglingReference, match="ghost"):
        scenario_from_dict(data)


def test_unresolved_rate():
    data = {**MINIMAL, "risk_profiles": {}}
    with pytest.raises(ValidationError, match="'b'"):
        scenario_from_dict(data)


def test_rate_and_profile_conflict():
    data = {**MINIMAL, "risk_profiles": {**MINIMAL["risk_profiles"], "a": {"micromorts": 5}}}
    with pytest.raises(ValidationError):
        scenario_from_dict(data)


def test_invariant_error_names_field():
    data = json.loads(json.dumps(MINIMAL))
    data["inventory"][0]["valuation"]["market"] = -5
    with pytest.raises(ValidationError) as info:
        scenario_from_dict(data)
    assert info.value.field == "inventory[0].valuation.market"


def test_control_floor():
    data = {**MINIMAL, "risk_profiles": {"b": {"inherent_risk": 1, "control_effectiveness": 0}}}
    with pytest.raises(ValidationError, match="control_effectiveness"):
        scenario_from_dict(data)


def test_round_trip(tmp_path, bundled):
    for doc in (load_scenario(write(tmp_path, MINIMAL)), load_scenario(bundled("paper_2017")),
                load_scenario(bundled("paper_2020"))):
        path = tmp_path / "out.scenario"
        save_scenario(doc, path)
        assert load_scenario(path) == doc
        assert scenario_to_dict(load_scenario(path)) == scenario_to_dict(doc)


def test_profiles_keep_tags(bundled):
    doc = load_scenario(bundled("paper_2017"))
    profile = doc.risk_profiles["meter-firmware"]
    assert isinstance(profile, RiskFactorProfile)
    assert "default credentials" in profile.technological


def test_overrides(bundled):
    doc = load_scenario(bundled("paper_2017")).with_overrides(seed=7, trials=10,
                                                              valuation_policy="subjective,market")
    assert (doc.sim.seed, doc.sim.trials, doc.sim.confidence) == (7, 10, 0.95)
    assert [b.value for b in doc.valuation_policy] == ["subjective", "market"]


class TestLossHistory:
    def test_plain(self, tmp_path):
        assert load_loss_history(write(tmp_path, "10\n50\n20\n80\n40\n")) == [10, 50, 20, 80, 40]

    def test_negative(self, tmp_path):
        with pytest.raises(ParseError) as info:
            load_loss_history(write(tmp_path, "10\n-5\n"))
        assert info.value.line == 2

    def test_garbage(self, tmp_path):
        with pytest.raises(ParseError):
            load_loss_history(write(tmp_path, "10\nten\n"))

    def test_comments_and_blanks(self, tmp_path):
        text = "# header\n\n10\n  # note\n20 # trailing\n\n30\n"
        assert load_loss_history(write(tmp_path, text)) == [10, 20, 30]

    def test_empty(self, tmp_path):
        with pytest.raises(EmptyHistory):
            load_loss_history(write(tmp_path, "# nothing\n\n"))


class TestReport:
    @pytest.fixture
    def report(self, tmp_path):
        doc = load_scenario(write(tmp_path, {**MINIMAL, "var_grid": [0.5, 0.9, 0.99]}))
        return build_report(doc)

    def test_contents(self, report):
        assert report.linear_var == pytest.approx(100 * 0.3 + 40 * 0.25)
        assert report.total_value == 140.0
        assert report.exact_var_curve == [[0.5, 0.0], [0.9, 100.0], [0.99, 140.0]]
        assert report.iotmm2["one_percent_reduction"] == report.iotmm2["loss_limit"] / 100
        assert report.rendered["total_value"] == "USD 140.00"
        assert report.provenance["seed"] == 42 and report.provenance["trials"] == 2000

    def test_curve_points(self, report, tmp_path):
        text = emit_report(report, "curve_points", tmp_path / "curve.csv")
        lines = (tmp_path / "curve.csv").read_text().splitlines()
        assert text.splitlines() == lines
        assert lines[0] == "confidence,loss" and len(lines) == 4
        assert [float(x) for x in lines[3].split(",")] == report.var_curve[2]

    def test_structured_round_trip(self, report, tmp_path):
        emit_report(report, "structured", tmp_path / "r.json")
        assert read_report(tmp_path / "r.json") == report

    def test_reproduce_from_provenance(self, report, tmp_path):
        emit_report(report, "structured", tmp_path / "r.json")
        again = reproduce(read_report(tmp_path / "r.json"))
        assert again.to_dict() == report.to_dict()

    def test_bad_format(self, report):
        with pytest.raises(ValidationError):
            emit_report(report, "xml")

    def test_is_json_native(self, report):
        assert Report.from_dict(json.loads(emit_report(report))) == report
