import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iotrisk.errors import ClampWarning, OutOfRange, ValidationError, ZeroControl
from iotrisk.risk import (
    MicromortRate,
    RiskFactorProfile,
    Scenario,
    ScenarioSet,
    expected_consequence,
    from_micromorts,
    residual_risk,
    scenario_risk,
    to_micromorts,
)


@pytest.mark.parametrize("p, x, expected", [(0.5, 100, 50), (0, 1e9, 0), (1, 42, 42)])
def test_scenario_risk(p, x, expected):
    assert scenario_risk(Scenario("s", p, x)) == expected


@pytest.mark.parametrize("p, x", [(-0.1, 1), (1.1, 1), (0.5, -1), (0.5, float("inf"))])
def test_scenario_invariants(p, x):
    with pytest.raises(ValidationError):
        Scenario("s", p, x)


def test_expected_consequence_small():
    assert expected_consequence(ScenarioSet()) == 0
    s = ScenarioSet((Scenario("a", 0.5, 100), Scenario("b", 0.1, 1000)))
    assert expected_consequence(s) == 150


def test_expected_consequence_oracle():
    rng = random.Random(3)
    rows = [(rng.random(), rng.uniform(0, 1e7)) for _ in range(1000)]
    s = ScenarioSet(tuple(Scenario(f"s{i}", p, x) for i, (p, x) in enumerate(rows)))
    acc = 0.0
    for p, x in rows:
        acc += p * x
    assert expected_consequence(s) == pytest.approx(acc, rel=1e-9)
    assert expected_consequence(s) == pytest.approx(sum(scenario_risk(x) for x in s), rel=1e-9)


class TestResidual:
    def test_division(self):
        assert residual_risk(0.2, 2.0) == 0.1
        assert residual_risk(0.2, 1.0) == 0.2

    @pytest.mark.parametrize("control", [0.0, -1.0])
    def test_zero_control(self, control):
        with pytest.raises(ZeroControl):
            residual_risk(0.3, control)

    def test_not_clamped(self):
        assert residual_risk(0.9, 0.5) == 1.8

    def test_profile(self):
        profile = RiskFactorProfile(300.0, 1.5, ["firmware"], ["insider"])
        assert profile.residual == 200.0
        assert profile.technological == ("firmware",)

    def test_profile_floor(self):
        with pytest.raises(ValidationError):
            RiskFactorProfile(1.0, 1e-12)

    @settings(max_examples=300)
    @given(i=st.floats(0, 1e6), c=st.floats(1e-3, 1e3), k=st.one_of(st.just(0.0), st.floats(1e-6, 1e3)))
    def test_properties(self, i, c, k):
        assert residual_risk(k * i, c) == pytest.approx(k * residual_risk(i, c), rel=1e-12,
                                                        abs=1e-300)
        if i > 0:
            assert (residual_risk(i, c) <= i) == (c >= 1)


class TestMicromorts:
    def test_unit(self):
        assert to_micromorts(1e-6).micromorts == pytest.approx(1.0, rel=1e-15)
        assert to_micromorts(0.045).micromorts == 45000.0

    def test_clamp(self):
        with pytest.warns(ClampWarning):
            assert from_micromorts(MicromortRate(2_000_000)) == 1.0

    @pytest.mark.parametrize("p", [-1e-9, 1.5, float("nan")])
    def test_out_of_range(self, p):
        with pytest.raises(OutOfRange):
            to_micromorts(p)

    def test_negative_rate(self):
        with pytest.raises(ValidationError):
            MicromortRate(-1)

    @settings(max_examples=1000)
    @given(p=st.floats(0, 1))
    def test_round_trip(self, p):
        assert math.isclose(from_micromorts(to_micromorts(p)), p, rel_tol=1e-15, abs_tol=0)
