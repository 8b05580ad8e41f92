from __future__ import annotations

import pytest
from hypothesis import strategies as st

from iotrisk import Exposure

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []

money = st.floats(min_value=0, max_value=1e9, allow_nan=False, allow_infinity=False)
probability = st.floats(min_value=0, max_value=1, allow_nan=False)
confidence = st.floats(min_value=1e-6, max_value=1 - 1e-6, allow_nan=False)


@st.composite
def exposures(draw, min_size=0, max_size=8, max_probability=1.0):
    n = draw(st.integers(min_size, max_size))
    out = []
    for i in range(n):
        value = draw(money)
        p = draw(st.floats(min_value=0, max_value=max_probability, allow_nan=False))
        out.append(Exposure.from_probability(f"a{i}", value, p))
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def bundled():
    from iotrisk.scenario import bundled_scenario

    return bundled_scenario
