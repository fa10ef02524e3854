import json

import pytest

from cboundary.scenarios import SCENARIOS, ScenarioReport, run_halfplane, run_static_sanity, wedge_geometry

# l(x) = x + W(exp(-x)), frozen from an mpmath evaluation of the Lambert W function
LAMBERT_RHO = {
    -2.0: -0.44285440100238858,
    -1.0: 0.0,
    0.0: 0.56714329040978387,
    1.0: 1.2784645427610738,
    5.0: 5.006693000497731,
    10.0: 10.000045397868749,
    20.0: 20.000000002061154,
}


@pytest.fixture(scope="module")
def reports():
    return {name: fn() for name, fn in SCENARIOS.items()}


@pytest.mark.parametrize("name", list(SCENARIOS))
def test_scenario_passes(reports, name):
    rep = reports[name]
    assert isinstance(rep, ScenarioReport)
    assert rep.checks
    assert rep.passed, rep.failures()


def test_reports_serialize(reports, tmp_path):
    for name, rep in reports.items():
        payload = json.loads(rep.to_json())
        assert payload["name"] == rep.name
        files = rep.write(str(tmp_path / name))
        assert any(f.endswith("report.json") for f in files)
        assert len(files) == 1 + len(rep.tables)


@pytest.mark.parametrize("fn", [run_halfplane, run_static_sanity])
def test_deterministic(fn):
    assert fn().to_json() == fn().to_json()


def test_rho_matches_lambert_w():
    geo = wedge_geometry()
    assert geo.K_inf == pytest.approx(1.0, abs=1e-9)
    for x, want in LAMBERT_RHO.items():
        assert geo.rho(x) == pytest.approx(want, abs=1e-7)
