import copy
import math
from pathlib import Path

import pytest
import yaml

from gasloc.errors import ConfigurationError, ScenarioError, UnitError
from gasloc.sim.scenario import load_scenario, parse_scenario
from gasloc.sim.units import convert, split_key

SCEN = Path(__file__).resolve().parent.parent / "scenarios"

MINIMAL = {
    "name": "t",
    "trials": 3,
    "anchors": [{"kind": "ground", "position_m": [0, 0, 10]}],
    "targets": [{"position_m": [50, 0, 0]}],
    "measurement": {"kind": "hybrid", "sigma_m": 0.5, "sigma_angle_deg": 1.0},
}


def _with(**changes):
    d = copy.deepcopy(MINIMAL)
    d.update(changes)
    return d


def test_split_key_and_convert():
    assert split_key("altitude_km") == ("altitude", "km")
    assert split_key("move_cost_j_per_m") == ("move_cost", "j_per_m")
    assert split_key("pathloss_exponent") == ("pathloss_exponent", None)
    assert convert(2.0, "ghz") == 2e9
    assert convert([1, 2], "km") == [1000.0, 2000.0]
    assert convert(180, "deg") == pytest.approx(math.pi)


def test_minimal_g2g_file():
    s = load_scenario(SCEN / "g2g_minimal.yaml")
    assert len(s.anchors) == 1 and len(s.targets) == 1
    assert s.anchors[0].attitude[2] == pytest.approx(math.radians(30))
    assert s.measurement.sigma_rad == pytest.approx(math.radians(1.0))


def test_units_converted_to_si():
    s = load_scenario(SCEN / "fig6_tdoa.yaml")
    assert s.anchors[0].position == (-1000.0, -1000.0, 0.0)
    assert s.prior.altitude == (8000.0, 12000.0)
    assert s.pipelines["gdop_map"]["z"] == [8000.0, 9000.0, 10000.0, 11000.0, 12000.0]
    assert len(s.pipelines["gdop_map"]["x"]) == 9


def test_load_twice_identical():
    for f in sorted(SCEN.glob("*.yaml")):
        a, b = load_scenario(f), load_scenario(f)
        assert a == b and a.config_hash() == b.config_hash()


def test_unknown_key_named():
    with pytest.raises(ScenarioError, match="colour"):
        parse_scenario(_with(colour="red"))
    d = _with()
    d["anchors"][0]["velocity_mps"] = [1, 2, 3]
    with pytest.raises(ScenarioError, match=r"anchors\[0\]\.velocity_mps"):
        parse_scenario(d)


def test_missing_preset_field_named():
    d = _with(radio={"fc_hz": 2e9, "ptx_dbm": 20, "c_db": -38.5, "d0_m": 1.0})
    with pytest.raises(ScenarioError, match="pathloss_exponent"):
        parse_scenario(d)
    d = _with(shadowing={"a_los_db": 1, "b_los_per_rad": 1, "a_nlos_db": 1, "plos":
                         {"model": "constant", "value": 0.5}})
    with pytest.raises(ScenarioError, match="b_nlos"):
        parse_scenario(d)
    with pytest.raises(ScenarioError, match="preset"):
        parse_scenario(_with(shadowing={"preset": "lunar"}))


def test_preset_by_name():
    s = parse_scenario(_with(shadowing={"preset": "urban"}))
    assert s.shadowing.a_los_db > 0


def test_unit_errors():
    d = _with()
    d["anchors"][0] = {"kind": "ground", "position_s": [0, 0, 10]}
    with pytest.raises(UnitError, match="position_s"):
        parse_scenario(d)
    d["anchors"][0] = {"kind": "ground", "position": [0, 0, 10]}
    with pytest.raises(UnitError, match="unit suffix"):
        parse_scenario(d)
    d = _with(trials_s=3)
    del d["trials"]
    with pytest.raises(UnitError, match="dimensionless"):
        parse_scenario(d)


def test_trajectory_invariant_cited():
    d = _with()
    d["anchors"][0] = {"kind": "uav", "waypoints_m": [[0, 0, 10], [10, 0, 10], [20, 0, 10]],
                       "durations_s": [5]}
    with pytest.raises(ScenarioError, match="duration"):
        parse_scenario(d)


def test_uav_hover_points_are_virtual_anchors():
    d = _with()
    d["anchors"][0] = {"kind": "uav", "waypoints_m": [[0, 0, 10], [0, 0, 10], [90, 0, 10],
                                                      [90, 0, 10]],
                       "durations_s": [5, 10, 5]}
    s = parse_scenario(d)
    assert s.anchors[0].nominal_points() == [(0.0, 0.0, 10.0), (90.0, 0.0, 10.0)]


def test_structural_invariants():
    with pytest.raises(ScenarioError, match="trials"):
        parse_scenario(_with(trials=0))
    with pytest.raises(ScenarioError, match="anchor"):
        parse_scenario(_with(anchors=[]))
    d = _with()
    del d["targets"]
    with pytest.raises(ScenarioError, match="target"):
        parse_scenario(d)
    with pytest.raises(ScenarioError, match="radio"):
        parse_scenario(_with(measurement={"kind": "rss"}))
    with pytest.raises(ScenarioError, match="reference_anchor"):
        parse_scenario(_with(measurement={"kind": "tdoa", "reference_anchor": 3}))
    with pytest.raises(ScenarioError, match="measurement"):
        parse_scenario({"name": "empty"})
    with pytest.raises(ScenarioError):
        parse_scenario(_with(measurement={"kind": "sonar"}))


def test_pipeline_only_files():
    s = load_scenario(SCEN / "leo_doppler.yaml")
    assert s.measurement is None and s.anchors == ()
    assert s.pipelines["doppler"]["fc"] == 2e9
    assert s.pipelines["doppler"]["altitude"] == 550e3
    t = load_scenario(SCEN / "trajopt_altitude.yaml")
    assert t.pipelines["trajopt"]["bounds_hi"] == [0.0, 0.0, 1000.0]


def test_overrides():
    s = parse_scenario(MINIMAL)
    assert s.with_overrides(seed=7, trials=9).seed == 7
    assert s.with_overrides(seed=7).config_hash() != s.config_hash()
    with pytest.raises(ConfigurationError):
        s.with_overrides(trials=0)


def test_bad_yaml(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("anchors: [unclosed\n")
    with pytest.raises(ScenarioError):
        load_scenario(p)
    p.write_text(yaml.safe_dump(["not", "a", "mapping"]))
    with pytest.raises(ScenarioError, match="mapping"):
        load_scenario(p)
