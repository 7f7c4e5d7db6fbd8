import math

import numpy as np
import pytest

from gasloc.anchors.orbit import elevation_of, propagate_orbit
from gasloc.anchors.trajectory import PlacementError
from gasloc.errors import ConfigurationError, DomainError, ScenarioError
from gasloc.radio import LosProbability, RadioConfig, ShadowingParams
from gasloc.sim.pipelines import (
    DOP_DEGENERATE,
    DOP_OK,
    altitude_sweep,
    altitude_sweep_errors,
    doppler_profile,
    gdop_map,
    pass_geometry,
    trajopt_problem,
)
from gasloc.sim.scenario import parse_scenario

RADIO = RadioConfig(fc_hz=2e9, ptx_dbm=20.0, c_db=-38.5, pathloss_exponent=2.0, d0_m=1.0)
SQUARE = [[-100, -100, 0], [100, -100, 0], [100, 100, 0], [-100, 100, 0], [0, 0, 40]]


def test_gdop_map_sentinel_on_anchor():
    rows = gdop_map(SQUARE, [100.0, 30.0], [100.0], [0.0])
    assert rows[0][-1] == DOP_DEGENERATE and math.isnan(rows[0][3])
    assert rows[1][-1] == DOP_OK and rows[1][3] > 0


def test_gdop_map_square_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x, y, z = rng.uniform(-150, 150), rng.uniform(-150, 150), rng.uniform(10, 200)
        images = [(x, y), (-x, y), (x, -y), (y, x), (-y, -x)]
        g = [gdop_map(SQUARE, [a], [b], [z])[0][3:6] for a, b in images]
        for other in g[1:]:
            np.testing.assert_allclose(other[0], g[0][0], rtol=1e-9)


def test_gdop_map_vdop_ratio_grows_with_altitude():
    A = [[x, y, 0.0] for x in (-1e3, 0, 1e3) for y in (-1e3, 0, 1e3)]
    zs = [500.0, 1e3, 2e3, 4e3, 8e3, 12e3]
    rows = gdop_map(A, [150.0], [-80.0], zs, "tdoa", 4)
    ratio = [r[5] / r[4] for r in rows]
    assert all(b > a for a, b in zip(ratio, ratio[1:]))
    # plain ranges pin the height; the ratio falls instead
    rows = gdop_map(A, [150.0], [-80.0], zs, "range")
    ratio = [r[5] / r[4] for r in rows]
    assert all(b < a for a, b in zip(ratio, ratio[1:]))


def test_gdop_map_validation():
    with pytest.raises(ConfigurationError):
        gdop_map(SQUARE, [0.0], [0.0], [10.0], "aoa")
    with pytest.raises(ConfigurationError):
        gdop_map(SQUARE, [0.0], [0.0], [10.0], "tdoa", 9)


def test_pass_geometry_culmination():
    for el_deg in (10, 30, 60, 90):
        el = math.radians(el_deg)
        o, user = pass_geometry(550e3, el, math.radians(20), math.radians(-40), 300.0)
        t = np.arange(0.0, 600.0, 0.5)
        p, _ = propagate_orbit(o, t)
        e = elevation_of(p, user)
        k = int(np.argmax(e))
        assert e[k] == pytest.approx(el, abs=2e-3)
        assert t[k] == pytest.approx(300.0, abs=5.0)
    with pytest.raises(DomainError):
        pass_geometry(550e3, 0.0)


def test_doppler_profile_s_curve():
    o, user = pass_geometry(550e3, math.radians(90), lead_s=500.0)
    rows = doppler_profile([o], user, 2e9, 0.0, 1000.0, 1.0, 0.0)
    assert {r.pass_index for r in rows} == {0}
    fd = np.array([r.doppler_hz for r in rows])
    t = np.array([r.t for r in rows])
    el = np.array([r.elevation for r in rows])
    k = int(np.argmax(el))
    assert fd[0] > 0 > fd[-1]
    assert np.count_nonzero(np.diff(np.sign(fd))) == 1
    # tangential epoch: the zero crossing sits at culmination
    assert abs(fd[k]) < abs(np.gradient(fd, t)[k]) * 1.0
    m = min(k, len(fd) - 1 - k)
    np.testing.assert_allclose(fd[k - m:k][::-1], -fd[k + 1:k + m + 1], rtol=0, atol=0.02 * fd.max())
    # near the horizon the along-sight gravity term can flip the sign
    assert all(r.doppler_rate_hz_s < 0 for r in rows if r.elevation > math.radians(10))


def test_doppler_profile_no_pass():
    o, user = pass_geometry(550e3, math.radians(30), lead_s=5000.0)
    assert doppler_profile([o], user, 2e9, 0.0, 100.0, 1.0) == []
    with pytest.raises(DomainError):
        doppler_profile([o], user, 2e9, 0.0, 100.0, 0.0)


def test_altitude_sweep_noiseless_zero():
    zero = ShadowingParams(0.0, 0.0, 0.0, 0.0, LosProbability("constant", value=1.0))
    err = altitude_sweep_errors(RADIO, zero, PlacementError(), [50, 200, 800], samples=2000)
    assert np.all(err < 1e-6)


def test_altitude_sweep_eps_h_dominance():
    urban = ShadowingParams.preset("urban")
    hs = np.arange(100.0, 1001.0, 100.0)
    base = altitude_sweep_errors(RADIO, urban, PlacementError(), hs, samples=5000, seed=4)
    more = altitude_sweep_errors(RADIO, urban, PlacementError(eps_h=20.0), hs, samples=5000, seed=4)
    assert np.mean(more > base) >= 0.9
    with pytest.raises(DomainError):
        altitude_sweep_errors(RADIO, urban, PlacementError(), [0.0])


def test_altitude_sweep_scenario_rows():
    s = parse_scenario({
        "name": "sw", "seed": 2,
        "radio": {"fc_hz": 2e9, "ptx_dbm": 20, "c_db": -38.5, "pathloss_exponent": 2, "d0_m": 1},
        "shadowing": {"preset": "urban"},
        "altitude_sweep": {"altitudes_m": [100, 300], "samples_per_altitude": 500},
    })
    rows = altitude_sweep(s)
    assert [h for h, _ in rows] == [100.0, 300.0]
    assert all(e > 0 for _, e in rows)
    with pytest.raises(ScenarioError):
        altitude_sweep(parse_scenario({"name": "x", "altitude_sweep": {"altitudes_m": [1]}}))


def test_trajopt_problem_from_scenario():
    s = parse_scenario({
        "name": "tp", "seed": 5, "targets": [{"position_m": [0, 0, 0]}],
        "trajopt": {"waypoints": 3, "bounds_lo_m": [-50, -50, 10], "bounds_hi_m": [50, 50, 80],
                    "hover_power_w": 50, "iterations": 100},
    })
    p, cfg = trajopt_problem(s)
    assert p.n_waypoints == 3 and p.energy.hover_power_w == 50
    assert cfg.seed == 5 and cfg.iterations == 100
