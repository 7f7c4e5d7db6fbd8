"""Figure-reproduction pipelines: GDOP maps, LEO Doppler profiles, altitude sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..anchors.orbit import OrbitElements, elevation_of, propagate_orbit
from ..anchors.satlink import doppler_frequency
from ..anchors.trajectory import PlacementError, realize_placement
from ..constants import EARTH_MU, EARTH_RADIUS
from ..errors import ConfigurationError, DomainError, ScenarioError
from ..radio import LN10, RadioConfig, ShadowingParams
from .montecarlo import trial_rng
from .scenario import Scenario

DOP_OK = "OK"
DOP_DEGENERATE = "DEGENERATE"


# --------------------------------------------------------------------- GDOP map

def gdop_map(anchors, xs, ys, zs, kind: str = "range", ref: int = 0) -> list[tuple]:
    """Rows ``(x, y, z, gdop, hdop, vdop, status)``; degenerate nodes carry NaN and
    the ``DEGENERATE`` status instead of raising."""
    if kind not in ("range", "tdoa"):
        raise ConfigurationError("gdop kind must be 'range' or 'tdoa'")
    A = np.atleast_2d(np.asarray(anchors, dtype=float))
    if kind == "tdoa" and not 0 <= ref < A.shape[0]:
        raise ConfigurationError("reference anchor out of range")
    grid = np.array([(x, y, z) for z in zs for y in ys for x in xs], dtype=float).reshape(-1, 3)
    g, h, v, ok = kernels.dop_batch(A, grid, kind == "tdoa", ref)
    return [
        (p[0], p[1], p[2], g[k], h[k], v[k], DOP_OK if ok[k] else DOP_DEGENERATE)
        for k, p in enumerate(grid)
    ]


# ------------------------------------------------------------- Doppler profile

@dataclass(frozen=True)
class DopplerRow:
    satellite: int
    pass_index: int
    t: float
    elevation: float  # rad
    doppler_hz: float
    doppler_rate_hz_s: float


def pass_geometry(altitude_m: float, max_elevation: float, user_lat: float = 0.0,
                  user_lon: float = 0.0, lead_s: float = 600.0):
    """Polar orbit and ground user such that the pass culminates at ``max_elevation``
    about ``lead_s`` seconds after t = 0.

    The user sits on the Earth-fixed cross-track line through the sub-satellite
    point at culmination, offset by the central angle that gives the requested
    elevation: ``psi = acos(R cos(el) / a) - el``.
    """
    if not 0.0 < max_elevation <= math.pi / 2:
        raise DomainError("max elevation must be in (0, 90 deg]")
    a = EARTH_RADIUS + altitude_m
    psi = math.acos(EARTH_RADIUS * math.cos(max_elevation) / a) - max_elevation
    n = math.sqrt(EARTH_MU / a**3)
    # choose the phase so the satellite crosses the user's latitude at lead_s
    o = OrbitElements(altitude_m, math.pi / 2, 0.0, user_lat - n * lead_s)
    sat, vel = propagate_orbit(o, lead_s)
    up = sat / np.linalg.norm(sat)
    cross = np.cross(up, vel)
    cross /= np.linalg.norm(cross)
    user = EARTH_RADIUS * (math.cos(psi) * up + math.sin(psi) * cross)
    # rotate about the pole so the user lands on the requested longitude
    lon_now = math.atan2(user[1], user[0])
    dl = user_lon - lon_now
    c, s = math.cos(dl), math.sin(dl)
    Rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    o = OrbitElements(altitude_m, math.pi / 2, dl % (2 * math.pi), o.phase)
    return o, Rz @ user


def doppler_profile(orbits, user_pos, fc: float, t0: float, span: float, step: float,
                    mask: float = math.radians(10.0)) -> list[DopplerRow]:
    """Per-epoch elevation and Doppler for every pass above ``mask``.

    The rate is the central difference of the Doppler series (one-sided at
    the ends of each pass).
    """
    if not (step > 0 and span > 0 and fc > 0):
        raise DomainError("need positive span, step and carrier frequency")
    t = t0 + step * np.arange(int(math.floor(span / step + 1e-9)) + 1)
    user = np.asarray(user_pos, dtype=float)
    rows = []
    for sid, o in enumerate(orbits):
        pos, vel = propagate_orbit(o, t)
        el = elevation_of(pos, user)
        fd = doppler_frequency(pos, vel, user, fc)
        vis = el >= mask
        edges = np.flatnonzero(np.diff(np.concatenate(([0], vis.astype(int), [0]))))
        for p, (lo, hi) in enumerate(zip(edges[::2], edges[1::2])):
            seg = fd[lo:hi]
            rate = np.gradient(seg, step) if seg.size > 1 else np.zeros(1)
            for k in range(lo, hi):
                rows.append(DopplerRow(sid, p, float(t[k]), float(el[k]), float(fd[k]),
                                       float(rate[k - lo])))
    return rows


# -------------------------------------------------------------- altitude sweep

def _sigma_db(sh: ShadowingParams, elev: np.ndarray) -> np.ndarray:
    """Vectorised combined shadowing sigma (dB) versus elevation (rad)."""
    if sh.plos.model == "constant":
        p = np.full_like(elev, sh.plos.value)
    else:
        p = 1.0 / (1.0 + sh.plos.alpha * np.exp(-sh.plos.beta * (np.degrees(elev) - sh.plos.alpha)))
    s_los = sh.a_los_db * np.exp(-sh.b_los * elev)
    s_nlos = sh.a_nlos_db * np.exp(-sh.b_nlos * elev)
    return np.sqrt(p * p * s_los**2 + (1.0 - p) ** 2 * s_nlos**2)


def altitude_sweep_errors(radio: RadioConfig, shadow: ShadowingParams, placement: PlacementError,
                          altitudes, disc_radius: float = 1000.0, samples: int = 20000,
                          seed: int = 0, target_altitude: float = 0.0) -> np.ndarray:
    """Mean horizontal-projected RSS ranging error for each scheduled altitude.

    Per altitude ``h`` (index ``k``, generator ``trial_rng(seed, k)``): the anchor
    is scheduled at (0, 0, h) and realised with the placement error; targets
    are uniform in the disc. The received power sets ``d_hat`` and the
    projected estimate ``sqrt(max(d_hat^2 - h^2, 0))`` (h from the schedule)
    is compared with the true horizontal distance. Draw order is fixed, so
    sweeps that differ only in placement error share random numbers.
    """
    hs = np.asarray(altitudes, dtype=float)
    if np.any(hs - target_altitude <= 0):
        raise DomainError("anchor altitudes must be above the targets")
    if samples < 1:
        raise ConfigurationError("need at least one sample per altitude")
    out = np.empty(hs.shape[0])
    for k, h in enumerate(hs):
        rng = trial_rng(seed, k)
        anchor = realize_placement((0.0, 0.0, h), placement, rng, size=samples)
        u = rng.random((samples, 2))
        z = rng.standard_normal(samples)
        u_d = rng.random(samples)
        rad = disc_radius * np.sqrt(u[:, 0])
        ang = 2.0 * math.pi * u[:, 1]
        tx, ty = rad * np.cos(ang), rad * np.sin(ang)
        dx, dy = anchor[:, 0] - tx, anchor[:, 1] - ty
        dz = anchor[:, 2] - target_altitude
        d = np.sqrt(dx * dx + dy * dy + dz * dz)
        elev = np.arcsin(np.clip(dz / d, 0.0, 1.0))
        sig = _sigma_db(shadow, elev)
        # RSS ranging inverts the log-distance law: d_hat = d * 10^(-X / (10 n_p))
        d_hat = np.maximum(d, radio.d0_m) * np.exp(-LN10 * sig * z / (10.0 * radio.pathloss_exponent))
        d_hat = d_hat + placement.eps_d * (2.0 * u_d - 1.0)
        hh = h - target_altitude
        r_hat = np.sqrt(np.maximum(d_hat * d_hat - hh * hh, 0.0))
        out[k] = float(np.mean(np.abs(r_hat - rad)))
    return out


def altitude_sweep(s: Scenario, altitudes=None, placement: PlacementError | None = None):
    """Rows ``(h, mean projected ranging error)`` for the scenario's UAV anchor."""
    cfg = s.pipelines.get("altitude_sweep", {})
    if altitudes is None:
        altitudes = cfg.get("altitudes")
        if altitudes is None:
            raise ScenarioError(f"{s.name}.altitude_sweep.altitudes: missing required field")
    if s.radio is None or s.shadowing is None:
        raise ScenarioError(f"{s.name}: altitude sweep needs radio and shadowing sections")
    uav = [a for a in s.anchors if a.kind == "uav"]
    if placement is None:
        placement = uav[0].placement if uav else PlacementError()
    errs = altitude_sweep_errors(
        s.radio, s.shadowing, placement, altitudes,
        disc_radius=cfg.get("disc_radius", s.prior.radius if s.prior else 1000.0),
        samples=cfg.get("samples_per_altitude", 20000), seed=s.seed,
        target_altitude=cfg.get("target_altitude", 0.0),
    )
    return list(zip((float(h) for h in altitudes), (float(e) for e in errs)))


__all__ = [
    "DOP_DEGENERATE", "DOP_OK", "DopplerRow", "altitude_sweep", "altitude_sweep_errors",
    "doppler_profile", "gdop_map", "pass_geometry", "trajopt_problem",
]


# ----------------------------------------------------------------- trajectory

def trajopt_problem(s: Scenario):
    """Build the trajectory-optimisation problem and search settings from a scenario."""
    from ..trajopt import EnergyModel, SearchConfig, TrajOptProblem

    cfg = s.pipelines.get("trajopt")
    if cfg is None:
        raise ScenarioError(f"{s.name}.trajopt: missing required section")
    if s.targets:
        targets = np.array(s.targets, dtype=float)
    else:
        pr = s.prior
        targets = np.array([[pr.center[0], pr.center[1], pr.altitude[0]]])
    for key in ("bounds_lo", "bounds_hi"):
        if not isinstance(cfg[key], list) or len(cfg[key]) != 3:
            raise ScenarioError(f"{s.name}.trajopt.{key}: expected [x, y, z]")
    problem = TrajOptProblem(
        targets=targets,
        bounds_lo=np.array(cfg["bounds_lo"]),
        bounds_hi=np.array(cfg["bounds_hi"]),
        n_waypoints=cfg["waypoints"],
        total_dwell_s=cfg["total_dwell"],
        objective=cfg["objective"],
        measurement=cfg["measurement"],
        sigma_range_m=cfg["sigma_range"],
        radio=s.radio,
        shadowing=s.shadowing,
        energy=EnergyModel(cfg["hover_power"], cfg["move_cost"]),
        energy_budget_j=cfg["energy_budget"],
        cruise_speed_mps=cfg["cruise_speed"],
        max_speed_mps=cfg["max_speed"],
        max_heading_change_rad=cfg["max_heading_change"],
        min_dwell_s=cfg["min_dwell"],
        coverage_radius_m=cfg["coverage_radius"],
        mc_trials=cfg["mc_trials"],
        mc_seed=s.seed,
    )
    search = SearchConfig(iterations=cfg["iterations"], chains=cfg["chains"], seed=s.seed)
    return problem, search
