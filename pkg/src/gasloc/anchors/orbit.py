"""Circular-orbit LEO anchors on a spherical, uniformly rotating Earth."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..constants import EARTH_MU, EARTH_RADIUS, EARTH_ROTATION_RATE
from ..errors import ConfigurationError


@dataclass(frozen=True)
class OrbitElements:
    altitude_m: float
    inclination: float
    raan: float = 0.0
    phase: float = 0.0  # argument of latitude at t = 0

    def __post_init__(self):
        if not self.altitude_m > 0:
            raise ConfigurationError("orbit altitude must be positive")
        if not 0.0 <= self.inclination <= math.pi:
            raise ConfigurationError("inclination must be in [0, pi]")

    @property
    def semi_major_axis(self) -> float:
        return EARTH_RADIUS + self.altitude_m

    @property
    def mean_motion(self) -> float:
        """Angular rate in rad/s."""
        return math.sqrt(EARTH_MU / self.semi_major_axis**3)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.mean_motion


@dataclass(frozen=True)
class Constellation:
    kind: str  # "polar" | "walker" | "mixed"
    planes: int
    sats_per_plane: int
    template: OrbitElements

    def __post_init__(self):
        if self.kind not in ("polar", "walker", "mixed"):
            raise ConfigurationError(f"unknown constellation kind {self.kind!r}")
        if self.planes < 1 or self.sats_per_plane < 1:
            raise ConfigurationError("need at least one plane and one satellite per plane")


def _shell(c: Constellation, inclination: float, raan_span: float) -> list[OrbitElements]:
    P, S = c.planes, c.sats_per_plane
    out = []
    for p in range(P):
        raan = c.template.raan + raan_span * p / P
        for s in range(S):
            phase = c.template.phase + 2.0 * math.pi * s / S + 2.0 * math.pi * p / (P * S)
            out.append(replace(c.template, inclination=inclination,
                               raan=math.fmod(raan, 2.0 * math.pi),
                               phase=math.fmod(phase, 2.0 * math.pi)))
    return out


def generate_constellation(c: Constellation) -> list[OrbitElements]:
    """Polar shells spread RAAN over half a circle, Walker shells over a full one."""
    polar = math.pi / 2
    if c.kind == "polar":
        return _shell(c, polar, math.pi)
    if c.kind == "walker":
        return _shell(c, c.template.inclination, 2.0 * math.pi)
    return _shell(c, polar, math.pi) + _shell(c, c.template.inclination, 2.0 * math.pi)


def inertial_state(o: OrbitElements, time):
    """Position/velocity in the Earth-centred inertial frame (aligned with ECEF at t=0)."""
    t = np.asarray(time, dtype=float)
    a, n = o.semi_major_axis, o.mean_motion
    u = o.phase + n * t
    cu, su = np.cos(u), np.sin(u)
    cO, sO = math.cos(o.raan), math.sin(o.raan)
    ci, si = math.cos(o.inclination), math.sin(o.inclination)
    pos = a * np.stack([cu * cO - su * ci * sO, cu * sO + su * ci * cO, su * si], axis=-1)
    vel = a * n * np.stack([-su * cO - cu * ci * sO, -su * sO + cu * ci * cO, cu * si], axis=-1)
    return pos, vel


def propagate_orbit(o: OrbitElements, time):
    """ECEF position (m) and velocity (m/s) at ``time`` seconds (scalar or array)."""
    t = np.asarray(time, dtype=float)
    pos_i, vel_i = inertial_state(o, t)
    th = -EARTH_ROTATION_RATE * t
    c, s = np.cos(th), np.sin(th)
    x = c * pos_i[..., 0] - s * pos_i[..., 1]
    y = s * pos_i[..., 0] + c * pos_i[..., 1]
    vx = c * vel_i[..., 0] - s * vel_i[..., 1]
    vy = s * vel_i[..., 0] + c * vel_i[..., 1]
    w = EARTH_ROTATION_RATE
    pos = np.stack([x, y, pos_i[..., 2]], axis=-1)
    vel = np.stack([vx + w * y, vy - w * x, vel_i[..., 2]], axis=-1)
    return pos, vel


def geodetic_to_ecef(lat: float, lon: float, alt: float = 0.0) -> np.ndarray:
    """Spherical-Earth conversion; angles in radians."""
    r = EARTH_RADIUS + alt
    return r * np.array([math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)])


def elevation_of(sat_pos, user_pos) -> np.ndarray | float:
    """Elevation of the satellite above the user's local horizon (radians)."""
    user = np.asarray(user_pos, dtype=float)
    los = np.asarray(sat_pos, dtype=float) - user
    up = user / np.linalg.norm(user)
    el = np.arcsin(np.clip((los @ up) / np.linalg.norm(los, axis=-1), -1.0, 1.0))
    return float(el) if np.ndim(el) == 0 else el
