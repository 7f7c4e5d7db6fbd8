"""Frames, attitude rotations, distances and anchor/target angles.

Positions and directions are plain ``numpy`` arrays of shape ``(3,)`` in a
flat local Cartesian global frame (x east-ish, y north-ish, z up). Angles
are radians everywhere in the library.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError


class AnglePair(NamedTuple):
    """Azimuth in (-pi, pi] counterclockwise from +x, elevation from the xy-plane."""

    azimuth: float
    elevation: float


class Attitude(NamedTuple):
    """Pitch about x, roll about y, yaw about z (radians)."""

    pitch: float = 0.0
    roll: float = 0.0
    yaw: float = 0.0


@dataclass(frozen=True)
class Pose:
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude: Attitude = Attitude()

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec3(self.position))
        object.__setattr__(self, "velocity", as_vec3(self.velocity))

    @property
    def rotation(self) -> np.ndarray:
        return rotation_from_attitude(self.attitude)


def as_vec3(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"non-finite vector {arr!r}")
    return arr


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_attitude(att: Attitude) -> np.ndarray:
    """Collective rotation ``Rz(yaw) @ Rx(pitch) @ Ry(roll)``.

    Roll is applied first, then pitch, then yaw.
    """
    pitch, roll, yaw = att
    if not all(math.isfinite(a) for a in (pitch, roll, yaw)):
        raise DomainError("attitude angles must be finite")
    # closed form of rot_z(yaw) @ rot_x(pitch) @ rot_y(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cr, sr = math.cos(roll), math.sin(roll)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array([
        [cy * cr - sy * sp * sr, -sy * cp, cy * sr + sy * sp * cr],
        [sy * cr + cy * sp * sr, cy * cp, sy * sr - cy * sp * cr],
        [-cp * sr, sp, cp * cr],
    ])


def direct_distance(pA, pU) -> float:
    d = np.asarray(pA, dtype=float) - np.asarray(pU, dtype=float)
    return math.sqrt(float(d @ d))


def horizontal_distance(pA, pU) -> float:
    """Projection of the direct distance on the xy-plane."""
    d = np.asarray(pA, dtype=float) - np.asarray(pU, dtype=float)
    return math.hypot(d[0], d[1])


def _angles_of(v: np.ndarray, d: float) -> AnglePair:
    if d == 0.0:
        raise DomainError("coincident points have no defined angles")
    if v[0] == 0.0 and v[1] == 0.0:
        az = 0.0  # pole convention
    else:
        az = math.atan2(v[1], v[0])
        if az == -math.pi:
            az = math.pi
    # atan2 keeps full precision near the poles, where asin(z/d) does not
    el = math.atan2(v[2], math.hypot(v[0], v[1]))
    return AnglePair(az, el)


def geometric_angles(pA, pU) -> AnglePair:
    """Global-frame azimuth/elevation of the target as seen from the anchor."""
    v = np.asarray(pU, dtype=float) - np.asarray(pA, dtype=float)
    return _angles_of(v, math.sqrt(float(v @ v)))


def target_side_angles(a: AnglePair) -> AnglePair:
    """Angles of the anchor as seen from the target (LOS reciprocity)."""
    theta, phi = a
    theta_u = theta - math.pi if theta > 0 else theta + math.pi
    return AnglePair(theta_u, -phi)


def local_aoa(pA, pU, R_A: np.ndarray) -> AnglePair:
    """Angles of arrival in the anchor's local frame, i.e. of ``R_A (pU - pA)``."""
    v = np.asarray(pU, dtype=float) - np.asarray(pA, dtype=float)
    d = math.sqrt(float(v @ v))
    return _angles_of(np.asarray(R_A) @ v, d)


def unit_direction(a: AnglePair) -> np.ndarray:
    theta, phi = a
    cp = math.cos(phi)
    return np.array([math.cos(theta) * cp, math.sin(theta) * cp, math.sin(phi)])


def position_from_range_aoa(pA, d: float, a: AnglePair, R_A: np.ndarray) -> np.ndarray:
    """Invert (range, local AOA) back to a global position."""
    if not d > 0:
        raise DomainError(f"range must be positive, got {d}")
    return np.asarray(pA, dtype=float) + d * (np.asarray(R_A).T @ unit_direction(a))
