"""Waypoint trajectories for aerial anchors and their placement errors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-linear path: ``len(waypoints) == len(durations) + 1``.

    A segment whose two endpoints coincide is a hover of the given duration.
    """

    waypoints: np.ndarray
    durations: np.ndarray

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.waypoints, dtype=float))
        t = np.atleast_1d(np.asarray(self.durations, dtype=float))
        if w.ndim != 2 or w.shape[1] != 3:
            raise ConfigurationError("waypoints must be an (n, 3) array")
        if w.shape[0] != t.shape[0] + 1:
            raise ConfigurationError(
                f"Trajectory invariant violated: {w.shape[0]} waypoints need "
                f"{w.shape[0] - 1} durations, got {t.shape[0]}"
            )
        if np.any(t < 0) or not np.all(np.isfinite(t)) or not np.all(np.isfinite(w)):
            raise ConfigurationError("durations must be finite and non-negative")
        object.__setattr__(self, "waypoints", w)
        object.__setattr__(self, "durations", t)

    @classmethod
    def hover(cls, point, duration: float) -> "Trajectory":
        p = np.asarray(point, dtype=float)
        return cls(np.array([p, p]), np.array([duration]))

    @property
    def span(self) -> float:
        return float(self.durations.sum())

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1)

    def hover_points(self, tol: float = 1e-9) -> list[tuple[np.ndarray, float]]:
        """(point, dwell) for every zero-length segment with positive duration."""
        out = []
        for l, length in enumerate(self.segment_lengths):
            if length <= tol and self.durations[l] > 0:
                out.append((self.waypoints[l].copy(), float(self.durations[l])))
        return out


def trajectory_position(traj: Trajectory, time: float) -> np.ndarray:
    if not 0.0 <= time <= traj.span:
        raise DomainError(f"time {time} s outside mission span [0, {traj.span}]")
    edges = np.concatenate(([0.0], np.cumsum(traj.durations)))
    # last segment whose start is <= time, skipping zero-duration segments
    l = int(np.searchsorted(edges, time, side="right")) - 1
    l = min(l, len(traj.durations) - 1)
    while l > 0 and traj.durations[l] == 0.0:
        l -= 1
    T = traj.durations[l]
    if T == 0.0:
        return traj.waypoints[l].copy()
    frac = (time - edges[l]) / T
    frac = min(max(frac, 0.0), 1.0)
    return traj.waypoints[l] + frac * (traj.waypoints[l + 1] - traj.waypoints[l])


@dataclass(frozen=True)
class PlacementError:
    eps_d: float = 0.0  # range estimation error, m
    eps_r: float = 0.0  # horizontal anchor displacement, m
    eps_h: float = 0.0  # anchor altitude error, m

    def __post_init__(self):
        if min(self.eps_d, self.eps_r, self.eps_h) < 0:
            raise ConfigurationError("placement errors must be non-negative")


def placement_error_bounds(e: PlacementError, h: float, r: float) -> tuple[float, float]:
    """Worst-case ranging error projected on the horizontal and vertical planes."""
    if not (h > 0 and r > 0):
        raise DomainError("altitude h and horizontal distance r must be positive")
    E_r = e.eps_r + (h / r) * e.eps_h + e.eps_d * math.sqrt(1.0 + h * h / (r * r))
    E_h = e.eps_h + (r / h) * e.eps_r + e.eps_d * math.sqrt(1.0 + r * r / (h * h))
    return E_r, E_h


def realize_placement(waypoint, e: PlacementError, rng: np.random.Generator, size=None):
    """Actual anchor position(s): uniform on a horizontal disc of radius eps_r
    plus a uniform vertical offset in [-eps_h, eps_h].

    Always draws three uniforms per realization so streams stay aligned when
    the error magnitudes change.
    """
    n = 1 if size is None else size
    u = rng.random((n, 3))
    rad = e.eps_r * np.sqrt(u[:, 0])
    ang = 2.0 * math.pi * u[:, 1]
    off = np.column_stack((rad * np.cos(ang), rad * np.sin(ang), e.eps_h * (2.0 * u[:, 2] - 1.0)))
    out = np.asarray(waypoint, dtype=float) + off
    return out[0] if size is None else out
