"""Linear and extended Kalman filtering with a constant-velocity motion model.

State layout: ``[x, y, z, vx, vy, vz]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from ..errors import ConfigurationError, DomainError, NumericalError
from ..geometry import wrap_angle


@dataclass(frozen=True)
class TrackState:
    x: np.ndarray
    P: np.ndarray
    k: int = 0


def cv_transition(dt: float, dim: int = 3) -> np.ndarray:
    F = np.eye(2 * dim)
    F[:dim, dim:] = dt * np.eye(dim)
    return F


def cv_process_noise(dt: float, q: float, dim: int = 3) -> np.ndarray:
    """White-acceleration noise with spectral density ``q``."""
    I = np.eye(dim)
    return q * np.block([[dt**3 / 3 * I, dt**2 / 2 * I], [dt**2 / 2 * I, dt * I]])


def kf_predict(s: TrackState, dt: float, F=None, Q=None, q: float = 0.0) -> TrackState:
    if not dt > 0:
        raise DomainError("dt must be positive")
    n = s.x.shape[0]
    F = cv_transition(dt, n // 2) if F is None else np.asarray(F, dtype=float)
    Q = cv_process_noise(dt, q, n // 2) if Q is None else np.asarray(Q, dtype=float)
    if F.shape != (n, n) or Q.shape != (n, n) or s.P.shape != (n, n):
        raise ConfigurationError("transition/noise dimensions do not match the state")
    P = F @ s.P @ F.T + Q
    return TrackState(F @ s.x, 0.5 * (P + P.T), s.k + 1)


MeasurementFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def kf_update(s: TrackState, z, H, R, angle_mask=None) -> TrackState:
    """Correct ``s`` with measurement ``z``.

    ``H`` is either a matrix (linear model) or a callable returning the
    predicted measurement and its Jacobian at the prior state (extended).
    Innovations flagged in ``angle_mask`` are wrapped to (-pi, pi].
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if callable(H):
        hx, Hm = H(s.x)
        hx = np.atleast_1d(hx)
        Hm = np.atleast_2d(Hm)
    else:
        Hm = np.atleast_2d(np.asarray(H, dtype=float))
        hx = Hm @ s.x
    n = s.x.shape[0]
    if Hm.shape != (z.shape[0], n) or R.shape != (z.shape[0], z.shape[0]):
        raise ConfigurationError("measurement dimensions do not match")
    y = z - hx
    if angle_mask is not None:
        for i, is_angle in enumerate(angle_mask):
            if is_angle:
                y[i] = wrap_angle(y[i])
    S = Hm @ s.P @ Hm.T + R
    S = 0.5 * (S + S.T)
    if np.linalg.cond(S) > 1e15:
        raise NumericalError("innovation covariance is singular")
    K = np.linalg.solve(S, Hm @ s.P).T
    I_KH = np.eye(n) - K @ Hm
    P = I_KH @ s.P @ I_KH.T + K @ R @ K.T
    return replace(s, x=s.x + K @ y, P=0.5 * (P + P.T))


def nees(s: TrackState, x_true) -> float:
    e = s.x - np.asarray(x_true, dtype=float)
    return float(e @ np.linalg.solve(s.P, e))


# --- measurement models (value, Jacobian) ---------------------------------


def position_model(dim_state: int = 6) -> np.ndarray:
    H = np.zeros((3, dim_state))
    H[:, :3] = np.eye(3)
    return H


def range_model(anchor) -> MeasurementFn:
    a = np.asarray(anchor, dtype=float)

    def h(x):
        d = x[:3] - a
        rho = math.sqrt(float(d @ d))
        J = np.zeros((1, x.shape[0]))
        J[0, :3] = d / rho
        return np.array([rho]), J

    return h


def aoa_model(anchor, rotation=None) -> MeasurementFn:
    """Local azimuth/elevation of the target at an anchor with rotation ``R``."""
    a = np.asarray(anchor, dtype=float)
    R = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)

    def h(x):
        v = R @ (x[:3] - a)
        rxy2 = v[0] ** 2 + v[1] ** 2
        rxy = math.sqrt(rxy2)
        r2 = rxy2 + v[2] ** 2
        az = math.atan2(v[1], v[0])
        el = math.atan2(v[2], rxy)
        daz = np.array([-v[1] / rxy2, v[0] / rxy2, 0.0])
        delv = np.array([-v[0] * v[2] / (r2 * rxy), -v[1] * v[2] / (r2 * rxy), rxy / r2])
        J = np.zeros((2, x.shape[0]))
        J[0, :3] = daz @ R
        J[1, :3] = delv @ R
        return np.array([az, el]), J

    return h


def pseudorange_rate_model(sat_pos, sat_vel, clock_term: float = 0.0) -> MeasurementFn:
    """Rate seen by a static receiver; ``clock_term`` = c * (user - sat drift)."""
    s = np.asarray(sat_pos, dtype=float)
    v = np.asarray(sat_vel, dtype=float)

    def h(x):
        d = x[:3] - s
        rho = math.sqrt(float(d @ d))
        e = d / rho
        rate = float(v @ e)
        J = np.zeros((1, x.shape[0]))
        J[0, :3] = (v - rate * e) / rho
        return np.array([rate + clock_term]), J

    return h
