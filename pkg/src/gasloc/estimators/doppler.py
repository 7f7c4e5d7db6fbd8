"""Batch least-squares Doppler positioning of a static receiver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..constants import EARTH_RADIUS, SPEED_OF_LIGHT
from ..errors import ConfigurationError, ObservabilityError
from .snapshot import PositionEstimate, SolverConfig


@dataclass
class SatTrack:
    """Ephemeris samples for one satellite and its (known) clock drift, s/s."""

    positions: np.ndarray  # (n, 3) ECEF m
    velocities: np.ndarray  # (n, 3) ECEF m/s
    rates: np.ndarray  # (n,) measured pseudorange rates, m/s
    clock_drift: float = 0.0


@dataclass
class DopplerEstimate(PositionEstimate):
    clock_drift_mps: float = 0.0  # c * receiver drift


def _stack(tracks: Sequence[SatTrack]):
    S, V, Z, D = [], [], [], []
    for t in tracks:
        pos = np.atleast_2d(np.asarray(t.positions, dtype=float))
        vel = np.atleast_2d(np.asarray(t.velocities, dtype=float))
        z = np.atleast_1d(np.asarray(t.rates, dtype=float))
        if not (pos.shape == vel.shape and pos.shape[0] == z.shape[0]):
            raise ConfigurationError("track positions, velocities and rates must align")
        S.append(pos)
        V.append(vel)
        Z.append(z)
        D.append(np.full(z.shape[0], SPEED_OF_LIGHT * t.clock_drift))
    return np.vstack(S), np.vstack(V), np.concatenate(Z), np.concatenate(D)


def _model(theta, S, V, sat_terms):
    p, b = theta[:3], theta[3]
    diff = p - S
    rho = np.linalg.norm(diff, axis=1)
    e = diff / rho[:, None]
    los_rate = np.sum(V * e, axis=1)
    pred = los_rate + b - sat_terms
    Jp = (V - los_rate[:, None] * e) / rho[:, None]
    J = np.column_stack((Jp, np.ones(len(rho))))
    return pred, J


def doppler_batch_ls(tracks: Sequence[SatTrack], sigma: float = 1.0,
                     cfg: SolverConfig = SolverConfig(), initial_guess=None) -> DopplerEstimate:
    """Estimate receiver position and common drift term from pseudorange rates."""
    S, V, Z, sat_terms = _stack(tracks)
    if Z.shape[0] < 4:
        raise ObservabilityError(f"{Z.shape[0]} measurements cannot fix 4 unknowns")
    w = 1.0 / sigma**2

    if initial_guess is None:
        c = S.mean(axis=0)
        initial_guess = c / np.linalg.norm(c) * EARTH_RADIUS
    starts = [np.append(np.asarray(initial_guess, dtype=float), 0.0)]
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.multistart - 1):
        jitter = rng.standard_normal(3) * 2.0e5
        starts.append(np.append(starts[0][:3] + jitter, 0.0))

    def cost(theta):
        pred, _ = _model(theta, S, V, sat_terms)
        r = pred - Z
        return float(w * r @ r)

    best = None
    for k, th0 in enumerate(starts):
        theta = th0.copy()
        c0 = cost(theta)
        converged = False
        it = 0
        for it in range(1, cfg.max_iterations + 1):
            pred, J = _model(theta, S, V, sat_terms)
            r = pred - Z
            try:
                delta = np.linalg.lstsq(J, -r, rcond=None)[0]
            except np.linalg.LinAlgError:
                break
            step = 1.0
            for _ in range(cfg.max_halvings + 1):
                cand = theta + step * delta
                cn = cost(cand)
                if cn <= c0:
                    break
                step *= 0.5
            else:
                converged = np.linalg.norm(delta[:3]) <= max(cfg.tolerance_m, 1e-9 * EARTH_RADIUS)
                break
            theta, c0 = cand, cn
            if step * np.linalg.norm(delta[:3]) < max(cfg.tolerance_m, 1e-12 * EARTH_RADIUS):
                converged = True
                break
        if best is None or c0 < best[1]:
            best = (theta, c0, it, converged)
    theta, c0, it, converged = best
    _, J = _model(theta, S, V, sat_terms)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise ObservabilityError("pseudorange-rate geometry is rank deficient")
    N = w * J.T @ J
    cov = np.linalg.inv(N)
    return DopplerEstimate(
        position=theta[:3], covariance=0.5 * (cov[:3, :3] + cov[:3, :3].T),
        residual_norm=math.sqrt(c0), iterations=it, converged=bool(converged),
        starts_tried=len(starts), clock_drift_mps=float(theta[3]),
        extra={"drift_variance": float(cov[3, 3])},
    )
