"""Snapshot position estimators: range and TDOA multilateration,
bearing triangulation and the single-anchor range+angle fix."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .. import kernels
from ..errors import ConfigurationError, DomainError, GeometryError
from ..geometry import AnglePair, position_from_range_aoa, unit_direction


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 100
    tolerance_m: float = 1e-9
    max_halvings: int = 20
    multistart: int = 8
    seed: int = 0
    jitter_scale_m: float | None = None  # default: RMS anchor spread
    prefer_upper: bool = False  # resolve mirror ambiguity towards +z

    def __post_init__(self):
        if self.max_iterations < 1 or not self.tolerance_m > 0 or self.multistart < 1:
            raise ConfigurationError("need max_iterations >= 1, tolerance > 0, multistart >= 1")


@dataclass
class PositionEstimate:
    position: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    ambiguous: bool = False
    starts_tried: int = 1
    extra: dict = field(default_factory=dict)


def _sigma_array(sigma, n) -> np.ndarray:
    s = np.broadcast_to(np.asarray(1.0 if sigma is None else sigma, dtype=float), (n,)).copy()
    if np.any(s <= 0) or not np.all(np.isfinite(s)):
        raise DomainError("measurement sigmas must be positive and finite")
    return s


def _linear_range_fix(A, d):
    """Closed-form fix from differenced squared ranges, or None if rank deficient."""
    M = 2.0 * (A[1:] - A[0])
    b = np.sum(A[1:] ** 2, axis=1) - np.sum(A[0] ** 2) - d[1:] ** 2 + d[0] ** 2
    sol, _, rank, _ = np.linalg.lstsq(M, b, rcond=1e-10)
    return sol if rank == 3 else None


def _linear_tdoa_fix(A, ii, jj, dd):
    """Closed-form fix for reference-anchor differences (unknowns x and r_ref)."""
    if np.unique(jj).size != 1 or dd.size < 4:
        return None
    ref = jj[0]
    a0 = A[ref]
    Ai = A[ii]
    M = np.column_stack((-2.0 * (Ai - a0), -2.0 * dd))
    b = dd**2 - np.sum(Ai**2, axis=1) + np.sum(a0**2)
    sol, _, rank, _ = np.linalg.lstsq(M, b, rcond=1e-10)
    return sol[:3] if rank == 4 else None


def _starts(anchors: np.ndarray, cfg: SolverConfig, initial_guess, algebraic=None) -> np.ndarray:
    centroid = anchors.mean(axis=0)
    spread = cfg.jitter_scale_m
    if spread is None:
        spread = math.sqrt(float(np.mean(np.sum((anchors - centroid) ** 2, axis=1))))
        spread = max(spread, 1.0)
    first = [np.asarray(initial_guess, dtype=float)] if initial_guess is not None else []
    if algebraic is not None and np.all(np.isfinite(algebraic)):
        first.append(np.asarray(algebraic, dtype=float))
    rng = np.random.default_rng(cfg.seed)
    jitter = centroid + spread * rng.standard_normal((cfg.multistart - 1, 3))
    return np.vstack(first + [centroid[None, :], jitter])


def _plane(anchors: np.ndarray):
    """(centroid, unit normal) if the anchors are coplanar, else None."""
    c = anchors.mean(axis=0)
    _, s, vt = np.linalg.svd(anchors - c)
    if s.size < 3 or s[2] <= 1e-9 * max(s[0], 1e-300):
        return c, vt[-1]
    return None


def _covariance(N: np.ndarray) -> np.ndarray:
    cov = np.linalg.pinv(N, rcond=1e-13, hermitian=True)
    return 0.5 * (cov + cov.T)


def _range_normal(anchors, x, w):
    diff = x - anchors
    rho = np.linalg.norm(diff, axis=1)
    U = diff / np.where(rho > 0, rho, 1.0)[:, None]
    return (U * w[:, None]).T @ U


def _best_of(solve, starts):
    best = None
    for k, x0 in enumerate(starts):
        x, cost, it, conv = solve(x0)
        if best is None or cost < best[1]:
            best = (x, cost, it, conv, k)
    return best


def _resolve_mirror(x, cost_fn, plane, cfg, tol):
    """Return (x, ambiguous) given a coplanar anchor set."""
    if plane is None:
        return x, False
    c, n = plane
    offset = float((x - c) @ n)
    if abs(offset) <= 1e-6:
        return x, False
    mirror = x - 2.0 * offset * n
    c0, c1 = cost_fn(x), cost_fn(mirror)
    ambiguous = abs(c1 - c0) <= 1e-9 * max(1.0, c0) + tol
    if ambiguous and cfg.prefer_upper and mirror[2] > x[2]:
        return mirror, True
    return x, ambiguous


def mlat_range(anchors, ranges, sigma=None, cfg: SolverConfig = SolverConfig(),
               initial_guess=None) -> PositionEstimate:
    """Weighted nonlinear least squares on ranges (damped Gauss-Newton, multistart)."""
    A = np.atleast_2d(np.asarray(anchors, dtype=float))
    d = np.asarray(ranges, dtype=float)
    if A.shape[0] != d.shape[0]:
        raise ConfigurationError("one range per anchor is required")
    if A.shape[0] < 4:
        raise GeometryError(f"{A.shape[0]} anchors under-determine a 3D range fix (need >= 4)")
    if np.linalg.matrix_rank(A - A.mean(axis=0), tol=1e-9 * np.abs(A).max()) < 2:
        raise GeometryError("collinear anchors cannot fix a 3D position")
    s = _sigma_array(sigma, A.shape[0])
    w = 1.0 / s**2

    def solve(x0):
        return kernels.solve_range(A, d, w, x0, cfg.max_iterations, cfg.tolerance_m,
                                   cfg.max_halvings)

    starts = _starts(A, cfg, initial_guess, _linear_range_fix(A, d))
    x, cost, it, conv, _ = _best_of(solve, starts)

    def cost_fn(p):
        r = np.linalg.norm(p - A, axis=1) - d
        return float(np.sum(w * r * r))

    x, ambiguous = _resolve_mirror(x, cost_fn, _plane(A), cfg, 1e-18)
    return PositionEstimate(x, _covariance(_range_normal(A, x, w)), math.sqrt(cost),
                            it, conv, ambiguous, len(starts))


def tdoa_measurements(anchors, target, ref: int = 0, all_pairs: bool = False):
    """Noiseless (i, j, range difference) triples for a target."""
    A = np.atleast_2d(np.asarray(anchors, dtype=float))
    rho = np.linalg.norm(A - np.asarray(target, dtype=float), axis=1)
    return tdoa_from_toas(rho, ref, all_pairs)


def tdoa_from_toas(toas_or_ranges, ref: int = 0, all_pairs: bool = False):
    """Difference arrival times (or ranges) against ``ref`` (or all pairs)."""
    t = np.asarray(toas_or_ranges, dtype=float)
    n = t.shape[0]
    if all_pairs:
        return [(i, j, float(t[i] - t[j])) for i in range(n) for j in range(i + 1, n)]
    return [(i, ref, float(t[i] - t[ref])) for i in range(n) if i != ref]


def _connected_anchor_count(pairs, n) -> int:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    used = set()
    for i, j in pairs:
        parent[find(i)] = find(j)
        used.update((i, j))
    if not used:
        return 0
    roots = {}
    for a in used:
        roots[find(a)] = roots.get(find(a), 0) + 1
    return max(roots.values())


def mlat_tdoa(anchors, measurements: Sequence, sigma=None, cfg: SolverConfig = SolverConfig(),
              initial_guess=None) -> PositionEstimate:
    """Weighted NLS on range differences ``|p - a_i| - |p - a_j| - d_ij`` (metres)."""
    A = np.atleast_2d(np.asarray(anchors, dtype=float))
    if not measurements:
        raise GeometryError("no TDOA measurements")
    ii = np.array([m[0] for m in measurements], dtype=np.intp)
    jj = np.array([m[1] for m in measurements], dtype=np.intp)
    dd = np.array([m[2] for m in measurements], dtype=float)
    if np.any(ii == jj) or ii.max() >= A.shape[0] or jj.max() >= A.shape[0] or min(ii.min(), jj.min()) < 0:
        raise ConfigurationError("TDOA pair indices must be distinct valid anchor indices")
    if _connected_anchor_count(zip(ii.tolist(), jj.tolist()), A.shape[0]) < 4:
        raise GeometryError("TDOA measurement graph must connect at least 4 anchors")
    s = _sigma_array(sigma, dd.shape[0])
    w = 1.0 / s**2

    def solve(x0):
        return kernels.solve_tdoa(A, ii, jj, dd, w, x0, cfg.max_iterations, cfg.tolerance_m,
                                  cfg.max_halvings)

    starts = _starts(A, cfg, initial_guess, _linear_tdoa_fix(A, ii, jj, dd))
    x, cost, it, conv, _ = _best_of(solve, starts)

    def cost_fn(p):
        rho = np.linalg.norm(p - A, axis=1)
        r = rho[ii] - rho[jj] - dd
        return float(np.sum(w * r * r))

    x, ambiguous = _resolve_mirror(x, cost_fn, _plane(A), cfg, 1e-18)
    diff = x - A
    rho = np.linalg.norm(diff, axis=1)
    U = diff / np.where(rho > 0, rho, 1.0)[:, None]
    J = U[ii] - U[jj]
    return PositionEstimate(x, _covariance((J * w[:, None]).T @ J), math.sqrt(cost),
                            it, conv, ambiguous, len(starts))


def triangulate(anchor_poses: Sequence, aoas: Sequence[AnglePair], sigma: float = None,
                cfg: SolverConfig = SolverConfig()) -> PositionEstimate:
    """Least-squares intersection of bearing lines.

    Each anchor contributes the two equations ``(I - u u^T)(p - a) = 0``;
    weights are refined iteratively to ``1 / (sigma * range)^2``.
    """
    if len(anchor_poses) != len(aoas):
        raise ConfigurationError("one AOA per anchor is required")
    if len(anchor_poses) < 2:
        raise GeometryError("triangulation needs at least two anchors")
    pos = np.array([np.asarray(p, dtype=float) for p, _ in anchor_poses])
    dirs = np.array([np.asarray(R).T @ unit_direction(a) for (_, R), a in zip(anchor_poses, aoas)])
    projs = np.eye(3)[None, :, :] - dirs[:, :, None] * dirs[:, None, :]
    sig = 1.0 if sigma is None or sigma <= 0 else float(sigma)
    w = np.ones(len(pos))
    x = None
    it = 0
    converged = False
    for it in range(1, cfg.max_iterations + 1):
        M = np.einsum("k,kij->ij", w, projs)
        ev = np.linalg.eigvalsh(M)
        if ev[0] <= 1e-10 * ev[-1]:
            raise GeometryError("bearing lines are parallel")
        b = np.einsum("k,kij,kj->i", w, projs, pos)
        xn = np.linalg.solve(M, b)
        step = math.inf if x is None else float(np.linalg.norm(xn - x))
        x = xn
        rng = np.maximum(np.linalg.norm(x - pos, axis=1), 1e-9)
        w_new = 1.0 / (sig * rng) ** 2
        w_new /= w_new.max()
        if step < cfg.tolerance_m * max(1.0, float(np.abs(x).max())):
            converged = True
            break
        w = w_new
    rng = np.maximum(np.linalg.norm(x - pos, axis=1), 1e-9)
    info = np.einsum("k,kij->ij", 1.0 / (sig * rng) ** 2, projs)
    resid = np.einsum("kij,kj->ki", projs, x - pos)
    return PositionEstimate(x, _covariance(info), float(np.linalg.norm(resid)), it, converged)


def hybrid_range_aoa(anchor_position, rotation, d: float, aoa: AnglePair,
                     sigma_range: float = 0.0, sigma_azimuth: float = 0.0,
                     sigma_elevation: float = 0.0) -> PositionEstimate:
    """Closed-form fix from one anchor; covariance by first-order propagation."""
    p = position_from_range_aoa(anchor_position, d, aoa, rotation)
    theta, phi = aoa
    ct, st, cp, sp = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    Rt = np.asarray(rotation).T
    J = Rt @ np.column_stack((
        [ct * cp, st * cp, sp],
        [-d * st * cp, d * ct * cp, 0.0],
        [-d * ct * sp, -d * st * sp, d * cp],
    ))
    S = np.diag([sigma_range**2, sigma_azimuth**2, sigma_elevation**2])
    cov = J @ S @ J.T
    return PositionEstimate(p, 0.5 * (cov + cov.T), 0.0, 0, True)
