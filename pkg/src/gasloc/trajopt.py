"""Aerial-anchor placement and trajectory optimization.

A candidate trajectory is a sequence of hover waypoints joined by straight
transit legs flown at the cruise speed. Hover waypoints act as virtual
anchors; their ranging noise variance scales as ``1 / dwell``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .anchors.trajectory import Trajectory
from .errors import ConfigurationError, DomainError, InfeasibleError, KinematicsError
from .radio import RadioConfig, ShadowingParams, rss_range_sigma

OBJECTIVES = ("crlb_trace", "projected_ranging", "mc_rmse")
CONSTRAINT_ORDER = ("bounds", "waypoint_count", "min_dwell", "max_speed", "heading",
                    "energy", "coverage")
_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class EnergyModel:
    """Linear propulsion surrogate: hover power (W) plus transit cost (J/m)."""

    hover_power_w: float = 0.0
    move_cost_j_per_m: float = 0.0


@dataclass(frozen=True)
class TrajOptProblem:
    targets: np.ndarray
    bounds_lo: np.ndarray
    bounds_hi: np.ndarray
    n_waypoints: int = 1
    total_dwell_s: float = 60.0
    objective: str = "crlb_trace"
    measurement: str = "toa"  # "toa" | "rss"
    sigma_range_m: float = 1.0  # toa ranging sigma for 1 s of dwell
    radio: RadioConfig | None = None
    shadowing: ShadowingParams | None = None
    target_weights: np.ndarray | None = None
    energy: EnergyModel = EnergyModel()
    energy_budget_j: float = math.inf
    cruise_speed_mps: float = 10.0
    max_speed_mps: float = math.inf
    max_heading_change_rad: float | None = None
    min_dwell_s: float = 0.0
    min_waypoints: int = 1
    max_waypoints: int | None = None
    coverage_radius_m: float | None = None
    mc_trials: int = 200
    mc_seed: int = 0

    def __post_init__(self):
        t = np.atleast_2d(np.asarray(self.targets, dtype=float))
        lo = np.asarray(self.bounds_lo, dtype=float)
        hi = np.asarray(self.bounds_hi, dtype=float)
        object.__setattr__(self, "targets", t)
        object.__setattr__(self, "bounds_lo", lo)
        object.__setattr__(self, "bounds_hi", hi)
        if t.shape[1] != 3 or t.shape[0] < 1:
            raise ConfigurationError("targets must be a non-empty (n, 3) array")
        if np.any(hi < lo):
            raise ConfigurationError("search bounds are empty")
        if self.n_waypoints < 1:
            raise ConfigurationError("need at least one waypoint")
        if self.objective not in OBJECTIVES:
            raise ConfigurationError(f"objective must be one of {OBJECTIVES}")
        if self.measurement not in ("toa", "rss"):
            raise ConfigurationError("measurement must be 'toa' or 'rss'")
        if self.measurement == "rss" and (self.radio is None or self.shadowing is None):
            raise ConfigurationError("rss objective needs radio and shadowing parameters")
        if min(self.total_dwell_s, self.min_dwell_s, self.cruise_speed_mps,
               self.energy_budget_j) < 0:
            raise ConfigurationError("thresholds must be non-negative")

    @property
    def weights(self) -> np.ndarray:
        if self.target_weights is None:
            return np.full(self.targets.shape[0], 1.0 / self.targets.shape[0])
        w = np.asarray(self.target_weights, dtype=float)
        return w / w.sum()


def build_trajectory(points, dwell, cruise_speed: float) -> Trajectory:
    """Hover at each point for its dwell, flying straight legs in between."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    T = np.atleast_1d(np.asarray(dwell, dtype=float))
    wps, durs = [], []
    for k in range(P.shape[0]):
        wps += [P[k], P[k]]
        durs.append(T[k])
        if k + 1 < P.shape[0]:
            leg = float(np.linalg.norm(P[k + 1] - P[k]))
            durs.append(leg / cruise_speed if cruise_speed > 0 else (0.0 if leg == 0 else math.inf))
    return Trajectory(np.array(wps), np.array(durs))


def _range_sigma(problem: TrajOptProblem, target, anchor) -> float:
    if problem.measurement == "toa":
        return problem.sigma_range_m
    d = float(np.linalg.norm(anchor - target))
    d = max(d, problem.radio.d0_m)
    elev = math.asin(min(1.0, max(0.0, (anchor[2] - target[2]) / d)))
    return rss_range_sigma(problem.radio, d, problem.shadowing.sigma(elev))


def _variances(problem, target, anchors, dwell) -> np.ndarray:
    return np.array([_range_sigma(problem, target, a) ** 2 / T for a, T in zip(anchors, dwell)])


def _crlb_trace(problem, anchors, dwell) -> float:
    total = 0.0
    for w, tgt in zip(problem.weights, problem.targets):
        diff = anchors - tgt
        rho = np.linalg.norm(diff, axis=1)
        if np.any(rho == 0):
            return math.inf
        U = diff / rho[:, None]
        var = _variances(problem, tgt, anchors, dwell)
        J = (U / var[:, None]).T @ U
        ev = np.linalg.eigvalsh(J)
        if ev[0] <= 1e-12 * ev[-1]:
            return math.inf
        total += w * float(np.trace(np.linalg.inv(J)))
    return total


def _projected_ranging(problem, anchors, dwell) -> float:
    """Mean variance of the horizontal range implied by each waypoint's ranging,
    fused across waypoints by inverse-variance weighting."""
    total = 0.0
    for w, tgt in zip(problem.weights, problem.targets):
        info = 0.0
        var = _variances(problem, tgt, anchors, dwell)
        for a, v in zip(anchors, var):
            r = math.hypot(a[0] - tgt[0], a[1] - tgt[1])
            if r <= 0:
                continue
            d = float(np.linalg.norm(a - tgt))
            info += 1.0 / (v * (d / r) ** 2)
        if info == 0.0:
            return math.inf
        total += w / info
    return total


def _mc_rmse(problem, anchors, dwell) -> float:
    from .estimators.snapshot import SolverConfig, mlat_range

    if anchors.shape[0] < 4:
        return math.inf
    rng = np.random.default_rng(problem.mc_seed)
    cfg = SolverConfig(multistart=2)
    total = 0.0
    for w, tgt in zip(problem.weights, problem.targets):
        sig = np.sqrt(_variances(problem, tgt, anchors, dwell))
        true_r = np.linalg.norm(anchors - tgt, axis=1)
        sq = 0.0
        for _ in range(problem.mc_trials):
            noisy = true_r + sig * rng.standard_normal(sig.shape[0])
            try:
                est = mlat_range(anchors, noisy, sig, cfg, initial_guess=tgt)
            except Exception:
                return math.inf
            sq += float(np.sum((est.position - tgt) ** 2))
        total += w * sq / problem.mc_trials
    return math.sqrt(total)


def trajectory_energy(problem: TrajOptProblem, traj: Trajectory) -> float:
    lengths = traj.segment_lengths
    hover = lengths <= 1e-9
    return float(problem.energy.move_cost_j_per_m * lengths.sum()
                 + problem.energy.hover_power_w * traj.durations[hover].sum())


def segment_speeds(traj: Trajectory) -> np.ndarray:
    lengths = traj.segment_lengths
    moving = lengths > 1e-9
    if np.any(moving & (traj.durations == 0)):
        raise KinematicsError("moving segment with zero duration")
    speeds = np.zeros_like(lengths)
    speeds[moving] = lengths[moving] / traj.durations[moving]
    return speeds


def _heading_changes(traj: Trajectory) -> np.ndarray:
    legs = np.diff(traj.waypoints, axis=0)
    legs = legs[np.linalg.norm(legs[:, :2], axis=1) > 1e-9]
    if legs.shape[0] < 2:
        return np.zeros(0)
    hdg = np.arctan2(legs[:, 1], legs[:, 0])
    return np.abs((np.diff(hdg) + math.pi) % (2.0 * math.pi) - math.pi)


def evaluate_trajectory(problem: TrajOptProblem, traj: Trajectory):
    """Return ``(objective, slacks)``; a slack < 0 means that constraint is violated."""
    lo, hi = problem.bounds_lo, problem.bounds_hi
    wp = traj.waypoints
    bound_slack = float(min(np.min(wp - lo), np.min(hi - wp)))
    if bound_slack < -1e-6:
        raise DomainError("trajectory leaves the search bounds")
    speeds = segment_speeds(traj)
    hovers = traj.hover_points()
    anchors = np.array([p for p, _ in hovers]) if hovers else np.zeros((0, 3))
    dwell = np.array([t for _, t in hovers])

    slacks = {"bounds": bound_slack}
    n = len(hovers)
    max_wp = problem.max_waypoints if problem.max_waypoints is not None else math.inf
    slacks["waypoint_count"] = float(min(n - problem.min_waypoints, max_wp - n))
    slacks["min_dwell"] = float(dwell.min() - problem.min_dwell_s) if n else -problem.min_dwell_s
    slacks["max_speed"] = float(problem.max_speed_mps - (speeds.max() if speeds.size else 0.0))
    if problem.max_heading_change_rad is not None:
        hc = _heading_changes(traj)
        slacks["heading"] = float(problem.max_heading_change_rad - (hc.max() if hc.size else 0.0))
    slacks["energy"] = float(problem.energy_budget_j - trajectory_energy(problem, traj))
    if problem.coverage_radius_m is not None:
        if n == 0:
            slacks["coverage"] = -math.inf
        else:
            h = np.linalg.norm(problem.targets[:, None, :2] - anchors[None, :, :2], axis=2)
            slacks["coverage"] = float(problem.coverage_radius_m - h.min(axis=1).max())

    if n == 0:
        return math.inf, slacks
    if problem.objective == "crlb_trace":
        obj = _crlb_trace(problem, anchors, dwell)
    elif problem.objective == "projected_ranging":
        obj = _projected_ranging(problem, anchors, dwell)
    else:
        obj = _mc_rmse(problem, anchors, dwell)
    return obj, slacks


def first_violation(slacks: dict) -> str | None:
    for name in CONSTRAINT_ORDER:
        if name in slacks and slacks[name] < -_FEAS_TOL:
            return name
    return None


@dataclass(frozen=True)
class SearchConfig:
    iterations: int = 3000
    chains: int = 2
    seed: int = 0
    cooling: float = 0.97
    steps_per_temperature: int = 20
    initial_temperature: float | None = None  # default: 10% of the starting objective
    step_fraction: float = 0.15  # waypoint proposal sigma as a fraction of the box size
    dwell_fraction: float = 0.1


@dataclass
class TrajOptResult:
    trajectory: Trajectory
    objective: float
    slacks: dict
    evaluations: int
    points: np.ndarray
    dwell: np.ndarray
    chain: int
    trace: list = field(default_factory=list)
    default_objective: float = math.inf


def default_trajectory(problem: TrajOptProblem):
    centre = 0.5 * (problem.bounds_lo + problem.bounds_hi)
    K = problem.n_waypoints
    return np.tile(centre, (K, 1)), np.full(K, problem.total_dwell_s / K)


def _feasible(slacks) -> bool:
    return first_violation(slacks) is None


def _run_chain(problem, cfg, chain, P0, T0, f0):
    rng = np.random.default_rng([cfg.seed, chain])
    lo, hi = problem.bounds_lo, problem.bounds_hi
    span = hi - lo
    K = P0.shape[0]
    P, T, f = P0.copy(), T0.copy(), f0
    best = (P.copy(), T.copy(), f)
    temp0 = cfg.initial_temperature
    if temp0 is None:
        temp0 = 0.1 * abs(f0) if math.isfinite(f0) and f0 != 0 else 1.0
    temp = temp0
    evals = 0
    trace = [f]
    for step in range(cfg.iterations):
        Pn, Tn = P.copy(), T.copy()
        shrink = max(math.sqrt(temp / temp0), 1e-3)
        if K > 1 and rng.random() < 0.25:
            i, j = rng.choice(K, size=2, replace=False)
            delta = cfg.dwell_fraction * problem.total_dwell_s * shrink * rng.standard_normal()
            Tn[i] -= delta
            Tn[j] += delta
            if Tn[i] < problem.min_dwell_s or Tn[j] < problem.min_dwell_s:
                continue
        else:
            i = int(rng.integers(K))
            Pn[i] = np.clip(Pn[i] + cfg.step_fraction * span * shrink * rng.standard_normal(3), lo, hi)
        traj = build_trajectory(Pn, Tn, problem.cruise_speed_mps)
        try:
            fn, slacks = evaluate_trajectory(problem, traj)
        except (KinematicsError, DomainError):
            continue
        evals += 1
        if not _feasible(slacks):
            continue
        if fn <= f or (math.isfinite(fn) and not math.isfinite(f)) or (
            math.isfinite(fn) and rng.random() < math.exp(-(fn - f) / max(temp, 1e-300))
        ):
            P, T, f = Pn, Tn, fn
            if f < best[2]:
                best = (P.copy(), T.copy(), f)
        if (step + 1) % cfg.steps_per_temperature == 0:
            temp *= cfg.cooling
            trace.append(best[2])
    trace.append(best[2])
    return best, evals, trace


def optimize_trajectory(problem: TrajOptProblem, cfg: SearchConfig = SearchConfig()) -> TrajOptResult:
    """Simulated annealing over waypoint positions and dwell splits."""
    P0, T0 = default_trajectory(problem)
    traj0 = build_trajectory(P0, T0, problem.cruise_speed_mps)
    f0, slacks0 = evaluate_trajectory(problem, traj0)
    violated = first_violation(slacks0)
    if violated is not None:
        raise InfeasibleError(violated, f"default trajectory violates '{violated}' "
                                        f"(slack {slacks0[violated]:.6g})")
    winner = None
    evals = 1
    for chain in range(cfg.chains):
        (P, T, f), n, trace = _run_chain(problem, cfg, chain, P0, T0, f0)
        evals += n
        if winner is None or f < winner[2]:
            winner = (P, T, f, chain, trace)
    P, T, f, chain, trace = winner
    traj = build_trajectory(P, T, problem.cruise_speed_mps)
    obj, slacks = evaluate_trajectory(problem, traj)
    return TrajOptResult(traj, obj, slacks, evals, P, T, chain, trace, f0)
