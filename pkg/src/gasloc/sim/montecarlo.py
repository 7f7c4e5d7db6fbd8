"""Monte Carlo driver with order-independent, parallel-safe trial seeding.

Trial ``i`` draws from ``PCG64(splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15))``
(64-bit wrap-around arithmetic). Each trial is a pure function of the scenario,
the master seed and its index, so worker count and scheduling cannot change
any result.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import GaslocError, ScenarioError
from ..estimators.snapshot import SolverConfig, hybrid_range_aoa, mlat_range, mlat_tdoa, triangulate
from ..geometry import AnglePair, Attitude, direct_distance, local_aoa, rotation_from_attitude
from ..metrics import CdfCurve, ErrorSample, empirical_cdf, rmse
from ..radio import rss_range_sigma, rss_to_distance, sample_rss
from ..anchors.trajectory import realize_placement
from .scenario import Scenario

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
RNG_DESCRIPTION = "PCG64(splitmix64(seed + (trial + 1) * 0x9E3779B97F4A7C15 mod 2^64))"


def splitmix64(x: int) -> int:
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(master_seed: int, trial: int) -> int:
    return splitmix64((master_seed + (trial + 1) * GOLDEN) & MASK64)


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed(master_seed, trial)))


@dataclass(frozen=True)
class TrialResult:
    trial: int
    status: str  # "OK" or an error code
    target: tuple
    estimate: tuple  # NaNs on failure

    @property
    def ok(self) -> bool:
        return self.status == "OK"

    @property
    def sample(self) -> ErrorSample:
        e = np.abs(np.subtract(self.estimate, self.target))
        return ErrorSample(self.trial, float(e[0]), float(e[1]), float(e[2]))


def _target(s: Scenario, trial: int, rng: np.random.Generator) -> np.ndarray:
    if s.targets:
        return np.array(s.targets[trial % len(s.targets)], dtype=float)
    pr = s.prior
    u = rng.random(3)
    rad = pr.radius * math.sqrt(u[0])
    ang = 2.0 * math.pi * u[1]
    z = pr.altitude[0] + (pr.altitude[1] - pr.altitude[0]) * u[2]
    return np.array([pr.center[0] + rad * math.cos(ang), pr.center[1] + rad * math.sin(ang), z])


def _anchor_sets(s: Scenario, rng: np.random.Generator):
    """(believed positions, actual positions, rotations, placement errors) per virtual anchor."""
    believed, actual, rots, errs = [], [], [], []
    for a in s.anchors:
        R = rotation_from_attitude(Attitude(*a.attitude))
        for p in a.nominal_points():
            believed.append(p)
            actual.append(realize_placement(p, a.placement, rng))
            rots.append(R)
            errs.append(a.placement.eps_d)
    return np.array(believed, dtype=float), np.array(actual), rots, np.array(errs)


def _ranges(s: Scenario, actual, target, eps_d, rng):
    plan = s.measurement
    true = np.linalg.norm(actual - target, axis=1)
    n = true.shape[0]
    noise = rng.standard_normal(n)
    u_nlos = rng.random(n)
    u_d = rng.random(n)
    meas = true + plan.sigma_m * noise
    meas = meas + np.where(u_nlos < plan.nlos_probability, plan.nlos_bias_m, 0.0)
    return meas + eps_d * (2.0 * u_d - 1.0)


def _sigma(value: float):
    return value if value > 0 else None


def _solver(s: Scenario, trial: int) -> SolverConfig:
    e = s.estimator
    return SolverConfig(max_iterations=e.max_iterations, tolerance_m=e.tolerance_m,
                        multistart=e.multistart, seed=trial_seed(s.seed, trial) & 0xFFFFFFFF,
                        prefer_upper=e.prefer_upper)


def run_trial(s: Scenario, trial: int) -> TrialResult:
    rng = trial_rng(s.seed, trial)
    target = _target(s, trial, rng)
    believed, actual, rots, eps_d = _anchor_sets(s, rng)
    plan = s.measurement
    cfg = _solver(s, trial)
    try:
        if plan.kind == "toa":
            d = _ranges(s, actual, target, eps_d, rng)
            est = mlat_range(believed, d, _sigma(plan.sigma_m), cfg)
        elif plan.kind == "tdoa":
            d = _ranges(s, actual, target, eps_d, rng)
            ref = plan.reference_anchor
            meas = [(i, ref, float(d[i] - d[ref])) for i in range(len(d)) if i != ref]
            est = mlat_tdoa(believed, meas, _sigma(plan.sigma_m), cfg)
        elif plan.kind == "rss":
            d_hat, sig = [], []
            for a in actual:
                dist = max(direct_distance(a, target), s.radio.d0_m)
                elev = math.asin(min(1.0, abs(a[2] - target[2]) / dist))
                rss = sample_rss(s.radio, s.shadowing, dist, elev, rng)
                dh = rss_to_distance(s.radio, rss.value_dbm)
                d_hat.append(dh)
                sig.append(rss_range_sigma(s.radio, dh, rss.sigma_db))
            sig = np.array(sig)
            est = mlat_range(believed, np.array(d_hat), sig if np.all(sig > 0) else None, cfg)
        elif plan.kind == "aoa":
            aoas = [_noisy_aoa(actual[k], target, rots[k], plan.sigma_rad, rng)
                    for k in range(len(actual))]
            est = triangulate(list(zip(believed, rots)), aoas, _sigma(plan.sigma_rad), cfg)
        else:  # hybrid: first anchor only
            d = _ranges(s, actual[:1], target, eps_d[:1], rng)[0]
            aoa = _noisy_aoa(actual[0], target, rots[0], plan.sigma_rad, rng)
            est = hybrid_range_aoa(believed[0], rots[0], d, aoa, plan.sigma_m,
                                   plan.sigma_rad, plan.sigma_rad)
        return TrialResult(trial, "OK", tuple(target), tuple(float(v) for v in est.position))
    except GaslocError as exc:
        return TrialResult(trial, exc.code, tuple(target), (math.nan,) * 3)


def _noisy_aoa(anchor, target, R, sigma, rng) -> AnglePair:
    a = local_aoa(anchor, target, R)
    n = rng.standard_normal(2)
    return AnglePair(a.azimuth + sigma * n[0], a.elevation + sigma * n[1])


def _run_chunk(args):
    s, indices = args
    return [run_trial(s, i) for i in indices]


@dataclass
class RunReport:
    scenario_name: str
    seed: int
    config_hash: str
    config: dict
    results: list  # TrialResult sorted by trial
    wall_time_s: float = 0.0
    rng: str = RNG_DESCRIPTION

    @property
    def samples(self) -> list[ErrorSample]:
        return [r.sample for r in self.results if r.ok]

    @property
    def failures(self) -> int:
        return sum(1 for r in self.results if not r.ok)

    def aggregates(self) -> dict:
        samples = self.samples
        out = {"trials": len(self.results), "failures": self.failures}
        if not samples:
            return out
        cdf3 = empirical_cdf(samples)
        out["rmse_3d"] = rmse(samples)
        out["rmse_horizontal"] = rmse([x.horizontal for x in samples])
        out["rmse_vertical"] = rmse([x.ez for x in samples])
        for q in (50, 67, 90, 95):
            out[f"p{q}_3d"] = cdf3.percentile(q / 100.0)
        return out

    def axis_cdfs(self) -> dict[str, CdfCurve]:
        samples = self.samples
        if not samples:
            return {}
        return {
            "x": empirical_cdf([x.ex for x in samples]),
            "y": empirical_cdf([x.ey for x in samples]),
            "z": empirical_cdf([x.ez for x in samples]),
            "horizontal": empirical_cdf([x.horizontal for x in samples]),
            "3d": empirical_cdf(samples),
        }


def run_monte_carlo(s: Scenario, workers: int = 1) -> RunReport:
    """Run every trial; geometry failures are recorded per trial, never raised."""
    if s.measurement is None or not s.anchors:
        raise ScenarioError(f"{s.name}: simulate needs anchors, targets and a measurement plan")
    t0 = time.perf_counter()
    idx = list(range(s.trials))
    if workers <= 1 or s.trials < 2:
        results = [run_trial(s, i) for i in idx]
    else:
        # a few strided chunks per worker; order is restored below
        n_chunks = min(s.trials, workers * 4)
        chunks = [idx[k::n_chunks] for k in range(n_chunks)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_run_chunk, [(s, c) for c in chunks]) for r in part]
    results.sort(key=lambda r: r.trial)
    return RunReport(s.name, s.seed, s.config_hash(), s.resolved(), results,
                     time.perf_counter() - t0)
