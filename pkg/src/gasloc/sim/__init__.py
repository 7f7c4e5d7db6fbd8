"""Scenario ingestion, Monte Carlo execution, reproduction pipelines and CLI."""

from .montecarlo import RunReport, run_monte_carlo, splitmix64, trial_rng, trial_seed
from .pipelines import altitude_sweep, altitude_sweep_errors, doppler_profile, gdop_map, pass_geometry
from .scenario import Scenario, load_scenario, parse_scenario

__all__ = [
    "RunReport", "Scenario", "altitude_sweep", "altitude_sweep_errors", "doppler_profile",
    "gdop_map", "load_scenario", "parse_scenario", "pass_geometry", "run_monte_carlo",
    "splitmix64", "trial_rng", "trial_seed",
]
