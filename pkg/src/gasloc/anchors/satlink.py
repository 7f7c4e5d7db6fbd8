"""Space-to-ground link observables: Doppler, ionosphere, pseudorange rate.

Doppler is positive while the satellite approaches. The pseudorange rate
``sat_vel . (user - sat) / |user - sat|`` carries the same sign, so
``z = c * f_D / f_c`` plus clock terms.
"""

from __future__ import annotations

import numpy as np

from ..constants import IONO_K, SPEED_OF_LIGHT
from ..errors import DomainError
from ..radio import PseudorangeRate


def closing_speed(sat_pos, sat_vel, user_pos):
    los = np.asarray(user_pos, dtype=float) - np.asarray(sat_pos, dtype=float)
    rng = np.linalg.norm(los, axis=-1)
    if np.any(rng == 0):
        raise DomainError("satellite and user positions coincide")
    out = np.sum(np.asarray(sat_vel, dtype=float) * los, axis=-1) / rng
    return float(out) if np.ndim(out) == 0 else out


def doppler_frequency(sat_pos, sat_vel, user_pos, fc: float):
    return closing_speed(sat_pos, sat_vel, user_pos) / SPEED_OF_LIGHT * fc


def ionospheric_delay(fc: float, stec: float) -> tuple[float, float]:
    """(group delay, phase advance) in metres for a slant TEC in electrons/m^2."""
    if not fc > 0 or stec < 0:
        raise DomainError("need fc > 0 and stec >= 0")
    group = IONO_K * stec / fc**2
    return group, -group


def pseudorange_rate(sat_pos, sat_vel, user_pos, user_drift: float = 0.0,
                     sat_drift: float = 0.0, sigma: float = 0.0,
                     rng: np.random.Generator | None = None) -> PseudorangeRate:
    z = closing_speed(sat_pos, sat_vel, user_pos) + SPEED_OF_LIGHT * (user_drift - sat_drift)
    if sigma > 0:
        z += sigma * rng.standard_normal()
    return PseudorangeRate(z, sigma)
