"""Unit-suffixed scenario keys.

Every physical quantity in a scenario file carries its unit in the key name,
e.g. ``altitude_m: 550`` or ``altitude_km: 0.55``. ``split_key`` separates the
base name from a recognised suffix; ``convert`` scales to SI.
"""

from __future__ import annotations

import math

# suffix -> (dimension, factor to SI)
UNITS = {
    "m": ("length", 1.0),
    "km": ("length", 1.0e3),
    "s": ("time", 1.0),
    "ms": ("time", 1.0e-3),
    "us": ("time", 1.0e-6),
    "ns": ("time", 1.0e-9),
    "hz": ("frequency", 1.0),
    "khz": ("frequency", 1.0e3),
    "mhz": ("frequency", 1.0e6),
    "ghz": ("frequency", 1.0e9),
    "rad": ("angle", 1.0),
    "deg": ("angle", math.pi / 180.0),
    "dbm": ("power_dbm", 1.0),
    "db": ("level_db", 1.0),
    "w": ("power", 1.0),
    "j": ("energy", 1.0),
    "mps": ("speed", 1.0),
    "kmph": ("speed", 1.0 / 3.6),
    "j_per_m": ("energy_per_length", 1.0),
    "per_rad": ("per_angle", 1.0),
    "per_deg": ("per_angle", 180.0 / math.pi),
    "el_per_m2": ("column_density", 1.0),
    "tecu": ("column_density", 1.0e16),
}

# longest first so "j_per_m" wins over "m"
_SUFFIXES = sorted(UNITS, key=len, reverse=True)


def split_key(key: str):
    """``(base, suffix)``; suffix is None when the key carries no unit."""
    for suf in _SUFFIXES:
        tail = "_" + suf
        if key.endswith(tail) and len(key) > len(tail):
            return key[: -len(tail)], suf
    return key, None


def convert(value, suffix: str):
    factor = UNITS[suffix][1]
    if isinstance(value, (list, tuple)):
        return [convert(v, suffix) for v in value]
    return float(value) * factor
