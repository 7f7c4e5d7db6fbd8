"""Ground, aerial (UAV) and LEO anchor models."""

from .orbit import (
    Constellation,
    OrbitElements,
    elevation_of,
    generate_constellation,
    geodetic_to_ecef,
    propagate_orbit,
)
from .satlink import doppler_frequency, ionospheric_delay, pseudorange_rate
from .tle import TleRecord, build_tle, checksum, format_tle, parse_tle, read_tle_file
from .trajectory import (
    PlacementError,
    Trajectory,
    placement_error_bounds,
    realize_placement,
    trajectory_position,
)

__all__ = [
    "Constellation", "OrbitElements", "PlacementError", "TleRecord", "Trajectory",
    "build_tle", "checksum", "doppler_frequency", "elevation_of", "format_tle",
    "generate_constellation", "geodetic_to_ecef", "ionospheric_delay", "parse_tle",
    "placement_error_bounds", "propagate_orbit", "pseudorange_rate", "read_tle_file",
    "realize_placement", "trajectory_position",
]
