"""Two-line element sets: fixed-column parsing, checksums and formatting.

Column numbers in comments are 1-based, as in the format definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..constants import EARTH_MU, EARTH_RADIUS, SECONDS_PER_DAY
from ..errors import TleChecksumError, TleFormatError, TleParseError
from .orbit import OrbitElements

LINE_LENGTH = 69

# (name, first column, last column) -- inclusive, 1-based
_LINE2_FIELDS = (
    ("inclination_deg", 9, 16, "{:8.4f}"),
    ("raan_deg", 18, 25, "{:8.4f}"),
    ("eccentricity", 27, 33, None),
    ("arg_perigee_deg", 35, 42, "{:8.4f}"),
    ("mean_anomaly_deg", 44, 51, "{:8.4f}"),
    ("mean_motion_rev_day", 53, 63, "{:11.8f}"),
)


_DIGIT = "0123456789"


def checksum(line: str) -> int:
    """Sum of digits in columns 1-68, each '-' counting as 1, modulo 10."""
    body = line[:68]
    total = body.count("-")
    for k in range(1, 10):
        total += k * body.count(_DIGIT[k])
    return total % 10


@dataclass(frozen=True)
class TleRecord:
    catalog_number: int
    epoch_year: int
    epoch_day: float
    inclination_deg: float
    raan_deg: float
    eccentricity: float
    arg_perigee_deg: float
    mean_anomaly_deg: float
    mean_motion_rev_day: float
    line1: str
    line2: str

    def to_orbit_elements(self) -> OrbitElements:
        """Circular-orbit approximation; eccentricity is discarded."""
        n = 2.0 * math.pi * self.mean_motion_rev_day / SECONDS_PER_DAY
        a = (EARTH_MU / n**2) ** (1.0 / 3.0)
        return OrbitElements(
            altitude_m=a - EARTH_RADIUS,
            inclination=math.radians(self.inclination_deg),
            raan=math.radians(self.raan_deg),
            phase=math.radians((self.arg_perigee_deg + self.mean_anomaly_deg) % 360.0),
        )


def _field(line: str, lineno: int, first: int, last: int, conv):
    text = line[first - 1:last]
    try:
        return conv(text)
    except ValueError:
        raise TleParseError(lineno, (first, last), text) from None


def _check_line(line: str, lineno: int) -> None:
    if len(line) != LINE_LENGTH:
        raise TleFormatError(f"line {lineno} has {len(line)} characters, expected {LINE_LENGTH}")
    if not line[68].isdigit():
        raise TleParseError(lineno, (69, 69), line[68])
    # checksum before the line-number check so a corrupted '1'/'2' reads as corruption
    expected = checksum(line)
    found = int(line[68])
    if expected != found:
        raise TleChecksumError(lineno, expected, found)
    if line[0] != str(lineno):
        raise TleFormatError(f"line {lineno} must start with '{lineno}', found {line[0]!r}")


def parse_tle(line1: str, line2: str) -> TleRecord:
    line1 = line1.rstrip("\r\n")
    line2 = line2.rstrip("\r\n")
    _check_line(line1, 1)
    _check_line(line2, 2)
    catnum = _field(line1, 1, 3, 7, int)
    yy = _field(line1, 1, 19, 20, int)
    day = _field(line1, 1, 21, 32, float)
    values = {}
    for name, first, last, _ in _LINE2_FIELDS:
        if name == "eccentricity":
            text = line2[first - 1:last]
            if not text.strip().isdigit():
                raise TleParseError(2, (first, last), text)
            values[name] = float("0." + text.strip())
        else:
            values[name] = _field(line2, 2, first, last, float)
    return TleRecord(
        catalog_number=catnum,
        epoch_year=2000 + yy if yy < 57 else 1900 + yy,
        epoch_day=day,
        line1=line1,
        line2=line2,
        **values,
    )


def _with_checksum(line: str) -> str:
    return line[:68] + str(checksum(line))


def _splice(line: str, first: int, last: int, text: str) -> str:
    if len(text) != last - first + 1:
        raise TleFormatError(f"value {text!r} does not fit columns {first}-{last}")
    return line[:first - 1] + text + line[last:]


def format_tle(rec: TleRecord) -> tuple[str, str]:
    """Render the record's fields into its stored lines and refresh checksums.

    Columns the record does not model (drag terms, element number, ...) are
    copied from the stored lines.
    """
    l1 = rec.line1.ljust(LINE_LENGTH)
    l1 = _splice(l1, 3, 7, f"{rec.catalog_number:05d}")
    l1 = _splice(l1, 19, 20, f"{rec.epoch_year % 100:02d}")
    l1 = _splice(l1, 21, 32, f"{rec.epoch_day:012.8f}")
    l2 = rec.line2.ljust(LINE_LENGTH)
    l2 = _splice(l2, 3, 7, f"{rec.catalog_number:05d}")
    for name, first, last, fmt in _LINE2_FIELDS:
        value = getattr(rec, name)
        if name == "eccentricity":
            text = f"{round(value * 1e7):07d}"
        else:
            text = fmt.format(value)
        l2 = _splice(l2, first, last, text)
    return _with_checksum(l1), _with_checksum(l2)


def build_tle(catalog_number: int, epoch_year: int, epoch_day: float,
              inclination_deg: float, raan_deg: float, eccentricity: float,
              arg_perigee_deg: float, mean_anomaly_deg: float,
              mean_motion_rev_day: float, classification: str = "U",
              intl_designator: str = "00001A  ", rev_number: int = 1,
              element_number: int = 999) -> tuple[str, str]:
    """Compose a fresh pair of lines with zero drag terms."""
    l1 = (f"1 {catalog_number:05d}{classification} {intl_designator:<8s} "
          f"{epoch_year % 100:02d}{epoch_day:012.8f} "
          f" .00000000  00000-0  00000-0 0 {element_number:4d}0")
    l2 = (f"2 {catalog_number:05d} {inclination_deg:8.4f} {raan_deg:8.4f} "
          f"{round(eccentricity * 1e7):07d} {arg_perigee_deg:8.4f} "
          f"{mean_anomaly_deg:8.4f} {mean_motion_rev_day:11.8f}{rev_number:5d}0")
    assert len(l1) == LINE_LENGTH and len(l2) == LINE_LENGTH, (len(l1), len(l2))
    return _with_checksum(l1), _with_checksum(l2)


def read_tle_file(path) -> list[TleRecord]:
    """Read 2- or 3-line (named) TLE sets."""
    with open(path, encoding="ascii") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh if ln.strip()]
    records = []
    i = 0
    while i < len(lines):
        if lines[i].startswith("1 ") and i + 1 < len(lines):
            records.append(parse_tle(lines[i], lines[i + 1]))
            i += 2
        else:
            i += 1  # title line
    return records
