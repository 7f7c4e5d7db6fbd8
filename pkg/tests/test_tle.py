import math
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gasloc.anchors.tle import (
    build_tle,
    checksum,
    format_tle,
    parse_tle,
    read_tle_file,
)
from gasloc.errors import TleChecksumError, TleFormatError, TleParseError

ISS = Path(__file__).resolve().parents[1] / "scenarios" / "iss.tle"
L1 = "1 25544U 98067A   08264.51782528 -.00002182  00000-0 -11606-4 0  2927"
L2 = "2 25544  51.6416 247.4627 0006703 130.5360 325.0288 15.72125391563537"


def _oracle_checksum(line):
    return sum(int(c) if c.isdigit() else (1 if c == "-" else 0) for c in line[:68]) % 10


def test_checksum_matches_oracle():
    assert checksum(L1) == _oracle_checksum(L1) == 7
    assert checksum(L2) == _oracle_checksum(L2) == 7


def test_parse_iss():
    r = parse_tle(L1, L2)
    assert r.catalog_number == 25544
    assert (r.epoch_year, r.epoch_day) == (2008, 264.51782528)
    assert r.inclination_deg == 51.6416
    assert r.raan_deg == 247.4627
    assert r.eccentricity == pytest.approx(0.0006703)
    assert r.arg_perigee_deg == 130.5360
    assert r.mean_anomaly_deg == 325.0288
    assert r.mean_motion_rev_day == 15.72125391
    assert 300e3 < r.to_orbit_elements().altitude_m < 400e3


def test_round_trip_iss():
    assert format_tle(parse_tle(L1, L2)) == (L1, L2)


def test_read_file_with_title_line():
    recs = read_tle_file(ISS)
    assert len(recs) == 1 and recs[0].line1 == L1


def test_wrong_length():
    with pytest.raises(TleFormatError):
        parse_tle(L1[:68], L2)
    with pytest.raises(TleFormatError):
        parse_tle(L1, L2 + "0")


def test_wrong_line_number():
    with pytest.raises(TleFormatError):
        parse_tle(L2, L1)


def test_checksum_error_names_line():
    bad = L2[:10] + ("2" if L2[10] != "2" else "3") + L2[11:]
    with pytest.raises(TleChecksumError) as exc:
        parse_tle(L1, bad)
    assert exc.value.line_number == 2
    assert "line 2" in str(exc.value)


def test_parse_error_reports_columns():
    l2 = "2 25544  51.6416 247.4627 00a6703 130.5360 325.0288 15.72125391563537"
    l2 = l2[:68] + str(checksum(l2))
    with pytest.raises(TleParseError) as exc:
        parse_tle(L1, l2)
    assert exc.value.columns == (27, 33)


records = st.builds(
    build_tle,
    catalog_number=st.integers(1, 99999),
    epoch_year=st.integers(1957, 2056),
    epoch_day=st.integers(1, 366 * 10**8 - 1).map(lambda k: k / 1e8),
    inclination_deg=st.integers(0, 180 * 10**4).map(lambda k: k / 1e4),
    raan_deg=st.integers(0, 359_9999).map(lambda k: k / 1e4),
    eccentricity=st.integers(0, 9_999_999).map(lambda k: k / 1e7),
    arg_perigee_deg=st.integers(0, 359_9999).map(lambda k: k / 1e4),
    mean_anomaly_deg=st.integers(0, 359_9999).map(lambda k: k / 1e4),
    mean_motion_rev_day=st.integers(1 * 10**8, 17 * 10**8).map(lambda k: k / 1e8),
)


@given(records)
def test_generated_round_trip(lines):
    l1, l2 = lines
    assert len(l1) == len(l2) == 69
    rec = parse_tle(l1, l2)
    assert format_tle(rec) == (l1, l2)


@given(records, st.integers(0, 1), st.data())
def test_any_digit_flip_detected(lines, which, data):
    line = lines[which]
    digits = [i for i, c in enumerate(line) if c.isdigit()]
    i = data.draw(st.sampled_from(digits))
    new = data.draw(st.sampled_from([d for d in "0123456789" if d != line[i]]))
    bad = line[:i] + new + line[i + 1:]
    pair = (bad, lines[1]) if which == 0 else (lines[0], bad)
    with pytest.raises(TleChecksumError):
        parse_tle(*pair)


def test_orbit_altitude_from_mean_motion():
    l1, l2 = build_tle(1, 2024, 100.0, 53.0, 10.0, 0.0, 0.0, 0.0, 15.05)
    alt = parse_tle(l1, l2).to_orbit_elements().altitude_m
    n = 2 * math.pi * 15.05 / 86400
    assert alt == pytest.approx((3.986004418e14 / n**2) ** (1 / 3) - 6_371_000, rel=1e-12)
