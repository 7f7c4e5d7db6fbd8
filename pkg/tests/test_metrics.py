import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gasloc.errors import DomainError, GeometryError
from gasloc.geometry import Attitude, rotation_from_attitude
from gasloc.metrics import (
    crlb_range,
    empirical_cdf,
    gdop,
    position_error,
    rmse,
)

TETRA = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
OCTA = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float)


def test_position_error_examples():
    e = position_error((1, 2, 3), (1, 2, 3))
    assert (e.ex, e.ey, e.ez, e.error_3d) == (0, 0, 0, 0)
    e = position_error((0, 0, 0), (3, -4, 0))
    assert (e.ex, e.ey, e.ez, e.error_3d) == (3, 4, 0, 5)
    f = position_error((10, 10, 10), (13, 6, 10))
    assert f.error_3d == e.error_3d


def test_rmse_examples():
    assert rmse([2.5] * 7) == 2.5
    assert rmse([3.0, 4.0]) == pytest.approx(math.sqrt(12.5))
    with pytest.raises(DomainError):
        rmse([])


@given(st.lists(st.one_of(st.just(0.0), st.floats(1e-100, 1e6)), min_size=1, max_size=50))
def test_rmse_at_least_mean(vals):
    assert rmse(vals) >= np.mean(vals) * (1 - 1e-12)


def test_cdf_examples():
    c = empirical_cdf([4.2])
    assert list(c.values) == [4.2] and list(c.probabilities) == [1.0]
    c = empirical_cdf([3, 1, 4, 2])
    assert c(2) == 0.5 and c(0.5) == 0.0 and c(10) == 1.0
    c = empirical_cdf(range(1, 11))
    assert c.percentile(0.9) == 9
    assert c.percentile(0.91) == 10
    with pytest.raises(DomainError):
        empirical_cdf([])


@given(st.lists(st.floats(0, 100), min_size=1, max_size=40), st.floats(0.01, 1), st.floats(0.01, 1))
def test_cdf_monotone(vals, q1, q2):
    c = empirical_cdf(vals)
    assert np.all(np.diff(c.values) >= 0)
    assert np.all(np.diff(c.probabilities) > 0) and c.probabilities[-1] == 1.0
    lo, hi = sorted((q1, q2))
    assert c.percentile(lo) <= c.percentile(hi)


def test_gdop_tetrahedron_oracle():
    d = gdop(TETRA, np.zeros(3))
    U = -TETRA / np.linalg.norm(TETRA, axis=1)[:, None]
    Q = np.linalg.inv(U.T @ U)
    assert d.gdop == pytest.approx(math.sqrt(np.trace(Q)))
    assert d.gdop == pytest.approx(1.5)  # Q = (3/4) I
    assert d.hdop == pytest.approx(math.sqrt(1.5))
    assert d.vdop == pytest.approx(math.sqrt(0.75))


def test_gdop_coplanar_vertical_worse():
    A = np.array([[x, y, 0.0] for x in (-1e3, 0, 1e3) for y in (-1e3, 0, 1e3)])
    d = gdop(A, (100.0, -50.0, 20.0))
    assert d.vdop > 5 * d.hdop
    t = gdop(A, (100.0, -50.0, 1e4), "tdoa", 4)
    assert t.vdop > 3 * t.hdop


def test_gdop_scale_invariant():
    A = np.array([[0, 0, 0], [100, 0, 5], [0, 100, 10], [60, 70, 80], [-30, 20, 40.0]])
    t = np.array([20.0, 30.0, 15.0])
    for kind in ("range", "tdoa"):
        a, b = gdop(A, t, kind), gdop(A * 37.5, t * 37.5, kind)
        np.testing.assert_allclose(a, b, rtol=1e-10)


def test_gdop_degenerate():
    with pytest.raises(GeometryError):
        gdop(np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]]), (5, 5, 5))
    with pytest.raises(GeometryError):
        gdop(TETRA, TETRA[0])


def test_crlb_octahedron_closed_form():
    sigma = 2.0
    C = crlb_range(OCTA * 50, np.zeros(3), sigma)
    np.testing.assert_allclose(C, 0.5 * sigma**2 * np.eye(3), atol=1e-12)
    assert np.trace(C) == pytest.approx(1.5 * sigma**2)


def test_crlb_collapses_with_perfect_range():
    C = crlb_range(OCTA * 50, np.zeros(3), [0.0, 1, 1, 1, 1, 1])
    assert C[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert C[1, 1] > 0 and C[2, 2] > 0


def test_crlb_equals_sigma2_gdop2():
    rng = np.random.default_rng(4)
    A = rng.uniform(-100, 100, (7, 3))
    t = rng.uniform(-20, 20, 3)
    assert np.trace(crlb_range(A, t, 1.7)) == pytest.approx(1.7**2 * gdop(A, t).gdop ** 2, rel=1e-10)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_rotation_invariance(p, r, y):
    R = rotation_from_attitude(Attitude(p, r, y))
    A = np.array([[0, 0, 0], [100, 0, 5], [0, 100, 10], [60, 70, 80], [-30, 20, 40.0]])
    t = np.array([20.0, 30.0, 15.0])
    C1 = crlb_range(A, t, 1.0)
    C2 = crlb_range(A @ R.T, R @ t, 1.0)
    np.testing.assert_allclose(C2, R @ C1 @ R.T, atol=1e-9)
    assert gdop(A @ R.T, R @ t).gdop == pytest.approx(gdop(A, t).gdop, rel=1e-9)


def test_crlb_singular():
    with pytest.raises(GeometryError):
        crlb_range(np.array([[0, 0, 0], [1, 0, 0.0]]), (5, 5, 5), 1.0)
