import math

import numpy as np
import pytest

from _helpers import DOPPLER_USER, doppler_tracks, random_anchor_set, random_pose
from gasloc.constants import SPEED_OF_LIGHT
from gasloc.errors import ConfigurationError, DomainError, GeometryError, ObservabilityError
from gasloc.estimators import (
    SatTrack,
    SolverConfig,
    TrackState,
    aoa_model,
    cv_process_noise,
    doppler_batch_ls,
    hybrid_range_aoa,
    kf_predict,
    kf_update,
    mlat_range,
    mlat_tdoa,
    nees,
    position_model,
    pseudorange_rate_model,
    range_model,
    tdoa_from_toas,
    tdoa_measurements,
    triangulate,
)
from gasloc.geometry import AnglePair, direct_distance, local_aoa
from gasloc.metrics import crlb_range

# ---------------------------------------------------------------- range MLAT


def test_mlat_range_noiseless_random():
    rng = np.random.default_rng(0)
    for _ in range(100):
        A = random_anchor_set(rng, int(rng.integers(4, 9)))
        x = rng.uniform(-400, 400, 3)
        est = mlat_range(A, np.linalg.norm(A - x, axis=1))
        assert np.linalg.norm(est.position - x) < 1e-6
        assert est.iterations <= SolverConfig().max_iterations


def test_mlat_range_underdetermined():
    A = np.array([[0, 0, 0], [100, 0, 0], [0, 100, 0.0]])
    with pytest.raises(GeometryError):
        mlat_range(A, [1, 1, 1])
    with pytest.raises(ConfigurationError):
        mlat_range(np.vstack([A, [0, 0, 50]]), [1, 1, 1])


def test_mlat_range_coplanar_mirror():
    A = np.array([[0, 0, 0], [300, 0, 0], [0, 300, 0], [300, 300, 0], [150, -80, 0.0]])
    x = np.array([120.0, 90.0, 60.0])
    d = np.linalg.norm(A - x, axis=1)
    # grid oracle: both mirror images are global minima
    for cand in (x, x * [1, 1, -1]):
        assert np.sum((np.linalg.norm(A - cand, axis=1) - d) ** 2) < 1e-18
    up = mlat_range(A, d, cfg=SolverConfig(multistart=8, prefer_upper=True))
    assert up.ambiguous
    np.testing.assert_allclose(up.position, x, atol=1e-6)
    for seed in range(10):
        est = mlat_range(A, d, cfg=SolverConfig(multistart=8, seed=seed))
        assert est.ambiguous
        assert np.linalg.norm(np.abs(est.position) - np.abs(x)) < 1e-6


def test_mlat_range_translation_invariant():
    rng = np.random.default_rng(2)
    A = random_anchor_set(rng, 6)
    x = rng.uniform(-300, 300, 3)
    d = np.linalg.norm(A - x, axis=1) + rng.normal(0, 1.0, 6)
    shift = np.array([1234.5, -987.0, 321.0])
    a = mlat_range(A, d, cfg=SolverConfig(multistart=1), initial_guess=x)
    b = mlat_range(A + shift, d, cfg=SolverConfig(multistart=1), initial_guess=x + shift)
    np.testing.assert_allclose(b.position - shift, a.position, atol=1e-9)


def test_mlat_range_covariance_psd():
    rng = np.random.default_rng(3)
    A = random_anchor_set(rng, 7)
    x = rng.uniform(-300, 300, 3)
    est = mlat_range(A, np.linalg.norm(A - x, axis=1), sigma=2.0)
    np.testing.assert_allclose(est.covariance, est.covariance.T)
    assert np.linalg.eigvalsh(est.covariance).min() > 0
    np.testing.assert_allclose(est.covariance, crlb_range(A, x, 2.0), rtol=1e-6)


def test_bad_sigma_rejected():
    A = random_anchor_set(np.random.default_rng(1), 5)
    with pytest.raises(DomainError):
        mlat_range(A, np.ones(5) * 100, sigma=0.0)


# ---------------------------------------------------------------- TDOA


def test_mlat_tdoa_noiseless_random():
    rng = np.random.default_rng(10)
    for _ in range(100):
        A = random_anchor_set(rng, 5)
        x = rng.uniform(-400, 400, 3)
        est = mlat_tdoa(A, tdoa_measurements(A, x))
        assert np.linalg.norm(est.position - x) < 1e-6


def test_tdoa_clock_offset_cancels():
    rng = np.random.default_rng(11)
    A = random_anchor_set(rng, 6)
    x = rng.uniform(-300, 300, 3)
    toa = np.linalg.norm(A - x, axis=1) / SPEED_OF_LIGHT + rng.normal(0, 3e-9, 6)
    base = mlat_tdoa(A, [(i, j, d * SPEED_OF_LIGHT) for i, j, d in tdoa_from_toas(toa)])
    shifted = mlat_tdoa(A, [(i, j, d * SPEED_OF_LIGHT) for i, j, d in tdoa_from_toas(toa + 2.5e-6)])
    np.testing.assert_allclose(shifted.position, base.position, atol=1e-6)


def test_tdoa_all_pairs_and_graph():
    A = random_anchor_set(np.random.default_rng(12), 5)
    x = np.array([10.0, 20.0, 30.0])
    est = mlat_tdoa(A, tdoa_measurements(A, x, all_pairs=True))
    assert np.linalg.norm(est.position - x) < 1e-6
    with pytest.raises(GeometryError):
        mlat_tdoa(A, [(1, 0, 5.0), (2, 0, 3.0)])
    with pytest.raises(ConfigurationError):
        mlat_tdoa(A, [(1, 1, 5.0), (2, 0, 3.0), (3, 0, 1.0)])


# ---------------------------------------------------------------- triangulation


def test_triangulate_noiseless_random():
    rng = np.random.default_rng(20)
    for _ in range(100):
        poses = [random_pose(rng) for _ in range(2)]
        x = rng.uniform(-400, 400, 3)
        aoas = [local_aoa(p, x, R) for p, R in poses]
        est = triangulate(poses, aoas)
        assert np.linalg.norm(est.position - x) < 1e-6


def test_triangulate_parallel_bearings():
    poses = [(np.zeros(3), np.eye(3)), (np.array([0, 10.0, 0]), np.eye(3))]
    with pytest.raises(GeometryError):
        triangulate(poses, [AnglePair(0, 0), AnglePair(0, 0)])
    with pytest.raises(GeometryError):
        triangulate(poses[:1], [AnglePair(0, 0)])


def test_triangulate_frame_invariance():
    rng = np.random.default_rng(21)
    x = np.array([50.0, -20.0, 35.0])
    pos = [np.array([0.0, 0, 0]), np.array([100.0, 0, 10]), np.array([0, 120.0, 5])]
    noise = rng.normal(0, 0.01, (3, 2))
    results = []
    for _ in range(2):
        poses = [(p, random_pose(rng)[1]) for p in pos]
        aoas = []
        for (p, R), n in zip(poses, noise):
            # perturb in the global frame so both runs see the same physical bearings
            g = local_aoa(p, x, np.eye(3))
            u = np.array([math.cos(g[0] + n[0]) * math.cos(g[1] + n[1]),
                          math.sin(g[0] + n[0]) * math.cos(g[1] + n[1]), math.sin(g[1] + n[1])])
            aoas.append(local_aoa(p, p + u, R))
        results.append(triangulate(poses, aoas).position)
    np.testing.assert_allclose(results[0], results[1], atol=1e-9)


def test_triangulate_error_linear_in_distance():
    sigma = math.radians(1.0)
    dirs = np.array([[1.0, 0, 0.2], [-0.5, 0.8, 0.1], [-0.5, -0.8, 0.3]])
    ratios = []
    for scale in (100.0, 400.0, 1600.0):
        rng = np.random.default_rng(22)
        poses = [(scale * d, np.eye(3)) for d in dirs]
        x = np.zeros(3)
        err = []
        for _ in range(1000):
            aoas = [AnglePair(*(np.array(local_aoa(p, x, R)) + rng.normal(0, sigma, 2)))
                    for p, R in poses]
            err.append(np.sum((triangulate(poses, aoas, sigma).position - x) ** 2))
        rmse = math.sqrt(np.mean(err))
        pred = math.sqrt(np.trace(triangulate(poses, [local_aoa(p, x, R) for p, R in poses],
                                              sigma).covariance))
        ratios.append(rmse / scale)
        assert rmse == pytest.approx(pred, rel=0.2)
    assert max(ratios) / min(ratios) < 1.2


# ---------------------------------------------------------------- hybrid


def test_hybrid_examples():
    rng = np.random.default_rng(30)
    for _ in range(100):
        p, R = random_pose(rng)
        x = rng.uniform(-400, 400, 3)
        est = hybrid_range_aoa(p, R, direct_distance(p, x), local_aoa(p, x, R))
        assert np.linalg.norm(est.position - x) < 1e-6
    with pytest.raises(DomainError):
        hybrid_range_aoa(np.zeros(3), np.eye(3), 0.0, AnglePair(0, 0))


def test_hybrid_covariance():
    s = 0.01
    for d in (10.0, 100.0, 1000.0):
        est = hybrid_range_aoa(np.zeros(3), np.eye(3), d, AnglePair(0.7, 0.0), 0.0, s, 0.0)
        assert np.trace(est.covariance) == pytest.approx(s * s * d * d, rel=1e-12)
    est = hybrid_range_aoa(np.zeros(3), np.eye(3), 50.0, AnglePair(0.3, 0.2), 1.5, 0.0, 0.0)
    w = np.linalg.eigvalsh(est.covariance)
    assert w[-1] == pytest.approx(2.25) and abs(w[0]) < 1e-12 and abs(w[1]) < 1e-12


def test_hybrid_jacobian_matches_finite_difference():
    from gasloc.geometry import Attitude, position_from_range_aoa, rotation_from_attitude

    R = rotation_from_attitude(Attitude(0.2, -0.4, 1.1))
    a, d, th, ph = np.array([5.0, -3.0, 20.0]), 80.0, 0.6, -0.3
    sig = (0.5, 0.02, 0.03)
    cov = hybrid_range_aoa(a, R, d, AnglePair(th, ph), *sig).covariance
    h = 1e-6
    f = lambda v: position_from_range_aoa(a, v[0], AnglePair(v[1], v[2]), R)
    v0 = np.array([d, th, ph])
    J = np.column_stack([(f(v0 + h * e) - f(v0 - h * e)) / (2 * h) for e in np.eye(3)])
    np.testing.assert_allclose(cov, J @ np.diag(np.square(sig)) @ J.T, rtol=1e-6, atol=1e-10)


# ---------------------------------------------------------------- Doppler


def test_doppler_noiseless_recovery():
    tracks = doppler_tracks()
    est = doppler_batch_ls(tracks)
    assert np.linalg.norm(est.position - DOPPLER_USER) < 1.0
    assert est.clock_drift_mps == pytest.approx(SPEED_OF_LIGHT * 3e-8, rel=1e-6)


def test_doppler_common_sat_drift_absorbed():
    a = doppler_batch_ls(doppler_tracks(sat_drifts=(0.0,) * 4))
    b = doppler_batch_ls(doppler_tracks(sat_drifts=(0.0,) * 4, user_drift=3e-8 - 1e-8))
    shifted = [SatTrack(t.positions, t.velocities, t.rates, t.clock_drift) for t in
               doppler_tracks(sat_drifts=(1e-8,) * 4)]
    c = doppler_batch_ls([SatTrack(t.positions, t.velocities, t.rates, 0.0) for t in shifted])
    np.testing.assert_allclose(c.position, a.position, atol=1e-3)
    assert c.clock_drift_mps == pytest.approx(b.clock_drift_mps, rel=1e-6)


def test_doppler_underdetermined():
    t = doppler_tracks()[:3]
    single = [SatTrack(x.positions[:1], x.velocities[:1], x.rates[:1], x.clock_drift) for x in t]
    with pytest.raises(ObservabilityError):
        doppler_batch_ls(single)


# ---------------------------------------------------------------- Kalman


def _state(x, P=None):
    x = np.asarray(x, dtype=float)
    return TrackState(x, np.eye(x.size) if P is None else np.asarray(P, dtype=float))


def test_predict_examples():
    s = kf_predict(_state([1, 2, 3, 0, 0, 0]), 1.0)
    np.testing.assert_array_equal(s.x[:3], [1, 2, 3])
    s = kf_predict(_state([0, 0, 0, 1, 0, 0]), 2.0)
    np.testing.assert_allclose(s.x[:3], [2, 0, 0])
    s0 = _state(np.zeros(6))
    s1 = kf_predict(s0, 0.5, q=0.3)
    assert np.trace(s1.P) >= np.trace(s0.P)
    with pytest.raises(DomainError):
        kf_predict(s0, 0.0)
    with pytest.raises(ConfigurationError):
        kf_predict(s0, 1.0, F=np.eye(4))


def test_process_noise_blocks():
    Q = cv_process_noise(2.0, 0.5, 1)
    np.testing.assert_allclose(Q, 0.5 * np.array([[8 / 3, 2], [2, 2]]))


def test_update_examples():
    s = _state(np.arange(6.0), 10 * np.eye(6))
    z = np.array([5.0, -1, 2, 0.5, 0.5, 0.5])
    post = kf_update(s, z, np.eye(6), 1e-12 * np.eye(6))
    np.testing.assert_allclose(post.x, z, atol=1e-9)
    s = TrackState(np.array([0.0]), np.array([[4.0]]))
    post = kf_update(s, [2.0], [[1.0]], [[4.0]])
    assert post.x[0] == pytest.approx(1.0) and post.P[0, 0] == pytest.approx(2.0)
    with pytest.raises(ConfigurationError):
        kf_update(s, [1.0, 2.0], [[1.0]], [[1.0]])


def _chi2_band(dof, p=0.95):
    # Wilson-Hilferty normal approximation to the chi-square quantiles
    z = 1.959963984540054 if p == 0.95 else None
    q = lambda zz: dof * (1 - 2 / (9 * dof) + zz * math.sqrt(2 / (9 * dof))) ** 3
    return q(-z), q(z)


def _scalar_track(rng, steps, F=np.array([[1.0]]), Q=np.array([[0.2]]), R=np.array([[1.5]])):
    x_true = rng.normal(0, 1.0, 1)
    s = TrackState(np.array([0.0]), np.array([[1.0]]))
    out = []
    for _ in range(steps):
        x_true = x_true + rng.normal(0, math.sqrt(Q[0, 0]), 1)
        s = kf_predict(s, 1.0, F, Q)
        s = kf_update(s, x_true + rng.normal(0, math.sqrt(R[0, 0]), 1), [[1.0]], R)
        out.append(nees(s, x_true))
    return out


def test_nees_consistency_scalar():
    # independent tracks: the summed final NEES is chi-square with 1000 dof
    rng = np.random.default_rng(40)
    total = sum(_scalar_track(rng, 25)[-1] for _ in range(1000))
    lo, hi = _chi2_band(1000)
    assert lo <= total <= hi
    # one long track: errors are correlated in time, so only a loose check on the mean
    long = _scalar_track(rng, 1000)
    assert 0.8 < np.mean(long) < 1.2


def _fd_jacobian(h, x, eps=1e-4):
    cols = []
    for e in np.eye(x.size):
        cols.append((h(x + eps * e)[0] - h(x - eps * e)[0]) / (2 * eps))
    return np.column_stack(cols)


@pytest.mark.parametrize("model", [
    range_model([10.0, -20.0, 5.0]),
    aoa_model([10.0, -20.0, 5.0], np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1.0]])),
    pseudorange_rate_model([7e6, 1e5, 2e5], [100.0, 7500.0, -300.0], 2.0),
])
def test_jacobians_match_finite_differences(model):
    x = np.array([200.0, 150.0, 80.0, 1.0, -2.0, 0.5])
    _, J = model(x)
    Jfd = _fd_jacobian(model, x)
    np.testing.assert_allclose(J, Jfd, rtol=1e-6, atol=1e-6 * np.abs(J).max())


def test_ekf_range_tracking_converges():
    rng = np.random.default_rng(41)
    anchors = [np.array(a, dtype=float) for a in ([0, 0, 0], [500, 0, 0], [0, 500, 0], [0, 0, 300])]
    x_true = np.array([100.0, 200.0, 50.0, 3.0, -1.0, 0.0])
    s = TrackState(np.array([150.0, 150.0, 100.0, 0, 0, 0]), np.diag([1e4] * 3 + [25.0] * 3))
    for _ in range(60):
        x_true = x_true + np.concatenate((x_true[3:], np.zeros(3)))
        s = kf_predict(s, 1.0, q=1e-3)
        for a in anchors:
            z = np.linalg.norm(x_true[:3] - a) + rng.normal(0, 1.0)
            s = kf_update(s, [z], range_model(a), [[1.0]])
    assert np.linalg.norm(s.x[:3] - x_true[:3]) < 3.0
    assert np.linalg.norm(s.x[3:] - x_true[3:]) < 0.5


def test_position_model_shape():
    H = position_model()
    assert H.shape == (3, 6) and np.array_equal(H[:, :3], np.eye(3))
