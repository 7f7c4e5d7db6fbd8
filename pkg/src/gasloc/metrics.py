"""Localization KPIs: per-trial error, RMSE, empirical CDF, DOP and range CRLB."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, GeometryError


@dataclass(frozen=True)
class ErrorSample:
    trial: int
    ex: float
    ey: float
    ez: float

    @property
    def error_3d(self) -> float:
        return math.sqrt(self.ex**2 + self.ey**2 + self.ez**2)

    @property
    def horizontal(self) -> float:
        return math.hypot(self.ex, self.ey)


def position_error(p_true, p_est, trial: int = 0) -> ErrorSample:
    d = np.abs(np.asarray(p_est, dtype=float) - np.asarray(p_true, dtype=float))
    return ErrorSample(trial, float(d[0]), float(d[1]), float(d[2]))


def _values(samples) -> np.ndarray:
    vals = np.array([s.error_3d if isinstance(s, ErrorSample) else float(s) for s in samples])
    if vals.size == 0:
        raise DomainError("no samples")
    return vals


def rmse(samples: Sequence) -> float:
    """Root mean square of 3D errors (accepts ErrorSamples or plain numbers)."""
    v = _values(samples)
    return math.sqrt(float(np.mean(v * v)))


@dataclass(frozen=True)
class CdfCurve:
    values: np.ndarray
    probabilities: np.ndarray

    def percentile(self, q: float) -> float:
        """Smallest value whose cumulative probability is >= q (q in (0, 1])."""
        if not 0.0 < q <= 1.0:
            raise DomainError("quantile must be in (0, 1]")
        # tolerate k/n rounding, e.g. 9/10 vs 0.9
        idx = int(np.searchsorted(self.probabilities, q - 1e-12, side="left"))
        return float(self.values[min(idx, len(self.values) - 1)])

    def __call__(self, x: float) -> float:
        """P(error <= x)."""
        k = int(np.searchsorted(self.values, x, side="right"))
        return 0.0 if k == 0 else float(self.probabilities[k - 1])


def empirical_cdf(samples: Sequence) -> CdfCurve:
    v = np.sort(_values(samples))
    n = v.size
    return CdfCurve(v, np.arange(1, n + 1) / n)


class Dop(NamedTuple):
    gdop: float
    hdop: float
    vdop: float


def design_matrix(anchors, target, kind: str = "range", ref: int = 0) -> np.ndarray:
    A = np.atleast_2d(np.asarray(anchors, dtype=float))
    diff = A - np.asarray(target, dtype=float)
    norms = np.linalg.norm(diff, axis=1)
    if np.any(norms == 0):
        raise GeometryError("target coincides with an anchor")
    U = diff / norms[:, None]
    if kind == "range":
        return U
    if kind == "tdoa":
        return np.delete(U - U[ref], ref, axis=0)
    raise DomainError(f"unknown DOP kind {kind!r}")


def _inverse_normal(G: np.ndarray, rcond: float = 1e-12) -> np.ndarray:
    if G.shape[0] < 3:
        raise GeometryError("fewer than three independent rows")
    N = G.T @ G
    s = np.linalg.svd(N, compute_uv=False)
    if s[-1] <= rcond * s[0]:
        raise GeometryError("rank-deficient geometry")
    return np.linalg.inv(N)


def gdop(anchors, target, kind: str = "range", ref: int = 0) -> Dop:
    Q = _inverse_normal(design_matrix(anchors, target, kind, ref))
    return Dop(math.sqrt(np.trace(Q)), math.sqrt(Q[0, 0] + Q[1, 1]), math.sqrt(Q[2, 2]))


def crlb_range(anchors, target, sigma) -> np.ndarray:
    """Inverse Fisher information for independent Gaussian range errors."""
    U = design_matrix(anchors, target, "range")
    sig = np.broadcast_to(np.asarray(sigma, dtype=float), (U.shape[0],))
    if np.any(sig < 0):
        raise DomainError("sigma must be non-negative")
    with np.errstate(divide="ignore"):
        w = 1.0 / sig**2
    if np.any(np.isinf(w)):
        # perfect ranges: bound is zero along those directions
        exact = U[np.isinf(w)]
        P = np.eye(3) - np.linalg.pinv(exact) @ exact
        rest = U[~np.isinf(w)]
        J = (rest * w[~np.isinf(w), None]).T @ rest
        Jp = P @ J @ P
        return np.linalg.pinv(Jp, rcond=1e-12, hermitian=True)
    J = (U * w[:, None]).T @ U
    s = np.linalg.svd(J, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise GeometryError("singular Fisher information")
    return np.linalg.inv(J)
