"""Reference NumPy implementation of the hot kernels.

Mirrors ``_ext.pyx`` step for step; used when the compiled module is not
available or ``GASLOC_PURE_PYTHON=1`` is set.
"""

import math

import numpy as np


def _solve3(N, g):
    """Solve N x = g for a symmetric 3x3 N; None if not positive definite."""
    try:
        L = np.linalg.cholesky(N)
    except np.linalg.LinAlgError:
        return None
    y = np.linalg.solve(L, g)
    return np.linalg.solve(L.T, y)


def _damped_solve(N, g):
    step = _solve3(N, g)
    if step is None:
        lam = 1e-10 * max(np.trace(N), 1e-300)
        step = _solve3(N + lam * np.eye(3), g)
    return step


def _gn(residual_jac, cost_fn, x0, max_iter, tol, max_halvings):
    x = np.array(x0, dtype=float)
    cost = cost_fn(x)
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        N, g = residual_jac(x)
        delta = _damped_solve(N, -g)
        if delta is None or not np.all(np.isfinite(delta)):
            break
        dn = math.sqrt(float(delta @ delta))
        step = 1.0
        accepted = False
        for _ in range(max_halvings + 1):
            xn = x + step * delta
            cn = cost_fn(xn)
            if cn <= cost:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # stalled: converged if the step or its predicted decrease is at rounding level
            pred = -float(g @ delta)
            converged = (dn <= max(tol, 1e-10 * (1.0 + math.sqrt(float(x @ x))))
                         or pred <= 1e-10 * cost)
            break
        x, cost = xn, cn
        if step * dn < tol:
            converged = True
            break
    return x, float(cost), it, converged


def solve_range(anchors, ranges, weights, x0, max_iter=100, tol=1e-9, max_halvings=20):
    """Weighted NLS on ``|x - a_i| - d_i``; returns (x, cost, iterations, converged)."""
    A = np.asarray(anchors, dtype=float)
    d = np.asarray(ranges, dtype=float)
    w = np.asarray(weights, dtype=float)

    def cost_fn(x):
        r = np.linalg.norm(x - A, axis=1) - d
        return float(np.sum(w * r * r))

    def residual_jac(x):
        diff = x - A
        rho = np.linalg.norm(diff, axis=1)
        safe = np.where(rho > 1e-12, rho, 1.0)
        U = np.where((rho > 1e-12)[:, None], diff / safe[:, None], 0.0)
        r = rho - d
        return (U * w[:, None]).T @ U, U.T @ (w * r)

    return _gn(residual_jac, cost_fn, x0, max_iter, tol, max_halvings)


def solve_tdoa(anchors, idx_i, idx_j, diffs, weights, x0, max_iter=100, tol=1e-9,
               max_halvings=20):
    """Weighted NLS on ``|x - a_i| - |x - a_j| - d_ij``."""
    A = np.asarray(anchors, dtype=float)
    ii = np.asarray(idx_i, dtype=np.intp)
    jj = np.asarray(idx_j, dtype=np.intp)
    d = np.asarray(diffs, dtype=float)
    w = np.asarray(weights, dtype=float)

    def cost_fn(x):
        rho = np.linalg.norm(x - A, axis=1)
        r = rho[ii] - rho[jj] - d
        return float(np.sum(w * r * r))

    def residual_jac(x):
        diff = x - A
        rho = np.linalg.norm(diff, axis=1)
        safe = np.where(rho > 1e-12, rho, 1.0)
        U = np.where((rho > 1e-12)[:, None], diff / safe[:, None], 0.0)
        Jr = U[ii] - U[jj]
        r = rho[ii] - rho[jj] - d
        return (Jr * w[:, None]).T @ Jr, Jr.T @ (w * r)

    return _gn(residual_jac, cost_fn, x0, max_iter, tol, max_halvings)


def dop_batch(anchors, points, tdoa=False, ref=0, rcond=1e-12):
    """(gdop, hdop, vdop, ok) arrays for each point; NaN where not ``ok``."""
    A = np.asarray(anchors, dtype=float)
    P = np.atleast_2d(np.asarray(points, dtype=float))
    n = P.shape[0]
    out = np.full((n, 3), np.nan)
    ok = np.zeros(n, dtype=bool)
    for k in range(n):
        diff = A - P[k]
        rho = np.linalg.norm(diff, axis=1)
        if np.any(rho == 0.0):
            continue
        U = diff / rho[:, None]
        if tdoa:
            U = np.delete(U - U[ref], ref, axis=0)
        N = U.T @ U
        ev = np.linalg.eigvalsh(N)
        if U.shape[0] < 3 or ev[0] <= rcond * ev[-1]:
            continue
        Q = np.linalg.inv(N)
        out[k] = (math.sqrt(Q[0, 0] + Q[1, 1] + Q[2, 2]), math.sqrt(Q[0, 0] + Q[1, 1]),
                  math.sqrt(Q[2, 2]))
        ok[k] = True
    return out[:, 0], out[:, 1], out[:, 2], ok
