# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same contracts as ``gasloc.kernels._pure``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, cos, acos, M_PI

cnp.import_array()


cdef bint _chol_solve3(double[:, ::1] N, double* g, double* out) noexcept nogil:
    cdef double l00, l10, l11, l20, l21, l22, y0, y1, y2, t
    t = N[0, 0]
    if t <= 0.0:
        return False
    l00 = sqrt(t)
    l10 = N[1, 0] / l00
    l20 = N[2, 0] / l00
    t = N[1, 1] - l10 * l10
    if t <= 0.0:
        return False
    l11 = sqrt(t)
    l21 = (N[2, 1] - l20 * l10) / l11
    t = N[2, 2] - l20 * l20 - l21 * l21
    if t <= 0.0:
        return False
    l22 = sqrt(t)
    y0 = g[0] / l00
    y1 = (g[1] - l10 * y0) / l11
    y2 = (g[2] - l20 * y0 - l21 * y1) / l22
    out[2] = y2 / l22
    out[1] = (y1 - l21 * out[2]) / l11
    out[0] = (y0 - l10 * out[1] - l20 * out[2]) / l00
    return True


cdef bint _damped_solve(double[:, ::1] N, double* g, double* out) noexcept nogil:
    cdef double lam
    cdef int k
    if _chol_solve3(N, g, out):
        return True
    lam = 1e-10 * (N[0, 0] + N[1, 1] + N[2, 2])
    if lam < 1e-300:
        lam = 1e-300
    for k in range(3):
        N[k, k] += lam
    return _chol_solve3(N, g, out)


cdef double _range_cost(double[:, ::1] A, double[::1] d, double[::1] w,
                        double x0, double x1, double x2) noexcept nogil:
    cdef Py_ssize_t i
    cdef double c = 0.0, dx, dy, dz, r
    for i in range(A.shape[0]):
        dx = x0 - A[i, 0]
        dy = x1 - A[i, 1]
        dz = x2 - A[i, 2]
        r = sqrt(dx * dx + dy * dy + dz * dz) - d[i]
        c += w[i] * r * r
    return c


cdef void _range_normal(double[:, ::1] A, double[::1] d, double[::1] w, double* x,
                        double[:, ::1] N, double* g) noexcept nogil:
    cdef Py_ssize_t i
    cdef int a, b
    cdef double u[3]
    cdef double rho, r
    for a in range(3):
        g[a] = 0.0
        for b in range(3):
            N[a, b] = 0.0
    for i in range(A.shape[0]):
        u[0] = x[0] - A[i, 0]
        u[1] = x[1] - A[i, 1]
        u[2] = x[2] - A[i, 2]
        rho = sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])
        r = rho - d[i]
        if rho > 1e-12:
            u[0] /= rho
            u[1] /= rho
            u[2] /= rho
        else:
            u[0] = 0.0
            u[1] = 0.0
            u[2] = 0.0
        for a in range(3):
            g[a] += u[a] * w[i] * r
            for b in range(3):
                N[a, b] += w[i] * u[a] * u[b]


def solve_range(anchors, ranges, weights, x0, int max_iter=100, double tol=1e-9,
                int max_halvings=20):
    cdef double[:, ::1] A = np.ascontiguousarray(anchors, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(ranges, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[:, ::1] N = np.zeros((3, 3))
    cdef double x[3]
    cdef double xn[3]
    cdef double g[3]
    cdef double ng[3]
    cdef double delta[3]
    cdef double cost, cn, step, dn, xnorm, pred
    cdef int it = 0, h, k
    cdef bint converged = False, accepted
    x0a = np.asarray(x0, dtype=np.float64)
    for k in range(3):
        x[k] = x0a[k]
    cost = _range_cost(A, d, w, x[0], x[1], x[2])
    with nogil:
        while it < max_iter:
            it += 1
            _range_normal(A, d, w, x, N, g)
            for k in range(3):
                ng[k] = -g[k]
            if not _damped_solve(N, ng, delta):
                break
            dn = sqrt(delta[0] * delta[0] + delta[1] * delta[1] + delta[2] * delta[2])
            if dn != dn:
                break
            step = 1.0
            accepted = False
            for h in range(max_halvings + 1):
                for k in range(3):
                    xn[k] = x[k] + step * delta[k]
                cn = _range_cost(A, d, w, xn[0], xn[1], xn[2])
                if cn <= cost:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                # stalled: converged if the step or its predicted decrease is at rounding level
                xnorm = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
                pred = -(g[0] * delta[0] + g[1] * delta[1] + g[2] * delta[2])
                converged = dn <= max(tol, 1e-10 * (1.0 + xnorm)) or pred <= 1e-10 * cost
                break
            for k in range(3):
                x[k] = xn[k]
            cost = cn
            if step * dn < tol:
                converged = True
                break
    return np.array([x[0], x[1], x[2]]), cost, it, bool(converged)


cdef double _tdoa_cost(double[:, ::1] A, Py_ssize_t[::1] ii, Py_ssize_t[::1] jj,
                       double[::1] d, double[::1] w, double* x, double[::1] rho) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double c = 0.0, dx, dy, dz, r
    for i in range(A.shape[0]):
        dx = x[0] - A[i, 0]
        dy = x[1] - A[i, 1]
        dz = x[2] - A[i, 2]
        rho[i] = sqrt(dx * dx + dy * dy + dz * dz)
    for k in range(d.shape[0]):
        r = rho[ii[k]] - rho[jj[k]] - d[k]
        c += w[k] * r * r
    return c


def solve_tdoa(anchors, idx_i, idx_j, diffs, weights, x0, int max_iter=100,
               double tol=1e-9, int max_halvings=20):
    cdef double[:, ::1] A = np.ascontiguousarray(anchors, dtype=np.float64)
    cdef Py_ssize_t[::1] ii = np.ascontiguousarray(idx_i, dtype=np.intp)
    cdef Py_ssize_t[::1] jj = np.ascontiguousarray(idx_j, dtype=np.intp)
    cdef double[::1] d = np.ascontiguousarray(diffs, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0], m = d.shape[0], i, k
    cdef double[:, ::1] U = np.zeros((n, 3))
    cdef double[::1] rho = np.zeros(n)
    cdef double[:, ::1] N = np.zeros((3, 3))
    cdef double x[3]
    cdef double xn[3]
    cdef double g[3]
    cdef double ng[3]
    cdef double delta[3]
    cdef double jr[3]
    cdef double cost, cn, step, dn, r, xnorm, pred
    cdef int it = 0, h, a, b
    cdef bint converged = False, accepted
    x0a = np.asarray(x0, dtype=np.float64)
    for a in range(3):
        x[a] = x0a[a]
    cost = _tdoa_cost(A, ii, jj, d, w, x, rho)
    with nogil:
        while it < max_iter:
            it += 1
            for i in range(n):
                for a in range(3):
                    U[i, a] = x[a] - A[i, a]
                rho[i] = sqrt(U[i, 0] * U[i, 0] + U[i, 1] * U[i, 1] + U[i, 2] * U[i, 2])
                for a in range(3):
                    U[i, a] = U[i, a] / rho[i] if rho[i] > 1e-12 else 0.0
            for a in range(3):
                g[a] = 0.0
                for b in range(3):
                    N[a, b] = 0.0
            for k in range(m):
                r = rho[ii[k]] - rho[jj[k]] - d[k]
                for a in range(3):
                    jr[a] = U[ii[k], a] - U[jj[k], a]
                for a in range(3):
                    g[a] += jr[a] * w[k] * r
                    for b in range(3):
                        N[a, b] += w[k] * jr[a] * jr[b]
            for a in range(3):
                ng[a] = -g[a]
            if not _damped_solve(N, ng, delta):
                break
            dn = sqrt(delta[0] * delta[0] + delta[1] * delta[1] + delta[2] * delta[2])
            if dn != dn:
                break
            step = 1.0
            accepted = False
            for h in range(max_halvings + 1):
                for a in range(3):
                    xn[a] = x[a] + step * delta[a]
                cn = _tdoa_cost(A, ii, jj, d, w, xn, rho)
                if cn <= cost:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                # stalled: converged if the step or its predicted decrease is at rounding level
                xnorm = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
                pred = -(g[0] * delta[0] + g[1] * delta[1] + g[2] * delta[2])
                converged = dn <= max(tol, 1e-10 * (1.0 + xnorm)) or pred <= 1e-10 * cost
                break
            for a in range(3):
                x[a] = xn[a]
            cost = cn
            if step * dn < tol:
                converged = True
                break
    return np.array([x[0], x[1], x[2]]), cost, it, bool(converged)


cdef void _sym3_eig_minmax(double[:, ::1] M, double* lo, double* hi) noexcept nogil:
    # closed-form eigenvalues of a symmetric 3x3 matrix
    cdef double p1, q, p2, p, r, phi, e1, e3, b00, b11, b22, b01, b02, b12, det
    p1 = M[0, 1] * M[0, 1] + M[0, 2] * M[0, 2] + M[1, 2] * M[1, 2]
    q = (M[0, 0] + M[1, 1] + M[2, 2]) / 3.0
    if p1 == 0.0:
        lo[0] = min(M[0, 0], min(M[1, 1], M[2, 2]))
        hi[0] = max(M[0, 0], max(M[1, 1], M[2, 2]))
        return
    p2 = (M[0, 0] - q) ** 2 + (M[1, 1] - q) ** 2 + (M[2, 2] - q) ** 2 + 2.0 * p1
    p = sqrt(p2 / 6.0)
    b00 = (M[0, 0] - q) / p
    b11 = (M[1, 1] - q) / p
    b22 = (M[2, 2] - q) / p
    b01 = M[0, 1] / p
    b02 = M[0, 2] / p
    b12 = M[1, 2] / p
    det = (b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02)
           + b02 * (b01 * b12 - b11 * b02))
    r = det / 2.0
    if r <= -1.0:
        phi = M_PI / 3.0
    elif r >= 1.0:
        phi = 0.0
    else:
        phi = acos(r) / 3.0
    e1 = q + 2.0 * p * cos(phi)
    e3 = q + 2.0 * p * cos(phi + 2.0 * M_PI / 3.0)
    lo[0] = e3
    hi[0] = e1


def dop_batch(anchors, points, bint tdoa=False, Py_ssize_t ref=0, double rcond=1e-12):
    cdef double[:, ::1] A = np.ascontiguousarray(anchors, dtype=np.float64)
    cdef double[:, ::1] P = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0], npts = P.shape[0], k, i, a, b, rows
    out_np = np.full((npts, 3), np.nan)
    ok_np = np.zeros(npts, dtype=np.uint8)
    cdef double[:, ::1] out = out_np
    cdef unsigned char[::1] ok = ok_np
    cdef double[:, ::1] U = np.zeros((n, 3))
    cdef double[:, ::1] N = np.zeros((3, 3))
    cdef double rho, lo, hi, det, q00, q11, q22
    cdef bint degenerate
    rows = n - 1 if tdoa else n
    with nogil:
        for k in range(npts):
            degenerate = False
            for i in range(n):
                for a in range(3):
                    U[i, a] = A[i, a] - P[k, a]
                rho = sqrt(U[i, 0] * U[i, 0] + U[i, 1] * U[i, 1] + U[i, 2] * U[i, 2])
                if rho == 0.0:
                    degenerate = True
                    break
                for a in range(3):
                    U[i, a] /= rho
            if degenerate or rows < 3:
                continue
            for a in range(3):
                for b in range(3):
                    N[a, b] = 0.0
            for i in range(n):
                if tdoa and i == ref:
                    continue
                for a in range(3):
                    for b in range(3):
                        if tdoa:
                            N[a, b] += (U[i, a] - U[ref, a]) * (U[i, b] - U[ref, b])
                        else:
                            N[a, b] += U[i, a] * U[i, b]
            _sym3_eig_minmax(N, &lo, &hi)
            if lo <= rcond * hi:
                continue
            det = (N[0, 0] * (N[1, 1] * N[2, 2] - N[1, 2] * N[2, 1])
                   - N[0, 1] * (N[1, 0] * N[2, 2] - N[1, 2] * N[2, 0])
                   + N[0, 2] * (N[1, 0] * N[2, 1] - N[1, 1] * N[2, 0]))
            q00 = (N[1, 1] * N[2, 2] - N[1, 2] * N[2, 1]) / det
            q11 = (N[0, 0] * N[2, 2] - N[0, 2] * N[2, 0]) / det
            q22 = (N[0, 0] * N[1, 1] - N[0, 1] * N[1, 0]) / det
            out[k, 0] = sqrt(q00 + q11 + q22)
            out[k, 1] = sqrt(q00 + q11)
            out[k, 2] = sqrt(q22)
            ok[k] = 1
    return out_np[:, 0], out_np[:, 1], out_np[:, 2], ok_np.astype(bool)
