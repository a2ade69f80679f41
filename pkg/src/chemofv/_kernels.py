"""Compiled inner loops for the time stepper.

The ``pcg_*`` kernels solve ``(I - dt*lap_h + dt*diag(c)) x = b`` on
interior cells with reflective boundaries by Jacobi-preconditioned conjugate
gradients, applying the operator matrix-free with exactly the stencil of
:func:`chemofv.grid.laplacian`.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def apply_1d(x, c, dt, h, out):
    n = x.shape[0]
    k = dt / (h * h)
    for i in range(n):
        acc = x[i] * (1.0 + dt * c[i])
        if i > 0:
            acc -= k * (x[i - 1] - x[i])
        if i < n - 1:
            acc -= k * (x[i + 1] - x[i])
        out[i] = acc


@numba.njit(cache=True)
def apply_2d(x, c, dt, hx, hy, out):
    nx, ny = x.shape
    kx = dt / (hx * hx)
    ky = dt / (hy * hy)
    for i in range(nx):
        for j in range(ny):
            xc = x[i, j]
            acc = xc * (1.0 + dt * c[i, j])
            if i > 0:
                acc -= kx * (x[i - 1, j] - xc)
            if i < nx - 1:
                acc -= kx * (x[i + 1, j] - xc)
            if j > 0:
                acc -= ky * (x[i, j - 1] - xc)
            if j < ny - 1:
                acc -= ky * (x[i, j + 1] - xc)
            out[i, j] = acc


@numba.njit(cache=True)
def _dot(a, b):
    s = 0.0
    fa = a.ravel()
    fb = b.ravel()
    for i in range(fa.shape[0]):
        s += fa[i] * fb[i]
    return s


@numba.njit(cache=True)
def pcg_1d(c, b, x0, dt, h, rtol, accept_rtol, maxiter):
    """Returns (x, iterations, relative residual, converged)."""
    n = b.shape[0]
    diag = np.empty(n)
    k = dt / (h * h)
    for i in range(n):
        diag[i] = 1.0 + dt * c[i] + k * ((i > 0) + (i < n - 1))
    x = x0.copy()
    r = np.empty(n)
    apply_1d(x, c, dt, h, r)
    for i in range(n):
        r[i] = b[i] - r[i]
    bnorm = np.sqrt(_dot(b, b))
    if bnorm == 0.0:
        return np.zeros(n), 0, 0.0, True
    z = r / diag
    p = z.copy()
    rz = _dot(r, z)
    ap = np.empty(n)
    res = np.sqrt(_dot(r, r)) / bnorm
    best = res
    stall = 0
    it = 0
    while res > rtol and it < maxiter:
        apply_1d(p, c, dt, h, ap)
        pap = _dot(p, ap)
        if pap <= 0.0:
            break
        alpha = rz / pap
        for i in range(n):
            x[i] += alpha * p[i]
            r[i] -= alpha * ap[i]
            z[i] = r[i] / diag[i]
        rz_new = _dot(r, z)
        beta = rz_new / rz
        rz = rz_new
        for i in range(n):
            p[i] = z[i] + beta * p[i]
        it += 1
        res = np.sqrt(_dot(r, r)) / bnorm
        if res < best:
            best = res
            stall = 0
        else:
            stall += 1
            if stall >= 25 and best <= accept_rtol:
                break
    return x, it, res, res <= accept_rtol


@numba.njit(cache=True)
def pcg_2d(c, b, x0, dt, hx, hy, rtol, accept_rtol, maxiter):
    nx, ny = b.shape
    kx = dt / (hx * hx)
    ky = dt / (hy * hy)
    diag = np.empty((nx, ny))
    for i in range(nx):
        for j in range(ny):
            diag[i, j] = (
                1.0
                + dt * c[i, j]
                + kx * ((i > 0) + (i < nx - 1))
                + ky * ((j > 0) + (j < ny - 1))
            )
    x = x0.copy()
    r = np.empty((nx, ny))
    apply_2d(x, c, dt, hx, hy, r)
    for i in range(nx):
        for j in range(ny):
            r[i, j] = b[i, j] - r[i, j]
    bnorm = np.sqrt(_dot(b, b))
    if bnorm == 0.0:
        return np.zeros((nx, ny)), 0, 0.0, True
    z = r / diag
    p = z.copy()
    rz = _dot(r, z)
    ap = np.empty((nx, ny))
    res = np.sqrt(_dot(r, r)) / bnorm
    best = res
    stall = 0
    it = 0
    while res > rtol and it < maxiter:
        apply_2d(p, c, dt, hx, hy, ap)
        pap = _dot(p, ap)
        if pap <= 0.0:
            break
        alpha = rz / pap
        for i in range(nx):
            for j in range(ny):
                x[i, j] += alpha * p[i, j]
                r[i, j] -= alpha * ap[i, j]
                z[i, j] = r[i, j] / diag[i, j]
        rz_new = _dot(r, z)
        beta = rz_new / rz
        rz = rz_new
        for i in range(nx):
            for j in range(ny):
                p[i, j] = z[i, j] + beta * p[i, j]
        it += 1
        res = np.sqrt(_dot(r, r)) / bnorm
        if res < best:
            best = res
            stall = 0
        else:
            stall += 1
            if stall >= 25 and best <= accept_rtol:
                break
    return x, it, res, res <= accept_rtol


# -- explicit density update ------------------------------------------------
#
# ``u``, ``phi``, ``us`` (= u S(u)) and ``v`` are ghosted arrays with current
# reflective ghosts. The face flux is
#     F = (phi_R - phi_L)/h - us_up (v_R - v_L)/h,
# us_up taken from the left/lower cell when v_R > v_L. Wall faces carry no
# flux. ``out`` receives interior values u + dt * div F.


@numba.njit(cache=True)
def flux_update_1d(u, phi, us, v, dt, h, out):
    n = u.shape[0] - 2
    inv = 1.0 / h
    left = 0.0  # flux through the wall
    for i in range(1, n + 1):
        if i == n:
            right = 0.0
        else:
            dv = v[i + 1] - v[i]
            up = us[i] if dv > 0 else us[i + 1]
            right = (phi[i + 1] - phi[i]) * inv - up * dv * inv
        out[i - 1] = u[i] + dt * inv * (right - left)
        left = right


@numba.njit(cache=True)
def flux_update_2d(u, phi, us, v, dt, hx, hy, out):
    nx = u.shape[0] - 2
    ny = u.shape[1] - 2
    ix = 1.0 / hx
    iy = 1.0 / hy
    for i in range(1, nx + 1):
        for j in range(1, ny + 1):
            acc = 0.0
            if i < nx:
                dv = v[i + 1, j] - v[i, j]
                up = us[i, j] if dv > 0 else us[i + 1, j]
                acc += ((phi[i + 1, j] - phi[i, j]) * ix - up * dv * ix) * ix
            if i > 1:
                dv = v[i, j] - v[i - 1, j]
                up = us[i - 1, j] if dv > 0 else us[i, j]
                acc -= ((phi[i, j] - phi[i - 1, j]) * ix - up * dv * ix) * ix
            if j < ny:
                dv = v[i, j + 1] - v[i, j]
                up = us[i, j] if dv > 0 else us[i, j + 1]
                acc += ((phi[i, j + 1] - phi[i, j]) * iy - up * dv * iy) * iy
            if j > 1:
                dv = v[i, j] - v[i, j - 1]
                up = us[i, j - 1] if dv > 0 else us[i, j]
                acc -= ((phi[i, j] - phi[i, j - 1]) * iy - up * dv * iy) * iy
            out[i - 1, j - 1] = u[i, j] + dt * acc


@numba.njit(cache=True)
def max_drift_1d(s, v, h):
    """max over interior faces of S(u_up) |dv| / h."""
    n = s.shape[0] - 2
    best = 0.0
    for i in range(1, n):
        dv = v[i + 1] - v[i]
        up = s[i] if dv > 0 else s[i + 1]
        a = up * abs(dv) / h
        if a > best:
            best = a
    return best


@numba.njit(cache=True)
def max_drift_2d(s, v, hx, hy):
    nx = s.shape[0] - 2
    ny = s.shape[1] - 2
    best = 0.0
    for i in range(1, nx + 1):
        for j in range(1, ny + 1):
            if i < nx:
                dv = v[i + 1, j] - v[i, j]
                up = s[i, j] if dv > 0 else s[i + 1, j]
                a = up * abs(dv) / hx
                if a > best:
                    best = a
            if j < ny:
                dv = v[i, j + 1] - v[i, j]
                up = s[i, j] if dv > 0 else s[i, j + 1]
                a = up * abs(dv) / hy
                if a > best:
                    best = a
    return best
