# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``reference.py``.

Same algorithms, same tolerances; only the inner loops are lowered to C.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "cython"

cdef extern from "complex.h":
    double complex clog(double complex)
    double cabs(double complex)


# share the exception type with the pure-Python backend so callers can catch
# it without caring which implementation is active
from rmtkit.kernels.reference import KernelConvergenceError


def ewma_resolvent_grid(grid, double q, double eps, double tol=1e-12,
                        int max_iter=200):
    cdef cnp.ndarray[double, ndim=1] lam = np.ascontiguousarray(grid, dtype=np.float64)
    cdef Py_ssize_t n = lam.shape[0]
    cdef cnp.ndarray[double complex, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef double complex g, z, u, f, fp, step, prev
    cdef Py_ssize_t i
    cdef int it, have_prev = 0, converged
    g = 1.0 / (lam[n - 1] + 1.0 - 1j * eps)
    prev = 0
    for i in range(n - 1, -1, -1):
        z = lam[i] - 1j * eps
        converged = 0
        for it in range(max_iter):
            u = 1.0 - q * g
            f = z * q * g - q + clog(u)
            if cabs(f) < tol:
                converged = 1
                break
            fp = z * q - q / u
            if fp == 0:
                break
            step = -f / fp
            while cabs(q * step) > 0.5 * cabs(u):
                step = step * 0.5
            g = g + step
        if not converged:
            raise KernelConvergenceError(
                "ewma solver stalled at z=%r" % complex(z))
        if have_prev and cabs(g - prev) > 0.5 * (1.0 + cabs(prev)):
            raise KernelConvergenceError(
                "branch jump detected at lambda=%.6g" % lam[i])
        prev = g
        have_prev = 1
        out[i] = g
    return out


def dressed_resolvent_grid(grid, double q, double eps, c_grid, c_density,
                           c_atom_loc, c_atom_mass, double damping=0.5,
                           double tol=1e-10, int max_iter=500):
    cdef cnp.ndarray[double, ndim=1] lam = np.ascontiguousarray(grid, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cx = np.ascontiguousarray(c_grid, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cd = np.ascontiguousarray(c_density, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] al = np.ascontiguousarray(c_atom_loc, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] am = np.ascontiguousarray(c_atom_mass, dtype=np.float64)
    cdef Py_ssize_t n = lam.shape[0], nc = cx.shape[0], na = al.shape[0]
    cdef cnp.ndarray[double complex, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef double complex g, z, gn, shape_factor, acc, accp, f0, f1, p0, p1
    cdef double complex den, hp, step, gt
    cdef double d, res, prev_res
    cdef Py_ssize_t i, k
    cdef int it, ok, warmup
    cdef double worst_lam = 0.0, worst_res = -1.0
    cdef int failed = 0

    warmup = 50 if max_iter > 50 else max_iter
    g = 1.0 / (lam[n - 1] + 1.0 - 1j * eps)
    for i in range(n - 1, -1, -1):
        z = lam[i] - 1j * eps
        d = damping
        prev_res = 1e300
        ok = 0
        # phase 1: damped iteration to get inside the Newton basin
        for it in range(warmup):
            shape_factor = 1.0 - q + q * z * g
            acc = 0
            if nc >= 2:
                f0 = cd[0] / (z - cx[0] * shape_factor)
                for k in range(1, nc):
                    f1 = cd[k] / (z - cx[k] * shape_factor)
                    acc = acc + 0.5 * (f0 + f1) * (cx[k] - cx[k - 1])
                    f0 = f1
            for k in range(na):
                acc = acc + am[k] / (z - al[k] * shape_factor)
            gn = acc
            res = cabs(gn - g)
            if res < tol * (1.0 + cabs(gn)):
                g = gn
                ok = 1
                break
            if res > prev_res:
                d = d * 0.5
                if d < 0.01:
                    d = 0.01
            prev_res = res
            g = g + d * (gn - g)
        # phase 2: Newton on F(g) - g = 0; the plain iteration loses its
        # contraction near the spectrum edges where Newton stays quadratic
        if not ok:
            for it in range(max_iter - warmup):
                shape_factor = 1.0 - q + q * z * g
                acc = 0
                accp = 0
                if nc >= 2:
                    den = z - cx[0] * shape_factor
                    f0 = cd[0] / den
                    p0 = cd[0] * cx[0] * q * z / (den * den)
                    for k in range(1, nc):
                        den = z - cx[k] * shape_factor
                        f1 = cd[k] / den
                        p1 = cd[k] * cx[k] * q * z / (den * den)
                        acc = acc + 0.5 * (f0 + f1) * (cx[k] - cx[k - 1])
                        accp = accp + 0.5 * (p0 + p1) * (cx[k] - cx[k - 1])
                        f0 = f1
                        p0 = p1
                for k in range(na):
                    den = z - al[k] * shape_factor
                    acc = acc + am[k] / den
                    accp = accp + am[k] * al[k] * q * z / (den * den)
                gn = acc
                res = cabs(gn - g)
                if res < tol * (1.0 + cabs(gn)):
                    g = gn
                    ok = 1
                    break
                hp = accp - 1.0
                if hp == 0:
                    break
                step = (gn - g) / (-hp)
                gt = g + step
                if gt.imag < 0:
                    # on z = lambda - i*eps the physical branch has Im G >= 0;
                    # fall back to a damped step instead of crossing over
                    gt = g + d * (gn - g)
                g = gt
                prev_res = res
        if not ok:
            failed = 1
            worst_lam = lam[i]
            worst_res = prev_res
        out[i] = g
    if failed:
        raise KernelConvergenceError(
            "fixed point not reached; worst lambda=%.6g residual=%.3e"
            % (worst_lam, worst_res))
    return out


def track_top(returns, double epsilon, v_ref, e_init=None,
              double power_tol=1e-10, int full_every=100):
    cdef cnp.ndarray[double, ndim=2] R = np.ascontiguousarray(returns, dtype=np.float64)
    cdef Py_ssize_t T = R.shape[0], N = R.shape[1]
    cdef cnp.ndarray[double, ndim=1] vr = np.ascontiguousarray(v_ref, dtype=np.float64).copy()
    vr /= np.linalg.norm(vr)

    cdef cnp.ndarray[double, ndim=2] E
    if e_init is None:
        E = np.eye(N)
    else:
        E = np.array(e_init, dtype=np.float64)
    vals, vecs = np.linalg.eigh(E)
    cdef cnp.ndarray[double, ndim=1] v = np.ascontiguousarray(vecs[:, N - 1])
    cdef cnp.ndarray[double, ndim=1] w = np.empty(N)

    cdef cnp.ndarray[double, ndim=1] lam_out = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] theta_out = np.empty(T)
    cdef cnp.ndarray[double, ndim=2] v_out = np.empty((T, N))

    cdef Py_ssize_t t, i, j
    cdef int it
    cdef double lam, nrm, dot, diff, omeps = 1.0 - epsilon

    for t in range(T):
        for i in range(N):
            for j in range(N):
                E[i, j] = omeps * E[i, j] + epsilon * R[t, i] * R[t, j]
        if full_every > 0 and (t + 1) % full_every == 0:
            vals, vecs = np.linalg.eigh(np.asarray(E))
            wt = vecs[:, N - 1]
            if float(wt @ np.asarray(v)) < 0:
                wt = -wt
            for i in range(N):
                v[i] = wt[i]
            lam = vals[N - 1]
        else:
            lam = 0.0
            for it in range(200):
                nrm = 0.0
                for i in range(N):
                    dot = 0.0
                    for j in range(N):
                        dot += E[i, j] * v[j]
                    w[i] = dot
                    nrm += dot * dot
                nrm = sqrt(nrm)
                lam = nrm
                if nrm == 0:
                    break
                dot = 0.0
                for i in range(N):
                    w[i] /= nrm
                    dot += w[i] * v[i]
                if dot < 0:
                    for i in range(N):
                        w[i] = -w[i]
                diff = 0.0
                for i in range(N):
                    diff += (w[i] - v[i]) * (w[i] - v[i])
                    v[i] = w[i]
                if sqrt(diff) < power_tol:
                    break
        lam_out[t] = lam
        dot = 0.0
        for i in range(N):
            v_out[t, i] = v[i]
            dot += v[i] * vr[i]
        if dot > 1.0:
            dot = 1.0
        elif dot < -1.0:
            dot = -1.0
        theta_out[t] = np.arccos(dot)
    return np.asarray(lam_out), np.asarray(theta_out), np.asarray(v_out)
