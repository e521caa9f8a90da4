# cython: language_level=3
"""Compiled inner loops for field stepping.

Every function here has a numpy twin in ``_core_py`` with the same signature
and the same floating point operation order where practical; the backends agree
to ~1e-12 (not bitwise, BLAS reorders sums).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, fabs

cnp.import_array()


def conv1d(const double[::1] f, const double[::1] w, double tol):
    """Zero-padded convolution of ``f`` with the symmetric taps ``w``.

    Samples with ``f <= tol`` are skipped as sources.
    """
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t r = (w.shape[0] - 1) // 2
    cdef Py_ssize_t p, i, lo, hi
    cdef double fp
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for p in range(n):
        fp = f[p]
        if fabs(fp) <= tol:
            continue
        lo = p - r if p - r > 0 else 0
        hi = p + r + 1 if p + r + 1 < n else n
        for i in range(lo, hi):
            out[i] += w[i - p + r] * fp
    return out_arr


def conv2d(const double[:, ::1] f, const double[::1] w0, const double[::1] w1, double tol):
    """Separable zero-padded convolution of a 2-D grid.

    Rows whose largest magnitude is ``<= tol`` contribute nothing and are
    skipped in both passes. Both passes are written as row-wise axpy updates
    over contiguous memory so the compiler can vectorize them.
    """
    cdef Py_ssize_t n0 = f.shape[0]
    cdef Py_ssize_t n1 = f.shape[1]
    cdef Py_ssize_t r0 = (w0.shape[0] - 1) // 2
    cdef Py_ssize_t r1 = (w1.shape[0] - 1) // 2
    cdef Py_ssize_t p, i, j, k, lo, hi, off
    cdef double wk, m
    tmp_arr = np.zeros((n0, n1), dtype=np.float64)
    out_arr = np.zeros((n0, n1), dtype=np.float64)
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] out = out_arr
    cdef const double* src
    cdef double* dst
    active_arr = np.zeros(n0, dtype=np.uint8)
    cdef unsigned char[::1] active = active_arr

    for p in range(n0):
        src = &f[p, 0]
        m = 0.0
        for j in range(n1):
            if fabs(src[j]) > m:
                m = fabs(src[j])
        if m <= tol:
            continue
        active[p] = 1
        dst = &tmp[p, 0]
        for k in range(-r1, r1 + 1):
            wk = w1[k + r1]
            lo = -k if k < 0 else 0
            hi = n1 - k if k > 0 else n1
            for j in range(lo, hi):
                dst[j] += wk * src[j + k]

    for p in range(n0):
        if not active[p]:
            continue
        src = &tmp[p, 0]
        lo = p - r0 if p - r0 > 0 else 0
        hi = p + r0 + 1 if p + r0 + 1 < n0 else n0
        for i in range(lo, hi):
            wk = w0[i - p + r0]
            dst = &out[i, 0]
            for j in range(n1):
                dst[j] += wk * src[j]
    return out_arr


def relax(double[::1] u, const double[::1] drive, double h, double dt_tau):
    """In-place exponential Euler step, exact for drive held over the step."""
    cdef Py_ssize_t i
    cdef Py_ssize_t n = u.shape[0]
    cdef double g = -expm1(-dt_tau)
    for i in range(n):
        u[i] = u[i] + g * (-u[i] + h + drive[i])


def trace_step(double[::1] v, const double[::1] f, double a, double dt,
               double tau_plus, double tau_minus, bint graded):
    """In-place gated memory-trace step, exact for inputs held over the step.

    ``graded=False`` is the product form ``(-v+f)f/tau+ - v(1-f)/tau-``.
    ``graded=True`` relaxes toward ``f`` where ``f > 0`` and decays elsewhere;
    both agree for binary sources.
    """
    cdef Py_ssize_t i
    cdef Py_ssize_t n = v.shape[0]
    cdef double fi, vi, k, src
    cdef double up = -expm1(-dt * a / tau_plus)
    cdef double down = exp(-dt * a / tau_minus)
    if a == 0.0:
        return
    for i in range(n):
        fi = f[i]
        vi = v[i]
        if graded:
            if fi > 0.0:
                v[i] = vi + up * (fi - vi)
            else:
                v[i] = vi * down
        else:
            k = a * (fi / tau_plus + (1.0 - fi) / tau_minus)
            src = a * fi * fi / tau_plus
            if k > 0.0:
                v[i] = vi + -expm1(-dt * k) * (src / k - vi)
            else:
                v[i] = vi + dt * src


# exp(-40) ~ 4e-18 is below every output floor in use
cdef double SIGMOID_CUT = -40.0


def sigmoid(const double[::1] u, double beta):
    cdef Py_ssize_t i
    cdef Py_ssize_t n = u.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double z, e
    for i in range(n):
        z = beta * u[i]
        if z >= 0:
            out[i] = 1.0 / (1.0 + exp(-z))
        elif z < SIGMOID_CUT:
            out[i] = 0.0
        else:
            e = exp(z)
            out[i] = e / (1.0 + e)
    return out_arr
