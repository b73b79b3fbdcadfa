# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled float64 hot kernels; see _kernels_py for the reference versions."""
from libc.math cimport exp, cos, sin

import numpy as np


def gausspoly_eval(const double complex[::1] coeffs, double a, double b, double mu,
                   const double[::1] q, double complex[::1] out):
    cdef Py_ssize_t i, j, deg = coeffs.shape[0] - 1, n = q.shape[0]
    cdef double x, env, d, re, im, ph_re, ph_im
    cdef double[::1] cre = np.ascontiguousarray(np.real(coeffs), dtype=np.float64)
    cdef double[::1] cim = np.ascontiguousarray(np.imag(coeffs), dtype=np.float64)
    cdef double* o = <double*> &out[0]
    for i in range(n):
        x = q[i]
        d = x - mu
        env = exp(-0.5 * a * d * d)
        if env == 0.0:
            continue
        # Horner on real and imaginary parts separately: x is real
        re = cre[deg]
        im = cim[deg]
        for j in range(deg - 1, -1, -1):
            re = re * x + cre[j]
            im = im * x + cim[j]
        if b != 0.0:
            ph_re = cos(b * x)
            ph_im = sin(b * x)
            o[2 * i] += env * (re * ph_re - im * ph_im)
            o[2 * i + 1] += env * (re * ph_im + im * ph_re)
        else:
            o[2 * i] += env * re
            o[2 * i + 1] += env * im
    return np.asarray(out)


def zak_window_mass(const double complex[:, ::1] values, const double[::1] weights,
                    const double[::1] shift_kernel):
    cdef Py_ssize_t S = values.shape[0], N = values.shape[1]
    cdef Py_ssize_t s, t, i
    cdef double total = 0.0, k, g
    cdef const double* v = <const double*> &values[0, 0]
    cdef const double* vs
    cdef const double* vt
    # K is even and the Gram matrix Hermitian: visit s <= t and double the off-diagonal
    for s in range(S):
        vs = v + 2 * s * N
        for t in range(s, S):
            k = shift_kernel[t - s + S - 1]
            if k == 0.0:
                continue
            vt = v + 2 * t * N
            g = 0.0
            for i in range(N):
                g += weights[i] * (vs[2 * i] * vt[2 * i] + vs[2 * i + 1] * vt[2 * i + 1])
            total += k * g if s == t else 2.0 * k * g
    return total
