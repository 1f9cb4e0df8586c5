# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled line kernels: polynomial phase times plateau-bump amplitude."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, cos, sin, fabs, ceil, M_PI

cnp.import_array()

DEF FREQ_SAMPLES = 33
DEF FREQ_SAFETY = 1.2
DEF MAX_DEG = 64


cdef inline double _bump(double x, double c, double r0, double r1) nogil:
    cdef double t = (fabs(x - c) - r0) / (r1 - r0)
    if t <= 0.0:
        return 1.0
    if t >= 1.0:
        return 0.0
    # 1 - a/(a+b) with a = e^{-1/t}, b = e^{-1/(1-t)}, using a single exponential
    return 1.0 - 1.0 / (1.0 + exp(1.0 / t - 1.0 / (1.0 - t)))


cdef inline double _horner(double* c, int deg, double x) nogil:
    cdef double v = 0.0
    cdef int k
    for k in range(deg, -1, -1):
        v = v * x + c[k]
    return v


def poly_bump_lines(const double[:, ::1] base, int axis, double a, double b,
                    const double[::1] coefs, const long[:, ::1] exps,
                    const double[::1] centers, const double[::1] inner, const double[::1] outer,
                    double omega, double ppw, int min_panels,
                    const double[::1] xr, const double[::1] wr):
    cdef Py_ssize_t L = base.shape[0]
    cdef int d = base.shape[1]
    cdef int m = coefs.shape[0]
    cdef int order = xr.shape[0]
    cdef Py_ssize_t i, p, panels
    cdef int j, k, t, deg = 0, e
    cdef double lo, hi, fixed, term, fmax, v, xs, h, mid, x, ph, amp, re, im, cycles
    cdef double c[MAX_DEG + 1]
    cdef double dc[MAX_DEG + 1]
    cdef long nodes = 0
    out = np.zeros(L, dtype=np.complex128)
    cdef double complex[::1] o = out

    for t in range(m):
        if exps[t, axis] > deg:
            deg = exps[t, axis]
    if deg > MAX_DEG:
        raise ValueError("polynomial degree along the line exceeds the kernel limit")
    lo = a if a > centers[axis] - outer[axis] else centers[axis] - outer[axis]
    hi = b if b < centers[axis] + outer[axis] else centers[axis] + outer[axis]
    if hi <= lo or L == 0:
        return out, 0

    with nogil:
        for i in range(L):
            fixed = 1.0
            for j in range(d):
                if j != axis:
                    fixed = fixed * _bump(base[i, j], centers[j], inner[j], outer[j])
            if fixed == 0.0:
                continue
            for k in range(deg + 1):
                c[k] = 0.0
            for t in range(m):
                term = coefs[t]
                for j in range(d):
                    if j != axis:
                        e = exps[t, j]
                        for k in range(e):
                            term = term * base[i, j]
                c[exps[t, axis]] += term
            for k in range(deg):
                dc[k] = c[k + 1] * (k + 1)
            fmax = 0.0
            if deg > 0:
                for k in range(FREQ_SAMPLES):
                    xs = lo + (hi - lo) * k / (FREQ_SAMPLES - 1.0)
                    v = fabs(_horner(dc, deg - 1, xs))
                    if v > fmax:
                        fmax = v
            fmax = fmax * FREQ_SAFETY
            cycles = omega * fmax * (hi - lo) / (2.0 * M_PI)
            panels = <Py_ssize_t> ceil(ppw * cycles)
            if panels < min_panels:
                panels = min_panels
            h = (hi - lo) / panels
            re = 0.0
            im = 0.0
            for p in range(panels):
                mid = lo + h * (p + 0.5)
                for k in range(order):
                    x = mid + 0.5 * h * xr[k]
                    ph = omega * _horner(c, deg, x)
                    amp = 0.5 * h * wr[k] * _bump(x, centers[axis], inner[axis], outer[axis])
                    re = re + amp * cos(ph)
                    im = im + amp * sin(ph)
            o[i] = fixed * (re + 1j * im)
            nodes += panels * order
    return out, nodes
