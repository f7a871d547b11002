# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Each function mirrors the numpy version of the same name in ``_pycore``.
Pixel loops release the GIL and run under OpenMP when the extension was
built with it; reductions over azimuths stay in a fixed order so results
do not depend on the thread count.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport sin, cos, exp, floor, fabs, fmod

cnp.import_array()

cdef double SING_TOL = 1e-12
# pi split in two so that multiples of 2 pi subtract with extra precision
cdef double PI_HI = 3.141592653589793
cdef double PI_LO = 1.2246467991473532e-16

_num_threads = 1


def set_num_threads(int n):
    global _num_threads
    _num_threads = max(1, n)


cdef inline double _dirichlet_ratio(double m, double y) noexcept nogil:
    cdef double r, den, sgn = 1.0
    if m == floor(m) and fabs(y) > PI_HI:
        # reduce to [-pi, pi]; period 2 pi, sign flips per turn when m is even
        r = floor(y / (2.0 * PI_HI) + 0.5)
        y = (y - r * (2.0 * PI_HI)) - r * (2.0 * PI_LO)
        if fmod(m, 2.0) == 0.0 and fmod(fabs(r), 2.0) == 1.0:
            sgn = -1.0
    den = sin(0.5 * y)
    if fabs(den) < SING_TOL:
        return sgn * m * cos(0.5 * m * y) / cos(0.5 * y)
    return sgn * sin(0.5 * m * y) / den


def dirichlet_ratio(double m, y):
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    out = np.empty(yv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    for i in range(yv.shape[0]):
        ov[i] = _dirichlet_ratio(m, yv[i])
    return out.reshape(np.shape(y))


def kernel_field(double kc, double m, double dk, cos_t, sin_t, xs, ys):
    cdef double[::1] ct = np.ascontiguousarray(cos_t, dtype=np.float64)
    cdef double[::1] st = np.ascontiguousarray(sin_t, dtype=np.float64)
    cdef double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t na = xv.shape[0], nb = yv.shape[0], npl = ct.shape[0]
    out = np.zeros((na, nb), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    cdef Py_ssize_t a, b, p
    cdef double u, d, re, im
    cdef int nt = _num_threads
    for a in prange(na, nogil=True, num_threads=nt, schedule="static"):
        for b in range(nb):
            re = 0.0
            im = 0.0
            for p in range(npl):
                u = xv[a] * ct[p] + yv[b] * st[p]
                d = _dirichlet_ratio(m, dk * u)
                re = re + d * cos(kc * u)
                im = im + d * sin(kc * u)
            ov[a, b] = re + 1j * im
    return out


def spread_gaussian(kx, ky, values, int n_grid, int half_width, double tau):
    cdef double[::1] kxv = np.ascontiguousarray(kx, dtype=np.float64)
    cdef double[::1] kyv = np.ascontiguousarray(ky, dtype=np.float64)
    cdef double complex[::1] vv = np.ascontiguousarray(values, dtype=np.complex128)
    out = np.zeros((n_grid, n_grid), dtype=np.complex128)
    cdef double complex[:, ::1] g = out
    cdef Py_ssize_t ns = kxv.shape[0], s
    cdef int w = half_width, nw = 2 * half_width + 1, o1, o2, l1, l2, c1, c2
    cdef double step = 2.0 * 3.141592653589793 / n_grid
    cdef double inv4t = 1.0 / (4.0 * tau), d
    cdef double[64] w1
    cdef double[64] w2
    cdef double complex v
    if nw > 64:
        raise ValueError("half_width too large")
    with nogil:
        for s in range(ns):
            c1 = <int>floor(kxv[s] / step + 0.5)
            c2 = <int>floor(kyv[s] / step + 0.5)
            for o1 in range(nw):
                d = (c1 - w + o1) * step - kxv[s]
                w1[o1] = exp(-d * d * inv4t)
                d = (c2 - w + o1) * step - kyv[s]
                w2[o1] = exp(-d * d * inv4t)
            for o1 in range(nw):
                l1 = (c1 - w + o1) % n_grid
                if l1 < 0:
                    l1 = l1 + n_grid
                v = vv[s] * w1[o1]
                for o2 in range(nw):
                    l2 = (c2 - w + o2) % n_grid
                    if l2 < 0:
                        l2 = l2 + n_grid
                    g[l1, l2] = g[l1, l2] + v * w2[o2]
    return out


def backproject_tables(tables, cos_t, sin_t, double period, double delta,
                       double kappa1, double cshift, int n):
    cdef double complex[:, ::1] tab = np.ascontiguousarray(tables, dtype=np.complex128)
    cdef double[::1] ct = np.ascontiguousarray(cos_t, dtype=np.float64)
    cdef double[::1] st = np.ascontiguousarray(sin_t, dtype=np.float64)
    out = np.zeros((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    cdef Py_ssize_t npl = tab.shape[0], last = tab.shape[1] - 2
    cdef Py_ssize_t a, b, p, q
    cdef long w
    cdef double u, u0, v, t, fr, ph, tr, ti, cr, ci, rr, ri, nr, sgn
    cdef int h = n // 2
    cdef int nt = _num_threads
    # exp(i (kappa1 u + cshift v)) = exp(i (kappa1 + cshift) u) * exp(-i cshift period w)
    # with w = floor(u / period); when cshift * period is a multiple of pi the
    # second factor is +-1 and the first can be advanced by a fixed rotation
    # along each row instead of calling cos/sin per pixel.
    cdef double turns = cshift * period / 3.141592653589793
    cdef long mult = <long>floor(turns + 0.5)
    cdef bint recur = fabs(turns - mult) < 1e-9
    cdef bint odd = (mult % 2) != 0
    for a in prange(n, nogil=True, num_threads=nt, schedule="static"):
        for p in range(npl):
            u0 = (a - h) * ct[p] - h * st[p]
            ph = (kappa1 + cshift) * u0
            cr = cos(ph)
            ci = sin(ph)
            ph = (kappa1 + cshift) * st[p]
            rr = cos(ph)
            ri = sin(ph)
            for b in range(n):
                u = u0 + b * st[p]
                w = <long>floor(u / period)
                v = u - period * w
                t = v / delta
                q = <Py_ssize_t>floor(t)
                if q > last:
                    q = last
                fr = t - q
                tr = (1.0 - fr) * tab[p, q].real + fr * tab[p, q + 1].real
                ti = (1.0 - fr) * tab[p, q].imag + fr * tab[p, q + 1].imag
                if recur:
                    sgn = 1.0
                    if odd and (w % 2) != 0:
                        sgn = -1.0
                    ov[a, b] = ov[a, b] + sgn * ((tr * cr - ti * ci) + 1j * (tr * ci + ti * cr))
                    nr = cr * rr - ci * ri
                    ci = cr * ri + ci * rr
                    cr = nr
                else:
                    ph = kappa1 * u + cshift * v
                    ov[a, b] = ov[a, b] + ((tr * cos(ph) - ti * sin(ph))
                                           + 1j * (tr * sin(ph) + ti * cos(ph)))
    return out


def splat_project(image, double c, double s):
    cdef double complex[:, ::1] f = np.ascontiguousarray(image, dtype=np.complex128)
    cdef Py_ssize_t n = f.shape[0], a, b, q
    cdef int h = n // 2
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double t, fr
    with nogil:
        for a in range(n):
            for b in range(n):
                t = (a - h) * c + (b - h) * s + h
                q = <Py_ssize_t>floor(t)
                fr = t - q
                if 0 <= q < n:
                    ov[q] = ov[q] + (1.0 - fr) * f[a, b]
                if 0 <= q + 1 < n:
                    ov[q + 1] = ov[q + 1] + fr * f[a, b]
    return out


def interp_backproject(profile, double c, double s):
    cdef double complex[::1] g = np.ascontiguousarray(profile, dtype=np.complex128)
    cdef Py_ssize_t n = g.shape[0], a, b, q
    cdef int h = n // 2
    out = np.zeros((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    cdef double t, fr
    cdef double complex acc
    with nogil:
        for a in range(n):
            for b in range(n):
                t = (a - h) * c + (b - h) * s + h
                q = <Py_ssize_t>floor(t)
                fr = t - q
                acc = 0.0
                if 0 <= q < n:
                    acc = acc + (1.0 - fr) * g[q]
                if 0 <= q + 1 < n:
                    acc = acc + fr * g[q + 1]
                ov[a, b] = acc
    return out
