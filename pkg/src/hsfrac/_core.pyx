# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Kronrod panel reduction and the Green profile integral."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, log, fabs, ceil, pow, sqrt, fmin, fmax

from ._rules import GK_WG, GK_WK, LOG_PANEL_WIDTH, SERIES_SPLIT, SERIES_TERMS

cnp.import_array()

cdef double _EPS = np.finfo(float).eps
cdef double _UFLOW = np.finfo(float).tiny
cdef double[::1] _WK = np.ascontiguousarray(GK_WK)
cdef double[::1] _WG = np.ascontiguousarray(GK_WG)
cdef double _PANEL = LOG_PANEL_WIDTH
cdef double _SPLIT = SERIES_SPLIT
cdef int _TERMS = SERIES_TERMS


def gk15_reduce(fvals, half_widths):
    cdef const double[:, ::1] f = np.ascontiguousarray(fvals, dtype=float)
    cdef const double[::1] hw = np.ascontiguousarray(half_widths, dtype=float)
    cdef Py_ssize_t n = f.shape[0], i, j
    out_v = np.empty(n)
    out_e = np.empty(n)
    cdef double[::1] v = out_v
    cdef double[::1] e = out_e
    cdef double resk, resg, resabs, resasc, mean, h, ah, err, fj
    for i in range(n):
        resk = 0.0
        resg = 0.0
        resabs = 0.0
        for j in range(15):
            fj = f[i, j]
            resk += _WK[j] * fj
            resg += _WG[j] * fj
            resabs += _WK[j] * fabs(fj)
        mean = 0.5 * resk
        resasc = 0.0
        for j in range(15):
            resasc += _WK[j] * fabs(f[i, j] - mean)
        h = hw[i]
        ah = fabs(h)
        v[i] = resk * h
        err = fabs((resk - resg) * h)
        resabs *= ah
        resasc *= ah
        if resasc != 0.0 and err != 0.0:
            err = resasc * fmin(1.0, pow(200.0 * err / resasc, 1.5))
        if resabs > _UFLOW / (50.0 * _EPS):
            err = fmax(50.0 * _EPS * resabs, err)
        e[i] = err
    return out_v, out_e


cdef inline double _neg_half_power(double x, int N) nogil:
    """x^(-N/2) without a pow call for the dimensions in use."""
    cdef double r = 1.0 / x
    if N == 1:
        return sqrt(r)
    if N == 2:
        return r
    if N == 3:
        return r * sqrt(r)
    return pow(x, -0.5 * N)


cdef double _head(double x, double s, int N, const double[::1] t1, const double[::1] w1,
                  const double[::1] t2, const double[::1] w2) nogil:
    """int_0^min(x, S) v^(s-1) (1+v)^(-N/2) dv: Jacobi rule on [0, 1], log panels beyond."""
    cdef double hn = 0.5 * N, a = fmin(x, 1.0), acc = 0.0, L, h, w, panel, total, out
    cdef Py_ssize_t j, q
    cdef long n_pan
    for j in range(t1.shape[0]):
        acc += _neg_half_power(1.0 + a * t1[j], N) * w1[j]
    out = pow(a, s) * acc
    if x > 1.0:
        L = log(fmin(x, _SPLIT))
        n_pan = <long>ceil(L / _PANEL)
        if n_pan < 1:
            n_pan = 1
        h = L / n_pan
        total = 0.0
        for q in range(n_pan):
            panel = 0.0
            for j in range(t2.shape[0]):
                w = (q + t2[j]) * h
                # e^(sw) (1 + e^w)^(-N/2) = e^((s - N/2) w) (1 + e^-w)^(-N/2)
                panel += exp((s - hn) * w) * _neg_half_power(1.0 + exp(-w), N) * w2[j]
            total += panel
        out += h * total
    return out


def profile_batch(psi, double s, int N, tj, wj, tl, wl):
    arr = np.asarray(psi, dtype=float)
    flat_in = np.ascontiguousarray(arr.ravel())
    cdef const double[::1] p = flat_in
    cdef const double[::1] t1 = np.ascontiguousarray(tj)
    cdef const double[::1] w1 = np.ascontiguousarray(wj)
    cdef const double[::1] t2 = np.ascontiguousarray(tl)
    cdef const double[::1] w2 = np.ascontiguousarray(wl)
    cdef Py_ssize_t n = p.shape[0], i
    out = np.zeros(n)
    cdef double[::1] o = out
    cdef double hn = 0.5 * N, total, c, e, lp
    cdef double ls = log(_SPLIT), fp, fs, ip, isp
    cdef double head_S = -1.0  # value on [0, S], shared by every psi > S
    cdef int k
    for i in range(n):
        if p[i] <= 0.0:
            continue
        if p[i] > _SPLIT and head_S >= 0.0:
            o[i] = head_S
        else:
            o[i] = _head(p[i], s, N, t1, w1, t2, w2)
            if p[i] > _SPLIT:
                head_S = o[i]
        if p[i] > _SPLIT:
            lp = log(p[i])
            c = 1.0
            total = 0.0
            # psi^e and S^e for e = s - N/2 - k, stepped by 1/psi and 1/S
            fp = exp((s - hn) * lp)
            fs = exp((s - hn) * ls)
            ip = 1.0 / p[i]
            isp = 1.0 / _SPLIT
            for k in range(_TERMS):
                e = s - hn - k
                if e == 0.0:
                    total += c * (lp - ls)
                elif fabs(e) < 0.5:
                    # psi^e - S^e loses digits when e is near 0
                    total += c * fs * expm1(e * (lp - ls)) / e
                else:
                    total += c * (fp - fs) / e
                c *= (-hn - k) / (k + 1)
                fp *= ip
                fs *= isp
            o[i] += total
    return out.reshape(arr.shape)
