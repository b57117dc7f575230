# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled strip kernels; see ``_pykernels`` for the reference version."""

from array import array

from libc.math cimport INFINITY, M_PI, ceil, cos, floor, fmax, fmin, nextafter, sin

import numpy as np

cdef double TWO_PI_LO = 2.0 * M_PI
cdef double TWO_PI_HI = 2.0 * nextafter(M_PI, INFINITY)
cdef double TWO_PI_MID = 2.0 * M_PI
cdef double PI_LO = M_PI
cdef double PI_HI = nextafter(M_PI, INFINITY)


cdef inline double _dn(double x) noexcept nogil:
    return nextafter(x, -INFINITY)


cdef inline double _up(double x) noexcept nogil:
    return nextafter(x, INFINITY)


cdef inline void _image_reduced(double tlo, double thi, double ilo, double ihi,
                                long m, double *lo, double *hi) noexcept nogil:
    cdef double a = _dn(_dn(m * ilo) + tlo)
    cdef double b = _up(_up(m * ihi) + thi)
    cdef double k = floor(a / TWO_PI_MID)
    if k >= 0:
        a = _dn(a - _up(k * TWO_PI_HI))
        b = _up(b - _dn(k * TWO_PI_LO))
    else:
        a = _dn(a - _up(k * TWO_PI_LO))
        b = _up(b - _dn(k * TWO_PI_HI))
    lo[0] = a
    hi[0] = b


cdef inline bint _inside(double lo, double hi, double s1, double s2) noexcept nogil:
    if lo > s1 and hi < s2:
        return True
    if _dn(lo + TWO_PI_LO) > s1 and _up(hi + TWO_PI_HI) < s2:
        return True
    return _dn(lo - TWO_PI_HI) > s1 and _up(hi - TWO_PI_LO) < s2


def arc_contains(double tlo, double thi, double ilo, double ihi, long m,
                 double s1, double s2):
    cdef double lo, hi
    _image_reduced(tlo, thi, ilo, ihi, m, &lo, &hi)
    return bool(_inside(lo, hi, s1, s2))


def find_return(double tlo, double thi, double ilo, double ihi,
                double s1, double s2, long m_lo, long m_hi):
    cdef double lo, hi
    cdef double width = s2 - s1
    cdef long m
    cdef long found = -1
    with nogil:
        for m in range(m_lo, m_hi + 1):
            _image_reduced(tlo, thi, ilo, ihi, m, &lo, &hi)
            if hi - lo >= width:
                break
            if _inside(lo, hi, s1, s2):
                found = m
                break
    return found


def find_transfer(double tlo, double thi, double ilo, double ihi, arcs,
                  long n_lo, long n_hi):
    cdef Py_ssize_t count = len(arcs)
    if count == 0:
        return -1, -1
    cdef double[::1] s1 = array("d", bytes(8 * count))
    cdef double[::1] s2 = array("d", bytes(8 * count))
    cdef Py_ssize_t j
    cdef double widest = -1.0
    for j, pair in enumerate(arcs):
        s1[j] = pair[0]
        s2[j] = pair[1]
        if s2[j] - s1[j] > widest:
            widest = s2[j] - s1[j]
    cdef double lo, hi
    cdef long n
    cdef long found_n = -1
    cdef Py_ssize_t found_j = -1
    with nogil:
        for n in range(n_lo, n_hi + 1):
            _image_reduced(tlo, thi, ilo, ihi, n, &lo, &hi)
            if hi - lo >= widest:
                break
            for j in range(count):
                if _inside(lo, hi, s1[j], s2[j]):
                    found_n = n
                    found_j = j
                    break
            if found_n >= 0:
                break
    return found_n, found_j



# -- orbit sum enclosure ------------------------------------------------------------

def pack_weights(weights):
    return (np.array([w.lo for w in weights], dtype=np.float64),
            np.array([w.hi for w in weights], dtype=np.float64))


cdef inline void _mul(double alo, double ahi, double blo, double bhi,
                      double *lo, double *hi) noexcept nogil:
    cdef double p1 = alo * blo
    cdef double p2 = alo * bhi
    cdef double p3 = ahi * blo
    cdef double p4 = ahi * bhi
    lo[0] = _dn(fmin(fmin(p1, p2), fmin(p3, p4)))
    hi[0] = _up(fmax(fmax(p1, p2), fmax(p3, p4)))


cdef inline double _min2(double a, double b) noexcept nogil:
    return a if a <= b else b


cdef inline double _max2(double a, double b) noexcept nogil:
    return a if a >= b else b


cdef void _trig(double lo, double hi, double shift, double *vlo, double *vhi) noexcept nogil:
    cdef double a, b, k, clo, chi
    cdef long n, n0, n1
    if _up(hi - lo) >= TWO_PI_HI:
        vlo[0] = -1.0
        vhi[0] = 1.0
        return
    if shift == 0.0:
        a = cos(lo)
        b = cos(hi)
    else:
        a = sin(lo)
        b = sin(hi)
    vlo[0] = _max2(_dn(_dn(_min2(a, b))), -1.0)
    vhi[0] = _min2(_up(_up(_max2(a, b))), 1.0)
    n0 = <long>floor(lo / PI_HI - shift) - 1
    n1 = <long>ceil(hi / PI_LO - shift) + 1
    for n in range(n0, n1 + 1):
        k = n + shift
        if k >= 0:
            clo = _dn(k * PI_LO)
            chi = _up(k * PI_HI)
        else:
            clo = _dn(k * PI_HI)
            chi = _up(k * PI_LO)
        if chi >= lo and clo <= hi:
            if n % 2 == 0:
                vhi[0] = 1.0
            else:
                vlo[0] = -1.0


def sum_bounds(double[::1] wlo, double[::1] whi, double tlo, double thi,
               double ilo, double ihi, bint tight):
    cdef Py_ssize_t count = wlo.shape[0]
    cdef Py_ssize_t i
    cdef double nlo = 0.0, nhi = 0.0
    cdef double dtlo = 0.0, dthi = 0.0, dilo = 0.0, dihi = 0.0
    cdef double alo, ahi, clo, chi, plo, phi, slo, shi, tm, am, mlo, mhi
    with nogil:
        for i in range(count):
            alo = _dn(tlo + _dn(i * ilo))
            ahi = _up(thi + _up(i * ihi))
            _trig(alo, ahi, 0.0, &clo, &chi)
            _mul(wlo[i], whi[i], clo, chi, &plo, &phi)
            nlo = _dn(nlo + plo)
            nhi = _up(nhi + phi)
            if tight:
                _trig(alo, ahi, 0.5, &slo, &shi)
                _mul(wlo[i], whi[i], slo, shi, &plo, &phi)
                dtlo = _dn(dtlo - phi)
                dthi = _up(dthi - plo)
                dilo = _dn(dilo - _up(i * phi))
                dihi = _up(dihi - _dn(i * plo))
    if not tight:
        return nlo, nhi
    with nogil:
        tm = 0.5 * (tlo + thi)
        am = 0.5 * (ilo + ihi)
        mlo = 0.0
        mhi = 0.0
        for i in range(count):
            alo = _dn(tm + _dn(i * am))
            ahi = _up(tm + _up(i * am))
            _trig(alo, ahi, 0.0, &clo, &chi)
            _mul(wlo[i], whi[i], clo, chi, &plo, &phi)
            mlo = _dn(mlo + plo)
            mhi = _up(mhi + phi)
        _mul(dtlo, dthi, _dn(tlo - tm), _up(thi - tm), &plo, &phi)
        mlo = _dn(mlo + plo)
        mhi = _up(mhi + phi)
        _mul(dilo, dihi, _dn(ilo - am), _up(ihi - am), &plo, &phi)
        mlo = _dn(mlo + plo)
        mhi = _up(mhi + phi)
    return _max2(nlo, mlo), _min2(nhi, mhi)
