"""Pure-Python strip kernels.

Mirror of ``_ckernels.pyx``: the same float operations in the same order,
so both backends return the same witnesses.  Every rounded result is
pushed one ulp outward with nextafter, which is cruder than the
error-free transforms in ``interval`` but trivially identical in C.
"""

import math

_INF = math.inf
TWO_PI_LO = 2.0 * math.pi
TWO_PI_HI = 2.0 * math.nextafter(math.pi, _INF)
_TWO_PI_MID = 2.0 * math.pi
PI_LO = math.pi
PI_HI = math.nextafter(math.pi, _INF)


def _dn(x):
    return math.nextafter(x, -_INF)


def _up(x):
    return math.nextafter(x, _INF)


def _image_reduced(tlo, thi, ilo, ihi, m):
    # [theta] + m [I] with I > 0, minus k * 2pi so that lo lands near [0, 2pi)
    lo = _dn(_dn(m * ilo) + tlo)
    hi = _up(_up(m * ihi) + thi)
    k = math.floor(lo / _TWO_PI_MID)
    if k >= 0:
        lo = _dn(lo - _up(k * TWO_PI_HI))
        hi = _up(hi - _dn(k * TWO_PI_LO))
    else:
        lo = _dn(lo - _up(k * TWO_PI_LO))
        hi = _up(hi - _dn(k * TWO_PI_HI))
    return lo, hi


def _inside(lo, hi, s1, s2):
    if lo > s1 and hi < s2:
        return True
    if _dn(lo + TWO_PI_LO) > s1 and _up(hi + TWO_PI_HI) < s2:
        return True
    return _dn(lo - TWO_PI_HI) > s1 and _up(hi - TWO_PI_LO) < s2


def arc_contains(tlo, thi, ilo, ihi, m, s1, s2):
    """True if [theta] + m [I] lies in the open arc (s1, s2) modulo 2pi."""
    lo, hi = _image_reduced(tlo, thi, ilo, ihi, m)
    return _inside(lo, hi, s1, s2)


def find_return(tlo, thi, ilo, ihi, s1, s2, m_lo, m_hi):
    """Smallest m in [m_lo, m_hi] with [theta] + m [I] inside (s1, s2), or -1."""
    width = s2 - s1
    for m in range(m_lo, m_hi + 1):
        lo, hi = _image_reduced(tlo, thi, ilo, ihi, m)
        if hi - lo >= width:
            return -1
        if _inside(lo, hi, s1, s2):
            return m
    return -1


def find_transfer(tlo, thi, ilo, ihi, arcs, n_lo, n_hi):
    """Smallest (n, j) with [theta] + n [I] inside arcs[j], or (-1, -1).

    ``arcs`` is a sequence of (s1, s2) pairs, scanned in order for each n.
    """
    arcs = [(float(a), float(b)) for a, b in arcs]
    if not arcs:
        return -1, -1
    widest = max(b - a for a, b in arcs)
    for n in range(n_lo, n_hi + 1):
        lo, hi = _image_reduced(tlo, thi, ilo, ihi, n)
        if hi - lo >= widest:
            return -1, -1
        for j, (s1, s2) in enumerate(arcs):
            if _inside(lo, hi, s1, s2):
                return n, j
    return -1, -1


# -- orbit sum enclosure ------------------------------------------------------------

def pack_weights(weights):
    """(lo, hi) bound lists of the weight intervals."""
    return [w.lo for w in weights], [w.hi for w in weights]


def _mul(alo, ahi, blo, bhi):
    p1, p2, p3, p4 = alo * blo, alo * bhi, ahi * blo, ahi * bhi
    return _dn(min(p1, p2, p3, p4)), _up(max(p1, p2, p3, p4))


def _trig(lo, hi, shift):
    # cos (shift 0) or sin (shift 0.5); extrema at (n + shift) pi with value (-1)**n
    if _up(hi - lo) >= TWO_PI_HI:
        return -1.0, 1.0
    if shift == 0.0:
        a, b = math.cos(lo), math.cos(hi)
    else:
        a, b = math.sin(lo), math.sin(hi)
    vlo = max(_dn(_dn(min(a, b))), -1.0)
    vhi = min(_up(_up(max(a, b))), 1.0)
    n0 = math.floor(lo / PI_HI - shift) - 1
    n1 = math.ceil(hi / PI_LO - shift) + 1
    for n in range(n0, n1 + 1):
        k = n + shift
        if k >= 0:
            clo, chi = _dn(k * PI_LO), _up(k * PI_HI)
        else:
            clo, chi = _dn(k * PI_HI), _up(k * PI_LO)
        if chi >= lo and clo <= hi:
            if n % 2 == 0:
                vhi = 1.0
            else:
                vlo = -1.0
    return vlo, vhi


def sum_bounds(wlo, whi, tlo, thi, ilo, ihi, tight):
    """Bounds of sum_i w_i cos(theta + i I) over the box (I >= 0).

    With ``tight`` the natural enclosure is intersected with the mean-value
    form around the box midpoint.
    """
    count = len(wlo)
    nlo = nhi = 0.0
    dtlo = dthi = dilo = dihi = 0.0
    for i in range(count):
        alo = _dn(tlo + _dn(i * ilo))
        ahi = _up(thi + _up(i * ihi))
        clo, chi = _trig(alo, ahi, 0.0)
        plo, phi = _mul(wlo[i], whi[i], clo, chi)
        nlo, nhi = _dn(nlo + plo), _up(nhi + phi)
        if tight:
            slo, shi = _trig(alo, ahi, 0.5)
            plo, phi = _mul(wlo[i], whi[i], slo, shi)
            dtlo, dthi = _dn(dtlo - phi), _up(dthi - plo)
            dilo, dihi = _dn(dilo - _up(i * phi)), _up(dihi - _dn(i * plo))
    if not tight:
        return nlo, nhi
    tm = 0.5 * (tlo + thi)
    am = 0.5 * (ilo + ihi)
    mlo = mhi = 0.0
    for i in range(count):
        alo = _dn(tm + _dn(i * am))
        ahi = _up(tm + _up(i * am))
        clo, chi = _trig(alo, ahi, 0.0)
        plo, phi = _mul(wlo[i], whi[i], clo, chi)
        mlo, mhi = _dn(mlo + plo), _up(mhi + phi)
    plo, phi = _mul(dtlo, dthi, _dn(tlo - tm), _up(thi - tm))
    mlo, mhi = _dn(mlo + plo), _up(mhi + phi)
    plo, phi = _mul(dilo, dihi, _dn(ilo - am), _up(ihi - am))
    mlo, mhi = _dn(mlo + plo), _up(mhi + phi)
    return max(nlo, mlo), min(nhi, mhi)
