"""Outward-rounded interval arithmetic on binary64.

No global rounding mode is touched.  Sums and products are rounded to
nearest and then corrected with error-free transformations, so both bounds
are the tightest representable ones whenever the transformation is exact.
Everything else (division, elementary functions) is widened with
``math.nextafter`` after the native operation.
"""

import math
from fractions import Fraction

import numpy as np

_INF = math.inf
_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitter
_BIG = 1e150
_TINY = 1e-280


class IntervalError(ArithmeticError):
    """Raised when an interval operation has no sound result."""


def _down(x):
    return math.nextafter(x, -_INF)


def _up(x):
    return math.nextafter(x, _INF)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def add_down(a, b):
    s, e = _two_sum(a, b)
    return _down(s) if e < 0 else s


def add_up(a, b):
    s, e = _two_sum(a, b)
    return _up(s) if e > 0 else s


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    """Product and its exact error, or ``None`` for the error when the
    transformation would not be exact (overflow/underflow ranges)."""
    p = a * b
    if p == 0.0:
        if a == 0.0 or b == 0.0:
            return p, 0.0
        return p, None
    if abs(a) > _BIG or abs(b) > _BIG or abs(p) < _TINY:
        return p, None
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _loose_bounds(a, b, p):
    # the sign of the exact product survives underflow
    lo, hi = _down(p), _up(p)
    if (a > 0.0) == (b > 0.0):
        return max(lo, 0.0), hi
    return lo, min(hi, 0.0)


def mul_down(a, b):
    p, e = _two_prod(a, b)
    if e is None:
        return _loose_bounds(a, b, p)[0]
    return _down(p) if e < 0 else p


def mul_up(a, b):
    p, e = _two_prod(a, b)
    if e is None:
        return _loose_bounds(a, b, p)[1]
    return _up(p) if e > 0 else p


def _mul_bounds(a, b):
    p, e = _two_prod(a, b)
    if e is None:
        return _loose_bounds(a, b, p)
    if e < 0:
        return _down(p), p
    if e > 0:
        return p, _up(p)
    return p, p


def _div_bounds(a, b):
    q = a / b
    p, e = _two_prod(q, b)
    if e is None or math.isinf(q) or a == 0.0:
        if a == 0.0:
            return 0.0, 0.0
        return _down(q), _up(q)
    # the residual of a correctly rounded quotient is representable
    rem = (a - p) - e
    if rem == 0.0:
        return q, q
    if (rem > 0.0) == (b > 0.0):
        return q, _up(q)
    return _down(q), q


# math.pi is the double just below pi; its successor lies above.
PI_LO = math.pi
PI_HI = _up(math.pi)


class _Empty:
    """The empty set, returned by ``intersect`` when operands are disjoint."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "EMPTY"

    def __bool__(self):
        return False


EMPTY = _Empty()


class Interval:
    """A closed real interval ``[lo, hi]`` with finite binary64 bounds."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if not (lo <= hi):
            raise IntervalError(f"invalid interval [{lo!r}, {hi!r}]")
        if lo == -_INF or hi == _INF:
            raise IntervalError("overflow: unbounded interval")
        self.lo = lo
        self.hi = hi

    # -- constructors -------------------------------------------------
    @classmethod
    def from_fraction(cls, q):
        """Tightest enclosure of an exact rational."""
        q = Fraction(q)
        f = float(q)
        lo = f if Fraction(f) <= q else _down(f)
        hi = f if Fraction(f) >= q else _up(f)
        return cls(lo, hi)

    @classmethod
    def from_str(cls, s):
        """Enclosure of a decimal literal such as ``"0.1"``."""
        return cls.from_fraction(Fraction(s))

    @classmethod
    def hull_of(cls, values):
        values = list(values)
        return cls(min(values), max(values))

    @classmethod
    def from_hex(cls, pair):
        lo, hi = pair
        return cls(float.fromhex(lo), float.fromhex(hi))

    def to_hex(self):
        return [self.lo.hex(), self.hi.hex()]

    # -- basic queries --------------------------------------------------
    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self):
        return f"[{self.lo:.17g}, {self.hi:.17g}]"

    def __eq__(self, other):
        if isinstance(other, Interval):
            return self.lo == other.lo and self.hi == other.hi
        return NotImplemented

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __contains__(self, x):
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, Fraction):
            return Fraction(self.lo) <= x <= Fraction(self.hi)
        return self.lo <= x <= self.hi

    def contains_zero(self):
        return self.lo <= 0.0 <= self.hi

    def midpoint(self):
        if self.lo == self.hi:
            return self.lo
        m = 0.5 * self.lo + 0.5 * self.hi
        return min(max(m, self.lo), self.hi)

    def mid(self):
        return self.midpoint()

    def radius(self):
        """Upper bound of half the width."""
        m = self.midpoint()
        return max(add_up(self.hi, -m), add_up(m, -self.lo))

    def width(self):
        return add_up(self.hi, -self.lo)

    def mag(self):
        return max(abs(self.lo), abs(self.hi))

    def mig(self):
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def is_point(self):
        return self.lo == self.hi

    # -- lattice operations -------------------------------------------
    def hull(self, other):
        other = _as_interval(other)
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other):
        other = _as_interval(other)
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return EMPTY
        return Interval(lo, hi)

    def subset(self, other):
        """Strict inclusion in the interior of ``other``."""
        other = _as_interval(other)
        return other.lo < self.lo and self.hi < other.hi

    def subseteq(self, other):
        other = _as_interval(other)
        return other.lo <= self.lo and self.hi <= other.hi

    def inflate(self, r):
        return Interval(add_down(self.lo, -r), add_up(self.hi, r))

    # -- arithmetic ------------------------------------------------------
    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Interval):
            other = float(other)
            return _checked(add_down(self.lo, other), add_up(self.hi, other))
        return _checked(add_down(self.lo, other.lo), add_up(self.hi, other.hi))

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Interval):
            other = float(other)
            return _checked(add_down(self.lo, -other), add_up(self.hi, -other))
        return _checked(add_down(self.lo, -other.hi), add_up(self.hi, -other.lo))

    def __rsub__(self, other):
        return _as_interval(other) - self

    def __mul__(self, other):
        if not isinstance(other, Interval):
            other = float(other)
            if other >= 0.0:
                return _checked(mul_down(self.lo, other), mul_up(self.hi, other))
            return _checked(mul_down(self.hi, other), mul_up(self.lo, other))
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        if a >= 0.0 and c >= 0.0:
            return _checked(mul_down(a, c), mul_up(b, d))
        lows = []
        highs = []
        for x, y in ((a, c), (a, d), (b, c), (b, d)):
            lo, hi = _mul_bounds(x, y)
            lows.append(lo)
            highs.append(hi)
        return _checked(min(lows), max(highs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_interval(other)
        if other.lo <= 0.0 <= other.hi:
            raise IntervalError("division by an interval containing zero")
        lows = []
        highs = []
        for x, y in ((self.lo, other.lo), (self.lo, other.hi),
                     (self.hi, other.lo), (self.hi, other.hi)):
            lo, hi = _div_bounds(x, y)
            lows.append(lo)
            highs.append(hi)
        return _checked(min(lows), max(highs))

    def __rtruediv__(self, other):
        return _as_interval(other) / self

    def sqr(self):
        a, b = self.lo, self.hi
        # squares are never negative, even when the product underflows
        if a >= 0.0:
            return _checked(max(mul_down(a, a), 0.0), mul_up(b, b))
        if b <= 0.0:
            return _checked(max(mul_down(b, b), 0.0), mul_up(a, a))
        m = max(-a, b)
        return _checked(0.0, mul_up(m, m))

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise IntervalError("only non-negative integer powers are supported")
        if n == 0:
            return Interval(1.0)
        if n % 2 == 0:
            return self.sqr() ** (n // 2)
        return self * (self ** (n - 1))

    def __abs__(self):
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    # -- elementary functions ------------------------------------------
    def sqrt(self):
        if self.lo < 0.0:
            raise IntervalError("sqrt of an interval with negative part")
        lo = math.sqrt(self.lo)
        hi = math.sqrt(self.hi)
        # sqrt is correctly rounded, one step suffices; the squares are
        # compared exactly through the error-free product
        lo = _down(lo) if mul_up(lo, lo) > self.lo else lo
        hi = _up(hi) if mul_down(hi, hi) < self.hi else hi
        return Interval(max(lo, 0.0), hi)

    def exp(self):
        try:
            lo = math.exp(self.lo)
            hi = math.exp(self.hi)
        except OverflowError:
            raise IntervalError("overflow in exp") from None
        # libm exp is faithful; two steps cover it
        return _checked(max(_down(_down(lo)), 0.0), _up(_up(hi)))

    def log(self):
        if self.lo <= 0.0:
            raise IntervalError("log of a non-positive interval")
        return Interval(_down(_down(math.log(self.lo))), _up(_up(math.log(self.hi))))

    def cos(self):
        return _trig(self, math.cos, 0.0)

    def sin(self):
        return _trig(self, math.sin, 0.5)


def _checked(lo, hi):
    if math.isinf(lo) or math.isinf(hi):
        raise IntervalError("overflow to infinity")
    return Interval(lo, hi)


def _as_interval(x):
    if isinstance(x, Interval):
        return x
    return Interval(float(x))


def _crit_enclosure(k):
    """Enclosure of k*pi for a float k (integer or half-integer)."""
    if k >= 0:
        return mul_down(k, PI_LO), mul_up(k, PI_HI)
    return mul_down(k, PI_HI), mul_up(k, PI_LO)


def _trig(x, fn, shift):
    """Range of cos (shift 0) or sin (shift 1/2) over ``x``.

    Extrema sit at (n + shift)*pi with value (-1)**n.  A critical point whose
    pi-enclosure merely touches ``x`` is counted, which is the safe side.
    """
    lo, hi = x.lo, x.hi
    if add_down(hi, -lo) >= 2.0 * PI_HI:
        return Interval(-1.0, 1.0)
    a, b = fn(lo), fn(hi)
    # libm sin/cos are within one ulp on glibc; widen by two
    vlo = max(_down(_down(min(a, b))), -1.0)
    vhi = min(_up(_up(max(a, b))), 1.0)
    n0 = math.floor(lo / PI_HI - shift) - 1
    n1 = math.ceil(hi / PI_LO - shift) + 1
    for n in range(n0, n1 + 1):
        clo, chi = _crit_enclosure(n + shift)
        if chi >= lo and clo <= hi:
            if n % 2 == 0:
                vhi = 1.0
            else:
                vlo = -1.0
    return Interval(vlo, vhi)


def sin(x):
    return x.sin() if isinstance(x, Interval) else math.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Interval) else math.cos(x)


def exp(x):
    return x.exp() if isinstance(x, Interval) else math.exp(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, Interval) else math.sqrt(x)


PI = Interval(PI_LO, PI_HI)
TWO_PI = Interval(2.0 * PI_LO, 2.0 * PI_HI)  # doubling is exact
ZERO = Interval(0.0)
ONE = Interval(1.0)


def sum_intervals(items):
    total = ZERO
    for it in items:
        total = total + it
    return total


# ---------------------------------------------------------------------------
# Interval vectors and matrices.  Plain lists of Interval: dimensions here are
# at most a few dozen, and keeping the scalar kernel in one place keeps the
# rounding argument in one place.


class IVec:
    """Dense interval vector."""

    __slots__ = ("data",)

    def __init__(self, items):
        self.data = [_as_interval(v) for v in items]

    @classmethod
    def from_points(cls, xs):
        return cls(Interval(float(x)) for x in xs)

    @classmethod
    def from_bounds(cls, los, his):
        return cls(Interval(a, b) for a, b in zip(los, his))

    @classmethod
    def from_hex(cls, pairs):
        return cls(Interval.from_hex(p) for p in pairs)

    def to_hex(self):
        return [v.to_hex() for v in self.data]

    def __len__(self):
        return len(self.data)

    def __iter__(self):
        return iter(self.data)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return IVec(self.data[i])
        return self.data[i]

    def __setitem__(self, i, v):
        self.data[i] = _as_interval(v)

    def __repr__(self):
        return f"IVec({self.data!r})"

    def __eq__(self, other):
        return isinstance(other, IVec) and self.data == other.data

    def __add__(self, other):
        return IVec(a + b for a, b in zip(self.data, _vec_items(other)))

    def __sub__(self, other):
        return IVec(a - b for a, b in zip(self.data, _vec_items(other)))

    def __rsub__(self, other):
        return IVec(b - a for a, b in zip(self.data, _vec_items(other)))

    def __neg__(self):
        return IVec(-a for a in self.data)

    def scale(self, s):
        return IVec(a * s for a in self.data)

    def midpoint(self):
        return [v.midpoint() for v in self.data]

    def radius(self):
        return max((v.radius() for v in self.data), default=0.0)

    def radii(self):
        return [v.radius() for v in self.data]

    def hull(self, other):
        return IVec(a.hull(b) for a, b in zip(self.data, _vec_items(other)))

    def intersect(self, other):
        out = []
        for a, b in zip(self.data, _vec_items(other)):
            c = a.intersect(b)
            if c is EMPTY:
                return EMPTY
            out.append(c)
        return IVec(out)

    def subset(self, other):
        return all(a.subset(b) for a, b in zip(self.data, _vec_items(other)))

    def subseteq(self, other):
        return all(a.subseteq(b) for a, b in zip(self.data, _vec_items(other)))

    def inflate(self, r):
        return IVec(a.inflate(r) for a in self.data)

    def contains(self, point):
        return all(x in a for a, x in zip(self.data, point))

    def norm_max(self):
        """Upper bound of the max-norm."""
        return max((v.mag() for v in self.data), default=0.0)


def _vec_items(v):
    if isinstance(v, IVec):
        return v.data
    return [_as_interval(x) for x in v]


def dot(xs, ys):
    acc = ZERO
    for a, b in zip(xs, ys):
        acc = acc + a * b
    return acc


class IMat:
    """Dense interval matrix stored as a list of rows."""

    __slots__ = ("rows", "shape")

    def __init__(self, rows):
        self.rows = [[_as_interval(v) for v in row] for row in rows]
        n = len(self.rows)
        m = len(self.rows[0]) if n else 0
        if any(len(r) != m for r in self.rows):
            raise ValueError("ragged matrix")
        self.shape = (n, m)

    @classmethod
    def from_points(cls, a):
        a = np.asarray(a, dtype=float)
        return cls([[Interval(float(v)) for v in row] for row in a])

    @classmethod
    def identity(cls, n):
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, n, m):
        return cls([[ZERO] * m for _ in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __setitem__(self, ij, v):
        i, j = ij
        self.rows[i][j] = _as_interval(v)

    def __repr__(self):
        return f"IMat({self.rows!r})"

    def midpoint(self):
        return np.array([[v.midpoint() for v in row] for row in self.rows])

    def lower(self):
        return np.array([[v.lo for v in row] for row in self.rows])

    def upper(self):
        return np.array([[v.hi for v in row] for row in self.rows])

    def transpose(self):
        n, m = self.shape
        return IMat([[self.rows[i][j] for i in range(n)] for j in range(m)])

    def contains(self, a):
        a = np.asarray(a, dtype=float)
        return all(a[i, j] in v for i, row in enumerate(self.rows)
                   for j, v in enumerate(row))

    def __matmul__(self, other):
        if isinstance(other, IMat):
            cols = other.transpose().rows
            return IMat([[dot(row, col) for col in cols] for row in self.rows])
        if isinstance(other, np.ndarray) and other.ndim == 2:
            return self @ IMat.from_points(other)
        return IVec(dot(row, _vec_items(other)) for row in self.rows)

    def __rmatmul__(self, other):
        return IMat.from_points(other) @ self

    def __add__(self, other):
        return IMat([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return IMat([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def scale(self, s):
        return IMat([[a * s for a in r] for r in self.rows])

    def norm_inf(self):
        """Upper bound of the induced max-norm."""
        best = 0.0
        for row in self.rows:
            acc = 0.0
            for v in row:
                acc = add_up(acc, v.mag())
            best = max(best, acc)
        return best

    def to_hex(self):
        return [[v.to_hex() for v in row] for row in self.rows]

    @classmethod
    def from_hex(cls, rows):
        return cls([[Interval.from_hex(p) for p in row] for row in rows])


def imat_inverse(a):
    """Enclosure of the inverses of all point matrices in ``a``.

    Preconditions with ``R = inv(mid a)`` and runs interval Gauss-Jordan on
    ``(R a | R)``; any pivot containing zero aborts.
    """
    n, m = a.shape
    if n != m:
        raise IntervalError("not verifiably invertible: matrix is not square")
    try:
        r = np.linalg.inv(a.midpoint())
    except np.linalg.LinAlgError:
        raise IntervalError("not verifiably invertible: singular midpoint") from None
    if not np.all(np.isfinite(r)):
        raise IntervalError("not verifiably invertible: singular midpoint")
    rm = IMat.from_points(r)
    b = (rm @ a).rows
    c = [list(row) for row in rm.rows]
    for k in range(n):
        piv = max(range(k, n), key=lambda i: b[i][k].mig())
        if b[piv][k].contains_zero():
            raise IntervalError(f"not verifiably invertible: pivot {k} contains zero")
        b[k], b[piv] = b[piv], b[k]
        c[k], c[piv] = c[piv], c[k]
        p = b[k][k]
        b[k] = [v / p for v in b[k]]
        c[k] = [v / p for v in c[k]]
        for i in range(n):
            if i == k:
                continue
            f = b[i][k]
            if f.lo == 0.0 and f.hi == 0.0:
                continue
            b[i] = [u - f * v for u, v in zip(b[i], b[k])]
            c[i] = [u - f * v for u, v in zip(c[i], c[k])]
    return IMat(c)


def spectral_norm_upper(a):
    """Rigorous upper bound of the 2-norm over all matrices in ``a``.

    For 2x2 input the largest eigenvalue of A^T A is enclosed through its
    closed form; otherwise ||A||_2 <= sqrt(||A||_1 ||A||_inf) is used.
    """
    mags = [[v.mag() for v in row] for row in a.rows]
    n, m = a.shape
    if (n, m) == (2, 2):
        g = a.transpose() @ a
        tr = g[0, 0] + g[1, 1]
        det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
        disc = tr.sqr() - 4.0 * det
        disc = Interval(max(disc.lo, 0.0), max(disc.hi, 0.0))
        lam = (tr + disc.sqrt()) * 0.5
        return lam.sqrt().hi
    def _sum_up(vals):
        acc = 0.0
        for v in vals:
            acc = add_up(acc, v)
        return acc

    col = max(_sum_up(mags[i][j] for i in range(n)) for j in range(m))
    row = max(_sum_up(r) for r in mags)
    return Interval(mul_up(col, row)).sqrt().hi
