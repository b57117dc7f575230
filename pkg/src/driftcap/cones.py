"""Manifold charts from cone conditions in Jordan coordinates.

In local coordinates z = Q^-1 p, with Q the eigenvector matrix ordered
(expanding, contracting) for the map at hand, the box B = J x [-L r, L r]
with J = [-r, r] is checked for

* cone invariance: [DF~(B)] (1, [-L, L]) lies in the open cone L|u| > |s|;
* expansion: inf(a11 - L |a12|) > sup(1/lambda).

Together these give a manifold graph s = w(u) over J with |w'| <= L, and
the backward bound ||F^-n(P(x))|| <= C lambda^n with
C = ||Q||_2 sqrt(1 + L^2) r.  The stable chart is the same construction
for F^-1, where the roles of the columns swap.
"""

from dataclasses import dataclass, field

from .interval import (
    IMat,
    IVec,
    Interval,
    imat_inverse,
    mul_down,
    spectral_norm_upper,
)
from .maps import d_std_map, d_std_map_inv, saddle_eigen

UNSTABLE = "unstable"
STABLE = "stable"

LAMBDA_INFLATION = 1e-3


class ChartError(RuntimeError):
    """Raised when a manifold chart cannot be validated."""


class ManifoldChart:
    """A certified piece of the (un)stable manifold of the origin.

    ``eval`` maps a parameter interval inside ``domain`` to a box in the
    original (x, y) coordinates containing the manifold points with those
    parameters; ``deriv`` encloses the tangent over parameters inside
    ``deriv_domain``.  The tail bound ||F^{-+n}(chart(s))|| <= C lam^n
    holds in the Euclidean norm for every s in ``domain``.
    """

    kind = UNSTABLE
    backend = ""
    domain = Interval(0.0)
    deriv_domain = Interval(0.0)
    C = 0.0
    lam = Interval(0.0)

    def eval(self, s):
        raise NotImplementedError

    def deriv(self, s):
        raise NotImplementedError

    def point(self, s):
        """Float approximation of the chart at a float parameter."""
        raise NotImplementedError

    def coordinate_of(self, p):
        """Float parameter whose chart point approximates ``p``."""
        raise NotImplementedError

    def tail_constant(self, reach):
        """Tail constant valid for parameters with |s| <= reach."""
        raise NotImplementedError

    def check_domain(self, s, deriv=False):
        dom = self.deriv_domain if deriv else self.domain
        s = s if isinstance(s, Interval) else Interval(s)
        if not s.subseteq(dom):
            what = "derivative domain" if deriv else "chart domain"
            raise ChartError(f"parameter {s} outside the {what} {dom}")
        return s


def local_frame(alpha, kind):
    """(Q, Q^-1): eigenvector matrix with the expanding direction first."""
    eig = saddle_eigen(alpha)
    if kind == UNSTABLE:
        return eig.P, eig.P_inv
    if kind != STABLE:
        raise ValueError(f"unknown chart kind {kind!r}")
    Q = IMat([[eig.P[0, 1], eig.P[0, 0]], [eig.P[1, 1], eig.P[1, 0]]])
    return Q, imat_inverse(Q)


@dataclass
class ConeSetup:
    alpha: float
    kind: str
    L: float
    r: float
    lam: Interval
    B: IVec = field(init=False)

    def __post_init__(self):
        if not (self.L > 0.0 and self.r > 0.0):
            raise ValueError("L and r must be positive")
        self.B = IVec([Interval(-self.r, self.r), Interval(-self.r, self.r) * self.L])


def default_rate(alpha, inflation=LAMBDA_INFLATION):
    """Contracting eigenvalue inflated so that the expansion test can be strict."""
    return saddle_eigen(alpha).lam_s * (1.0 + inflation)


def local_jacobian(setup):
    """[DF~(B)] = Q^-1 [DF(Q B)] Q (with F^-1 for the stable kind)."""
    Q, Qi = local_frame(setup.alpha, setup.kind)
    w = Q @ setup.B
    if setup.kind == UNSTABLE:
        d = d_std_map(w, setup.alpha)
    else:
        d = d_std_map_inv(w, setup.alpha)
    return Qi @ d @ Q


def check_cone_condition(setup, jac=None):
    a = local_jacobian(setup) if jac is None else jac
    slope = Interval(-setup.L, setup.L)
    u = a[0, 0] + a[0, 1] * slope
    s = a[1, 0] + a[1, 1] * slope
    return mul_down(setup.L, u.mig()) > s.mag()


def check_expansion(setup, jac=None):
    a = local_jacobian(setup) if jac is None else jac
    lhs = a[0, 0] - abs(a[0, 1]) * setup.L
    return lhs.lo > (1.0 / setup.lam).hi


class ConeChart(ManifoldChart):
    backend = "cone"

    def __init__(self, setup):
        self.setup = setup
        self.kind = setup.kind
        self.L = setup.L
        self.r = setup.r
        self.lam = setup.lam
        self.Q, self.Q_inv = local_frame(setup.alpha, setup.kind)
        self.domain = Interval(-setup.r, setup.r)
        self.deriv_domain = self.domain
        self.q_norm = spectral_norm_upper(self.Q)
        self.C = (Interval(self.q_norm) * (1.0 + Interval(setup.L).sqr()).sqrt() * setup.r).hi
        self._deriv = self.Q @ IVec([Interval(1.0), Interval(-setup.L, setup.L)])
        self._qmid = self.Q.midpoint()
        self._qinv_mid = self.Q_inv.midpoint()

    def eval(self, s):
        s = self.check_domain(s)
        m = abs(s).hi * self.L
        return self.Q @ IVec([s, Interval(-m, m) if m > 0.0 else Interval(0.0)])

    def deriv(self, s=None):
        if s is not None:
            self.check_domain(s, deriv=True)
        return self._deriv

    def point(self, s):
        return tuple(self._qmid @ [s, 0.0])

    def coordinate_of(self, p):
        return float((self._qinv_mid @ list(p))[0])

    def tail_constant(self, reach):
        """C for chart points with |x| <= reach <= r: the backward bound
        only needs |u|, so reach may replace r in ||Q|| sqrt(1 + L^2) r."""
        reach = abs(float(reach))
        if reach > self.r:
            raise ChartError("reach exceeds the chart radius")
        return (Interval(self.q_norm) * (1.0 + Interval(self.L).sqr()).sqrt() * reach).hi

    def to_dict(self):
        return {
            "backend": self.backend,
            "kind": self.kind,
            "alpha": self.setup.alpha.hex(),
            "L": self.L.hex(),
            "r": self.r.hex(),
            "lam": self.lam.to_hex(),
            "C": self.C.hex(),
        }


def cone_chart(setup):
    jac = local_jacobian(setup)
    if not check_cone_condition(setup, jac):
        raise ChartError(f"cone condition fails for L={setup.L!r}, r={setup.r!r}")
    if not check_expansion(setup, jac):
        raise ChartError(f"expansion condition fails for L={setup.L!r}, r={setup.r!r}")
    return ConeChart(setup)


def passes(setup):
    jac = local_jacobian(setup)
    return check_cone_condition(setup, jac) and check_expansion(setup, jac)


def smallest_slope(alpha, kind, r, lam=None, L0=1e-8, growth=1.25, L_max=1.0):
    """Smallest L in the grid L0 * growth**k (L <= L_max) passing both checks."""
    lam = default_rate(alpha) if lam is None else lam
    L = L0
    while L <= L_max:
        if passes(ConeSetup(alpha, kind, L, r, lam)):
            return L
        L *= growth
    return None


def largest_radius(alpha, kind, L=0.1, lam=None, r_hi=1.0, steps=40):
    """Largest r passing both checks at fixed L.

    Scans powers of two downward from ``r_hi`` and then bisects between the
    last failure and the first success.
    """
    lam = default_rate(alpha) if lam is None else lam

    def ok(r):
        return passes(ConeSetup(alpha, kind, L, r, lam))

    r = r_hi
    while not ok(r):
        r *= 0.5
        if r < 1e-12:
            return None
    hi = 2.0 * r
    if hi > r_hi:
        return r
    lo = r
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def tune_cone_chart(alpha, kind, reach=None, L=0.1, lam=None, margin=1.25):
    """Build a cone chart.

    With ``reach`` (the largest |local coordinate| the chart must cover) the
    radius is ``margin * reach`` and the slope is the smallest passing one,
    which keeps the enclosure thin where the homoclinic orbit leaves the
    saddle.  Without it, L is fixed and r is the largest passing radius.
    """
    lam = default_rate(alpha) if lam is None else lam
    if reach is None:
        r = largest_radius(alpha, kind, L, lam)
        if r is None:
            raise ChartError(f"no radius passes the cone checks at L={L!r}")
        return cone_chart(ConeSetup(alpha, kind, L, r, lam))
    r = margin * abs(reach)
    slope = smallest_slope(alpha, kind, r, lam)
    if slope is None:
        raise ChartError(
            f"cone checks fail for every slope at r={r!r} (alpha={alpha!r}, {kind})")
    return cone_chart(ConeSetup(alpha, kind, slope, r, lam))
