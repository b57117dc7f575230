"""Polynomial charts of the saddle's manifolds with validated truncation error.

The chart P solves P(sigma) = f(P(mu sigma)) with mu = 1/lambda, lambda the
unstable eigenvalue of Df(0).  The stable manifold of the standard map is
the unstable manifold of its inverse, so ``kind="stable"`` runs the same
construction on F^-1, whose nonlinearity is sin(X - Y) instead of sin(X).

All a-posteriori hypotheses are real inequalities on |mu|, max-norms of
coefficients and the constants C1..C3, evaluated in interval arithmetic.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cones import STABLE, UNSTABLE, ChartError, ManifoldChart
from .interval import (
    TWO_PI,
    IMat,
    IVec,
    Interval,
    IntervalError,
    imat_inverse,
)
from .maps import saddle_eigen

DEFAULT_N = 40
DEFAULT_NU = math.log(2.0)
TARGET_COEFF = 1e-16


class ValidationError(ChartError):
    """A hypothesis of the a-posteriori theorem failed; ``hypothesis`` names it."""

    def __init__(self, hypothesis, message):
        super().__init__(f"{hypothesis}: {message}")
        self.hypothesis = hypothesis


@dataclass
class TaylorConstants:
    R: float
    r_star: float
    C1: Interval
    C2: Interval
    C3: Interval
    kind: str = UNSTABLE


def _lin(kind, alpha):
    """Df(0) for F (unstable kind) or F^-1 (stable kind), as point lists."""
    if kind == UNSTABLE:
        return [[1.0 + alpha, 1.0], [alpha, 1.0]]
    return [[1.0, -1.0], [-alpha, 1.0 + alpha]]


def _composition_arg(kind, a, b):
    # argument of the sine in the map: x for F, x - y for F^-1
    return a if kind == UNSTABLE else a - b


def _rhs(kind, alpha, S):
    if kind == UNSTABLE:
        v = S * (-alpha)
        return [v, v]
    return [S * 0.0, S * alpha]


def _float_coeffs(alpha, kind, N, scale, lam, xi):
    """Float mirror of the recursion, used only to tune the scale."""
    A = np.array(_lin(kind, alpha))
    a = np.zeros(N + 1)
    b = np.zeros(N + 1)
    s = np.zeros(N + 1)
    c = np.zeros(N + 1)
    a[1], b[1] = scale * xi[0], scale * xi[1]

    def zn(n):
        return a[n] if kind == UNSTABLE else a[n] - b[n]

    c[0] = 1.0
    s[1] = zn(1)
    for n in range(2, N + 1):
        S = sum((k + 1) * c[n - k - 1] * zn(k + 1) for k in range(n - 1)) / n
        rhs = [-alpha * S, -alpha * S] if kind == UNSTABLE else [0.0, alpha * S]
        a[n], b[n] = np.linalg.solve(A - lam ** n * np.eye(2), rhs)
        s[n] = zn(n) + S
        c[n] = -sum((k + 1) * s[n - k - 1] * zn(k + 1) for k in range(n)) / n
    return a, b


def _unit_eigvec(alpha, kind):
    eig = saddle_eigen(alpha)
    v = eig.vec_u if kind == UNSTABLE else eig.vec_s
    norm = max(v[0].mag(), v[1].mag())
    # normalize by a float so that scaling stays exact up to rounding
    return IVec([v[0] / norm, v[1] / norm]), eig.lam_u


def auto_scale(alpha, kind, N=DEFAULT_N, target=TARGET_COEFF):
    """Eigenvector scale making the top nonzero coefficients about ``target``.

    The map is odd, so even-order coefficients vanish and the last two
    orders are inspected.
    """
    xi, lam = _unit_eigvec(alpha, kind)
    a, b = _float_coeffs(alpha, kind, N, 1.0, lam.midpoint(), xi.midpoint())
    q = np.maximum(np.abs(a), np.abs(b))
    for n in (N, N - 1):
        if q[n] > 0.0 and np.isfinite(q[n]):
            return float((target / q[n]) ** (1.0 / n))
    raise ChartError("cannot tune the eigenvector scale: top coefficients vanish")


class ParamChart(ManifoldChart):
    """Order-N chart with interval coefficients p_n = (a_n, b_n)."""

    backend = "parameterization"

    def __init__(self, alpha, kind, N, scale, coeffs, sin_coeffs, cos_coeffs,
                 lam, mu, xi, nu=DEFAULT_NU):
        self.alpha = float(alpha)
        self.kind = kind
        self.N = N
        self.scale = float(scale)
        self.coeffs = coeffs
        self.sin_coeffs = sin_coeffs
        self.cos_coeffs = cos_coeffs
        self.eigenvalue = lam
        self.mu = mu
        self.lam = abs(mu)
        self.xi = xi
        self.nu = float(nu)
        self.r_valid = None
        self.deriv_tail = None
        self.eps_N = None
        self.constants = None
        self.domain = Interval(-1.0, 1.0)
        rho = Interval(-self.nu).exp().lo
        self.deriv_domain = Interval(-rho, rho)
        self.C = None
        self._fa = np.array([p[0].midpoint() for p in coeffs])
        self._fb = np.array([p[1].midpoint() for p in coeffs])

    @property
    def validated(self):
        return self.r_valid is not None

    def _require(self):
        if not self.validated:
            raise ChartError("chart has not been validated")

    # -- evaluation ------------------------------------------------------
    def polynomial(self, s):
        """Horner evaluation of P^N over an interval, without the tail."""
        s = s if isinstance(s, Interval) else Interval(s)
        x = self.coeffs[self.N][0]
        y = self.coeffs[self.N][1]
        for n in range(self.N - 1, -1, -1):
            x = x * s + self.coeffs[n][0]
            y = y * s + self.coeffs[n][1]
        return IVec([x, y])

    def polynomial_deriv(self, s):
        s = s if isinstance(s, Interval) else Interval(s)
        x = self.coeffs[self.N][0] * float(self.N)
        y = self.coeffs[self.N][1] * float(self.N)
        for n in range(self.N - 1, 0, -1):
            x = x * s + self.coeffs[n][0] * float(n)
            y = y * s + self.coeffs[n][1] * float(n)
        return IVec([x, y])

    def eval(self, s):
        self._require()
        s = self.check_domain(s)
        return self.polynomial(s).inflate(self.r_valid)

    def deriv(self, s):
        self._require()
        s = self.check_domain(s, deriv=True)
        return self.polynomial_deriv(s).inflate(self.deriv_tail)

    def point(self, s):
        return (float(np.polyval(self._fa[::-1], s)), float(np.polyval(self._fb[::-1], s)))

    def coordinate_of(self, p):
        p = np.asarray(p, dtype=float)
        da = np.polyder(self._fa[::-1])
        db = np.polyder(self._fb[::-1])
        t = np.array([self._fa[1], self._fb[1]])
        s = float(p @ t / (t @ t))
        for _ in range(50):
            r = np.array(self.point(s)) - p
            d = np.array([np.polyval(da, s), np.polyval(db, s)])
            step = float(r @ d / (d @ d))
            s -= step
            if abs(step) <= 1e-17 * max(1.0, abs(s)):
                break
        return s

    def tail_constant(self, reach):
        """C with ||F^-+n(P(s))||_2 <= C |mu|^n for |s| <= reach <= 1.

        F^-+n(P(s)) = P(mu^n s); for |t| <= reach the polynomial part is at
        most |t| sum ||p_k|| reach^(k-1) and the tail, an analytic N-tail
        bounded by r on the unit disk, is at most r |t|^(N+1) <= r |t|.
        The Euclidean norm is at most sqrt(2) times the max-norm.
        """
        self._require()
        rho = Interval(abs(float(reach)))
        acc = Interval(0.0)
        pw = Interval(1.0)
        for k in range(1, self.N + 1):
            mag = max(self.coeffs[k][0].mag(), self.coeffs[k][1].mag())
            acc = acc + pw * mag
            pw = pw * rho
        acc = acc + self.r_valid
        return (Interval(2.0).sqrt() * rho * acc).hi

    def to_dict(self):
        return {
            "backend": self.backend,
            "kind": self.kind,
            "alpha": self.alpha.hex(),
            "N": self.N,
            "scale": self.scale.hex(),
            "nu": self.nu.hex(),
            "lam": self.eigenvalue.to_hex(),
            "mu": self.mu.to_hex(),
            "xi": self.xi.to_hex(),
            "coeffs": [[p[0].to_hex(), p[1].to_hex()] for p in self.coeffs],
            "sin_coeffs": [v.to_hex() for v in self.sin_coeffs],
            "cos_coeffs": [v.to_hex() for v in self.cos_coeffs],
            "r_valid": None if self.r_valid is None else self.r_valid.hex(),
            "deriv_tail": None if self.deriv_tail is None else self.deriv_tail.hex(),
            "eps_N": None if self.eps_N is None else self.eps_N.hex(),
            "R": None if self.constants is None else self.constants.R.hex(),
            "r_star": None if self.constants is None else self.constants.r_star.hex(),
        }


def _s_partial(c, z, n):
    """(1/n) sum_{k=0}^{n-2} (k+1) c_{n-k-1} z_{k+1}."""
    acc = Interval(0.0)
    for k in range(n - 1):
        acc = acc + c[n - k - 1] * z[k + 1] * float(k + 1)
    return acc / float(n)


def _c_full(s, z, n):
    """-(1/n) sum_{k=0}^{n-1} (k+1) s_{n-k-1} z_{k+1}."""
    acc = Interval(0.0)
    for k in range(n):
        acc = acc + s[n - k - 1] * z[k + 1] * float(k + 1)
    return -acc / float(n)


def homological_step(alpha, kind, lam_n, c, z, n):
    """Solve [Df(0) - lam^n I] p_n = rhs_n; returns (p_n, S_n)."""
    S = _s_partial(c, z, n)
    lin = _lin(kind, alpha)
    A = IMat([[lin[0][0] - lam_n, Interval(lin[0][1])],
              [Interval(lin[1][0]), lin[1][1] - lam_n]])
    try:
        Ainv = imat_inverse(A)
    except IntervalError as exc:
        raise ChartError(f"homological equation at order {n} not solvable: {exc}") from None
    return Ainv @ IVec(_rhs(kind, alpha, S)), S


def compute_coefficients(alpha, kind=UNSTABLE, N=DEFAULT_N, scale=None, nu=DEFAULT_NU):
    """Interval Taylor coefficients of the chart up to order N (unvalidated)."""
    if kind not in (UNSTABLE, STABLE):
        raise ValueError(f"unknown chart kind {kind!r}")
    if N < 2:
        raise ValueError("N must be at least 2")
    alpha = float(alpha)
    if scale is None:
        scale = auto_scale(alpha, kind, N)
    xi, lam = _unit_eigvec(alpha, kind)
    mu = 1.0 / lam
    # p0 is the fixed point at the origin
    p = [IVec([Interval(0.0), Interval(0.0)]), xi.scale(float(scale))]
    z = [Interval(0.0), _composition_arg(kind, p[1][0], p[1][1])]
    s = [Interval(0.0).sin(), None]
    c = [Interval(0.0).cos(), None]
    s[1] = c[0] * z[1]
    c[1] = -(s[0] * z[1])
    lam_n = lam
    for n in range(2, N + 1):
        lam_n = lam_n * lam
        pn, S = homological_step(alpha, kind, lam_n, c, z, n)
        p.append(pn)
        z.append(_composition_arg(kind, pn[0], pn[1]))
        s.append(c[0] * z[n] + S)
        c.append(_c_full(s, z, n))
    return ParamChart(alpha, kind, N, scale, p, s, c, lam, mu, xi, nu)


def taylor_constants(alpha, kind, R, r_star):
    """C1, C2, C3 bounding the first-order Taylor remainder of F (or F^-1).

    Forward map: C1 = |a| e^R (e^r* + 1)/2, C2 = 2 C1, C3 = 2 + |a| e^R;
    the C2 bound is sound for r* <= 2.  Inverse map: the same shapes with
    e^(2M) and e^(2 r*), C3 = max(2, 1 + 2|a| e^M), where
    M = max(2R, ln(2(1 + r*))) covers |z1 - z2| <= 2R and the polynomial
    factors from the remainder estimates.
    """
    if not (0.0 < r_star < R):
        raise ValueError("need 0 < r_star < R")
    a = Interval(abs(float(alpha)))
    Rr = Interval(R)
    rs = Interval(r_star)
    if kind == UNSTABLE:
        if r_star > 2.0:
            raise ValueError("forward-map constants need r_star <= 2")
        eR = Rr.exp()
        C1 = a * eR * (rs.exp() + 1.0) * 0.5
        C2 = a * eR * (rs.exp() + 1.0)
        C3 = a * eR + 2.0
    else:
        Mt = Interval(max(2.0 * R, Interval(2.0 * (1.0 + r_star)).log().hi))
        Mt = Interval(Mt.hi)
        e2M = (Mt * 2.0).exp()
        C1 = a * e2M * ((rs * 2.0).exp() + 1.0) * 0.5
        C2 = a * e2M * ((rs * 2.0).exp() + 1.0)
        c3 = a * Mt.exp() * 2.0 + 1.0
        C3 = Interval(max(2.0, c3.lo), max(2.0, c3.hi))
    return TaylorConstants(float(R), float(r_star), C1, C2, C3, kind)


def defect_terms(chart):
    """(K_hat, e_N) of the defect lemma for g(s) = z-part of P^N(mu s)."""
    N = chart.N
    mu = chart.mu
    beta = [Interval(0.0)] * (N + 1)
    sl = [Interval(0.0)] * (N + 1)
    cl = [Interval(0.0)] * (N + 1)
    mu_n = Interval(1.0)
    for n in range(N + 1):
        a, b = chart.coeffs[n]
        beta[n] = _composition_arg(chart.kind, a, b) * mu_n
        sl[n] = chart.sin_coeffs[n] * mu_n
        cl[n] = chart.cos_coeffs[n] * mu_n
        mu_n = mu_n * mu
    K = Interval(0.0)
    for n in range(N):
        K = K + abs(beta[n + 1]) * float(n + 1)
    es = Interval(0.0)
    ec = Interval(0.0)
    for n in range(N + 1, 2 * N + 1):
        ts = Interval(0.0)
        tc = Interval(0.0)
        # only s_j, c_j with j <= N enter: the lemma works with s^N, c^N
        for k in range(max(0, n - 1 - N), min(n - 1, N - 1) + 1):
            w = beta[k + 1] * float(k + 1)
            ts = ts + sl[n - k - 1] * w
            tc = tc + cl[n - k - 1] * w
        es = es + abs(ts / float(n))
        ec = ec + abs(tc / float(n))
    return K, Interval(max(es.hi, ec.hi))


def defect_lemma_bound(K, e_N, N):
    """e_N / (1 - K/(N+2)), or an error when the lemma does not apply."""
    q = K / float(N + 2)
    if not q.hi < 1.0:
        raise ValidationError(
            "defect_lemma",
            "defect lemma inapplicable, reduce scale or raise N "
            f"(K/(N+2) <= {q.hi!r})")
    return (e_N / (1.0 - q)).hi


def defect_bound(chart):
    """Rigorous bound eps_N for the conjugacy defect on the unit disk."""
    K, e_N = defect_terms(chart)
    bound = defect_lemma_bound(K, e_N, chart.N)
    return (Interval(abs(chart.alpha)) * bound).hi


def coefficient_sum(chart):
    """Upper bound of sum_{n>=1} |mu|^n ||p_n||."""
    acc = Interval(0.0)
    mu = chart.lam
    mu_n = Interval(1.0)
    for n in range(1, chart.N + 1):
        mu_n = mu_n * mu
        mag = max(chart.coeffs[n][0].mag(), chart.coeffs[n][1].mag())
        acc = acc + mu_n * mag
    return acc.hi


def default_radii(chart):
    """(R, r*) from the size of P^N(mu D): R a little above the coefficient sum."""
    S = coefficient_sum(chart)
    R = max(1.25 * S, S + 0.05)
    r_star = min(1.0, 0.5 * R)
    return R, r_star


def radii_polynomial(consts, mu, N, eps, r):
    """p(r) = C2 |mu|^(2(N+1)) r^2 - (1 - C3 |mu|^(N+1)) r + eps."""
    m = abs(mu) ** (N + 1)
    rr = Interval(r)
    return consts.C2 * m.sqr() * rr.sqr() - (1.0 - consts.C3 * m) * rr + eps


def _next_float(x, up=True):
    return math.nextafter(x, math.inf if up else -math.inf)


def smallest_valid_radius(consts, mu, N, eps):
    """Smallest float r > 0 with p(r) < 0 rigorously, and r <= r*."""
    m = abs(mu) ** (N + 1)
    a = (consts.C2 * m.sqr()).midpoint()
    b = (1.0 - consts.C3 * m).midpoint()
    disc = b * b - 4.0 * a * eps
    guess = 2.0 * eps / (b + math.sqrt(max(disc, 0.0))) if eps > 0.0 else 0.0

    def ok(r):
        return r > 0.0 and radii_polynomial(consts, mu, N, eps, r).hi < 0.0

    hi = max(guess, 5e-324)
    bump = 2.0 ** -40
    while not ok(hi):
        hi = max(hi * (1.0 + bump), _next_float(hi))
        bump *= 2.0
        if hi > consts.r_star:
            return None
    lo = 0.0
    # bisection over the ordered float bit patterns between lo (fails) and hi
    import struct

    def bits(x):
        return struct.unpack("<q", struct.pack("<d", x))[0]

    def unbits(k):
        return struct.unpack("<d", struct.pack("<q", k))[0]

    klo, khi = bits(lo), bits(hi)
    while khi - klo > 1:
        kmid = (klo + khi) // 2
        if ok(unbits(kmid)):
            khi = kmid
        else:
            klo = kmid
    return unbits(khi)


def validate_chart(chart, constants=None):
    """Check the a-posteriori hypotheses and set r_valid, deriv_tail, C."""
    if constants is None:
        R, r_star = default_radii(chart)
        constants = taylor_constants(chart.alpha, chart.kind, R, r_star)
    N = chart.N
    S = coefficient_sum(chart)
    if not S < constants.R:
        raise ValidationError("PN_bound", f"sum |mu|^n ||p_n|| = {S!r} is not below R = {constants.R!r}")
    m = chart.lam ** (N + 1)
    lhs = constants.C2 * m.sqr() * 4.0
    b = 1.0 - constants.C3 * m
    if not (b.lo > 0.0 and lhs.hi < b.sqr().lo):
        raise ValidationError("discriminant", "4 C2 |mu|^(2(N+1)) < (1 - C3 |mu|^(N+1))^2 fails")
    eps = defect_bound(chart)
    r = smallest_valid_radius(constants, chart.lam, N, eps)
    if r is None or r > constants.r_star:
        raise ValidationError("r_star", "no r <= r* satisfies the radii polynomial")
    chart.eps_N = eps
    chart.constants = constants
    chart.r_valid = r
    chart.deriv_tail = (TWO_PI / Interval(chart.nu) * r).hi
    chart.C = chart.tail_constant(1.0)
    return chart


def param_chart(alpha, kind=UNSTABLE, N=DEFAULT_N, scale=None, nu=DEFAULT_NU, constants=None):
    """Compute and validate a chart in one go."""
    return validate_chart(compute_coefficients(alpha, kind, N, scale, nu), constants)


def replay_coefficients(chart):
    """Recompute every p_n, s_n, c_n from the stored lower orders.

    If the stored orders below n contain the exact coefficients, so does the
    recomputed order n; requiring it to lie inside the stored order n
    carries the induction.  Returns the first failing order or ``None``.
    """
    kind, alpha = chart.kind, chart.alpha
    lam = chart.eigenvalue
    p = chart.coeffs
    z = [_composition_arg(kind, q[0], q[1]) for q in p]
    s, c = chart.sin_coeffs, chart.cos_coeffs
    if not (p[0][0] == Interval(0.0) and p[0][1] == Interval(0.0)):
        return 0
    if not (Interval(0.0).sin().subseteq(s[0]) and Interval(0.0).cos().subseteq(c[0])):
        return 0
    if not ((c[0] * z[1]).subseteq(s[1]) and (-(s[0] * z[1])).subseteq(c[1])):
        return 1
    lam_n = lam
    for n in range(2, chart.N + 1):
        lam_n = lam_n * lam
        pn, S = homological_step(alpha, kind, lam_n, c, z, n)
        if not pn.subseteq(p[n]):
            return n
        if not (c[0] * z[n] + S).subseteq(s[n]) or not _c_full(s, z, n).subseteq(c[n]):
            return n
    return None
