"""The standard map, its inverse, the coupled 4D family and Jordan coordinates.

Points are plain float tuples, boxes are ``IVec``.  Every function accepts
either and evaluates with the matching arithmetic, so a point image always
lies inside the box image of any box containing the point.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .interval import (
    TWO_PI,
    IMat,
    IVec,
    Interval,
    IntervalError,
    cos,
    imat_inverse,
    sin,
)


def _is_box(p):
    return isinstance(p, IVec) or any(isinstance(v, Interval) for v in p)


def _pack(p, values):
    if _is_box(p):
        return IVec(values)
    return tuple(values)


# -- the standard map ---------------------------------------------------------

def std_map(p, alpha):
    """F(x, y) = (x + y + alpha sin x, y + alpha sin x)."""
    x, y = p
    k = alpha * sin(x)
    yn = y + k
    return _pack(p, (x + yn, yn))


def std_map_inv(p, alpha):
    """F^-1(X, Y) = (X - Y, Y - alpha sin(X - Y))."""
    X, Y = p
    x = X - Y
    return _pack(p, (x, Y - alpha * sin(x)))


def d_std_map(p, alpha):
    x, _ = p
    c = alpha * cos(x)
    if _is_box(p):
        return IMat([[c + 1.0, 1.0], [c, 1.0]])
    return np.array([[1.0 + c, 1.0], [c, 1.0]])


def d_std_map_inv(p, alpha):
    X, Y = p
    c = alpha * cos(X - Y)
    if _is_box(p):
        return IMat([[1.0, -1.0], [-c, c + 1.0]])
    return np.array([[1.0, -1.0], [-c, 1.0 + c]])


def iterate(p, alpha, n):
    """Float orbit p, F(p), ..., F^n(p) (negative n iterates F^-1)."""
    out = [tuple(p)]
    step = std_map if n >= 0 else std_map_inv
    for _ in range(abs(n)):
        out.append(step(out[-1], alpha))
    return out


# -- the saddle at the origin -------------------------------------------------

@dataclass(frozen=True)
class SaddleEigen:
    """Certified eigen-data of DF(0) = [[1+a, 1], [a, 1]].

    Eigenvectors are normalized to (v, 2); ``P`` has columns
    (unstable, stable) and conjugates DF(0) to diag(lam_u, lam_s).
    """

    alpha: float
    lam_u: Interval
    lam_s: Interval
    vec_u: IVec
    vec_s: IVec
    P: IMat
    P_inv: IMat


def _eigen_system(alpha):
    # unknowns (v, t):  DF(0) (v, 2) = t (v, 2)
    def fn(z):
        v, t = z
        return IVec([(1.0 + alpha) * v + 2.0 - t * v, alpha * v + 2.0 - 2.0 * t])

    def jac(z):
        v, t = z
        return IMat([[(1.0 + alpha) - t, -v], [Interval(alpha), Interval(-2.0)]])

    return fn, jac


def _certify_eigenpair(alpha, t_guess):
    from .newton import interval_newton

    v_guess = 2.0 / (t_guess - 1.0 - alpha)
    fn, jac = _eigen_system(alpha)
    r = 1e-8 * max(1.0, abs(v_guess), abs(t_guess))
    box = IVec([Interval(v_guess).inflate(r), Interval(t_guess).inflate(r)])
    verdict = interval_newton(fn, jac, box)
    if not verdict.unique:
        raise IntervalError(f"eigenpair near {t_guess!r} not verified: {verdict.status}")
    v, t = verdict.refined_box
    return t, IVec([v, Interval(2.0)])


@lru_cache(maxsize=32)
def saddle_eigen(alpha):
    """Eigenvalues and eigenvectors of DF(0) via interval Newton."""
    alpha = float(alpha)
    if alpha == 0.0:
        raise ValueError("alpha must be nonzero")
    tr = 2.0 + alpha
    disc = tr * tr - 4.0
    if disc <= 0.0:
        raise ValueError("the origin is not a saddle for this alpha")
    root = math.sqrt(disc)
    if tr > 0:
        tu = 0.5 * (tr + root)
    else:
        tu = 0.5 * (tr - root)
    ts = 1.0 / tu
    lam_u, vec_u = _certify_eigenpair(alpha, tu)
    lam_s, vec_s = _certify_eigenpair(alpha, ts)
    P = IMat([[vec_u[0], vec_s[0]], [vec_u[1], vec_s[1]]])
    return SaddleEigen(alpha, lam_u, lam_s, vec_u, vec_s, P, imat_inverse(P))


def closed_form_eigen(alpha):
    """Closed-form enclosures t = ((2+a) +- sqrt(a^2 + 4a)) / 2, as a cross-check."""
    a = Interval(alpha)
    root = (a.sqr() + 4.0 * a).sqrt()
    return (2.0 + a + root) * 0.5, (2.0 + a - root) * 0.5


GOLDEN_RATIO = (Interval(5.0).sqrt() + 1.0) * 0.5


@dataclass(frozen=True)
class MapParams:
    alpha: float = 4.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.alpha == 0.0:
            raise ValueError("alpha must be nonzero")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be non-negative")

    @property
    def eigen(self):
        return saddle_eigen(self.alpha)

    @property
    def lambda_in(self):
        return self.eigen.lam_s

    @property
    def mu_tangential(self):
        # recorded only: the inner rotation's rate
        return GOLDEN_RATIO


# -- Jordan coordinates ---------------------------------------------------------

def jordan_conjugate(z, alpha, inverse=False):
    """F~(z) = P^-1 F(P z), or P^-1 F^-1(P z) with ``inverse``."""
    eig = saddle_eigen(alpha)
    w = eig.P @ IVec(z)
    w = std_map_inv(w, alpha) if inverse else std_map(w, alpha)
    return eig.P_inv @ w


def d_jordan_conjugate(box, alpha, inverse=False):
    """[DF~(B)] = P^-1 [DF(P B)] P."""
    eig = saddle_eigen(alpha)
    w = eig.P @ IVec(box)
    d = d_std_map_inv(w, alpha) if inverse else d_std_map(w, alpha)
    return eig.P_inv @ d @ eig.P


# -- the coupled map on R^2 x T^2 ---------------------------------------------

def reduce_angle(a):
    """Reduce to [0, 2pi).  Boxes straddling the wrap are rejected."""
    if not isinstance(a, Interval):
        r = math.fmod(a, 2.0 * math.pi)
        return r + 2.0 * math.pi if r < 0.0 else r
    if a.lo >= 0.0 and a.hi < TWO_PI.lo:
        return a
    k = math.floor(a.lo / TWO_PI.midpoint())
    out = a - TWO_PI * float(k)
    if out.lo < 0.0:
        out = out + TWO_PI
        k -= 1
    if out.hi >= TWO_PI.lo:
        raise IntervalError("angle box straddles the wrap at 0 = 2pi; split it first")
    return out


@dataclass(frozen=True)
class PhasePoint4:
    x: float
    y: float
    theta: float
    action: float

    def __post_init__(self):
        object.__setattr__(self, "theta", reduce_angle(self.theta))
        object.__setattr__(self, "action", reduce_angle(self.action))

    def __iter__(self):
        return iter((self.x, self.y, self.theta, self.action))


@dataclass(frozen=True)
class PhaseBox4:
    x: Interval
    y: Interval
    theta: Interval
    action: Interval

    def __post_init__(self):
        for name in ("theta", "action"):
            v = getattr(self, name)
            if v.width() >= TWO_PI.lo:
                raise IntervalError(f"{name} box is wider than the circle")
            object.__setattr__(self, name, reduce_angle(v))

    def __iter__(self):
        return iter((self.x, self.y, self.theta, self.action))


def perturbation_g(p):
    x, _, th, _ = p
    a = cos(x) * sin(th)
    b = sin(x) * cos(th)
    return (a, a, b, b)


def _unreduced(p, alpha, epsilon):
    x, y, th, act = p
    X, Y = std_map((x, y), alpha)
    out = [X, Y, th + act, act]
    if epsilon != 0.0:
        out = [o + epsilon * gi for o, gi in zip(out, perturbation_g(p))]
    return out


def coupled_map(p, params):
    """f_eps = f_0 + eps g with f_0 = (F(x, y), theta + I, I)."""
    out = _unreduced(p, params.alpha, params.epsilon)
    if isinstance(p, PhaseBox4) or any(isinstance(v, Interval) for v in p):
        out = [v if isinstance(v, Interval) else Interval(v) for v in out]
        return PhaseBox4(*out)
    return PhasePoint4(*out)


def inner_rotation(theta, action, n):
    """f_0 restricted to {x = y = 0}, iterated n times: (theta + n I, I)."""
    return theta + action * float(n), action
