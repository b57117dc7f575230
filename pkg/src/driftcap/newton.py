"""Interval Newton operator, parallel shooting, homoclinic verification."""

import math
from dataclasses import dataclass, field

from .interval import EMPTY, TWO_PI, IMat, IVec, Interval, IntervalError, imat_inverse

UNIQUE = "unique_root"
NO_ROOT = "no_root"
INCONCLUSIVE = "inconclusive"


class HomoclinicError(RuntimeError):
    """Raised when the shooting system cannot be verified."""

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


@dataclass
class NewtonVerdict:
    status: str
    refined_box: IVec
    newton_image: IVec
    iterations: int = 0
    widths: list = field(default_factory=list)
    reason: str = ""

    @property
    def unique(self):
        return self.status == UNIQUE


def newton_step(fn, jac, box, x0):
    """N(x0, X) = x0 - [DF(X)]^-1 f(x0)."""
    jinv = imat_inverse(jac(box))
    fx = fn(IVec.from_points(x0))
    return IVec.from_points(x0) - jinv @ fx


def interval_newton(fn, jac, box, x0=None, max_iter=50, stall=0.9):
    """Run the interval Newton iteration on ``box``.

    ``fn`` maps an IVec to an IVec (point inputs are passed as degenerate
    intervals) and ``jac`` maps a box to the interval Jacobian over it.
    A strict inclusion N(x0, X_k) in int X_k proves a unique zero in the
    input box.  After that the box is refined until its width stalls.
    """
    box = IVec(box)
    if x0 is None:
        x0 = box.midpoint()
    if not box.contains(x0):
        raise ValueError("x0 must lie in the box")
    current = box
    proved = False
    image = None
    widths = [current.radius()]
    for it in range(1, max_iter + 1):
        try:
            n_img = newton_step(fn, jac, current, x0)
        except IntervalError as exc:
            status = UNIQUE if proved else INCONCLUSIVE
            return NewtonVerdict(status, current, image if proved else current,
                                 it, widths, str(exc))
        if not proved and n_img.subset(current):
            proved = True
            image = n_img
        nxt = current.intersect(n_img)
        if nxt is EMPTY:
            if proved:
                # cannot happen in exact arithmetic; refuse to claim anything
                return NewtonVerdict(INCONCLUSIVE, current, n_img, it, widths,
                                     "empty refinement after proof")
            return NewtonVerdict(NO_ROOT, current, n_img, it, widths, "N(x0,X) misses X")
        old = current.radius()
        current = nxt
        widths.append(current.radius())
        x0 = current.midpoint()
        if proved and current.radius() >= stall * old:
            break
    if proved:
        return NewtonVerdict(UNIQUE, current, image, it, widths)
    return NewtonVerdict(INCONCLUSIVE, current, current, it, widths,
                         "no strict inclusion within the iteration budget")


# -- parallel shooting for a homoclinic orbit ---------------------------------

# Primary homoclinic orbit of the standard map at alpha = 4, M = 10:
# an initial guess only; verified enclosures are authoritative.
TABULATED_GUESS = (
    (0.003855589164542, 0.003194074612644),
    (0.022471982225036, 0.018616393060494),
    (0.130968738959384, 0.108496756734347),
    (0.761844080808229, 0.630875341848845),
    (4.153747139236954, 3.391903058428725),
    (4.153747139236954, 0.000000000000001),
    (0.761844080808229, -3.391903058428725),
    (0.130968738959384, -0.630875341848845),
    (0.022471982225036, -0.108496756734347),
    (0.003855589164542, -0.018616393060494),
    (0.000661514551898, -0.003194074612644),
)


@dataclass
class HomoclinicEnclosure:
    """Boxes v_0..v_M around a transversal homoclinic orbit of the origin.

    ``x_star`` / ``y_star`` enclose the chart parameters of v_0 on the
    unstable chart and of v_M - (2 pi shift, 0) on the stable chart; a
    nonzero ``shift`` means the orbit is homoclinic on the cylinder, where
    (2 pi k, 0) and the origin are the same saddle.  ``tails`` carries the
    chart constants giving ||F^-n(v_0)|| <= C_u lam_u^n and
    ||F^n(v_M)|| <= C_s lam_s^n.  ``initial_box``, ``x0`` and
    ``newton_box`` record the Newton run so that it can be replayed.
    """

    boxes: list
    x_star: Interval
    y_star: Interval
    radius: float
    transversal: bool
    M: int
    alpha: float
    backend: str = ""
    tails: dict = field(default_factory=dict)
    iterations: int = 0
    shift: int = 0
    initial_box: IVec = None
    x0: list = None
    newton_box: IVec = None

    def midpoints(self):
        return [tuple(b.midpoint()) for b in self.boxes]

    def x_components(self):
        return [b[0] for b in self.boxes]


def _unpack(z, M):
    x = z[0]
    vs = [IVec([z[1 + 2 * i], z[2 + 2 * i]]) for i in range(M)]
    y = z[2 * M + 1]
    return x, vs, y


def _shift_vec(shift):
    return IVec([TWO_PI * float(shift), Interval(0.0)])


def shooting_system(Pu, Ps, M, alpha, shift=0):
    """F(x, v_0..v_{M-1}, y) = (P_u(x) - v_0, F(v_i) - v_{i+1}, F(v_{M-1}) - P_s(y)).

    With ``shift`` = k the last block targets P_s(y) + (2 pi k, 0).
    Returns ``(fn, jac)`` on IVec arguments of length 2M+2.
    """
    from .maps import d_std_map, std_map

    n = 2 * M + 2
    offset = _shift_vec(shift)

    def fn(z):
        x, vs, y = _unpack(z, M)
        out = list(Pu.eval(x) - vs[0])
        for i in range(M - 1):
            out.extend(std_map(vs[i], alpha) - vs[i + 1])
        out.extend(std_map(vs[M - 1], alpha) - (Ps.eval(y) + offset))
        return IVec(out)

    def jac(z):
        x, vs, y = _unpack(z, M)
        rows = [[Interval(0.0)] * n for _ in range(n)]
        du = Pu.deriv(x)
        for k in range(2):
            rows[k][0] = du[k]
            rows[k][1 + k] = Interval(-1.0)
        for i in range(M):
            d = d_std_map(vs[i], alpha)
            r0 = 2 + 2 * i
            c0 = 1 + 2 * i
            for a in range(2):
                for b in range(2):
                    rows[r0 + a][c0 + b] = d[a, b]
            if i < M - 1:
                rows[r0][c0 + 2] = Interval(-1.0)
                rows[r0 + 1][c0 + 3] = Interval(-1.0)
        ds = Ps.deriv(y)
        for k in range(2):
            rows[2 * M + k][n - 1] = -ds[k]
        return IMat(rows)

    return fn, jac


def initial_box(Pu, Ps, guess, inflation=1e-5, shift=0):
    M = len(guess) - 1
    x0 = Pu.coordinate_of(guess[0])
    y0 = Ps.coordinate_of((guess[M][0] - 2.0 * math.pi * shift, guess[M][1]))
    mids = [x0]
    for v in guess[:M]:
        mids.extend(float(c) for c in v)
    mids.append(y0)
    box = IVec(Interval(m).inflate(inflation) for m in mids)
    for s, chart, name in ((box[0], Pu, "unstable"), (box[-1], Ps, "stable")):
        if not s.subseteq(chart.domain) or not s.subseteq(chart.deriv_domain):
            raise HomoclinicError(
                f"guess endpoint parameter {s} lies outside the {name} chart domain",
                component=0 if name == "unstable" else 2 * M + 1)
    return box, mids


def verify_homoclinic(Pu, Ps, guess, alpha, inflation=1e-5, max_iter=50, shift=0):
    """Interval Newton on the shooting system around ``guess`` (M+1 points).

    A unique root proves that the orbit exists and, since [DF] was
    verifiably invertible on the box, that the manifolds cross transversally.
    """
    M = len(guess) - 1
    box, mids = initial_box(Pu, Ps, guess, inflation, shift)
    fn, jac = shooting_system(Pu, Ps, M, alpha, shift)
    verdict = interval_newton(fn, jac, box, mids, max_iter=max_iter)
    if not verdict.unique:
        comp = None
        img = verdict.newton_image
        for i, (a, b) in enumerate(zip(img, verdict.refined_box)):
            if not a.subset(b):
                comp = i
                break
        raise HomoclinicError(
            f"interval Newton {verdict.status} ({verdict.reason}); "
            f"first offending component {comp}", component=comp)
    from .maps import std_map

    z = verdict.refined_box
    x, vs, y = _unpack(z, M)
    last = std_map(vs[M - 1], alpha).intersect(Ps.eval(y) + _shift_vec(shift))
    if last is EMPTY:
        raise HomoclinicError("final point misses the stable chart", component=2 * M)
    boxes = vs + [last]
    radius = max(b.radius() for b in boxes)
    tails = {
        "C_u": Pu.tail_constant(x.mag()), "lam_u": Pu.lam,
        "C_s": Ps.tail_constant(y.mag()), "lam_s": Ps.lam,
    }
    return HomoclinicEnclosure(
        boxes=boxes, x_star=x, y_star=y, radius=radius, transversal=True, M=M,
        alpha=float(alpha), backend=Pu.backend, tails=tails,
        iterations=verdict.iterations, shift=shift, initial_box=box, x0=list(mids),
        newton_box=z)


def transversality_determinant(enc, Pu, Ps):
    """det(DF^M t_u, t_s) enclosure for the chart tangents at the endpoints."""
    from .maps import d_std_map

    t = Pu.deriv(enc.x_star)
    for b in enc.boxes[:-1]:
        t = d_std_map(b, enc.alpha) @ t
    s = Ps.deriv(enc.y_star)
    return t[0] * s[1] - t[1] * s[0]


def symmetric_guess(chart, M, alpha, s_max=None, samples=4000):
    """Float guess v_0..v_M for a reversible homoclinic orbit.

    The map is reversible under R0(x, y) = (x - y, -y) and under
    R1(x, y) = (2 pi - x, y + alpha sin x).  An orbit whose middle point
    v_{M/2} lies on Fix(R0) = {y = 0} is homoclinic to the origin; one with
    v_{M/2} on Fix(R1) = {x = pi} ends near (2 pi, 0), the same saddle on
    the cylinder.  The smallest positive chart parameter giving such a
    middle point is used, R0 first.  Returns ``(points, shift)``.
    """
    from scipy.optimize import brentq

    from .maps import std_map

    if M % 2:
        raise ValueError("symmetric guesses need an even M")
    half = M // 2
    s_max = chart.deriv_domain.hi if s_max is None else s_max

    def forward(s):
        p = chart.point(s)
        for _ in range(half):
            p = std_map(p, alpha)
        return p

    conditions = (
        (lambda p: p[1], lambda p: (p[0] - p[1], -p[1]), 0),
        (lambda p: p[0] - math.pi,
         lambda p: (2.0 * math.pi - p[0], p[1] + alpha * math.sin(p[0])), 1),
    )
    grid = [s_max * (1e-7 / s_max) ** (1.0 - i / (samples - 1)) for i in range(samples)]
    for cond, reflect, shift in conditions:
        vals = [cond(forward(s)) for s in grid]
        for i in range(samples - 1):
            if not (math.isfinite(vals[i]) and math.isfinite(vals[i + 1])):
                continue
            if vals[i] * vals[i + 1] < 0.0:
                s = brentq(lambda t: cond(forward(t)), grid[i], grid[i + 1], xtol=1e-18)
                pts = [chart.point(s)]
                for _ in range(half):
                    pts.append(std_map(pts[-1], alpha))
                for j in range(1, half + 1):
                    pts.append(reflect(pts[half - j]))
                return [tuple(p) for p in pts], shift
    raise HomoclinicError(f"no reversible homoclinic guess with M={M} in the chart reach")
