"""Strip certification on the invariant torus {x = y = 0}.

A rectangle [s1, s2] x [I1, I2] (the theta-arc may wrap) is certified by
bisecting it into sub-boxes until, on each one,

* the orbit sum C_M = sum_{i<M} sin(x_i*) cos(theta + i I) clears the
  threshold 3 (1 + lam) / (1 - lam) C (above it for S+, below minus it
  for S-), and
* some m in [M, m_max] sends the sub-box back into the open arc
  (s1, s2) under the inner rotation (theta, I) -> (theta + I, I).

Sub-boxes are named by their bisection path: L/R halve theta, D/U halve I.
Replay rebuilds every sub-box from the rectangle and its path, so the
stored leaves can be checked to tile the rectangle exactly.
"""

import math
from dataclasses import dataclass, field

from .interval import TWO_PI, Interval, sin, sum_intervals
from . import kernels

PLUS = "plus"
MINUS = "minus"

LIPSCHITZ_G = 2.0
DEFAULT_M_MAX = 200
DEFAULT_N_MAX = 2000
DEFAULT_DEPTH_MAX = 12
DEFAULT_SLAB = 0.05
SCAN_CELLS = 128
# split I rather than theta once I is this many times narrower than needed
ACTION_WEIGHT = 16.0


class StripError(RuntimeError):
    """A strip hypothesis could not be certified.

    ``stage`` is one of "sum", "return", "coverage", "transfer" and
    ``box`` the offending (theta, I) box or uncovered action interval.
    """

    def __init__(self, message, stage, box=None):
        super().__init__(message)
        self.stage = stage
        self.box = box


def _sign_value(sign):
    if sign == PLUS:
        return 1.0
    if sign == MINUS:
        return -1.0
    raise ValueError(f"unknown strip sign {sign!r}")


# -- the orbit sum ----------------------------------------------------------

def threshold(lam, C):
    """3 (1 + lam) / (1 - lam) C as an interval."""
    lam = lam if isinstance(lam, Interval) else Interval(lam)
    if not lam.hi < 1.0:
        raise ValueError("the tail rate must be below one")
    return (1.0 + lam) / (1.0 - lam) * 3.0 * Interval(C)


def sum_weights(hom):
    """sin(x_i*) for i = 0..M-1 from the homoclinic boxes."""
    return [sin(b[0]) for b in hom.boxes[: hom.M]]


def orbit_sum(hom, theta, action):
    """Enclosure of C_M over the box ``theta`` x ``action``.

    ``hom`` is a HomoclinicEnclosure or a precomputed list of weights.  The
    natural enclosure is intersected with the mean-value form around the
    box midpoint, which is much tighter once the box is small.  This is the
    reference evaluation; the kernels' ``sum_bounds`` only screens boxes.
    """
    weights = hom if isinstance(hom, (list, tuple)) else sum_weights(hom)
    theta = theta if isinstance(theta, Interval) else Interval(theta)
    action = action if isinstance(action, Interval) else Interval(action)
    args = [theta + action * float(i) for i in range(len(weights))]
    natural = sum_intervals(w * a.cos() for w, a in zip(weights, args))
    if theta.is_point() and action.is_point():
        return natural
    tm, am = Interval(theta.midpoint()), Interval(action.midpoint())
    centre = sum_intervals(w * (tm + am * float(i)).cos() for i, w in enumerate(weights))
    sines = [w * a.sin() for w, a in zip(weights, args)]
    d_theta = -sum_intervals(sines)
    d_action = -sum_intervals(s * float(i) for i, s in enumerate(sines))
    mean_value = centre + d_theta * (theta - tm) + d_action * (action - am)
    return natural.intersect(mean_value)


def _screen(packed, theta, action, tight=True):
    return Interval(*kernels.sum_bounds(*packed, theta.lo, theta.hi, action.lo, action.hi, tight))


def clears(value, sign, thr):
    """Strict sum inequality for the given strip sign."""
    if sign == PLUS:
        return value.lo > thr.hi
    return value.hi < -thr.hi


# -- rectangles ---------------------------------------------------------------

@dataclass
class SubBox:
    path: str
    theta: Interval
    action: Interval
    sum: Interval
    m: int


@dataclass
class StripRect:
    theta: Interval
    action: Interval
    sign: str
    boxes: list = field(default_factory=list)

    @property
    def sum_bound(self):
        return Interval.hull_of([b.sum for b in self.boxes])

    @property
    def return_witnesses(self):
        return [b.m for b in self.boxes]

    @property
    def arc(self):
        return self.theta.lo, self.theta.hi


@dataclass
class Strip:
    sign: str
    rects: list
    action_span: Interval

    def boxes(self):
        for k, rect in enumerate(self.rects):
            for b in rect.boxes:
                yield k, b


def split(theta, action, code):
    """Child box along one bisection step; both halves share the float midpoint."""
    if code in "LR":
        mid = 0.5 * (theta.lo + theta.hi)
        theta = Interval(theta.lo, mid) if code == "L" else Interval(mid, theta.hi)
    elif code in "DU":
        mid = 0.5 * (action.lo + action.hi)
        action = Interval(action.lo, mid) if code == "D" else Interval(mid, action.hi)
    else:
        raise ValueError(f"bad path code {code!r}")
    return theta, action


def box_at(theta, action, path):
    for code in path:
        theta, action = split(theta, action, code)
    return theta, action


def _split_codes(theta, action):
    if action.width() * ACTION_WEIGHT > theta.width():
        return "DU"
    return "LR"


def check_rect(weights, theta, action, sign, thr, M=10, m_max=DEFAULT_M_MAX,
               depth_max=DEFAULT_DEPTH_MAX):
    """Certify one rectangle; raises StripError with the first bad sub-box."""
    _sign_value(sign)
    if not (0.0 < action.lo and action.hi < TWO_PI.lo):
        raise ValueError("the action interval must lie in (0, 2 pi)")
    if not theta.width() < TWO_PI.lo:
        raise ValueError("the theta arc must be shorter than the circle")
    s1, s2 = theta.lo, theta.hi
    packed = kernels.pack_weights(weights)
    out = []
    stack = [""]
    while stack:
        path = stack.pop()
        t, a = box_at(theta, action, path)
        ok = clears(_screen(packed, t, a), sign, thr)
        m = -1
        if ok:
            m = kernels.find_return(t.lo, t.hi, a.lo, a.hi, s1, s2, M, m_max)
        if ok and m >= 0:
            # the stored enclosure comes from the interval module
            value = orbit_sum(weights, t, a)
            if clears(value, sign, thr):
                out.append(SubBox(path, t, a, value, m))
                continue
            ok = False
        if len(path) >= depth_max:
            stage = "sum" if not ok else "return"
            raise StripError(
                f"{stage} condition fails on theta={t}, I={a} at depth {depth_max}",
                stage, (t, a))
        lo_code, hi_code = _split_codes(t, a)
        stack.append(path + hi_code)
        stack.append(path + lo_code)
    out.sort(key=lambda b: (b.action.lo, b.theta.lo, b.path))
    return StripRect(theta, action, sign, out)


def scan_arc(weights, action, sign, thr, cells=SCAN_CELLS):
    """Longest cyclic run of theta-cells on which the sum enclosure clears the
    threshold for the whole action interval, as (s1, s2) with s1 in [0, 2 pi).

    The cheap natural enclosure is tried first, the mean-value one if that
    finds no run of two cells.  Only the kernels are used here: the arc is
    a placement choice, and check_rect certifies whatever it is given.
    """
    h = 2.0 * math.pi / cells
    packed = kernels.pack_weights(weights)
    for tight in (False, True):
        good = [clears(_screen(packed, Interval(k * h, (k + 1) * h), action, tight), sign, thr)
                for k in range(cells)]
        arc = _longest_run(good, h)
        if arc is not None:
            return arc
    return None


def _longest_run(good, h):
    cells = len(good)
    if all(good):
        return 0.0, (cells - 1) * h
    best = (0, 0)
    start = good.index(False) + 1
    run = 0
    for j in range(cells):
        k = (start + j) % cells
        if good[k]:
            run += 1
            if run > best[1]:
                best = ((k - run + 1) % cells, run)
        else:
            run = 0
    first, length = best
    if length < 2:
        return None
    return first * h, (first + length) * h


def certify_slab(weights, sign, lo, hi, thr, M=10, m_max=DEFAULT_M_MAX,
                 depth_max=DEFAULT_DEPTH_MAX, min_width=None, overlap=1.0 / 16):
    """Rectangles covering [lo, hi] in I, halving the slab on failure.

    Returns ``(rects, gaps)``; ``gaps`` lists action intervals left uncovered
    once slabs reach ``min_width``.
    """
    width = hi - lo
    if min_width is None:
        min_width = width / 64.0
    action = Interval(lo, hi)
    arc = scan_arc(weights, action, sign, thr)
    failure = None
    if arc is not None:
        try:
            rect = check_rect(weights, Interval(*arc), action, sign, thr, M, m_max, depth_max)
            return [rect], []
        except StripError as exc:
            failure = exc
    if width <= min_width:
        return [], [(lo, hi, "no arc" if failure is None else failure.stage)]
    mid = 0.5 * (lo + hi)
    pad = overlap * width / 2.0
    r1, g1 = certify_slab(weights, sign, lo, mid + pad, thr, M, m_max, depth_max,
                          min_width, overlap)
    r2, g2 = certify_slab(weights, sign, mid - pad, hi, thr, M, m_max, depth_max,
                          min_width, overlap)
    return r1 + r2, g1 + g2


def slab_grid(span, slab=DEFAULT_SLAB, overlap=1.0 / 16):
    """Overlapping nominal slabs whose union contains ``span``."""
    lo, hi = span.lo, span.hi
    n = max(1, math.ceil((hi - lo) / slab))
    h = (hi - lo) / n
    pad = overlap * h / 2.0
    out = []
    for k in range(n):
        a = lo + k * h - pad
        b = lo + (k + 1) * h + pad
        out.append((max(a, math.nextafter(0.0, 1.0)), min(b, math.nextafter(TWO_PI.lo, 0.0))))
    return out


def _slab_task(args):
    return certify_slab(*args)


def coverage_gaps(rects, span):
    """Uncovered sub-intervals of ``span`` given rectangles sorted by I.

    Consecutive rectangles must overlap strictly so that every action level
    in the span is met by some rectangle.
    """
    gaps = []
    reach = span.lo
    covered_from = None
    for rect in rects:
        a = rect.action
        if covered_from is None:
            if a.lo > span.lo:
                gaps.append((span.lo, a.lo))
            covered_from = a.lo
        elif not a.lo < reach:
            gaps.append((reach, a.lo))
        reach = max(reach, a.hi)
    if covered_from is None:
        return [(span.lo, span.hi)]
    if not reach > span.hi:
        gaps.append((reach, span.hi))
    return gaps


def assemble_strip(weights, sign, span, thr, M=10, m_max=DEFAULT_M_MAX,
                   depth_max=DEFAULT_DEPTH_MAX, slab=DEFAULT_SLAB, mapper=map):
    """Union of certified rectangles meeting every action level of ``span``.

    ``mapper`` fans the slabs out (``executor.map`` for a process pool);
    results are merged in slab order, which keeps the output deterministic.
    """
    if not (0.0 < span.lo and span.hi < TWO_PI.lo):
        raise ValueError("the action span must lie in (0, 2 pi)")
    tasks = [(weights, sign, a, b, thr, M, m_max, depth_max) for a, b in slab_grid(span, slab)]
    rects, gaps = [], []
    for r, g in mapper(_slab_task, tasks):
        rects.extend(r)
        gaps.extend(g)
    rects.sort(key=lambda r: (r.action.lo, r.action.hi, r.theta.lo))
    holes = coverage_gaps(rects, span)
    if gaps or holes:
        where = gaps[0][:2] if gaps else holes[0]
        raise StripError(
            f"{sign} strip does not cover I in [{where[0]!r}, {where[1]!r}]",
            "coverage", where)
    return Strip(sign, rects, span)


# -- transfer between strips ------------------------------------------------------

@dataclass
class TransferEntry:
    rect: int
    path: str
    theta: Interval
    action: Interval
    n: int
    target: int


def _transfer_rect(args):
    k, rect, dst_rects, n_max, depth_max = args
    out = []
    for sub in rect.boxes:
        stack = [(sub.path, 0)]
        while stack:
            path, depth = stack.pop()
            t, a = box_at(rect.theta, rect.action, path)
            cands = [j for j, d in enumerate(dst_rects) if a.subseteq(d.action)]
            if cands:
                arcs = [dst_rects[j].arc for j in cands]
                n, idx = kernels.find_transfer(t.lo, t.hi, a.lo, a.hi, arcs, 1, n_max)
                if n >= 0:
                    out.append(TransferEntry(k, path, t, a, n, cands[idx]))
                    continue
            if depth >= depth_max:
                raise StripError(
                    f"no transfer within n_max={n_max} for theta={t}, I={a}",
                    "transfer", (t, a))
            # without a candidate the I-interval straddles target boundaries
            lo_code, hi_code = ("DU" if not cands else _split_codes(t, a))
            stack.append((path + hi_code, depth + 1))
            stack.append((path + lo_code, depth + 1))
    return out


def check_transfer(src, dst, n_max=DEFAULT_N_MAX, depth_max=DEFAULT_DEPTH_MAX, mapper=map):
    """For every sub-box of ``src`` an n <= n_max landing in a ``dst`` rectangle.

    The target rectangle's action interval must contain the sub-box's.
    Sub-boxes are split further (below their certification path) on demand.
    """
    tasks = [(k, rect, dst.rects, n_max, depth_max) for k, rect in enumerate(src.rects)]
    table = []
    for part in mapper(_transfer_rect, tasks):
        table.extend(part)
    table.sort(key=lambda e: (e.rect, e.action.lo, e.theta.lo, e.path))
    return table


# -- replay checks (Interval arithmetic, independent of the kernels) ---------------

def arc_image_inside(theta, action, m, s1, s2):
    """[theta] + m [I] strictly inside the arc (s1, s2) modulo 2 pi."""
    img = theta + action * float(m)
    k = math.floor(img.lo / (2.0 * math.pi))
    img = img - TWO_PI * float(k)
    for j in (-1, 0, 1):
        shifted = img + TWO_PI * float(j)
        if shifted.lo > s1 and shifted.hi < s2:
            return True
    return False


def tiles(paths):
    """True if the bisection paths are the leaves of one complete binary tree."""
    leaves = set(paths)
    if len(leaves) != len(paths):
        return False

    def count(prefix, depth):
        if prefix in leaves:
            return 1
        if depth > 64:
            return None
        kids = {p[len(prefix)] for p in leaves if len(p) > len(prefix) and p.startswith(prefix)}
        if kids not in ({"L", "R"}, {"D", "U"}):
            return None
        total = 0
        for c in sorted(kids):
            n = count(prefix + c, depth + 1)
            if n is None:
                return None
            total += n
        return total

    return count("", 0) == len(leaves)
