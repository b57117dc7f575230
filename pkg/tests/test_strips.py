import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TABULATED
from driftcap import kernels
from driftcap import strips as S
from driftcap.interval import Interval
from driftcap.maps import saddle_eigen

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
TABLE_WEIGHTS = [Interval(x).sin() for x, _ in TABULATED[:10]]


def direct_sum(theta, action, xs=None):
    xs = [x for x, _ in TABULATED[:10]] if xs is None else xs
    return sum(math.sin(x) * math.cos(theta + i * action) for i, x in enumerate(xs))


@pytest.fixture(scope="module")
def setup(param_cert):
    weights = S.sum_weights(param_cert.homoclinic)
    return weights, param_cert.threshold


def test_sum_at_origin():
    value = S.orbit_sum(TABLE_WEIGHTS, Interval(0.0), Interval(0.0))
    expected = sum(math.sin(x) for x, _ in TABULATED[:10])
    assert expected in value.inflate(1e-15)
    assert value.width() < 1e-14


def test_sum_of_verified_orbit_at_origin(param_cert):
    value = S.orbit_sum(param_cert.homoclinic, Interval(0.0), Interval(0.0))
    assert abs(value.midpoint() - direct_sum(0.0, 0.0)) < 1e-12


def test_threshold_identity():
    mpmath.mp.prec = 200
    lam = saddle_eigen(4.0).lam_s
    ratio = (1.0 + lam) / (1.0 - lam)
    assert mpmath.mpf(ratio.lo) <= mpmath.sqrt(2) <= mpmath.mpf(ratio.hi)
    C = 0.005
    thr = S.threshold(lam, C)
    target = 3 * mpmath.sqrt(2) * mpmath.mpf(C)
    assert mpmath.mpf(thr.lo) <= target <= mpmath.mpf(thr.hi)
    with pytest.raises(ValueError):
        S.threshold(Interval(0.5, 1.0), C)


def test_sum_sampling_oracle():
    rng = np.random.default_rng(31)
    for _ in range(500):
        t0, a0 = rng.uniform(0, 2 * np.pi), rng.uniform(0.05, 6.2)
        th = Interval(t0, t0 + 10 ** rng.uniform(-4, 0))
        ac = Interval(a0, a0 + 10 ** rng.uniform(-5, -1))
        enc = S.orbit_sum(TABLE_WEIGHTS, th, ac)
        for _ in range(20):
            t, a = rng.uniform(th.lo, th.hi), rng.uniform(ac.lo, ac.hi)
            assert direct_sum(t, a) in enc.inflate(1e-14)


def test_sum_exact_points_inside():
    # exact evaluation with mpmath at the weights' float values
    mpmath.mp.prec = 200
    xs = [Interval(x).sin().midpoint() for x, _ in TABULATED[:10]]
    weights = [Interval(v) for v in xs]
    rng = np.random.default_rng(32)
    for _ in range(200):
        th = Interval(*sorted(rng.uniform(0, 6.0, 2)))
        ac = Interval(*sorted(rng.uniform(0.1, 6.0, 2)))
        enc = S.orbit_sum(weights, th, ac)
        t, a = rng.uniform(th.lo, th.hi), rng.uniform(ac.lo, ac.hi)
        exact = sum(mpmath.mpf(w) * mpmath.cos(mpmath.mpf(t) + i * mpmath.mpf(a)) for i, w in enumerate(xs))
        assert mpmath.mpf(enc.lo) <= exact <= mpmath.mpf(enc.hi)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 6.2), st.floats(-4, 0), st.floats(0.1, 6.0), st.floats(-5, -1),
       st.sampled_from(["LR", "DU"]))
def test_bisection_tightness(t0, lwt, a0, lwa, codes):
    th, ac = Interval(t0, t0 + 10 ** lwt), Interval(a0, a0 + 10 ** lwa)
    parent = S.orbit_sum(TABLE_WEIGHTS, th, ac)
    kids = [S.orbit_sum(TABLE_WEIGHTS, *S.split(th, ac, c)) for c in codes]
    assert kids[0].hull(kids[1]).subseteq(parent)


def test_clears():
    thr = Interval(1.0, 1.1)
    assert S.clears(Interval(1.2, 2.0), S.PLUS, thr)
    assert not S.clears(Interval(1.05, 2.0), S.PLUS, thr)
    assert S.clears(Interval(-2.0, -1.2), S.MINUS, thr)
    assert not S.clears(Interval(-2.0, -1.05), S.MINUS, thr)


def test_split_and_paths():
    th, ac = Interval(0.0, 1.0), Interval(2.0, 3.0)
    assert S.split(th, ac, "L") == (Interval(0.0, 0.5), ac)
    assert S.split(th, ac, "U") == (th, Interval(2.5, 3.0))
    assert S.box_at(th, ac, "RD") == (Interval(0.5, 1.0), Interval(2.0, 2.5))
    with pytest.raises(ValueError):
        S.split(th, ac, "X")


def test_tiles():
    assert S.tiles([""])
    assert S.tiles(["L", "RD", "RU"])
    assert not S.tiles(["L", "RD"])
    assert not S.tiles(["L", "R", "R"])
    assert not S.tiles(["L", "U"])


# -- return witnesses ---------------------------------------------------------------

def test_degenerate_strip_has_return_witness():
    a = 2 * math.pi * GOLDEN
    s1, s2 = 0.0, math.nextafter(2 * math.pi, 0.0)
    m = kernels.find_return(1.0, 1.0, a, a, s1, s2, 10, 200)
    assert m >= 10
    assert S.arc_image_inside(Interval(1.0), Interval(a), m, s1, s2)


def test_width_obstruction():
    # I is 0.2 wide: after m >= 10 steps the image is wider than the arc
    m = kernels.find_return(1.0, 1.01, 1.0, 1.2, 0.9, 1.3, 10, 200)
    assert m == -1
    with pytest.raises(S.StripError) as exc:
        S.check_rect(TABLE_WEIGHTS, Interval(0.9, 1.3), Interval(1.0, 1.2), S.PLUS,
                     Interval(-100.0), depth_max=2)
    assert exc.value.stage == "return"


def test_sum_failure_stage():
    with pytest.raises(S.StripError) as exc:
        S.check_rect(TABLE_WEIGHTS, Interval(0.0, 1.0), Interval(1.0, 1.1), S.PLUS,
                     Interval(100.0), depth_max=3)
    assert exc.value.stage == "sum"


def test_arc_image_wraps():
    # 6.0 + 1 * 0.5 = 6.5 = 0.217 mod 2 pi
    assert S.arc_image_inside(Interval(6.0), Interval(0.5), 1, 0.1, 0.3)
    assert not S.arc_image_inside(Interval(6.0), Interval(0.5), 1, 0.3, 0.5)
    assert S.arc_image_inside(Interval(0.1), Interval(3.0), 2, 6.0, 6.5)


def test_rectangles_near_unit_action(setup):
    weights, thr = setup
    rects, gaps = S.certify_slab(weights, S.PLUS, 0.95, 1.05, thr)
    assert rects and not gaps
    for rect in rects:
        assert S.tiles([b.path for b in rect.boxes])
        for b in rect.boxes:
            assert S.clears(b.sum, S.PLUS, thr)
            assert b.m >= 10 and S.arc_image_inside(b.theta, b.action, b.m, *rect.arc)


def test_minus_rectangles_mirror(setup):
    weights, thr = setup
    rects, gaps = S.certify_slab(weights, S.MINUS, 0.95, 1.05, thr)
    assert rects and not gaps
    assert all(b.sum.hi < -thr.hi for r in rects for b in r.boxes)


def test_check_rect_validates_inputs(setup):
    weights, thr = setup
    with pytest.raises(ValueError):
        S.check_rect(weights, Interval(0.0, 1.0), Interval(-0.1, 0.1), S.PLUS, thr)
    with pytest.raises(ValueError):
        S.check_rect(weights, Interval(0.0, 7.0), Interval(1.0, 1.1), S.PLUS, thr)
    with pytest.raises(ValueError):
        S.check_rect(weights, Interval(0.0, 1.0), Interval(1.0, 1.1), "up", thr)


def test_scan_arc_finds_positive_region(setup):
    weights, thr = setup
    s1, s2 = S.scan_arc(weights, Interval(1.0, 1.01), S.PLUS, thr)
    mid = 0.5 * (s1 + s2)
    assert direct_sum(mid, 1.005) > thr.hi


def test_resonant_action_fails(setup):
    weights, thr = setup
    with pytest.raises(S.StripError) as exc:
        S.assemble_strip(weights, S.PLUS, Interval(3.0, 3.3), thr)
    assert exc.value.stage == "coverage"
    lo, hi = exc.value.box
    assert lo < math.pi + 0.02 and hi > math.pi - 0.02


def test_coverage_gaps():
    def r(a, b):
        return S.StripRect(Interval(0.0, 1.0), Interval(a, b), S.PLUS)

    span = Interval(1.0, 2.0)
    assert S.coverage_gaps([r(0.9, 1.5), r(1.4, 2.1)], span) == []
    assert S.coverage_gaps([r(0.9, 1.5), r(1.5, 2.1)], span) == [(1.5, 1.5)]
    assert S.coverage_gaps([r(1.1, 2.1)], span) == [(1.0, 1.1)]
    assert S.coverage_gaps([], span) == [(1.0, 2.0)]


def test_slab_grid_covers():
    span = Interval(0.2, math.pi - 0.1)
    grid = S.slab_grid(span)
    assert grid[0][0] < span.lo and grid[-1][1] > span.hi
    assert all(b[0] < a[1] for a, b in zip(grid, grid[1:]))


# -- production strips ----------------------------------------------------------------

def test_strip_invariants(param_cert):
    for branch in param_cert.branches:
        for strip in (branch.plus, branch.minus):
            assert not S.coverage_gaps(strip.rects, branch.span)
            for a, b in zip(strip.rects, strip.rects[1:]):
                assert b.action.lo < a.action.hi
            for _, box in strip.boxes():
                assert S.clears(box.sum, strip.sign, param_cert.threshold)


def test_transfer_to_itself():
    rect = S.check_rect(TABLE_WEIGHTS, Interval(0.5, 1.5), Interval(1.0, 1.001), S.PLUS,
                        Interval(-100.0))
    strip = S.Strip(S.PLUS, [rect], Interval(1.0, 1.001))
    table = S.check_transfer(strip, strip)
    assert table
    for e in table:
        assert e.n >= 1 and S.arc_image_inside(e.theta, e.action, e.n, *rect.arc)


def test_transfer_between_disjoint_arcs():
    a = 2 * math.pi * GOLDEN
    n, j = kernels.find_transfer(0.5, 0.5, a, a, [(3.0, 3.2)], 1, 2000)
    assert n >= 1 and j == 0
    assert S.arc_image_inside(Interval(0.5), Interval(a), n, 3.0, 3.2)


def test_transfer_failure():
    src = S.Strip(S.PLUS, [S.StripRect(Interval(0.0, 1.0), Interval(1.0, 1.5), S.PLUS,
                                       [S.SubBox("", Interval(0.0, 1.0), Interval(1.0, 1.5),
                                                 Interval(1.0), 10)])], Interval(1.0, 1.5))
    dst = S.Strip(S.MINUS, [S.StripRect(Interval(3.0, 3.001), Interval(1.0, 1.5), S.MINUS)],
                  Interval(1.0, 1.5))
    with pytest.raises(S.StripError) as exc:
        S.check_transfer(src, dst, n_max=5, depth_max=2)
    assert exc.value.stage == "transfer"


def test_production_transfers(param_cert):
    for branch in param_cert.branches:
        for table, src, dst in ((branch.plus_to_minus, branch.plus, branch.minus),
                                (branch.minus_to_plus, branch.minus, branch.plus)):
            assert table
            for e in table:
                d = dst.rects[e.target]
                assert e.action.subseteq(d.action)
                assert S.arc_image_inside(e.theta, e.action, e.n, *d.arc)
