import math

import numpy as np
import pytest

from conftest import TABULATED
from driftcap.certificate import build_charts, homoclinic_guess
from driftcap.config import RunConfig
from driftcap.interval import EMPTY, IMat, IVec, Interval
from driftcap.maps import std_map
from driftcap.newton import (
    INCONCLUSIVE,
    NO_ROOT,
    UNIQUE,
    HomoclinicError,
    initial_box,
    interval_newton,
    shooting_system,
    symmetric_guess,
    transversality_determinant,
    verify_homoclinic,
)
from driftcap.parameterization import compute_coefficients


def scalar(f, df):
    return (lambda z: IVec([f(z[0])]), lambda z: IMat([[df(z[0])]]))


def test_sqrt2():
    fn, jac = scalar(lambda x: x.sqr() - 2.0, lambda x: x * 2.0)
    v = interval_newton(fn, jac, IVec([Interval(1.0, 2.0)]), [1.5])
    assert v.status == UNIQUE
    assert math.sqrt(2.0) in v.refined_box[0]
    assert v.refined_box[0].width() <= 4 * math.ulp(1.5)
    assert v.newton_image.subset(IVec([Interval(1.0, 2.0)]))


def test_linear_function_lands_on_root():
    fn, jac = scalar(lambda x: x - 0.25, lambda x: Interval(1.0))
    v = interval_newton(fn, jac, IVec([Interval(0.0, 1.0)]), [0.5])
    assert v.status == UNIQUE
    assert v.newton_image[0] == Interval(0.25)


def test_no_root():
    fn, jac = scalar(lambda x: x.sqr() - 2.0, lambda x: x * 2.0)
    v = interval_newton(fn, jac, IVec([Interval(3.0, 4.0)]), [3.5])
    assert v.status == NO_ROOT


def test_singular_jacobian_is_inconclusive():
    fn, jac = scalar(lambda x: x.sqr(), lambda x: x * 2.0)
    v = interval_newton(fn, jac, IVec([Interval(-1.0, 1.0)]), [0.5])
    assert v.status == INCONCLUSIVE
    assert not v.unique


def test_x0_outside_box():
    fn, jac = scalar(lambda x: x, lambda x: Interval(1.0))
    with pytest.raises(ValueError):
        interval_newton(fn, jac, IVec([Interval(0.0, 1.0)]), [2.0])


def test_refinement_is_monotone():
    seen = []
    f, df = scalar(lambda x: x.sqr() * x - x - 1.0, lambda x: x.sqr() * 3.0 - 1.0)

    def jac(z):
        seen.append(z)
        return df(z)

    v = interval_newton(f, jac, IVec([Interval(1.0, 2.0)]), [1.4])
    assert v.unique
    assert all(b.subseteq(a) for a, b in zip(seen, seen[1:]))
    assert all(b <= a for a, b in zip(v.widths, v.widths[1:]))


# -- the homoclinic orbit at alpha = 4 -----------------------------------------------

@pytest.fixture(scope="module")
def param_charts():
    return build_charts(RunConfig(backend="param"), "param", list(TABULATED), 0)


@pytest.fixture(scope="module")
def cone_charts():
    return build_charts(RunConfig(backend="cone"), "cone", list(TABULATED), 0)


@pytest.fixture(scope="module")
def param_orbit(param_charts):
    return verify_homoclinic(*param_charts, list(TABULATED), 4.0)


def test_table_guess_residual(param_charts):
    Pu, Ps = param_charts
    fn, _ = shooting_system(Pu, Ps, 10, 4.0)
    _, mids = initial_box(Pu, Ps, list(TABULATED))
    res = fn(IVec.from_points(mids))
    assert max(abs(v.midpoint()) for v in res) <= 1e-10


def test_jacobian_block_structure(param_charts):
    Pu, Ps = param_charts
    fn, jac = shooting_system(Pu, Ps, 10, 4.0)
    box, mids = initial_box(Pu, Ps, list(TABULATED))
    J = jac(box)
    assert J.shape == (22, 22)
    for i in range(10):
        r0, c0 = 2 + 2 * i, 1 + 2 * i
        x = box[c0]
        assert (Interval(4.0) * x.cos() + 1.0).subseteq(J[r0, c0])
        assert J[r0, c0 + 1] == Interval(1.0)
        if i < 9:
            assert J[r0, c0 + 2] == Interval(-1.0) and J[r0 + 1, c0 + 3] == Interval(-1.0)
    # nothing outside the bidiagonal blocks and the chart columns
    for r in range(22):
        for c in range(22):
            blk = (r - 2) // 2
            near = c in (0, 1, 2) if r < 2 else c in range(1 + 2 * blk, 5 + 2 * blk) or c == 21
            if not near:
                assert J[r, c] == Interval(0.0)


def test_residual_at_root_contains_zero(param_orbit, param_charts):
    fn, _ = shooting_system(*param_charts, 10, 4.0)
    r = fn(param_orbit.newton_box)
    assert all(0.0 in v for v in r)


def test_param_orbit_matches_table(param_orbit):
    mids = param_orbit.midpoints()
    dev = max(abs(a - b) for p, q in zip(mids, TABULATED) for a, b in zip(p, q))
    assert dev <= 1e-12
    assert param_orbit.transversal and param_orbit.M == 10


def test_orbit_invariants(param_orbit, param_charts):
    Pu, Ps = param_charts
    boxes = param_orbit.boxes
    for a, b in zip(boxes, boxes[1:]):
        assert std_map(a, 4.0).intersect(b) is not EMPTY
    assert Pu.eval(param_orbit.x_star).intersect(boxes[0]) is not EMPTY
    assert Ps.eval(param_orbit.y_star).intersect(boxes[-1]) is not EMPTY
    assert param_orbit.radius >= max(b.radius() for b in boxes)


def test_soundness_residual_bound(param_orbit, param_charts):
    fn, jac = shooting_system(*param_charts, 10, 4.0)
    z = param_orbit.newton_box
    res = fn(IVec.from_points(z.midpoint()))
    J = jac(z)
    assert max(v.mag() for v in res) <= max(z.radius(), 1e-300) * J.norm_inf()


def test_symmetry_oracle(param_orbit):
    # reversibility is not used by the solver; it checks the result
    mids = param_orbit.midpoints()
    tol = 1e-12
    for i in range(10):
        assert abs(mids[i][0] - mids[9 - i][0]) <= tol
        assert abs(mids[i][1] + mids[10 - i][1]) <= tol


def test_transversality_cross_check(param_orbit, param_charts):
    det = transversality_determinant(param_orbit, *param_charts)
    assert not det.contains_zero()


def test_cone_orbit(cone_charts):
    hom = verify_homoclinic(*cone_charts, list(TABULATED), 4.0)
    mids = hom.midpoints()
    dev = max(abs(a - b) for p, q in zip(mids, TABULATED) for a, b in zip(p, q))
    assert dev <= 1e-10
    assert hom.radius <= 1.5e-7
    assert not transversality_determinant(hom, *cone_charts).contains_zero()


def test_guess_outside_chart(cone_charts):
    far = [(3.0, 3.0)] + list(TABULATED[1:])
    with pytest.raises(HomoclinicError, match="outside"):
        verify_homoclinic(*cone_charts, far, 4.0)


def test_bad_guess_reports_component(param_charts):
    bad = [list(p) for p in TABULATED]
    bad[4][0] += 0.2
    with pytest.raises(HomoclinicError) as exc:
        verify_homoclinic(*param_charts, [tuple(p) for p in bad], 4.0, inflation=1e-6)
    assert "component" in str(exc.value)


def test_symmetric_guess_reproduces_table():
    chart = compute_coefficients(4.0)
    guess, shift = symmetric_guess(chart, 10, 4.0)
    assert shift == 0
    assert np.allclose(guess, TABULATED, atol=1e-12)


def test_cylinder_guess_at_weak_hyperbolicity():
    cfg = RunConfig(alpha=0.15, backend="param", spans=[], inflation=1e-7)
    guess, shift = homoclinic_guess(cfg)
    assert shift == 1
    # the middle point sits on x = pi and the ends mirror through x -> 2 pi - x
    assert abs(guess[5][0] - math.pi) < 1e-9
    assert abs(guess[-1][0] - (2 * math.pi - guess[0][0])) < 1e-12
