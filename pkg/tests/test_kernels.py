import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import TABULATED
from driftcap import kernels
from driftcap.interval import Interval

IMPLS = kernels.implementations()
WEIGHTS = [Interval(x).sin() for x, _ in TABULATED[:10]]
PACKED = kernels.pack_weights(WEIGHTS)


def random_boxes(seed, count):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        t = rng.uniform(0, 6.2)
        a = rng.uniform(0.05, 6.2)
        yield t, t + 10 ** rng.uniform(-6, 0), a, a + 10 ** rng.uniform(-8, -1)


def test_compiled_extension_is_built():
    assert "cython" in IMPLS
    assert kernels.BACKEND == "cython"


@pytest.mark.skipif("cython" not in IMPLS, reason="extension not built")
def test_find_return_agrees():
    py, cy = IMPLS["python"], IMPLS["cython"]
    rng = np.random.default_rng(41)
    for tlo, thi, ilo, ihi in random_boxes(41, 2000):
        s1 = rng.uniform(0, 6.2)
        s2 = s1 + rng.uniform(0.01, 3.0)
        args = (tlo, thi, ilo, ihi, s1, s2, 10, 200)
        assert py.find_return(*args) == cy.find_return(*args)


@pytest.mark.skipif("cython" not in IMPLS, reason="extension not built")
def test_find_transfer_agrees():
    py, cy = IMPLS["python"], IMPLS["cython"]
    arcs = [(0.5, 0.9), (2.0, 2.3), (4.4, 5.0)]
    for tlo, thi, ilo, ihi in random_boxes(42, 1000):
        args = (tlo, thi, ilo, ihi, arcs, 1, 2000)
        assert py.find_transfer(*args) == cy.find_transfer(*args)


@pytest.mark.skipif("cython" not in IMPLS, reason="extension not built")
@pytest.mark.parametrize("tight", [False, True])
def test_sum_bounds_agree(tight):
    py, cy = IMPLS["python"], IMPLS["cython"]
    for box in random_boxes(43, 2000):
        assert py.sum_bounds(*PACKED, *box, tight) == cy.sum_bounds(*PACKED, *box, tight)


@pytest.mark.parametrize("name", sorted(IMPLS))
def test_sum_bounds_enclose_samples(name):
    impl = IMPLS[name]
    rng = np.random.default_rng(44)
    xs = [x for x, _ in TABULATED[:10]]
    for tlo, thi, ilo, ihi in random_boxes(44, 300):
        lo, hi = impl.sum_bounds(*PACKED, tlo, thi, ilo, ihi, True)
        for _ in range(10):
            t, a = rng.uniform(tlo, thi), rng.uniform(ilo, ihi)
            v = sum(math.sin(x) * math.cos(t + i * a) for i, x in enumerate(xs))
            assert lo - 1e-14 <= v <= hi + 1e-14


@pytest.mark.parametrize("name", sorted(IMPLS))
def test_arc_contains_wraps(name):
    impl = IMPLS[name]
    assert impl.arc_contains(6.0, 6.0, 0.5, 0.5, 1, 0.1, 0.3)
    assert not impl.arc_contains(6.0, 6.0, 0.5, 0.5, 1, 0.3, 0.5)
    assert impl.find_return(1.0, 1.0, 1.0, 1.0, 0.0, 6.0, 10, 200) >= 10


def _backend_in_subprocess(env_value):
    code = "from driftcap import kernels; print(kernels.BACKEND)"
    env = {"PATH": "/usr/bin:/bin", "DRIFTCAP_PURE_PYTHON": env_value}
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env=env, check=True)
    return out.stdout.strip()


def test_pure_python_switch():
    assert _backend_in_subprocess("1") == "python"
    assert _backend_in_subprocess("") == ("cython" if "cython" in IMPLS else "python")


def test_certificate_independent_of_kernels(small_cert, tmp_path):
    from driftcap.certificate import dumps

    code = (
        "import sys; from driftcap.certificate import certify_diffusion, dumps;"
        "from driftcap.config import RunConfig;"
        "sys.stdout.write(dumps(certify_diffusion(RunConfig(backend='param', spans=['1 .. 1.2']), 'param')))"
    )
    env = {"PATH": "/usr/bin:/bin", "DRIFTCAP_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env=env, check=True, timeout=600)
    assert out.stdout == dumps(small_cert)
