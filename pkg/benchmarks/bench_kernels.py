"""Compiled versus pure-Python strip kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Times each kernel on a fixed batch of boxes, then a full strip assembly
with each implementation swapped in, and checks both give the same answers.
"""

import argparse
import math
import time

import numpy as np

from driftcap import kernels
from driftcap import strips as S
from driftcap.certificate import certify_diffusion
from driftcap.config import RunConfig
from driftcap.interval import Interval


def boxes(count, seed=1):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        t = rng.uniform(0, 6.2)
        a = rng.uniform(0.2, 6.0)
        out.append((t, t + 10 ** rng.uniform(-5, -1), a, a + 10 ** rng.uniform(-7, -3)))
    return out


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def kernel_cases(impl, batch, packed):
    arcs = [(0.5, 0.9), (2.0, 2.3), (4.4, 5.0)]
    return {
        "find_return": lambda: [impl.find_return(*b, 1.0, 2.5, 10, 200) for b in batch],
        "find_transfer": lambda: [impl.find_transfer(*b, arcs, 1, 2000) for b in batch],
        "sum_bounds": lambda: [impl.sum_bounds(*packed, *b, True) for b in batch],
    }


def assemble(impl, weights, thr):
    saved = {name: getattr(kernels, name) for name in ("find_return", "find_transfer", "sum_bounds")}
    for name in saved:
        setattr(kernels, name, getattr(impl, name))
    try:
        span = Interval(0.2, math.pi - 0.1)
        plus = S.assemble_strip(weights, S.PLUS, span, thr)
        minus = S.assemble_strip(weights, S.MINUS, span, thr)
        S.check_transfer(plus, minus)
        return [(r.theta, r.action, [(b.path, b.m) for b in r.boxes]) for r in plus.rects + minus.rects]
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--boxes", type=int, default=5000)
    args = parser.parse_args()

    impls = kernels.implementations()
    if "cython" not in impls:
        print("compiled extension not built; only the Python kernels are available")
    batch = boxes(args.boxes)
    # weights and threshold from a short certified run
    cert = certify_diffusion(RunConfig(backend="param", spans=["1 .. 1.1"]), "param")
    weights = S.sum_weights(cert.homoclinic)
    thr = cert.threshold
    packed = kernels.pack_weights(weights)

    print(f"{'kernel':<16}" + "".join(f"{n:>12}" for n in impls) + f"{'speedup':>10}")
    for case in ("find_return", "find_transfer", "sum_bounds"):
        results, times = {}, {}
        for name, impl in impls.items():
            times[name], results[name] = best_of(kernel_cases(impl, batch, packed)[case], args.repeat)
        same = len({repr(r) for r in results.values()}) == 1
        speed = times["python"] / times["cython"] if "cython" in times else 1.0
        print(f"{case:<16}" + "".join(f"{times[n]:>11.3f}s" for n in impls)
              + f"{speed:>9.1f}x" + ("" if same else "  MISMATCH"))

    results, times = {}, {}
    for name, impl in impls.items():
        times[name], results[name] = best_of(lambda: assemble(impl, weights, thr), 1)
    same = len({repr(r) for r in results.values()}) == 1
    speed = times["python"] / times["cython"] if "cython" in times else 1.0
    print(f"{'strip assembly':<16}" + "".join(f"{times[n]:>11.3f}s" for n in impls)
          + f"{speed:>9.1f}x" + ("" if same else "  MISMATCH"))


if __name__ == "__main__":
    main()
