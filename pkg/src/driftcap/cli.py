"""Command line front end.

    driftcap run --config run.cfg [--backend cone|param|both] [--workers k] [--out dir]
    driftcap replay certificate.json
    driftcap plot certificate.json outdir

Exit status: 0 success, 1 certification or replay failure, 2 usage or I/O error.
"""

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager

import numpy as np

from . import certificate as cert_mod
from . import kernels
from .config import ConfigError, load_config, worker_count
from .interval import Interval

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _err(msg):
    print(f"driftcap: {msg}", file=sys.stderr)


@contextmanager
def worker_map(workers):
    """``map`` for one worker, a process pool's ordered map otherwise."""
    if workers <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield lambda fn, items: pool.map(fn, list(items), chunksize=1)


# -- csv export ------------------------------------------------------------------

STRIP_COLUMNS = ["theta_lo", "theta_hi", "I_lo", "I_hi", "sign", "inf_sum", "witness_m"]
HOMOCLINIC_COLUMNS = ["i", "x_lo", "x_hi", "y_lo", "y_hi"]
CHART_COLUMNS = ["kind", "s", "x", "y"]


def _chart_samples(d, count=101):
    from .cones import local_frame

    alpha = float.fromhex(d["alpha"])
    if d["backend"] == "cone":
        r = float.fromhex(d["r"])
        q = local_frame(alpha, d["kind"])[0].midpoint()
        for s in np.linspace(-r, r, count):
            x, y = q @ [s, 0.0]
            yield float(s), float(x), float(y)
        return
    a = np.array([Interval.from_hex(p[0]).midpoint() for p in d["coeffs"]])
    b = np.array([Interval.from_hex(p[1]).midpoint() for p in d["coeffs"]])
    for s in np.linspace(-1.0, 1.0, count):
        yield float(s), float(np.polyval(a[::-1], s)), float(np.polyval(b[::-1], s))


def export_csv(data, outdir, prefix=""):
    """Write strips, homoclinic boxes and chart samples; returns the paths."""
    os.makedirs(outdir, exist_ok=True)
    paths = {}
    path = os.path.join(outdir, f"{prefix}strips.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["branch"] + STRIP_COLUMNS)
        for k, branch in enumerate(data["branches"]):
            for sign in ("plus", "minus"):
                strip = cert_mod.strip_from_dict(branch["strips"][sign])
                for rect in strip.rects:
                    for b in rect.boxes:
                        inf_sum = b.sum.lo if sign == "plus" else -b.sum.hi
                        w.writerow([k, repr(b.theta.lo), repr(b.theta.hi), repr(b.action.lo),
                                    repr(b.action.hi), sign, repr(inf_sum), b.m])
    paths["strips"] = path
    path = os.path.join(outdir, f"{prefix}homoclinic.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(HOMOCLINIC_COLUMNS)
        for i, box in enumerate(data["homoclinic"]["boxes"]):
            x, y = Interval.from_hex(box[0]), Interval.from_hex(box[1])
            w.writerow([i, repr(x.lo), repr(x.hi), repr(y.lo), repr(y.hi)])
    paths["homoclinic"] = path
    path = os.path.join(outdir, f"{prefix}charts.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CHART_COLUMNS)
        for kind in ("unstable", "stable"):
            for s, x, y in _chart_samples(data["charts"][kind]):
                w.writerow([kind, repr(s), repr(x), repr(y)])
    paths["charts"] = path
    return paths


# -- commands --------------------------------------------------------------------

def cmd_run(args):
    try:
        cfg = load_config(args.config)
        if args.backend:
            cfg.backend = args.backend
            cfg.validate()
        workers = worker_count(cfg, args.workers)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    out = args.out or cfg.out
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        _err(f"cannot create output directory {out}: {exc}")
        return EXIT_USAGE
    status = EXIT_OK
    with worker_map(workers) as mapper:
        for backend in cfg.backends():
            t0 = time.perf_counter()
            try:
                cert = cert_mod.certify_diffusion(cfg, backend, mapper)
            except cert_mod.CertificationError as exc:
                _err(f"{backend} backend failed at stage '{exc.stage}': {exc.message}")
                status = EXIT_FAIL
                continue
            data = cert.to_dict()
            path = os.path.join(out, f"certificate_{backend}.json")
            try:
                cert_mod.write_certificate(data, path)
                export_csv(data, out, prefix=f"{backend}_")
            except OSError as exc:
                _err(f"cannot write results: {exc}")
                return EXIT_USAGE
            hom = cert.homoclinic
            print(f"[{backend}] homoclinic radius {hom.radius:.3e}, C = {cert.C:.6g}, "
                  f"threshold {cert.threshold}")
            for b in cert.branches:
                print(f"[{backend}] certified I in [{b.text}] (hull {b.span}); "
                      f"{len(b.plus.rects)} S+ / {len(b.minus.rects)} S- rectangles")
            print(f"[{backend}] wrote {path} in {time.perf_counter() - t0:.1f}s "
                  f"({kernels.BACKEND} kernels, {workers} worker(s))")
    return status


def cmd_replay(args):
    try:
        checks = cert_mod.replay_file(args.certificate)
    except cert_mod.CertificateFormatError as exc:
        _err(str(exc))
        return EXIT_USAGE
    failed = 0
    for c in checks:
        print(f"{'PASS' if c.ok else 'FAIL'}  {c.name}" + ("" if c.ok else f"  ({c.detail})"))
        failed += not c.ok
    if failed:
        _err(f"{failed} check(s) failed")
        return EXIT_FAIL
    return EXIT_OK


def cmd_plot(args):
    try:
        data = cert_mod.load_certificate(args.certificate)
        paths = export_csv(data, args.outdir)
    except cert_mod.CertificateFormatError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(f"cannot write CSV files: {exc}")
        return EXIT_USAGE
    for p in paths.values():
        print(p)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="driftcap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="certify drift from a configuration file")
    r.add_argument("--config", required=True)
    r.add_argument("--backend", choices=["cone", "param", "both"])
    r.add_argument("--workers", type=int)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)
    rp = sub.add_parser("replay", help="re-verify a certificate")
    rp.add_argument("certificate")
    rp.set_defaults(func=cmd_replay)
    pl = sub.add_parser("plot", help="export certificate data as CSV")
    pl.add_argument("certificate")
    pl.add_argument("outdir")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(args, "workers", None) is not None and args.workers <= 0:
        _err("--workers must be positive")
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
