"""The end-to-end certification run, its JSON certificate and the replay check.

Every bound in a certificate is a pair of hex floats.  Replay trusts none of
the stored verdicts: it rebuilds the charts from their parameters, reruns
the Newton inclusion from the stored initial box, recomputes the threshold,
every orbit sum and every return and transfer witness, and checks that the
stored sub-boxes tile their rectangles and the rectangles cover the spans.
"""

import json
import math
from dataclasses import dataclass, field

from . import strips as st
from .cones import STABLE, UNSTABLE, ChartError, ConeSetup, cone_chart, local_frame, tune_cone_chart
from .config import parse_span
from .interval import EMPTY, IVec, Interval, IntervalError
from .maps import std_map
from .newton import (
    TABULATED_GUESS,
    HomoclinicEnclosure,
    HomoclinicError,
    _shift_vec,
    interval_newton,
    shooting_system,
    symmetric_guess,
    verify_homoclinic,
)
from .parameterization import compute_coefficients, param_chart

FORMAT = "driftcap-certificate"
VERSION = 1
CONCLUSION = (
    "The eps = 0 hypotheses hold: transversal homoclinic channel, strips S+ and S- "
    "over each certified action interval, and transfers between them. Drift across "
    "each interval follows for every sufficiently small eps > 0; no bound on eps is certified."
)


class CertificationError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, message):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message


class CertificateFormatError(ValueError):
    """The certificate file cannot be parsed."""


@dataclass
class Branch:
    text: str
    span: Interval
    plus: st.Strip
    minus: st.Strip
    plus_to_minus: list
    minus_to_plus: list


@dataclass
class DiffusionCertificate:
    backend: str
    alpha: float
    M: int
    lam: Interval
    C: float
    threshold: Interval
    charts: dict
    homoclinic: HomoclinicEnclosure
    branches: list
    config: dict = field(default_factory=dict)
    L_g: float = st.LIPSCHITZ_G

    @property
    def certified_action_intervals(self):
        return [b.span for b in self.branches]

    def to_dict(self):
        return certificate_to_dict(self)


# -- the pipeline -------------------------------------------------------------------

def homoclinic_guess(cfg):
    """Float guess v_0..v_M and the cylinder shift of its end point."""
    if cfg.guess_mode() == "tabulated":
        if cfg.M != 10 or cfg.alpha != 4.0:
            raise CertificationError("guess", "the tabulated guess is for alpha = 4, M = 10")
        return [tuple(p) for p in TABULATED_GUESS], 0
    chart = compute_coefficients(cfg.alpha, UNSTABLE, cfg.N, cfg.scale_unstable, cfg.nu)
    try:
        return symmetric_guess(chart, cfg.M, cfg.alpha)
    except HomoclinicError as exc:
        raise CertificationError("guess", str(exc)) from None


def _end_point(guess, shift):
    x, y = guess[-1]
    return (x - 2.0 * math.pi * shift, y)


def build_charts(cfg, backend, guess, shift):
    """(unstable, stable) charts; cone charts are sized to reach the guess."""
    ends = {UNSTABLE: guess[0], STABLE: _end_point(guess, shift)}
    charts = []
    for kind in (UNSTABLE, STABLE):
        try:
            if backend == "cone":
                Qi = local_frame(cfg.alpha, kind)[1].midpoint()
                reach = abs(float((Qi @ list(ends[kind]))[0]))
                charts.append(tune_cone_chart(cfg.alpha, kind, reach))
            else:
                scale = cfg.scale_unstable if kind == UNSTABLE else cfg.scale_stable
                charts.append(param_chart(cfg.alpha, kind, cfg.N, scale, cfg.nu))
        except (ChartError, IntervalError) as exc:
            raise CertificationError("charts", f"{backend} {kind} chart: {exc}") from None
    return tuple(charts)


def tail_data(hom):
    lam = hom.tails["lam_u"].hull(hom.tails["lam_s"])
    C = max(hom.tails["C_u"], hom.tails["C_s"])
    return lam, C


def certify_diffusion(cfg, backend, mapper=map):
    """charts -> homoclinic orbit -> threshold -> strips -> transfers."""
    guess, shift = homoclinic_guess(cfg)
    Pu, Ps = build_charts(cfg, backend, guess, shift)
    try:
        hom = verify_homoclinic(Pu, Ps, guess, cfg.alpha, cfg.inflation, shift=shift)
    except (HomoclinicError, ChartError, IntervalError) as exc:
        raise CertificationError("homoclinic", str(exc)) from None
    lam, C = tail_data(hom)
    try:
        thr = st.threshold(lam, C)
    except ValueError as exc:
        raise CertificationError("threshold", str(exc)) from None
    weights = st.sum_weights(hom)
    branches = []
    for text in cfg.spans:
        span = parse_span(text)[0]
        pair = {}
        for sign in (st.PLUS, st.MINUS):
            try:
                pair[sign] = st.assemble_strip(weights, sign, span, thr, cfg.M, cfg.m_max,
                                               cfg.depth_max, cfg.slab, mapper)
            except st.StripError as exc:
                raise CertificationError("strips", f"span {text}: {exc}") from None
        try:
            p2m = st.check_transfer(pair[st.PLUS], pair[st.MINUS], cfg.n_max, cfg.depth_max, mapper)
            m2p = st.check_transfer(pair[st.MINUS], pair[st.PLUS], cfg.n_max, cfg.depth_max, mapper)
        except st.StripError as exc:
            raise CertificationError("transfer", f"span {text}: {exc}") from None
        branches.append(Branch(text, span, pair[st.PLUS], pair[st.MINUS], p2m, m2p))
    return DiffusionCertificate(
        backend=backend, alpha=float(cfg.alpha), M=cfg.M, lam=lam, C=C, threshold=thr,
        charts={UNSTABLE: Pu.to_dict(), STABLE: Ps.to_dict()}, homoclinic=hom,
        branches=branches, config=cfg.to_dict())


# -- serialization ---------------------------------------------------------------------

def _strip_dict(strip):
    return {
        "sign": strip.sign,
        "span": strip.action_span.to_hex(),
        "rects": [
            {
                "theta": r.theta.to_hex(),
                "action": r.action.to_hex(),
                "boxes": [[b.path, b.sum.to_hex(), b.m] for b in r.boxes],
            }
            for r in strip.rects
        ],
    }


def _transfer_list(table):
    return [[e.rect, e.path, e.n, e.target] for e in table]


def certificate_to_dict(cert):
    hom = cert.homoclinic
    return {
        "format": FORMAT,
        "version": VERSION,
        "backend": cert.backend,
        "alpha": cert.alpha.hex(),
        "M": cert.M,
        "L_g": cert.L_g.hex(),
        "lam": cert.lam.to_hex(),
        "C": cert.C.hex(),
        "threshold": cert.threshold.to_hex(),
        "charts": cert.charts,
        "homoclinic": {
            "shift": hom.shift,
            "iterations": hom.iterations,
            "initial_box": hom.initial_box.to_hex(),
            "x0": [float(v).hex() for v in hom.x0],
            "newton_box": hom.newton_box.to_hex(),
            "boxes": [b.to_hex() for b in hom.boxes],
            "radius": hom.radius.hex(),
            "C_u": hom.tails["C_u"].hex(),
            "C_s": hom.tails["C_s"].hex(),
            "lam_u": hom.tails["lam_u"].to_hex(),
            "lam_s": hom.tails["lam_s"].to_hex(),
        },
        "branches": [
            {
                "text": b.text,
                "span": b.span.to_hex(),
                "strips": {"plus": _strip_dict(b.plus), "minus": _strip_dict(b.minus)},
                "transfers": {
                    "plus_to_minus": _transfer_list(b.plus_to_minus),
                    "minus_to_plus": _transfer_list(b.minus_to_plus),
                },
            }
            for b in cert.branches
        ],
        "certified_action_intervals": [
            {"text": b.text, "hull": b.span.to_hex()} for b in cert.branches
        ],
        "conclusion": CONCLUSION,
        "config": cert.config,
    }


def dumps(cert):
    data = cert if isinstance(cert, dict) else certificate_to_dict(cert)
    return json.dumps(data, indent=1, sort_keys=True) + "\n"


def write_certificate(cert, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(cert))


def load_certificate(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CertificateFormatError(f"cannot read certificate {path}: {exc}") from None
    if not isinstance(data, dict) or data.get("format") != FORMAT:
        raise CertificateFormatError(f"{path} is not a {FORMAT} file")
    if data.get("version") != VERSION:
        raise CertificateFormatError(f"unsupported certificate version {data.get('version')!r}")
    return data


def strip_from_dict(d):
    rects = []
    for r in d["rects"]:
        theta = Interval.from_hex(r["theta"])
        action = Interval.from_hex(r["action"])
        boxes = []
        for path, s, m in r["boxes"]:
            t, a = st.box_at(theta, action, path)
            boxes.append(st.SubBox(path, t, a, Interval.from_hex(s), int(m)))
        rects.append(st.StripRect(theta, action, d["sign"], boxes))
    return st.Strip(d["sign"], rects, Interval.from_hex(d["span"]))


def chart_from_dict(d):
    """Rebuild and revalidate a chart from its stored parameters."""
    alpha = float.fromhex(d["alpha"])
    if d["backend"] == "cone":
        setup = ConeSetup(alpha, d["kind"], float.fromhex(d["L"]), float.fromhex(d["r"]),
                          Interval.from_hex(d["lam"]))
        return cone_chart(setup)
    scale = float.fromhex(d["scale"])
    return param_chart(alpha, d["kind"], d["N"], scale, float.fromhex(d["nu"]))


# -- replay ----------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


class _Report:
    def __init__(self):
        self.checks = []

    def add(self, name, ok, detail=""):
        self.checks.append(Check(name, bool(ok), "" if ok else detail))
        return ok


def _hexf(s):
    try:
        return float.fromhex(s)
    except (TypeError, ValueError):
        raise CertificateFormatError(f"corrupted hex float {s!r}") from None


def _hexi(pair):
    try:
        return Interval(_hexf(pair[0]), _hexf(pair[1]))
    except (IntervalError, TypeError, IndexError):
        raise CertificateFormatError(f"corrupted interval {pair!r}") from None


def _check_strip(rep, label, strip, weights, thr, M, span):
    sums_ok = enc_ok = ret_ok = tile_ok = True
    detail = {"sum": "", "enc": "", "ret": "", "tile": ""}
    for k, rect in enumerate(strip.rects):
        s1, s2 = rect.arc
        if not st.tiles([b.path for b in rect.boxes]):
            tile_ok = False
            detail["tile"] = detail["tile"] or f"rect {k}: sub-boxes do not tile the rectangle"
        for b in rect.boxes:
            value = st.orbit_sum(weights, b.theta, b.action)
            if not value.subseteq(b.sum):
                enc_ok = False
                detail["enc"] = detail["enc"] or f"rect {k} box {b.path!r}: {value} not in stored {b.sum}"
            if not st.clears(value, strip.sign, thr):
                sums_ok = False
                detail["sum"] = detail["sum"] or f"rect {k} box {b.path!r}: sum {value} vs threshold {thr}"
            if not (b.m >= M and st.arc_image_inside(b.theta, b.action, b.m, s1, s2)):
                ret_ok = False
                detail["ret"] = detail["ret"] or f"rect {k} box {b.path!r}: m = {b.m} does not return"
    rep.add(f"{label}: sub-boxes tile rectangles", tile_ok, detail["tile"])
    rep.add(f"{label}: stored sum enclosures", enc_ok, detail["enc"])
    rep.add(f"{label}: sum inequality", sums_ok, detail["sum"])
    rep.add(f"{label}: return witnesses", ret_ok, detail["ret"])
    holes = st.coverage_gaps(strip.rects, span)
    rep.add(f"{label}: action coverage", not holes, f"uncovered {holes[:1]}")


def _check_transfer(rep, label, entries, src, dst):
    ok = True
    detail = ""
    by_rect = {k: [] for k in range(len(src.rects))}
    for k, path, n, target in entries:
        if k not in by_rect or not 0 <= target < len(dst.rects):
            ok, detail = False, detail or f"entry ({k}, {path!r}) names a missing rectangle"
            continue
        by_rect[k].append(path)
        rect = src.rects[k]
        t, a = st.box_at(rect.theta, rect.action, path)
        d = dst.rects[target]
        if not (n >= 1 and a.subseteq(d.action) and st.arc_image_inside(t, a, n, *d.arc)):
            ok, detail = False, detail or f"rect {k} box {path!r}: n = {n} misses target {target}"
    for k, paths in by_rect.items():
        if not st.tiles(paths):
            ok, detail = False, detail or f"rect {k}: transfer boxes do not tile the rectangle"
    rep.add(f"{label}: transfer witnesses", ok, detail)


def replay(data):
    """Re-verify a certificate dict; returns the list of Check results."""
    rep = _Report()
    try:
        alpha = _hexf(data["alpha"])
        M = int(data["M"])
        stored_lam = _hexi(data["lam"])
        stored_C = _hexf(data["C"])
        stored_thr = _hexi(data["threshold"])
        h = data["homoclinic"]
        shift = int(h["shift"])
        initial = IVec(_hexi(p) for p in h["initial_box"])
        x0 = [_hexf(v) for v in h["x0"]]
        newton_box = IVec(_hexi(p) for p in h["newton_box"])
        boxes = [IVec(_hexi(p) for p in b) for b in h["boxes"]]
        C_u, C_s = _hexf(h["C_u"]), _hexf(h["C_s"])
        branches = data["branches"]
        for b in branches:
            for sign in ("plus", "minus"):
                for r in b["strips"][sign]["rects"]:
                    for pair in [r["theta"], r["action"]] + [box[1] for box in r["boxes"]]:
                        _hexi(pair)
    except (KeyError, TypeError, ValueError) as exc:
        raise CertificateFormatError(f"malformed certificate: {exc}") from None

    # charts
    charts = {}
    for kind in (UNSTABLE, STABLE):
        d = data["charts"][kind]
        try:
            chart = chart_from_dict(d)
            same = chart.to_dict() == d
            charts[kind] = chart
            rep.add(f"chart {kind}: rebuilt and revalidated", same,
                    "stored chart data differ from the recomputation")
        except (ChartError, IntervalError, KeyError, ValueError) as exc:
            rep.add(f"chart {kind}: rebuilt and revalidated", False, str(exc))
    if len(charts) < 2:
        return rep.checks
    Pu, Ps = charts[UNSTABLE], charts[STABLE]

    # homoclinic orbit
    try:
        fn, jac = shooting_system(Pu, Ps, M, alpha, shift)
        verdict = interval_newton(fn, jac, initial, x0, max_iter=int(h["iterations"]))
        refined = verdict.refined_box
        newton_ok = verdict.unique and refined.subseteq(newton_box)
        rep.add("homoclinic: Newton inclusion", newton_ok,
                f"status {verdict.status}, refined box inside stored box: {refined.subseteq(newton_box)}")
    except (ChartError, IntervalError, ValueError) as exc:
        rep.add("homoclinic: Newton inclusion", False, str(exc))
        return rep.checks
    if not newton_ok:
        return rep.checks
    z = newton_box
    x, y = z[0], z[2 * M + 1]
    vs = [IVec([z[1 + 2 * i], z[2 + 2 * i]]) for i in range(M)]
    last = std_map(vs[M - 1], alpha).intersect(Ps.eval(y) + _shift_vec(shift))
    orbit_ok = last is not EMPTY and len(boxes) == M + 1 and all(
        v.subseteq(b) for v, b in zip(vs + [last], boxes))
    rep.add("homoclinic: orbit boxes", orbit_ok, "stored boxes miss the recomputed orbit")
    if not orbit_ok:
        return rep.checks

    # tails and threshold
    tails_ok = (Pu.tail_constant(x.mag()) <= C_u and Ps.tail_constant(y.mag()) <= C_s
                and stored_C >= max(C_u, C_s))
    rep.add("tail constants", tails_ok, "stored C below the recomputed tail constants")
    lam_ok = Pu.lam.hull(Ps.lam).subseteq(stored_lam)
    rep.add("tail rate", lam_ok, "stored lambda does not contain the chart rates")
    thr = st.threshold(stored_lam, stored_C)
    rep.add("threshold 3(1+lam)/(1-lam) C", thr == stored_thr,
            f"recomputed {thr}, stored {stored_thr}")
    thr = thr.hull(stored_thr)

    # strips and transfers
    weights = [b[0].sin() for b in boxes[:M]]
    intervals_ok = True
    for k, b in enumerate(branches):
        span = _hexi(b["span"])
        plus = strip_from_dict(b["strips"]["plus"])
        minus = strip_from_dict(b["strips"]["minus"])
        for strip in (plus, minus):
            _check_strip(rep, f"branch {k} S{'+' if strip.sign == st.PLUS else '-'}",
                         strip, weights, thr, M, span)
        _check_transfer(rep, f"branch {k} S+ -> S-", b["transfers"]["plus_to_minus"], plus, minus)
        _check_transfer(rep, f"branch {k} S- -> S+", b["transfers"]["minus_to_plus"], minus, plus)
        try:
            expected = parse_span(b["text"])[0]
        except ValueError:
            expected = None
        if expected is None or expected != span:
            intervals_ok = False
    listed = [(c["text"], _hexi(c["hull"])) for c in data["certified_action_intervals"]]
    spans = [(b["text"], _hexi(b["span"])) for b in branches]
    rep.add("certified action intervals", intervals_ok and listed == spans,
            "certified intervals differ from the strip spans")
    return rep.checks


def replay_file(path):
    return replay(load_certificate(path))
