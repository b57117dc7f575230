"""Run configuration: a flat ``key = value`` text file.

Action spans are written as ``lo .. hi`` with small arithmetic expressions
over decimal literals and ``pi``, e.g. ``1/5 .. pi - 1/10``; several spans
are separated by ``;``.  Expressions are evaluated in interval arithmetic
and the span to cover is the outer hull, so it contains the exact set.
"""

import ast
import os
from dataclasses import dataclass, field, fields
from fractions import Fraction

from .interval import PI, TWO_PI, Interval

BACKENDS = ("cone", "param", "both")
_BACKEND_ALIASES = {"parameterization": "param", "parametrization": "param"}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def eval_expr(text):
    """Enclosure of an arithmetic expression in decimals, ``pi`` and + - * /."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            literal = ast.get_source_segment(text.strip(), node)
            return Interval.from_fraction(Fraction(literal))
        if isinstance(node, ast.Name) and node.id == "pi":
            return PI
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                return a / b
        raise ConfigError(f"unsupported element in expression {text!r}")

    return ev(tree)


def parse_span(text):
    """``"lo .. hi"`` -> (outer hull Interval, source text)."""
    if ".." not in text:
        raise ConfigError(f"span {text!r} must read 'lo .. hi'")
    lo_txt, hi_txt = text.split("..", 1)
    lo, hi = eval_expr(lo_txt), eval_expr(hi_txt)
    if not lo.hi < hi.lo:
        raise ConfigError(f"empty span {text!r}")
    span = Interval(lo.lo, hi.hi)
    if not (span.lo > 0.0 and span.hi < TWO_PI.lo):
        raise ConfigError(f"span {text!r} is not inside (0, 2 pi)")
    return span, " .. ".join(p.strip() for p in (lo_txt, hi_txt))


def _scale(value):
    if value in ("auto", "", None):
        return None
    return float(value)


@dataclass
class RunConfig:
    alpha: float = 4.0
    backend: str = "both"
    M: int = 10
    N: int = 40
    nu: float = 0.6931471805599453
    scale_unstable: object = None
    scale_stable: object = None
    guess: str = "auto"
    inflation: float = 1e-5
    spans: list = field(default_factory=lambda: ["1/5 .. pi - 1/10", "pi + 1/10 .. 2*pi - 1/5"])
    m_max: int = 200
    n_max: int = 2000
    depth_max: int = 12
    slab: float = 0.05
    workers: int = 1
    out: str = "driftcap-out"

    def __post_init__(self):
        self.validate()

    def validate(self):
        self.backend = _BACKEND_ALIASES.get(self.backend, self.backend)
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.guess not in ("auto", "symmetric", "tabulated"):
            raise ConfigError("guess must be 'auto', 'symmetric' or 'tabulated'")
        if self.alpha == 0.0:
            raise ConfigError("alpha must be nonzero")
        for name in ("M", "N", "m_max", "n_max", "depth_max", "workers"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("inflation", "slab", "nu"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive")
        if self.M % 2 and self.guess_mode() == "symmetric":
            raise ConfigError("symmetric guesses need an even M")
        self.action_spans()
        return self

    def guess_mode(self):
        """``auto`` means the tabulated orbit where one exists."""
        if self.guess != "auto":
            return self.guess
        return "tabulated" if (self.alpha, self.M) == (4.0, 10) else "symmetric"

    def action_spans(self):
        return [parse_span(s)[0] for s in self.spans]

    def backends(self):
        return ["cone", "param"] if self.backend == "both" else [self.backend]

    def to_dict(self):
        """Settings that affect the mathematics (not workers or paths)."""
        out = {}
        for f in fields(self):
            if f.name in ("workers", "out"):
                continue
            v = getattr(self, f.name)
            if isinstance(v, float):
                v = v.hex()
            out[f.name] = v
        return out


_CASTS = {
    "alpha": float, "nu": float, "inflation": float, "slab": float,
    "M": int, "N": int, "m_max": int, "n_max": int, "depth_max": int, "workers": int,
    "scale_unstable": _scale, "scale_stable": _scale,
    "backend": str, "guess": str, "out": str,
}


def parse_config_text(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key == "spans":
            # an empty list stops the run after the homoclinic stage
            values[key] = [s.strip() for s in value.split(";") if s.strip()]
            continue
        if key not in _CASTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CASTS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return RunConfig(**values)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def worker_count(cfg, override=None):
    """Worker count: DRIFT_WORKERS beats the flag, which beats the config."""
    env = os.environ.get("DRIFT_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"DRIFT_WORKERS must be an integer, got {env!r}") from exc
        if n <= 0:
            raise ConfigError("DRIFT_WORKERS must be positive")
        return n
    return override if override else cfg.workers
