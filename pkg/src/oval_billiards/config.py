"""Flat ``key = value`` experiment configs and the table/curve/law spec lines.

A config file holds one setting per line::

    command = basin
    table = cosine a=0.01 n=6
    curve = line beta0=auto
    law = linear mu=0.4
    res = 256x256

Blank lines and ``#`` comments are ignored.  ``format_config`` writes a
config back out with every float at 17 significant digits, so an echoed
config parses to an equal ``ExperimentConfig``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .analysis import DEFAULT_REGION, ClassifierParams
from .curves import ConstantLine, EllipseLevel, check_compatible, solve_beta0
from .geometry import Circle, CosineRadius, Ellipse
from .nonelastic import LinearLaw, TanhLaw

COMMANDS = ("orbit", "rotation", "basin", "certify", "threshold", "phase")


class ConfigError(ValueError):
    """Bad configuration; ``where`` names the offending line or flag."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _kv(tokens, allowed):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ValueError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        if k not in allowed:
            raise ValueError(f"unknown parameter {k!r} (expected one of {', '.join(allowed)})")
        if k in out:
            raise ValueError(f"parameter {k!r} given twice")
        out[k] = v
    missing = [k for k, required in allowed.items() if required and k not in out]
    if missing:
        raise ValueError(f"missing parameter(s): {', '.join(missing)}")
    return out


def _float(s, name):
    try:
        x = float(s)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {s!r}") from None
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {s!r}")
    return x


def _int(s, name):
    try:
        return int(s)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {s!r}") from None


def parse_table(spec: str):
    kind, *rest = spec.split() or [""]
    if kind == "circle":
        kv = _kv(rest, {"radius": False})
        return Circle(_float(kv.get("radius", "1"), "radius"))
    if kind == "ellipse":
        kv = _kv(rest, {"e": True})
        return Ellipse(_float(kv["e"], "e"))
    if kind == "cosine":
        kv = _kv(rest, {"a": True, "n": True})
        return CosineRadius(_float(kv["a"], "a"), _int(kv["n"], "n"))
    raise ValueError(f"unknown table kind {kind!r} (expected circle, ellipse or cosine)")


def parse_curve(spec: str, table):
    kind, *rest = spec.split() or [""]
    if kind == "line":
        kv = _kv(rest, {"beta0": True})
        if kv["beta0"] == "auto":
            if not isinstance(table, CosineRadius):
                raise ValueError("beta0=auto needs a cosine table")
            curve = ConstantLine(solve_beta0(table.n))
        else:
            curve = ConstantLine(_float(kv["beta0"], "beta0"))
    elif kind == "ellipse-level":
        kv = _kv(rest, {"F0": True, "branch": False})
        if not isinstance(table, Ellipse):
            raise ValueError("ellipse-level curves need an ellipse table")
        curve = EllipseLevel(_float(kv["F0"], "F0"), table.e, kv.get("branch", "lower"))
    else:
        raise ValueError(f"unknown curve kind {kind!r} (expected line or ellipse-level)")
    check_compatible(table, curve)
    return curve


def parse_law(spec: str):
    kind, *rest = spec.split() or [""]
    if kind == "linear":
        kv = _kv(rest, {"mu": True})
        return LinearLaw(_float(kv["mu"], "mu"))
    if kind == "tanh":
        kv = _kv(rest, {"mu": True, "sat": False})
        return TanhLaw(_float(kv["mu"], "mu"), _float(kv.get("sat", "1"), "sat"))
    raise ValueError(f"unknown law kind {kind!r} (expected linear or tanh)")


def format_table(t) -> str:
    if isinstance(t, Circle):
        return f"circle radius={fmt(t.radius)}"
    if isinstance(t, Ellipse):
        return f"ellipse e={fmt(t.e)}"
    return f"cosine a={fmt(t.a)} n={t.n}"


def format_curve(c) -> str:
    if isinstance(c, ConstantLine):
        return f"line beta0={fmt(c.beta0)}"
    return f"ellipse-level F0={fmt(c.F0)} branch={c.branch}"


def format_law(h) -> str:
    if isinstance(h, LinearLaw):
        return f"linear mu={fmt(h.mu)}"
    return f"tanh mu={fmt(h.mu)} sat={fmt(h.saturation)}"


def _pair(s, name, conv=int):
    parts = s.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"{name} must look like NxM, got {s!r}")
    return tuple(conv(p, name) if conv is not int else _int(p, name) for p in parts)


def _region(s):
    parts = [p for p in s.replace(",", " ").split()]
    if len(parts) != 4:
        raise ValueError(f"region needs four numbers phi_min,phi_max,alpha_min,alpha_max, got {s!r}")
    p0, p1, a0, a1 = (_float(p, "region") for p in parts)
    if not (p0 < p1 and 0.0 < a0 < a1 < math.pi):
        raise ValueError(f"region must satisfy phi_min < phi_max and 0 < alpha_min < alpha_max < pi, got {s!r}")
    return ((p0, p1), (a0, a1))


def _bool(s, name):
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{name} must be true or false, got {s!r}")


@dataclass
class ExperimentConfig:
    command: str
    table: object
    curve: object = None
    law: object = None
    phi0: float = 0.0
    alpha0: float | None = None
    n: int = 1000
    res: tuple[int, int] = (256, 256)
    region: tuple = DEFAULT_REGION
    max_iter: int = 20_000
    tol_curve: float = 1e-6
    tol_period: float = 1e-6
    window: int = 50
    max_period: int = 64
    max_halfwidth: float = 0.5
    samples: tuple[int, int] = (256, 33)
    starts: int = 40
    iterations: int = 2000
    seed: int = 0
    random_starts: bool = False
    out: str = "out"

    @property
    def classifier(self) -> ClassifierParams:
        return ClassifierParams(self.max_iter, self.tol_curve, self.tol_period, self.window, self.max_period)


_SCALARS = {
    "phi0": _float,
    "alpha0": _float,
    "n": _int,
    "max_iter": _int,
    "tol_curve": _float,
    "tol_period": _float,
    "window": _int,
    "max_period": _int,
    "max_halfwidth": _float,
    "starts": _int,
    "iterations": _int,
    "seed": _int,
    "random_starts": _bool,
}
KEYS = ("command", "table", "curve", "law", "res", "region", "samples", "out") + tuple(_SCALARS)


def read_config_lines(lines, source="config"):
    """Parse ``key = value`` lines into ``{key: (value, where)}``."""
    raw = {}
    for no, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        where = f"{source} line {no}: {line.rstrip()!r}"
        if "=" not in text:
            raise ConfigError("expected 'key = value'", where)
        key, value = (s.strip() for s in text.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", where)
        if not value:
            raise ConfigError(f"empty value for {key!r}", where)
        raw[key] = (value, where)
    return raw


def build_config(raw) -> ExperimentConfig:
    """Turn ``{key: (value, where)}`` into a validated ExperimentConfig."""

    def get(key):
        return raw[key] if key in raw else (None, None)

    def conv(key, fn):
        value, where = get(key)
        try:
            return fn(value)
        except ConfigError:
            raise
        except (ValueError, ArithmeticError) as exc:
            raise ConfigError(str(exc), where) from None

    command, where = get("command")
    if command is None:
        raise ConfigError("no command given")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r} (expected one of {', '.join(COMMANDS)})", where)
    if "table" not in raw:
        raise ConfigError("a table is required (e.g. 'table = circle radius=1')")

    kw = {"command": command}
    table = conv("table", parse_table)
    kw["table"] = table
    if "curve" in raw:
        kw["curve"] = conv("curve", lambda s: parse_curve(s, table))
    if "law" in raw:
        kw["law"] = conv("law", parse_law)
    if "res" in raw:
        kw["res"] = conv("res", lambda s: _pair(s, "res"))
    if "samples" in raw:
        kw["samples"] = conv("samples", lambda s: _pair(s, "samples"))
    if "region" in raw:
        kw["region"] = conv("region", _region)
    if "out" in raw:
        kw["out"] = raw["out"][0]
    for key, fn in _SCALARS.items():
        if key in raw:
            kw[key] = conv(key, lambda s, fn=fn, key=key: fn(s, key))
    cfg = ExperimentConfig(**kw)
    _validate(cfg, raw)
    return cfg


def _validate(cfg: ExperimentConfig, raw):
    def where(key):
        return raw.get(key, (None, None))[1]

    def positive(key):
        if getattr(cfg, key) <= 0:
            raise ConfigError(f"{key} must be positive", where(key))

    for key in ("n", "max_iter", "tol_curve", "tol_period", "window", "max_period", "max_halfwidth", "starts", "iterations"):
        positive(key)
    if min(cfg.res) < 16:
        raise ConfigError("res must be at least 16x16", where("res"))
    if min(cfg.samples) < 1:
        raise ConfigError("samples must be positive", where("samples"))
    if cfg.alpha0 is not None and not (0.0 < cfg.alpha0 < math.pi):
        raise ConfigError("alpha0 must lie in (0, pi)", where("alpha0"))
    if cfg.law is not None and cfg.curve is None:
        raise ConfigError("a law needs a curve to contract toward", where("law"))
    needs_curve = {"basin", "certify", "threshold"}
    if cfg.command in needs_curve and cfg.curve is None:
        raise ConfigError(f"'{cfg.command}' needs a curve")
    if cfg.command in ("basin", "certify") and cfg.law is None:
        raise ConfigError(f"'{cfg.command}' needs a law")
    if cfg.command == "phase" and cfg.law is not None:
        raise ConfigError("phase portraits are for the classical map; drop the law", where("law"))
    if cfg.command in ("orbit", "rotation") and cfg.alpha0 is None and cfg.curve is None:
        raise ConfigError(f"'{cfg.command}' needs alpha0 or a curve to start on")
    if cfg.command == "rotation" and cfg.n < 99:
        raise ConfigError("rotation needs n >= 99 steps", where("n"))


def format_config(cfg: ExperimentConfig) -> list[str]:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if f.name == "table":
            s = format_table(v)
        elif f.name == "curve":
            s = format_curve(v)
        elif f.name == "law":
            s = format_law(v)
        elif f.name in ("res", "samples"):
            s = f"{v[0]}x{v[1]}"
        elif f.name == "region":
            s = ",".join(fmt(float(x)) for pair in v for x in pair)
        else:
            s = fmt(v)
        lines.append(f"{f.name} = {s}")
    return lines


def load_config_text(text: str, source="config") -> ExperimentConfig:
    return build_config(read_config_lines(text.splitlines(), source))
