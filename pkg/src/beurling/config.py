"""Run configuration: a JSON document validated into a :class:`RunConfig`.

Every key is checked; unknown keys are errors so that typos never fall
back silently to defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .arithmetic import PRESETS, PrimePowerFunction
from .errors import ConfigError
from .system import DEFAULT_CAP, KINDS, SystemSpec

DEFAULT_POINTS = 16


@dataclass(frozen=True)
class Grid:
    points: int = DEFAULT_POINTS
    scale: str = "log"
    min: float | None = None

    def values(self, x_max):
        lo = self.min if self.min is not None else max(2.0, x_max / 1000)
        if lo >= x_max:
            raise ConfigError(f"grid.min={lo:g} must be below x_max={x_max:g}")
        if self.scale == "log":
            xs = np.geomspace(lo, x_max, self.points)
        else:
            xs = np.linspace(lo, x_max, self.points)
        xs[-1] = x_max
        return [float(v) for v in xs]


@dataclass(frozen=True)
class Caps:
    max_entries: int = DEFAULT_CAP
    max_memory_estimate: float | None = None


@dataclass(frozen=True)
class Contour:
    x: float = 100.0
    T: float = 200.0
    step: float = 0.01


@dataclass(frozen=True)
class RunConfig:
    system: SystemSpec
    function: dict
    x_max: float
    grid: Grid = field(default_factory=Grid)
    alpha: float | list = 0.0
    sigma_list: list = field(default_factory=lambda: [1.1, 1.01, 1.001])
    t_list: list = field(default_factory=lambda: [0.0])
    a: float | None = None
    c: complex = 1 + 0j
    mode: str | None = None
    contour: Contour = field(default_factory=Contour)
    nu_max: int = 8
    prime_index: int = 1
    output_path: str | None = None
    cache_dir: str | None = None
    caps: Caps = field(default_factory=Caps)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def make_function(self):
        return build_function(self.function)


TOP_KEYS = {
    "system", "function", "x_max", "grid", "alpha", "sigma_list", "t_list", "a", "c",
    "mode", "contour", "nu_max", "prime_index", "output_path", "cache_dir", "caps",
}  # fmt: skip


def _reject_unknown(obj, allowed, where):
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {extra}; allowed {sorted(allowed)}")


def _need_dict(v, where):
    if not isinstance(v, dict):
        raise ConfigError(f"{where}: expected an object, got {type(v).__name__}")
    return v


def _num(v, where, positive=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{where}: must be finite")
    if integer and int(v) != v:
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{where}: must be positive, got {v!r}")
    return int(v) if integer else float(v)


def _complex(v, where):
    if isinstance(v, list):
        if len(v) != 2:
            raise ConfigError(f"{where}: complex values are [re, im]")
        return complex(_num(v[0], where + "[0]"), _num(v[1], where + "[1]"))
    return complex(_num(v, where))


def _parse_system(obj):
    obj = _need_dict(obj, "system")
    _reject_unknown(obj, {"kind", "limit", "primes"}, "system")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"system.kind: expected one of {KINDS}, got {kind!r}")
    limit = obj.get("limit")
    if limit is not None:
        limit = _num(limit, "system.limit", positive=True)
    primes = obj.get("primes")
    if kind == "explicit":
        if not isinstance(primes, list):
            raise ConfigError("system.primes: explicit systems need a list of primes")
        primes = tuple(_num(p, f"system.primes[{i}]") for i, p in enumerate(primes))
        for i, p in enumerate(primes):
            if p <= 1:
                raise ConfigError(f"system.primes[{i}]: every prime must be > 1, got {p!r}")
        for i in range(1, len(primes)):
            if primes[i] < primes[i - 1]:
                raise ConfigError(
                    f"system.primes[{i}]: list must be non-decreasing ({primes[i - 1]!r} then {primes[i]!r})"
                )
    elif primes is not None:
        raise ConfigError(f"system.primes: only explicit systems take a prime list, not {kind!r}")
    elif limit is not None and limit <= 2:
        raise ConfigError("system.limit: must be > 2")
    return SystemSpec(kind, limit, primes)


def _parse_function(obj):
    obj = _need_dict(obj, "function")
    kind = obj.get("kind")
    if kind == "preset":
        _reject_unknown(obj, {"kind", "name", "alpha", "c"}, "function")
        name = obj.get("name")
        if name not in PRESETS:
            raise ConfigError(f"function.name: expected one of {PRESETS}, got {name!r}")
        out = {"kind": "preset", "name": name}
        if name == "twist":
            if "alpha" not in obj:
                raise ConfigError("function.alpha: the twist preset needs alpha")
            out["alpha"] = _num(obj["alpha"], "function.alpha")
        elif "alpha" in obj:
            raise ConfigError(f"function.alpha: only the twist preset takes alpha, not {name!r}")
        if name == "gconst":
            if "c" not in obj:
                raise ConfigError("function.c: the gconst preset needs c")
            out["c"] = _complex(obj["c"], "function.c")
        elif "c" in obj:
            raise ConfigError(f"function.c: only the gconst preset takes c, not {name!r}")
        return out
    if kind == "completely_multiplicative":
        _reject_unknown(obj, {"kind", "prime_values"}, "function")
        pv = obj.get("prime_values")
        if not isinstance(pv, list) or not pv:
            raise ConfigError("function.prime_values: expected a non-empty list")
        return {"kind": kind, "prime_values": [_complex(v, f"function.prime_values[{i}]") for i, v in enumerate(pv)]}
    if kind == "table":
        _reject_unknown(obj, {"kind", "side", "values"}, "function")
        side = obj.get("side", "f")
        if side not in ("f", "g"):
            raise ConfigError(f"function.side: expected 'f' or 'g', got {side!r}")
        vals = _need_dict(obj.get("values"), "function.values")
        table = {}
        for key, v in vals.items():
            where = f"function.values[{key!r}]"
            try:
                k, nu = (int(part) for part in key.split(","))
            except ValueError:
                raise ConfigError(f"{where}: keys are 'k,nu' with 1-based k") from None
            if k < 1 or nu < 1:
                raise ConfigError(f"{where}: k and nu must be >= 1")
            table[(k - 1, nu)] = _complex(v, where)
        return {"kind": kind, "side": side, "values": table}
    raise ConfigError(f"function.kind: expected preset, completely_multiplicative or table, got {kind!r}")


def build_function(spec):
    kind = spec["kind"]
    if kind == "preset":
        params = {k: spec[k] for k in ("alpha", "c") if k in spec}
        return PrimePowerFunction.preset(spec["name"], **params)
    if kind == "completely_multiplicative":
        return PrimePowerFunction.completely_multiplicative(spec["prime_values"])
    return PrimePowerFunction.from_table(spec["values"], spec["side"])


def _parse_grid(obj):
    obj = _need_dict(obj, "grid")
    _reject_unknown(obj, {"points", "scale", "min"}, "grid")
    points = _num(obj.get("points", DEFAULT_POINTS), "grid.points", integer=True)
    if points < 2:
        raise ConfigError("grid.points: must be >= 2")
    scale = obj.get("scale", "log")
    if scale not in ("log", "linear"):
        raise ConfigError(f"grid.scale: expected 'log' or 'linear', got {scale!r}")
    lo = obj.get("min")
    if lo is not None:
        lo = _num(lo, "grid.min")
        if lo < 1:
            raise ConfigError("grid.min: must be >= 1")
    return Grid(points, scale, lo)


def _parse_alpha(v):
    if isinstance(v, list):
        if not v:
            raise ConfigError("alpha: grid must be non-empty")
        return [_num(a, f"alpha[{i}]") for i, a in enumerate(v)]
    if isinstance(v, dict):
        _reject_unknown(v, {"start", "stop", "step"}, "alpha")
        try:
            start, stop, step = (_num(v[k], f"alpha.{k}") for k in ("start", "stop", "step"))
        except KeyError as e:
            raise ConfigError(f"alpha.{e.args[0]}: missing") from None
        if step <= 0 or stop < start:
            raise ConfigError("alpha: need step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]
    return _num(v, "alpha")


def _num_list(v, where, above_one=False):
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{where}: expected a non-empty list of numbers")
    out = [_num(x, f"{where}[{i}]") for i, x in enumerate(v)]
    if above_one and any(x <= 1 for x in out):
        raise ConfigError(f"{where}: every sigma must be > 1")
    return out


def parse_config(text):
    """Parse and validate a JSON run configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    raw = _need_dict(raw, "config")
    _reject_unknown(raw, TOP_KEYS, "config")
    if "system" not in raw:
        raise ConfigError("system: missing")
    system = _parse_system(raw["system"])
    function = _parse_function(raw.get("function", {"kind": "preset", "name": "unity"}))
    if "x_max" in raw:
        x_max = _num(raw["x_max"], "x_max")
    elif system.limit is not None:
        x_max = system.limit
    else:
        raise ConfigError("x_max: missing (and no system.limit to default to)")
    if x_max < 2:
        raise ConfigError(f"x_max: must be >= 2, got {x_max!r}")
    kw = {}
    if "grid" in raw:
        kw["grid"] = _parse_grid(raw["grid"])
    if "alpha" in raw:
        kw["alpha"] = _parse_alpha(raw["alpha"])
    if "sigma_list" in raw:
        kw["sigma_list"] = _num_list(raw["sigma_list"], "sigma_list", above_one=True)
    if "t_list" in raw:
        kw["t_list"] = _num_list(raw["t_list"], "t_list")
    if "a" in raw:
        kw["a"] = _num(raw["a"], "a", positive=True)
    if "c" in raw:
        kw["c"] = _complex(raw["c"], "c")
    if "mode" in raw:
        if raw["mode"] not in ("exp_integral", "euler_product", "zero"):
            raise ConfigError(f"mode: expected exp_integral, euler_product or zero, got {raw['mode']!r}")
        kw["mode"] = raw["mode"]
    if "contour" in raw:
        obj = _need_dict(raw["contour"], "contour")
        _reject_unknown(obj, {"x", "T", "step"}, "contour")
        d = Contour()
        kw["contour"] = Contour(
            _num(obj.get("x", d.x), "contour.x", positive=True),
            _num(obj.get("T", d.T), "contour.T", positive=True),
            _num(obj.get("step", d.step), "contour.step", positive=True),
        )
    if "nu_max" in raw:
        kw["nu_max"] = _num(raw["nu_max"], "nu_max", positive=True, integer=True)
    if "prime_index" in raw:
        kw["prime_index"] = _num(raw["prime_index"], "prime_index", positive=True, integer=True)
    for key in ("output_path", "cache_dir"):
        if key in raw and raw[key] is not None:
            if not isinstance(raw[key], str):
                raise ConfigError(f"{key}: expected a string")
            kw[key] = raw[key]
    if "caps" in raw:
        obj = _need_dict(raw["caps"], "caps")
        _reject_unknown(obj, {"max_entries", "max_memory_estimate"}, "caps")
        mem = obj.get("max_memory_estimate")
        kw["caps"] = Caps(
            _num(obj.get("max_entries", DEFAULT_CAP), "caps.max_entries", positive=True, integer=True),
            None if mem is None else _num(mem, "caps.max_memory_estimate", positive=True),
        )
    return RunConfig(system, function, x_max, **kw)
