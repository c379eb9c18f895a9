"""Run configuration: INI-style ``key = value`` files with fixed sections.

Every section and key is declared in :data:`SCHEMA`; anything else is a
:class:`ConfigError`.  Parsing is done by :mod:`configparser`, and the
canonical text form produced by :meth:`RunConfig.to_string` round-trips
exactly.
"""
from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

__all__ = ["ConfigError", "RunConfig", "SCHEMA", "OUTPUT_ENV"]

OUTPUT_ENV = "DDLAB_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid configuration (unknown key, bad value, inconsistent choice)."""


def _floats(text: str) -> Tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(p) for p in text.replace(",", " ").split())


def _fmt_floats(v: Tuple[float, ...]) -> str:
    return ", ".join(format(x, ".17g") for x in v)


_PARSE = {"int": int, "float": float, "str": str, "floats": _floats}
_FORMAT = {"int": str, "float": lambda x: format(x, ".17g"), "str": str, "floats": _fmt_floats}

# section -> key -> (type, default)
SCHEMA: Dict[str, Dict[str, Tuple[str, Any]]] = {
    "grid": {"n": ("int", 4096), "L": ("float", 200.0)},
    "model": {
        "kind": ("str", "bbm"),
        "m": ("float", 3.0),
        "q": ("float", 4.0),
        "variant": ("str", "abs_power"),
        "dispersion_sign": ("int", 1),
    },
    "data": {
        "family": ("str", "shifted-gaussian"),
        "center": ("float", 0.5),
        "width": ("float", 0.5),
        "skew": ("float", 2.0),
        "mass": ("float", 1.0),
        "smallness": ("float", 0.0),
        "path": ("str", ""),
    },
    "time": {
        "T": ("float", 8.0),
        "dt": ("float", 0.01),
        "times": ("floats", (1.0, 2.0, 4.0, 8.0)),
    },
    "task": {
        "name": ("str", "solve-linear"),
        "theorem": ("str", "heat"),
        "N": ("int", 0),
        "p": ("float", 2.0),
        "j": ("int", 0),
        "case": ("str", "supercritical"),
        "method": ("str", "both"),
        "a": ("float", 2.0),
        "b": ("float", 3.0),
        "input": ("str", ""),
        "x_column": ("str", "t"),
        "y_column": ("str", ""),
        "window": ("floats", ()),
        "criteria": ("str", "all"),
        "seed": ("int", 12345),
    },
    "output": {"dir": ("str", "ddlab_out"), "fields": ("int", 0)},
}

TASKS = ("kernel", "solve-linear", "solve-nonlinear", "expand", "second-term", "fit",
         "check-ineq", "verify-all")
KINDS = ("heat", "bbm", "kdv")
FAMILIES = ("gaussian", "shifted-gaussian", "skew", "kernel-K", "file")
THEOREMS = ("heat", "bbm-int", "bbm-frac", "kdv", "bbm-prelim")
METHODS = ("picard", "direct", "both")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration values, ``values[section][key]``."""

    values: Mapping[str, Mapping[str, Any]]

    def __getitem__(self, section: str) -> Mapping[str, Any]:
        return self.values[section]

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    @classmethod
    def defaults(cls) -> "RunConfig":
        return cls({s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()})

    @classmethod
    def from_string(cls, text: str, overrides: Iterable[str] = ()) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str  # keep key case (``L``, ``N``, ``T``)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        raw: Dict[str, Dict[str, str]] = {s: dict(parser[s]) for s in parser.sections()}
        for item in overrides:
            if "=" not in item or "." not in item.split("=", 1)[0]:
                raise ConfigError(f"override must look like section.key=value, got {item!r}")
            lhs, val = item.split("=", 1)
            sec, key = lhs.strip().split(".", 1)
            raw.setdefault(sec, {})[key.strip()] = val.strip()
        return cls.from_raw(raw)

    @classmethod
    def from_file(cls, path: str, overrides: Iterable[str] = ()) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
        return cls.from_string(text, overrides)

    @classmethod
    def from_raw(cls, raw: Mapping[str, Mapping[str, str]]) -> "RunConfig":
        values = {s: dict(v) for s, v in cls.defaults().values.items()}
        for sec, keys in raw.items():
            if sec not in SCHEMA:
                raise ConfigError(f"unknown section [{sec}]")
            for key, text in keys.items():
                if key not in SCHEMA[sec]:
                    raise ConfigError(f"unknown key {key!r} in section [{sec}]")
                typ = SCHEMA[sec][key][0]
                try:
                    values[sec][key] = _PARSE[typ](text)
                except ValueError:
                    raise ConfigError(f"bad value for {sec}.{key}: {text!r} (expected {typ})") from None
        cfg = cls(values)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        v = self.values
        n = v["grid"]["n"]
        if n < 16 or n & (n - 1):
            raise ConfigError(f"grid.n must be a power of two >= 16, got {n}")
        if not v["grid"]["L"] > 0:
            raise ConfigError("grid.L must be positive")
        _choice("model.kind", v["model"]["kind"], KINDS)
        _choice("model.variant", v["model"]["variant"], ("abs_power", "signed_power"))
        if v["model"]["dispersion_sign"] not in (1, -1):
            raise ConfigError("model.dispersion_sign must be 1 or -1")
        if not v["model"]["m"] >= 1:
            raise ConfigError("model.m must be >= 1")
        _choice("data.family", v["data"]["family"], FAMILIES)
        if not v["data"]["width"] > 0:
            raise ConfigError("data.width must be positive")
        if v["data"]["smallness"] < 0:
            raise ConfigError("data.smallness must be non-negative")
        if v["data"]["family"] == "file" and not v["data"]["path"]:
            raise ConfigError("data.family = file needs data.path")
        if not (v["time"]["T"] > 0 and v["time"]["dt"] > 0):
            raise ConfigError("time.T and time.dt must be positive")
        if any(t < 0 for t in v["time"]["times"]):
            raise ConfigError("time.times must be non-negative")
        _choice("task.name", v["task"]["name"], TASKS)
        _choice("task.theorem", v["task"]["theorem"], THEOREMS)
        _choice("task.method", v["task"]["method"], METHODS)
        _choice("task.case", v["task"]["case"], ("subcritical", "critical", "supercritical"))
        if not (v["task"]["p"] >= 1):
            raise ConfigError("task.p must be >= 1 (use inf for the max norm)")
        if not 0 <= v["task"]["N"] <= 20:
            raise ConfigError("task.N must lie in 0..20")
        if v["task"]["window"] and len(v["task"]["window"]) != 2:
            raise ConfigError("task.window needs two values")

    def with_values(self, **sections: Mapping[str, Any]) -> "RunConfig":
        values = {s: dict(v) for s, v in self.values.items()}
        for sec, upd in sections.items():
            for k in upd:
                if k not in SCHEMA.get(sec, {}):
                    raise ConfigError(f"unknown key {k!r} in section [{sec}]")
            values[sec].update(upd)
        cfg = RunConfig(values)
        cfg.validate()
        return cfg

    def to_string(self) -> str:
        lines = []
        for sec, keys in SCHEMA.items():
            lines.append(f"[{sec}]")
            for key, (typ, _) in keys.items():
                lines.append(f"{key} = {_FORMAT[typ](self.values[sec][key])}")
            lines.append("")
        return "\n".join(lines)

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.to_string().encode()).hexdigest()

    def output_dir(self, env: Optional[Mapping[str, str]] = None) -> str:
        env = os.environ if env is None else env
        return env.get(OUTPUT_ENV) or self.values["output"]["dir"]


def _choice(name: str, value: str, allowed) -> None:
    if value not in allowed:
        raise ConfigError(f"{name} must be one of {list(allowed)}, got {value!r}")
