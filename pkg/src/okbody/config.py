"""Experiment descriptors (TOML or JSON) and their validation."""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import tomli

from .exact_geometry import q
from .variety_model import (
    DivisorClass,
    Flag,
    ModelError,
    VarietyModel,
    hirzebruch,
    p1xp1,
    projective_space,
    toric,
)

DEFAULT_GRID_STEPS = 4


class ConfigError(ValueError):
    """A malformed descriptor; the message carries ``path:line``."""


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(rf'^\s*"?{re.escape(key)}"?\s*[=:]', re.M)
    m = pat.search(text)
    if m is None:
        pat = re.compile(rf'^\s*\[+\s*{re.escape(key)}\s*\]+', re.M)
        m = pat.search(text)
    if m is None:
        return None
    return text.count("\n", 0, m.start()) + 1


def parse_rational(value: Any) -> Fraction:
    if isinstance(value, float):
        raise ValueError(f"floating-point value {value!r}; write rationals as \"p/q\" strings")
    return q(value)


def parse_rational_tuple(text: str) -> tuple:
    """``"1/2,1/3"`` -> ``(1/2, 1/3)``; an empty string gives the empty tuple."""
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_rational(part) for part in text.split(","))


def parse_grid(text: str) -> list:
    """``"1/2,1/2;1/4,1/4"`` -> list of tuples."""
    return [parse_rational_tuple(part) for part in text.split(";") if part.strip()]


def default_grid(r: int) -> list:
    return [tuple(Fraction(1, 2 ** k) for _ in range(r)) for k in range(1, DEFAULT_GRID_STEPS + 1)]


@dataclass
class ExperimentConfig:
    source: str
    text: str
    raw: dict
    model: VarietyModel
    divisor: DivisorClass | None
    flag_spec: dict
    truncation: int
    seed: int
    a: tuple | None = None
    a_grid: list | None = None
    out: str | None = None
    series_spec: dict = field(default_factory=dict)
    pairs: list = field(default_factory=list)
    generic_flags: int = 8

    def error(self, key: str, message: str) -> ConfigError:
        line = _line_of(self.text, key)
        where = f"{self.source}:{line}" if line else self.source
        return ConfigError(f"{where}: {message}")

    def flag(self) -> Flag:
        spec = self.flag_spec or {"kind": "torus"}
        kind = spec.get("kind", "torus")
        try:
            if kind == "torus":
                order = spec.get("order")
                if order is None:
                    order = list(self.model.cones[0])
                return Flag.torus(self.model, order)
            if kind == "generic":
                seed = int(spec.get("seed", self.seed))
                return Flag.generic(self.model, seed, spec.get("chart"))
        except ModelError as exc:
            raise self.error("flag", str(exc)) from None
        raise self.error("kind", f"unknown flag kind {kind!r}")

    def grid(self, r: int) -> list:
        grid = self.a_grid if self.a_grid else default_grid(r)
        for a in grid:
            if len(a) != r:
                raise self.error("a_grid", f"a-grid entry {[str(c) for c in a]} has length {len(a)}, expected {r}")
        return grid

    def echo(self) -> dict:
        return {
            "source": os.path.basename(self.source),
            "variety": self.model.describe(),
            "divisor": None if self.divisor is None else self.divisor.to_json(),
            "flag": self.flag_spec,
            "truncation": self.truncation,
            "seed": self.seed,
        }


def _model_from(spec: dict, cfg_err) -> VarietyModel:
    kind = spec.get("kind")
    try:
        if kind == "projective_space":
            return projective_space(int(spec.get("dim", 2)))
        if kind == "p1xp1":
            return p1xp1()
        if kind == "hirzebruch":
            return hirzebruch(int(spec["e"]))
        if kind == "toric":
            return toric(spec["rays"], spec["cones"], spec.get("name", ""))
    except KeyError as exc:
        raise cfg_err(str(exc.args[0]), f"variety is missing field {exc.args[0]!r}") from None
    except ModelError as exc:
        raise cfg_err("variety", str(exc)) from None
    raise cfg_err("kind", f"unknown variety kind {kind!r}")


def divisor_from(model: VarietyModel, spec: dict, cfg_err) -> DivisorClass:
    try:
        if "coefficients" in spec:
            return DivisorClass(model, [parse_rational(c) for c in spec["coefficients"]])
        if "degree" in spec:
            return model.O(parse_rational(spec["degree"]))
        if "bidegree" in spec:
            a, b = spec["bidegree"]
            return model.O(parse_rational(a), parse_rational(b))
        if "c0" in spec or "f" in spec:
            if model.kind != "hirzebruch":
                raise cfg_err("c0", "c0/f notation needs a Hirzebruch surface")
            c0 = parse_rational(spec.get("c0", 0))
            f = parse_rational(spec.get("f", 0))
            return model.prime(1) * c0 + model.prime(0) * f
    except (ModelError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        key = next((k for k in ("coefficients", "degree", "bidegree", "c0", "f") if k in spec), "divisor")
        raise cfg_err(key, f"bad divisor: {exc}") from None
    raise cfg_err("divisor", "divisor needs coefficients, degree, bidegree or c0/f")


def load_config(path: str | os.PathLike, seed: int | None = None, truncation: int | None = None) -> ExperimentConfig:
    """Read and validate a descriptor; ``seed`` falls back to ``NOK_SEED``."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such descriptor")
    text = path.read_text()
    src = str(path)
    try:
        if path.suffix == ".json":
            raw = json.loads(text)
        else:
            raw = tomli.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{src}:{exc.lineno}: {exc.msg}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{src}: {exc}") from None

    def cfg_err(key: str, message: str) -> ConfigError:
        line = _line_of(text, key)
        return ConfigError(f"{src}:{line}: {message}" if line else f"{src}: {message}")

    if "variety" not in raw:
        raise cfg_err("variety", "missing [variety] table")
    model = _model_from(raw["variety"], cfg_err)
    divisor = divisor_from(model, raw["divisor"], cfg_err) if "divisor" in raw else None
    exp = raw.get("experiment", {})
    if seed is None:
        env = os.environ.get("NOK_SEED")
        seed = int(env) if env not in (None, "") else int(exp.get("seed", 0))
    default_M = 8 if model.d == 3 else 12
    M = int(truncation if truncation is not None else exp.get("truncation", default_M))
    if M < 2:
        raise cfg_err("truncation", f"truncation must be at least 2, got {M}")
    try:
        a = tuple(parse_rational(c) for c in exp["a"]) if "a" in exp else None
        grid = [tuple(parse_rational(c) for c in row) for row in exp["a_grid"]] if "a_grid" in exp else None
    except (ValueError, TypeError) as exc:
        raise cfg_err("a", f"bad rational: {exc}") from None
    pairs = []
    for i, pair in enumerate(raw.get("pairs", [])):
        if "d1" not in pair or "d2" not in pair:
            raise cfg_err("pairs", f"pair {i} needs d1 and d2")
        pairs.append((divisor_from(model, pair["d1"], cfg_err), divisor_from(model, pair["d2"], cfg_err), pair.get("label", f"pair{i}")))
    cfg = ExperimentConfig(
        source=src,
        text=text,
        raw=raw,
        model=model,
        divisor=divisor,
        flag_spec=dict(raw.get("flag", {})),
        truncation=M,
        seed=int(seed),
        a=a,
        a_grid=grid,
        out=exp.get("out"),
        series_spec=dict(raw.get("series", {})),
        pairs=pairs,
        generic_flags=int(exp.get("generic_flags", 8)),
    )
    if cfg.flag_spec.get("kind") == "generic" and "seed" not in cfg.flag_spec:
        cfg.flag_spec["seed"] = cfg.seed
    return cfg
