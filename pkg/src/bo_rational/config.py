"""Flat key-value run configuration.

One ``key = value`` per line; ``#`` starts a comment.  ``pole`` may repeat,
one line per pole, with four numbers ``Re p  Im p  Re c  Im c``.  List
values are whitespace separated numbers or ``start:stop:step`` ranges
(inclusive of ``stop`` when it lands on the grid).  See the README for the
full key table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .data import RationalData, validate_rational_data
from .errors import ConfigError
from .quadrature import QuadratureSpec

_LIST_KEYS = ("t", "x", "y", "lambda")
_SCALAR_FLOAT_KEYS = ("epsilon", "rel_tol", "abs_floor", "grading_ratio")
_SCALAR_INT_KEYS = ("max_subdivisions", "M")
_STRING_KEYS = ("mode", "name")
_MODES = ("grid", "profile")


def format_number(v: float) -> str:
    """17 significant digits; round-trips every double."""
    return format(float(v), ".17g")


def _parse_float(token: str, key: str) -> float:
    try:
        v = float(token)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {token!r} as a number") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: value {token!r} is not finite")
    return v


def _parse_list(text: str, key: str) -> list[float]:
    out: list[float] = []
    for token in text.split():
        if ":" in token:
            parts = token.split(":")
            if len(parts) != 3:
                raise ConfigError(f"{key}: range {token!r} must be start:stop:step")
            start, stop, step = (_parse_float(p, key) for p in parts)
            if not step > 0 or stop < start:
                raise ConfigError(f"{key}: range {token!r} needs step > 0 and stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            # integer multiples keep ranges free of accumulated rounding
            out.extend(float(v) for v in np.round(start + step * np.arange(count), 12))
        else:
            out.append(_parse_float(token, key))
    return out


@dataclass
class RunConfig:
    poles: list[complex] = field(default_factory=list)
    coeffs: list[complex] = field(default_factory=list)
    epsilon: float = 1.0
    mode: str = "grid"
    t: list[float] = field(default_factory=list)
    x: list[float] = field(default_factory=list)
    y: list[float] = field(default_factory=list)
    lam: list[float] = field(default_factory=list)
    M: Optional[int] = None
    name: str = "run"
    rel_tol: Optional[float] = None
    abs_floor: Optional[float] = None
    grading_ratio: Optional[float] = None
    max_subdivisions: Optional[int] = None

    def data(self) -> RationalData:
        if not self.poles:
            raise ConfigError("missing field: pole")
        try:
            return validate_rational_data(self.poles, self.coeffs, self.epsilon)
        except ValueError as exc:
            raise ConfigError(f"invalid data: {exc}") from exc

    def quadrature(self) -> QuadratureSpec:
        kw = {}
        for name in ("rel_tol", "abs_floor", "grading_ratio", "max_subdivisions"):
            v = getattr(self, name)
            if v is not None:
                kw[name] = v
        try:
            return QuadratureSpec(**kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def require(self, *names: str) -> None:
        """Raise ConfigError naming the first empty list among ``names``."""
        for n in names:
            if not getattr(self, "lam" if n == "lambda" else n):
                raise ConfigError(f"missing field: {n} (the grid is empty)")


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key != "pole" and key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        if key == "pole":
            nums = [_parse_float(v, "pole") for v in value.split()]
            if len(nums) != 4:
                raise ConfigError(f"line {lineno}: pole needs 4 numbers (Re p, Im p, Re c, Im c)")
            cfg.poles.append(complex(nums[0], nums[1]))
            cfg.coeffs.append(complex(nums[2], nums[3]))
        elif key in _LIST_KEYS:
            setattr(cfg, "lam" if key == "lambda" else key, _parse_list(value, key))
        elif key in _SCALAR_FLOAT_KEYS:
            setattr(cfg, key, _parse_float(value, key))
        elif key in _SCALAR_INT_KEYS:
            v = _parse_float(value, key)
            if v != int(v):
                raise ConfigError(f"{key} must be an integer")
            setattr(cfg, key, int(v))
        elif key in _STRING_KEYS:
            setattr(cfg, key, value)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if cfg.mode not in _MODES:
        raise ConfigError(f"mode must be one of {_MODES}, got {cfg.mode!r}")
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Inverse of :func:`parse_config`; lists are written out element by element."""
    lines = [f"name = {cfg.name}", f"mode = {cfg.mode}", f"epsilon = {format_number(cfg.epsilon)}"]
    for p, c in zip(cfg.poles, cfg.coeffs):
        lines.append("pole = " + " ".join(format_number(v) for v in (p.real, p.imag, c.real, c.imag)))
    for key, attr in (("t", "t"), ("x", "x"), ("y", "y"), ("lambda", "lam")):
        values = getattr(cfg, attr)
        if values:
            lines.append(f"{key} = " + " ".join(format_number(v) for v in values))
    if cfg.M is not None:
        lines.append(f"M = {cfg.M}")
    for f in fields(cfg):
        if f.name in _SCALAR_FLOAT_KEYS and f.name != "epsilon" and getattr(cfg, f.name) is not None:
            lines.append(f"{f.name} = {format_number(getattr(cfg, f.name))}")
    if cfg.max_subdivisions is not None:
        lines.append(f"max_subdivisions = {cfg.max_subdivisions}")
    return "\n".join(lines) + "\n"


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
