"""Strict JSON config parsing with path-annotated errors."""

from __future__ import annotations

import json
import math
from pathlib import Path

CONFIG_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def load_json(file: str | Path) -> dict:
    try:
        text = Path(file).read_text()
    except OSError as exc:
        raise ConfigError(str(file), f"cannot read ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{file}:{exc.lineno}:{exc.colno}", exc.msg) from exc
    if not isinstance(data, dict):
        raise ConfigError("$", "top level must be an object")
    return data


def check_keys(obj, path: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - required - set(optional))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}", "unknown field")
    missing = sorted(required - set(obj))
    if missing:
        raise ConfigError(f"{path}.{missing[0]}", "required field missing")
    return obj


def check_version(obj: dict, path: str = "$") -> None:
    if obj.get("version") != CONFIG_VERSION:
        raise ConfigError(f"{path}.version", f"must be {CONFIG_VERSION}, got {obj.get('version')!r}")


def number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    return float(value)


def integer(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return value


def vector(value, path: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a non-empty list of numbers")
    return [number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def matrix(value, path: str) -> list[list[float]]:
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a non-empty list of rows")
    rows = [vector(row, f"{path}[{i}]") for i, row in enumerate(value)]
    if len({len(r) for r in rows}) != 1:
        raise ConfigError(path, "rows have different lengths")
    return rows


def choice(value, path: str, options) -> str:
    if value not in options:
        raise ConfigError(path, f"expected one of {sorted(options)}, got {value!r}")
    return value
