"""Deterministic JSON writer.

Reals are printed with 17 significant digits, which round-trips every double,
so emit -> load -> emit is byte-identical. Values that are undefined (NaN,
infinite) become ``{"value": null, "reason": ...}`` instead of invalid JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Undefined:
    reason: str = "undefined"

    def as_dict(self) -> dict:
        return {"value": None, "reason": self.reason}


def num(x: float | None, reason: str = "undefined") -> float | Undefined:
    """A finite float, or an :class:`Undefined` carrying ``reason``."""
    if x is None:
        return Undefined(reason)
    x = float(x)
    if math.isnan(x):
        return Undefined(reason)
    if math.isinf(x):
        return Undefined("infinite")
    return x


def format_real(x: float) -> str:
    x = float(x)
    if x == 0 and math.copysign(1.0, x) < 0:
        return "-0.0"  # "-0" would reload as the integer 0
    return format(x, ".17g")


def _scalar(obj: Any) -> str | None:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = num(obj)
        if isinstance(v, Undefined):
            return None
        return format_real(v)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    return None


def _normalize(obj: Any) -> Any:
    if isinstance(obj, Undefined):
        return obj.as_dict()
    if isinstance(obj, (float, np.floating)):
        v = num(obj)
        return v.as_dict() if isinstance(v, Undefined) else v
    if isinstance(obj, np.ndarray):
        return [_normalize(v) for v in obj.tolist()]
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def _emit(obj: Any, level: int) -> str:
    obj = _normalize(obj)
    s = _scalar(obj)
    if s is not None:
        return s
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k, v in obj.items():
            if not isinstance(k, str):
                raise TypeError(f"JSON keys must be strings, got {k!r}")
            items.append(f"{pad}{json.dumps(k, ensure_ascii=False)}: {_emit(v, level + 1)}")
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        parts = [_emit(v, level + 1) for v in obj]
        if all(_scalar(_normalize(v)) is not None for v in obj):
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return _emit(obj, 0) + "\n"


def emit_json_document(obj: Any, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def load_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))
