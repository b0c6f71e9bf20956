"""Runtime stream values.

int -> Python ``int`` kept in the signed 32-bit range, float -> ``numpy.float32``,
bool -> ``bool``, list -> ``tuple``.  ``EOD`` and ``SILENT`` are singletons.
"""
from __future__ import annotations

import math

import numpy as np

from .types import BOOL, FLOAT, INT, ListOf, Type


class _Token:
    __slots__ = ("_name",)

    def __init__(self, name: str):
        self._name = name

    def __repr__(self) -> str:
        return self._name

    def __reduce__(self):
        return self._name


EOD = _Token("EOD")
SILENT = _Token("SILENT")

#: the one NaN encoding used at runtime (positive quiet NaN, 0x7fc00000)
CANONICAL_NAN = np.float32(np.nan)


def wrap32(v: int) -> int:
    return ((v + 0x80000000) & 0xFFFFFFFF) - 0x80000000


def default_value(ty: Type):
    if ty == INT:
        return 0
    if ty == FLOAT:
        return np.float32(0.0)
    if ty == BOOL:
        return False
    if isinstance(ty, ListOf):
        return tuple(default_value(ty.elem) for _ in range(ty.length))
    raise TypeError(ty)


def conforms(v, ty: Type) -> bool:
    """Does runtime value ``v`` have the shape of static type ``ty``?"""
    if v is EOD or v is SILENT:
        return True
    return _conforms(v, ty)


def _conforms(v, ty: Type) -> bool:
    if ty == INT:
        return type(v) is int and -0x80000000 <= v <= 0x7FFFFFFF
    if ty == FLOAT:
        return type(v) is np.float32
    if ty == BOOL:
        return type(v) is bool
    if isinstance(ty, ListOf):
        return (type(v) is tuple and len(v) == ty.length
                and all(_conforms(x, ty.elem) for x in v))
    return False


def coerce(v, ty: Type):
    """Convert a host value (int/float/bool/sequence) to a runtime value of ``ty``."""
    if v is EOD:
        return EOD
    if ty == INT:
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
            raise TypeError(f"expected int, got {v!r}")
        v = int(v)
        if not -0x80000000 <= v <= 0x7FFFFFFF:
            raise TypeError(f"{v} does not fit in int")
        return v
    if ty == FLOAT:
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, float, np.floating, np.integer)):
            raise TypeError(f"expected float, got {v!r}")
        f = np.float32(v)
        return CANONICAL_NAN if f != f else f
    if ty == BOOL:
        if not isinstance(v, (bool, np.bool_)):
            raise TypeError(f"expected bool, got {v!r}")
        return bool(v)
    if isinstance(ty, ListOf):
        items = tuple(v)
        if len(items) != ty.length:
            raise TypeError(f"expected {ty}, got {len(items)} elements")
        return tuple(coerce(x, ty.elem) for x in items)
    raise TypeError(ty)


def format_value(v) -> str:
    """Text form used by traces and the CLI.

    Floats use the shortest decimal that reads back to the same binary32.
    """
    if v is EOD:
        return "EOD"
    if v is SILENT:
        return "-"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (np.floating, float)):
        f = float(v)
        if math.isnan(f):
            return "NaN"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return np.format_float_positional(np.float32(v), unique=True, trim="0")
    if isinstance(v, tuple):
        return "[" + ",".join(format_value(x) for x in v) + "]"
    return str(v)


def parse_value(text: str, ty: Type):
    """Inverse of :func:`format_value` for scalar and list types."""
    text = text.strip()
    if text == "EOD":
        return EOD
    if ty == INT:
        return coerce(int(text), INT)
    if ty == FLOAT:
        low = text.lower()
        if low == "nan":
            return np.float32("nan")
        if low in ("inf", "+inf", "-inf"):
            return np.float32(low)
        return np.float32(text)
    if ty == BOOL:
        if text not in ("true", "false"):
            raise ValueError(f"not a bool: {text!r}")
        return text == "true"
    if isinstance(ty, ListOf):
        if not (text.startswith("[") and text.endswith("]")):
            raise ValueError(f"not a list: {text!r}")
        parts = _split_list(text[1:-1])
        return coerce([parse_value(p, ty.elem) for p in parts], ty)
    raise TypeError(ty)


def _split_list(body: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p for p in (s.strip() for s in parts) if p]


def same_bits(a, b) -> bool:
    """Bit-level equality: floats compared by their binary32 encoding."""
    if a is EOD or b is EOD or a is SILENT or b is SILENT:
        return a is b
    if isinstance(a, tuple) or isinstance(b, tuple):
        return (isinstance(a, tuple) and isinstance(b, tuple) and len(a) == len(b)
                and all(same_bits(x, y) for x, y in zip(a, b)))
    if isinstance(a, (np.floating, float)) or isinstance(b, (np.floating, float)):
        if not (isinstance(a, (np.floating, float)) and isinstance(b, (np.floating, float))):
            return False
        return np.float32(a).tobytes() == np.float32(b).tobytes()
    return type(a) is type(b) and a == b
